#include "proxlr/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxlr/errors.hpp"

namespace proxlr {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'X', 'L', 'R'};
constexpr std::uint8_t kHasY = 1;
constexpr std::uint8_t kHasTruth = 2;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("fixture: unexpected end of data");
  return to_little(v);
}

void put_row_major(std::ostream& os, const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) put<double>(os, a(i, j));
}

Matrix get_row_major(std::istream& is, std::size_t rows, std::size_t cols) {
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = get<double>(is);
  return a;
}

// Guards the allocation before reading a header that claims a huge payload.
void check_dims(std::uint64_t n1, std::uint64_t n2, std::uint64_t m) {
  constexpr std::uint64_t kCap = std::uint64_t{1} << 31;
  if (n1 == 0 || n2 == 0 || m == 0) throw FormatError("fixture: zero dimension in header");
  if (n1 > kCap || n2 > kCap || m > kCap || n1 * n2 > kCap || (n1 * n2) > kCap / m) {
    throw FormatError("fixture: header dimensions are implausibly large");
  }
}

// Rebuilds inlier indices and outlier values from what the formats store.
GroundTruth assemble_truth(Matrix x_star, int rank, std::vector<std::size_t> out_idx,
                           std::vector<double> out_val, Vector noise, std::size_t m) {
  if (out_idx.size() != out_val.size()) throw FormatError("fixture: outlier index/value length mismatch");
  std::vector<std::size_t> order(out_idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out_idx[a] < out_idx[b]; });
  GroundTruth t;
  t.x_star = std::move(x_star);
  t.rank = rank;
  for (std::size_t k : order) {
    t.outlier_idx.push_back(out_idx[k]);
    t.outliers.push_back(out_val[k]);
  }
  std::vector<char> is_out(m, 0);
  for (std::size_t i : t.outlier_idx) {
    if (i >= m) throw FormatError("fixture: outlier index out of range");
    is_out[i] = 1;
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!is_out[i]) t.inlier_idx.push_back(i);
  t.noise = std::move(noise);
  try {
    t.validate(m);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("fixture: inconsistent ground truth: ") + e.what());
  }
  return t;
}

void check_fixture(const Fixture& fx) {
  if (!fx.op) throw ParameterError("fixture: operator is null");
  if (fx.y && static_cast<std::size_t>(fx.y->size()) != fx.op->m()) throw DimensionError("fixture: y length != m");
  if (fx.truth) {
    fx.truth->validate(fx.op->m());
    if (static_cast<std::size_t>(fx.truth->x_star.rows()) != fx.op->n1() ||
        static_cast<std::size_t>(fx.truth->x_star.cols()) != fx.op->n2()) {
      throw DimensionError("fixture: truth shape does not match operator");
    }
  }
}

nlohmann::json matrix_json(const Matrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) row[static_cast<std::size_t>(j)] = a(i, j);
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) throw FormatError("fixture: matrix has wrong number of rows");
  Matrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols) throw FormatError("fixture: matrix row has wrong length");
    for (std::size_t c = 0; c < cols; ++c) a(i, c) = row[c].get<double>();
  }
  return a;
}

Vector vector_from_json(const nlohmann::json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw FormatError("fixture: vector has wrong length");
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

Observation Fixture::observation() const {
  if (!y) throw PreconditionError("fixture has no observations");
  return Observation(op, *y);
}

void write_fixture_binary(std::ostream& os, const Fixture& fx) {
  check_fixture(fx);
  const SensingOperator& op = *fx.op;
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kFixtureVersion);
  put<std::uint64_t>(os, op.n1());
  put<std::uint64_t>(os, op.n2());
  put<std::uint64_t>(os, op.m());
  put<std::uint8_t>(os, static_cast<std::uint8_t>((fx.y ? kHasY : 0) | (fx.truth ? kHasTruth : 0)));
  for (std::size_t i = 0; i < op.m(); ++i) put_row_major(os, op.matrix(i));
  if (fx.y)
    for (double v : *fx.y) put<double>(os, v);
  if (fx.truth) {
    const GroundTruth& t = *fx.truth;
    put_row_major(os, t.x_star);
    put<std::int64_t>(os, t.rank);
    put<std::uint64_t>(os, t.outlier_idx.size());
    for (std::size_t i : t.outlier_idx) put<std::uint64_t>(os, i);
    for (double v : t.outliers) put<double>(os, v);
    for (double v : t.noise) put<double>(os, v);
  }
  if (!os) throw FormatError("fixture: write failed");
}

Fixture read_fixture_binary(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("fixture: bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kFixtureVersion) throw FormatError("fixture: unsupported version " + std::to_string(version));
  const auto n1 = get<std::uint64_t>(is);
  const auto n2 = get<std::uint64_t>(is);
  const auto m = get<std::uint64_t>(is);
  check_dims(n1, n2, m);
  const auto flags = get<std::uint8_t>(is);
  if (flags & ~(kHasY | kHasTruth)) throw FormatError("fixture: unknown flags");

  std::vector<Matrix> mats;
  mats.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) mats.push_back(get_row_major(is, n1, n2));
  Fixture fx;
  fx.op = std::make_shared<const SensingOperator>(mats);
  if (flags & kHasY) {
    Vector y(static_cast<Eigen::Index>(m));
    for (auto& v : y) v = get<double>(is);
    fx.y = std::move(y);
  }
  if (flags & kHasTruth) {
    Matrix x_star = get_row_major(is, n1, n2);
    const auto rank = get<std::int64_t>(is);
    const auto k = get<std::uint64_t>(is);
    if (k > m) throw FormatError("fixture: more outliers than observations");
    std::vector<std::size_t> idx(k);
    for (auto& i : idx) i = get<std::uint64_t>(is);
    std::vector<double> val(k);
    for (auto& v : val) v = get<double>(is);
    Vector noise(static_cast<Eigen::Index>(m));
    for (auto& v : noise) v = get<double>(is);
    fx.truth = assemble_truth(std::move(x_star), static_cast<int>(rank), std::move(idx), std::move(val),
                              std::move(noise), m);
  }
  return fx;
}

void write_fixture_json(std::ostream& os, const Fixture& fx) {
  check_fixture(fx);
  using nlohmann::json;
  const SensingOperator& op = *fx.op;
  json doc;
  doc["format"] = "proxlr-fixture";
  doc["version"] = kFixtureVersion;
  doc["n1"] = op.n1();
  doc["n2"] = op.n2();
  doc["m"] = op.m();
  json sensing = json::array();
  for (std::size_t i = 0; i < op.m(); ++i) sensing.push_back(matrix_json(op.matrix(i)));
  doc["sensing"] = std::move(sensing);
  if (fx.y) doc["y"] = std::vector<double>(fx.y->begin(), fx.y->end());
  if (fx.truth) {
    const GroundTruth& t = *fx.truth;
    doc["truth"] = {{"x_star", matrix_json(t.x_star)},
                    {"rank", t.rank},
                    {"outlier_idx", t.outlier_idx},
                    {"outliers", t.outliers},
                    {"noise", std::vector<double>(t.noise.begin(), t.noise.end())}};
  }
  os << doc.dump() << '\n';
  if (!os) throw FormatError("fixture: write failed");
}

Fixture read_fixture_json(std::istream& is) {
  using nlohmann::json;
  json doc;
  try {
    is >> doc;
    if (doc.value("format", "") != "proxlr-fixture") throw FormatError("fixture: not a proxlr fixture");
    if (doc.at("version").get<std::uint32_t>() != kFixtureVersion) throw FormatError("fixture: unsupported version");
    const auto n1 = doc.at("n1").get<std::uint64_t>();
    const auto n2 = doc.at("n2").get<std::uint64_t>();
    const auto m = doc.at("m").get<std::uint64_t>();
    check_dims(n1, n2, m);
    const json& sensing = doc.at("sensing");
    if (!sensing.is_array() || sensing.size() != m) throw FormatError("fixture: wrong number of sensing matrices");
    std::vector<Matrix> mats;
    mats.reserve(m);
    for (const auto& a : sensing) mats.push_back(matrix_from_json(a, n1, n2));
    Fixture fx;
    fx.op = std::make_shared<const SensingOperator>(mats);
    if (doc.contains("y")) fx.y = vector_from_json(doc["y"], m);
    if (doc.contains("truth")) {
      const json& t = doc["truth"];
      fx.truth = assemble_truth(matrix_from_json(t.at("x_star"), n1, n2), t.at("rank").get<int>(),
                                t.at("outlier_idx").get<std::vector<std::size_t>>(),
                                t.at("outliers").get<std::vector<double>>(), vector_from_json(t.at("noise"), m), m);
    }
    return fx;
  } catch (const json::exception& e) {
    throw FormatError(std::string("fixture: malformed JSON: ") + e.what());
  }
}

void save_fixture(const std::filesystem::path& path, const Fixture& fx) {
  const bool as_json = path.extension() == ".json";
  std::ofstream os(path, as_json ? std::ios::out : std::ios::out | std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  if (as_json)
    write_fixture_json(os, fx);
  else
    write_fixture_binary(os, fx);
}

Fixture load_fixture(const std::filesystem::path& path) {
  const bool as_json = path.extension() == ".json";
  std::ifstream is(path, as_json ? std::ios::in : std::ios::in | std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return as_json ? read_fixture_json(is) : read_fixture_binary(is);
}

}  // namespace proxlr

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "proxlr/bench.hpp"
#include "proxlr/errors.hpp"

using namespace proxlr;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.n1 = 8;
  s.n2 = 6;
  s.r = 2;
  s.p_m = 0.75;
  s.p_out = 0.25;
  s.trials = 3;
  s.seed = 7;
  s.max_iters = 40;
  s.max_time_s = 10.0;
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

TEST_CASE("outlier-free data is exactly A X* + noise") {
  ExperimentSpec s = small_spec();
  s.p_out = 0.0;
  s.noise_var = 0.25;
  const Instance inst = generate_instance(s, 0);
  CHECK(inst.obs.m() == 36);
  CHECK(inst.truth.outlier_idx.empty());
  CHECK(inst.truth.inlier_idx.size() == 36);
  const Vector expect = oracle::forward(*inst.obs.op, inst.truth.x_star) + inst.truth.noise;
  CHECK((inst.obs.y - expect).norm() <= 1e-12 * expect.norm());
  // Rank and noise level.
  Eigen::JacobiSVD<Matrix> svd(inst.truth.x_star);
  CHECK(svd.singularValues()[1] > 1e-8);
  CHECK(svd.singularValues()[2] < 1e-10 * svd.singularValues()[0]);
  CHECK(inst.truth.rank == 2);

  s.noise_var = 0.0;
  const Instance clean = generate_instance(s, 0);
  CHECK(clean.truth.noise.norm() == 0.0);
  CHECK((clean.obs.y - oracle::forward(*clean.obs.op, clean.truth.x_star)).norm() <=
        1e-12 * clean.obs.y.norm());
}

TEST_CASE("uniform outliers: count, placement and range") {
  ExperimentSpec s = small_spec();
  s.n1 = 20;
  s.n2 = 15;
  s.p_m = 0.5;
  s.p_out = 0.3;
  for (std::size_t trial = 0; trial < 5; ++trial) {
    const Instance inst = generate_instance(s, trial);
    const std::size_t m = inst.obs.m();
    CHECK(m == 150);
    CHECK(inst.truth.outlier_idx.size() == 45);
    const Vector clean = oracle::forward(*inst.obs.op, inst.truth.x_star);
    const double omega = clean.cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < inst.truth.outlier_idx.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(inst.truth.outlier_idx[k]);
      CHECK(inst.obs.y[i] == inst.truth.outliers[k]);
      CHECK(std::abs(inst.truth.outliers[k]) <= omega);
      CHECK(inst.truth.noise[i] == 0.0);
    }
    for (std::size_t i : inst.truth.inlier_idx) {
      const auto j = static_cast<Eigen::Index>(i);
      CHECK(inst.obs.y[j] == doctest::Approx(clean[j] + inst.truth.noise[j]).epsilon(1e-12));
    }
    CHECK(std::is_sorted(inst.truth.outlier_idx.begin(), inst.truth.outlier_idx.end()));
    CHECK_NOTHROW(inst.truth.validate(m));
  }
}

TEST_CASE("outlier count rounds p_out m") {
  ExperimentSpec s = small_spec();
  s.n1 = 7;
  s.n2 = 3;
  s.p_m = 1.0;
  for (double p : {0.0, 0.1, 0.25, 0.5, 0.9}) {
    s.p_out = p;
    CHECK(s.outlier_count() == static_cast<std::size_t>(std::llround(p * 21.0)));
    CHECK(generate_instance(s, 1).truth.outlier_idx.size() == s.outlier_count());
  }
  s.p_m = 1e-6;
  CHECK(s.m() == 1);
}

TEST_CASE("Cauchy outliers follow the scaled standard Cauchy law") {
  ExperimentSpec s = small_spec();
  s.n1 = 20;
  s.n2 = 20;
  s.r = 2;
  s.p_m = 1.0;
  s.p_out = 0.5;
  s.outliers = OutlierKind::Cauchy;
  std::vector<double> z;
  for (std::size_t trial = 0; z.size() < 100000; ++trial) {
    const Instance inst = generate_instance(s, trial);
    const double omega = oracle::forward(*inst.obs.op, inst.truth.x_star).cwiseAbs().maxCoeff();
    for (double v : inst.truth.outliers) z.push_back(v / omega);
  }
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = 0.5 + std::atan(z[i]) / std::numbers::pi;
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  CHECK(ks < 0.02);
}

TEST_CASE("rmse") {
  GroundTruth t;
  t.x_star = Matrix::Constant(4, 5, 2.0);
  CHECK(compute_rmse(t.x_star, t) == 0.0);
  CHECK(compute_rmse(t.x_star + Matrix::Constant(4, 5, 0.3), t) == doctest::Approx(0.3));
  std::mt19937_64 rng(3);
  const Matrix x = oracle::gaussian(rng, 4, 5);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < 5; ++j)
    for (Eigen::Index i = 0; i < 4; ++i) acc += (x(i, j) - 2.0) * (x(i, j) - 2.0);
  CHECK(compute_rmse(x, t) == doctest::Approx(std::sqrt(acc / 20.0)).epsilon(1e-14));
  CHECK_THROWS_AS(compute_rmse(Matrix::Zero(5, 4), t), DimensionError);
}

TEST_CASE("instances are deterministic and trials differ") {
  const ExperimentSpec s = small_spec();
  const Instance a = generate_instance(s, 2), b = generate_instance(s, 2), c = generate_instance(s, 1);
  CHECK((a.obs.y - b.obs.y).norm() == 0.0);
  CHECK((a.truth.x_star - b.truth.x_star).norm() == 0.0);
  CHECK(a.truth.outlier_idx == b.truth.outlier_idx);
  CHECK((a.obs.y - c.obs.y).norm() > 0.0);

  // Streams are independent: the outlier kind changes only the outlier values.
  ExperimentSpec sc = s;
  sc.outliers = OutlierKind::Cauchy;
  const Instance d = generate_instance(sc, 2);
  CHECK((d.truth.x_star - a.truth.x_star).norm() == 0.0);
  CHECK(d.truth.outlier_idx == a.truth.outlier_idx);
  CHECK((Matrix(d.obs.op->rows()) - Matrix(a.obs.op->rows())).norm() == 0.0);
}

TEST_CASE("spec hash is FNV-1a of a canonical form that ignores trials") {
  ExperimentSpec s = small_spec();
  CHECK(s.hash() == fnv1a(s.canonical()));
  const std::uint64_t h = s.hash();
  s.trials = 99;
  CHECK(s.hash() == h);
  s.seed = 8;
  CHECK(s.hash() != h);
  s.seed = 7;
  s.model.theta = 2.7;
  CHECK(s.hash() != h);
  CHECK(s.canonical().find("proposed-scad(theta=2.7)") != std::string::npos);
}

TEST_CASE("model labels and grids") {
  CHECK(model_grid(ModelKind::ProposedScad).size() == 4);
  CHECK(model_grid(ModelKind::ProposedMcp).size() == 3);
  CHECK(model_grid(ModelKind::ProposedL1).size() == 1);
  CHECK(model_grid(ModelKind::Factored).size() == 10);
  CHECK(model_grid(ModelKind::Nuclear).size() == 6);
  ModelSpec m;
  m.kind = ModelKind::Nuclear;
  m.t = 0.5;
  m.beta = 0.9;
  CHECK(m.label() == "nuclear(t=0.5,beta=0.9)");
  CHECK(to_string(parse_outlier_kind("cauchy")) == "cauchy");
  CHECK_THROWS_AS(parse_outlier_kind("gauss"), ParameterError);
}

TEST_CASE("spec validation") {
  auto bad = [](auto edit) {
    ExperimentSpec s = small_spec();
    edit(s);
    CHECK_THROWS_AS(s.validate(), ParameterError);
  };
  CHECK_NOTHROW(small_spec().validate());
  bad([](ExperimentSpec& s) { s.r = 0; });
  bad([](ExperimentSpec& s) { s.r = 7; });
  bad([](ExperimentSpec& s) { s.p_m = 0.0; });
  bad([](ExperimentSpec& s) { s.p_m = 1.1; });
  bad([](ExperimentSpec& s) { s.p_out = 1.0; });
  bad([](ExperimentSpec& s) { s.noise_var = -1.0; });
  bad([](ExperimentSpec& s) { s.sigma_floor = 0.0; });
  bad([](ExperimentSpec& s) { s.trials = 0; });
  bad([](ExperimentSpec& s) { s.model.theta = 2.0; });
  bad([](ExperimentSpec& s) {
    s.model.kind = ModelKind::ProposedMcp;
    s.model.theta = 0.0;
  });
  bad([](ExperimentSpec& s) {
    s.n1 = 4000;
    s.n2 = 4000;
    s.p_m = 1.0;
  });
}

TEST_CASE("reports: CSV is byte-identical across reruns and thread counts") {
  ExperimentSpec s = small_spec();
  std::vector<ModelSpec> grid = {ModelSpec{}, ModelSpec{}};
  grid[1].kind = ModelKind::Factored;
  const auto a = run_grid(s, grid);
  const auto b = run_grid(s, grid, RunOptions{3});
  std::ostringstream ca, cb;
  write_report_csv(ca, a);
  write_report_csv(cb, b);
  CHECK(ca.str() == cb.str());

  std::istringstream lines(ca.str());
  std::string line;
  std::size_t count = 0;
  std::getline(lines, line);
  CHECK(line.rfind("schema_version,spec_hash,", 0) == 0);
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.size() > 4);
    CHECK(line.substr(line.size() - 3) == ",ok");
  }
  CHECK(count == 6);

  for (const auto& rep : a) {
    CHECK(rep.failures == 0);
    double sum = 0.0;
    for (const auto& r : rep.records) sum += r.rmse;
    CHECK(rep.mean_rmse == doctest::Approx(sum / 3.0));
  }
  std::ostringstream js;
  write_report_json(js, a);
  const auto doc = nlohmann::json::parse(js.str());
  CHECK(doc["settings"].size() == 2);
  CHECK(doc["settings"][0]["runtime_s"].size() == 3);
  CHECK(doc["best"]["index"].get<std::size_t>() == best_report(a));
}

TEST_CASE("solver failures are captured per trial") {
  ExperimentSpec s = small_spec();
  s.trials = 2;
  s.model.kind = ModelKind::Factored;
  s.model.step_decay = 1.0;  // rejected by the factored solver, not by the spec
  const ExperimentReport rep = run_experiment(s);
  CHECK(rep.failures == 2);
  CHECK(std::isnan(rep.mean_rmse));
  CHECK(rep.records[0].failed);
  CHECK(!rep.records[0].error.empty());
  std::ostringstream csv;
  write_report_csv(csv, {rep});
  CHECK(csv.str().find(",,,,failed\n") != std::string::npos);

  std::vector<ExperimentReport> reports{rep, run_experiment(small_spec())};
  CHECK(best_report(reports) == 1);
  CHECK_THROWS_AS(best_report({}), ParameterError);
}

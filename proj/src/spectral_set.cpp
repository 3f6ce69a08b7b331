#include "proxlr/spectral_set.hpp"

#include <algorithm>
#include <string>

#include "proxlr/errors.hpp"

namespace proxlr {

SpectralSet::SpectralSet(std::size_t n1, std::size_t n2, std::size_t r, double sigma)
    : n1_(n1), n2_(n2), r_(r), sigma_(sigma) {
  if (n1 == 0 || n2 == 0) throw ParameterError("SpectralSet: empty ambient shape");
  if (r < 1 || r > std::min(n1, n2)) {
    throw ParameterError("SpectralSet: rank cap " + std::to_string(r) + " outside [1, " +
                         std::to_string(std::min(n1, n2)) + "]");
  }
  if (!(sigma > 0.0)) throw ParameterError("SpectralSet: sigma must be positive");
}

namespace {

void check_shape(const SpectralSet& set, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != set.n1() ||
      static_cast<std::size_t>(x.cols()) != set.n2()) {
    throw DimensionError("SpectralSet: matrix is " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", set lives in " + std::to_string(set.n1()) +
                         "x" + std::to_string(set.n2()));
  }
}

Matrix reassemble(const Svd& svd, const Vector& s, Eigen::Index k) {
  return svd.u.leftCols(k) * s.head(k).asDiagonal() * svd.v.leftCols(k).transpose();
}

}  // namespace

Svd thin_svd(const Matrix& x) {
  // BDCSVD falls back to one-sided Jacobi for small blocks; values come out
  // sorted descending in both cases.
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

bool contains(const SpectralSet& set, const Matrix& x, double tol) {
  check_shape(set, x);
  if (!(tol >= 0.0)) throw ParameterError("contains: tol must be nonnegative");
  const Vector s = Eigen::BDCSVD<Matrix>(x).singularValues();
  std::size_t nonzero = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (s[j] <= tol) continue;
    ++nonzero;
    if (s[j] < set.sigma() - tol) return false;
  }
  return nonzero >= 1 && nonzero <= set.rank_cap();
}

bool contains(const SpectralSet& set, const Matrix& x) {
  check_shape(set, x);
  const Vector s = Eigen::BDCSVD<Matrix>(x).singularValues();
  const double lead = s.size() > 0 ? s[0] : 0.0;
  return contains(set, x, 1e-9 * std::max(1.0, lead));
}

double spectral_floor_map(double s, double sigma) {
  if (s >= sigma) return s;
  // Exactly sigma/2 is equidistant from 0 and sigma; keep the rank.
  if (s >= 0.5 * sigma) return sigma;
  return 0.0;
}

Matrix project(const SpectralSet& set, const Matrix& x) {
  check_shape(set, x);
  if (x.isZero(0.0)) {
    throw DegenerateInputError("project: the zero matrix has no unique nearest rank-positive point");
  }
  const Svd svd = thin_svd(x);
  const auto r = static_cast<Eigen::Index>(set.rank_cap());
  Vector mapped = Vector::Zero(svd.s.size());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < r; ++j) {
    mapped[j] = spectral_floor_map(svd.s[j], set.sigma());
    if (mapped[j] > 0.0) kept = j + 1;
  }
  if (kept == 0) {
    mapped[0] = set.sigma();
    kept = 1;
  }
  return reassemble(svd, mapped, kept);
}

Matrix truncated_rank_project(const Matrix& x, std::size_t r) {
  if (r < 1) throw ParameterError("truncated_rank_project: r must be >= 1");
  const auto full = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
  if (r >= full) return x;
  const Svd svd = thin_svd(x);
  return reassemble(svd, svd.s, static_cast<Eigen::Index>(r));
}

Matrix singular_value_shrink(const Matrix& x, double tau) {
  if (!(tau >= 0.0)) throw ParameterError("singular_value_shrink: tau must be nonnegative");
  const Svd svd = thin_svd(x);
  Vector s = (svd.s.array() - tau).max(0.0).matrix();
  Eigen::Index k = 0;
  while (k < s.size() && s[k] > 0.0) ++k;
  if (k == 0) return Matrix::Zero(x.rows(), x.cols());
  return reassemble(svd, s, k);
}

double nuclear_norm(const Matrix& x) { return Eigen::BDCSVD<Matrix>(x).singularValues().sum(); }

}  // namespace proxlr

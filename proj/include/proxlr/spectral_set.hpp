#pragma once

#include <cstddef>

#include "proxlr/types.hpp"

namespace proxlr {

/// The set of n1 x n2 matrices with 0 < rank <= r whose nonzero singular
/// values are all >= sigma. Closed, nonconvex, prox-regular for sigma > 0.
class SpectralSet {
 public:
  /// Throws ParameterError unless 1 <= r <= min(n1, n2) and sigma > 0.
  SpectralSet(std::size_t n1, std::size_t n2, std::size_t r, double sigma);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t rank_cap() const { return r_; }
  double sigma() const { return sigma_; }

 private:
  std::size_t n1_;
  std::size_t n2_;
  std::size_t r_;
  double sigma_;
};

/// Singular values, descending, plus thin factors.
struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};

/// Dense thin SVD with singular values sorted descending.
Svd thin_svd(const Matrix& x);

/// Membership with a tolerance band: between 1 and r singular values exceed
/// tol, and each one is <= tol or >= sigma - tol.
bool contains(const SpectralSet& set, const Matrix& x, double tol);

/// contains() with tol = 1e-9 * max(1, sigma_1(x)).
bool contains(const SpectralSet& set, const Matrix& x);

/// The per-singular-value map used by project(): identity on [sigma, inf),
/// lift to sigma on [sigma/2, sigma), drop to 0 below sigma/2.
double spectral_floor_map(double s, double sigma);

/// A nearest point of the set. Keeps the leading r singular directions,
/// maps their values through spectral_floor_map, and if everything dropped
/// to zero lifts the leading value to sigma. Throws DegenerateInputError
/// for x == 0 and DimensionError on a shape mismatch.
Matrix project(const SpectralSet& set, const Matrix& x);

/// Best rank-<=r approximation (Eckart-Young). Throws ParameterError for r < 1.
Matrix truncated_rank_project(const Matrix& x, std::size_t r);

/// Singular value soft-thresholding: U diag(max(s - tau, 0)) V^T.
Matrix singular_value_shrink(const Matrix& x, double tau);

double nuclear_norm(const Matrix& x);

}  // namespace proxlr

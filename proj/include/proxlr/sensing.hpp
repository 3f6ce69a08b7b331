#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "proxlr/types.hpp"

namespace proxlr {

/// The linear map A : R^{n1 x n2} -> R^m, A(X)_i = <A_i, X>_F.
///
/// The m sensing matrices are stored densely as the rows of one m x (n1*n2)
/// row-major block; row i holds A_i flattened column-major, the same order
/// Eigen uses for X. Immutable after construction.
class SensingOperator {
 public:
  /// Throws DimensionError unless `mats` is non-empty and every matrix has
  /// the shape of the first.
  explicit SensingOperator(const std::vector<Matrix>& mats);

  /// `rows` is m x (n1*n2); row i is A_i flattened column-major.
  SensingOperator(std::size_t n1, std::size_t n2, RowMajorMatrix rows);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t m() const { return static_cast<std::size_t>(rows_.rows()); }

  /// A_i as an n1 x n2 matrix (copy).
  Matrix matrix(std::size_t i) const;

  const RowMajorMatrix& rows() const { return rows_; }

  Vector forward(const Matrix& x) const;
  Matrix adjoint(const Vector& v) const;

 private:
  void check_shape(const Matrix& x) const;

  std::size_t n1_;
  std::size_t n2_;
  RowMajorMatrix rows_;
};

/// y together with the operator that produced it.
struct Observation {
  std::shared_ptr<const SensingOperator> op;
  Vector y;

  /// Throws DimensionError if y and op disagree, ParameterError if op is null.
  Observation(std::shared_ptr<const SensingOperator> op, Vector y);

  std::size_t m() const { return op->m(); }
};

/// What generated an observation: the low-rank truth and the corruption.
struct GroundTruth {
  Matrix x_star;
  int rank = 0;
  std::vector<std::size_t> inlier_idx;   // sorted
  std::vector<std::size_t> outlier_idx;  // sorted
  Vector noise;                          // length m, zero on outliers
  std::vector<double> outliers;          // xi_i, aligned with outlier_idx

  /// Throws DimensionError / ParameterError when the index sets do not
  /// partition {0..m-1} or the lengths disagree.
  void validate(std::size_t m) const;
};

Vector apply_forward(const SensingOperator& op, const Matrix& x);
Matrix apply_adjoint(const SensingOperator& op, const Vector& v);

/// S(X) = y - A(X). Its derivative is the constant map V -> -A(V).
Vector residual_map(const Observation& obs, const Matrix& x);

/// Frobenius inner product.
double frobenius_dot(const Matrix& a, const Matrix& b);

}  // namespace proxlr

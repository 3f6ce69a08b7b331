#include "proxlr/sensing.hpp"

#include <algorithm>
#include <span>
#include <string>

#include "proxlr/errors.hpp"
#include "proxlr/kernels.hpp"

namespace proxlr {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

SensingOperator::SensingOperator(const std::vector<Matrix>& mats) {
  if (mats.empty()) throw DimensionError("SensingOperator: need at least one matrix");
  n1_ = static_cast<std::size_t>(mats.front().rows());
  n2_ = static_cast<std::size_t>(mats.front().cols());
  if (n1_ == 0 || n2_ == 0) throw DimensionError("SensingOperator: empty sensing matrix");
  rows_.resize(static_cast<Eigen::Index>(mats.size()), static_cast<Eigen::Index>(n1_ * n2_));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const Matrix& a = mats[i];
    if (static_cast<std::size_t>(a.rows()) != n1_ || static_cast<std::size_t>(a.cols()) != n2_) {
      throw DimensionError("SensingOperator: matrix " + std::to_string(i) + " is " +
                           shape_str(a.rows(), a.cols()) + ", expected " + shape_str(n1_, n2_));
    }
    rows_.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(a.data(), a.size());
  }
}

SensingOperator::SensingOperator(std::size_t n1, std::size_t n2, RowMajorMatrix rows)
    : n1_(n1), n2_(n2), rows_(std::move(rows)) {
  if (n1_ == 0 || n2_ == 0) throw DimensionError("SensingOperator: empty sensing matrix");
  if (rows_.rows() < 1) throw DimensionError("SensingOperator: need at least one matrix");
  if (static_cast<std::size_t>(rows_.cols()) != n1_ * n2_) {
    throw DimensionError("SensingOperator: row length " + std::to_string(rows_.cols()) +
                         " does not match " + shape_str(n1_, n2_));
  }
}

Matrix SensingOperator::matrix(std::size_t i) const {
  if (i >= m()) throw DimensionError("SensingOperator: index out of range");
  Matrix out(n1_, n2_);
  Eigen::Map<Eigen::RowVectorXd>(out.data(), out.size()) = rows_.row(static_cast<Eigen::Index>(i));
  return out;
}

void SensingOperator::check_shape(const Matrix& x) const {
  if (static_cast<std::size_t>(x.rows()) != n1_ || static_cast<std::size_t>(x.cols()) != n2_) {
    throw DimensionError("SensingOperator: input is " + shape_str(x.rows(), x.cols()) +
                         ", expected " + shape_str(n1_, n2_));
  }
}

Vector SensingOperator::forward(const Matrix& x) const {
  check_shape(x);
  Vector out(static_cast<Eigen::Index>(m()));
  kernels::gemv_rows({rows_.data(), static_cast<std::size_t>(rows_.size())}, m(), n1_ * n2_,
                     {x.data(), static_cast<std::size_t>(x.size())},
                     {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Matrix SensingOperator::adjoint(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != m()) {
    throw DimensionError("SensingOperator: adjoint input has length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(m()));
  }
  Matrix out(n1_, n2_);
  kernels::gemv_rows_transposed({rows_.data(), static_cast<std::size_t>(rows_.size())}, m(),
                                n1_ * n2_, {v.data(), static_cast<std::size_t>(v.size())},
                                {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Observation::Observation(std::shared_ptr<const SensingOperator> op_in, Vector y_in)
    : op(std::move(op_in)), y(std::move(y_in)) {
  if (!op) throw ParameterError("Observation: null operator");
  if (static_cast<std::size_t>(y.size()) != op->m()) {
    throw DimensionError("Observation: y has length " + std::to_string(y.size()) +
                         ", operator has m = " + std::to_string(op->m()));
  }
}

void GroundTruth::validate(std::size_t m) const {
  if (rank < 1) throw ParameterError("GroundTruth: rank must be positive");
  if (static_cast<std::size_t>(noise.size()) != m) {
    throw DimensionError("GroundTruth: noise length does not match m");
  }
  if (outliers.size() != outlier_idx.size()) {
    throw DimensionError("GroundTruth: outlier values do not match outlier indices");
  }
  if (inlier_idx.size() + outlier_idx.size() != m) {
    throw DimensionError("GroundTruth: index sets do not partition the measurements");
  }
  std::vector<int> seen(m, 0);
  for (auto i : inlier_idx) {
    if (i >= m || seen[i]++) throw ParameterError("GroundTruth: invalid inlier index");
  }
  for (auto i : outlier_idx) {
    if (i >= m || seen[i]++) throw ParameterError("GroundTruth: invalid outlier index");
  }
}

Vector apply_forward(const SensingOperator& op, const Matrix& x) { return op.forward(x); }

Matrix apply_adjoint(const SensingOperator& op, const Vector& v) { return op.adjoint(v); }

Vector residual_map(const Observation& obs, const Matrix& x) { return obs.y - obs.op->forward(x); }

double frobenius_dot(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("frobenius_dot: shape mismatch");
  }
  return (a.array() * b.array()).sum();
}

}  // namespace proxlr

#include <algorithm>
#include <cmath>

#include "kernel_table.hpp"

namespace proxlr::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_rows(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot(a + r * cols, x, cols);
}

void gemv_rows_transposed(const double* a, std::size_t rows, std::size_t cols,
                          const double* v, double* out) {
  std::fill(out, out + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) axpy(v[r], a + r * cols, out, cols);
}

void soft_threshold(const double* in, double tau, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::max(std::abs(in[i]) - tau, 0.0);
    out[i] = std::copysign(mag, in[i]);
  }
}

}  // namespace

const KernelTable table{dot, axpy, gemv_rows, gemv_rows_transposed, soft_threshold};

}  // namespace proxlr::kernels::scalar

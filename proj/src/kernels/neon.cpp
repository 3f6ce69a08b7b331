#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "kernel_table.hpp"

namespace proxlr::kernels::neon {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
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
  const float64x2_t vt = vdupq_n_f64(tau);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vld1q_f64(in + i);
    const float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(x), vt), zero);
    // Copy the sign bit of x onto mag.
    const uint64x2_t sign_bit = vdupq_n_u64(0x8000000000000000ULL);
    vst1q_f64(out + i, vbslq_f64(sign_bit, x, mag));
  }
  for (; i < n; ++i) {
    const double mag = std::max(std::abs(in[i]) - tau, 0.0);
    out[i] = std::copysign(mag, in[i]);
  }
}

}  // namespace

const KernelTable table{dot, axpy, gemv_rows, gemv_rows_transposed, soft_threshold};

}  // namespace proxlr::kernels::neon

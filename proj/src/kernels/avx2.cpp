// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernel_table.hpp"

namespace proxlr::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four rows share each load of x.
void gemv_rows(const double* a, std::size_t rows, std::size_t cols, const double* x,
               double* out) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* a0 = a + r * cols;
    const double* a1 = a0 + cols;
    const double* a2 = a1 + cols;
    const double* a3 = a2 + cols;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + j), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + j), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a2 + j), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a3 + j), xv, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; j < cols; ++j) {
      t0 += a0[j] * x[j];
      t1 += a1[j] * x[j];
      t2 += a2[j] * x[j];
      t3 += a3[j] * x[j];
    }
    out[r] = t0;
    out[r + 1] = t1;
    out[r + 2] = t2;
    out[r + 3] = t3;
  }
  for (; r < rows; ++r) out[r] = dot(a + r * cols, x, cols);
}

// Four rows accumulate into each load/store of out.
void gemv_rows_transposed(const double* a, std::size_t rows, std::size_t cols,
                          const double* v, double* out) {
  std::fill(out, out + cols, 0.0);
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* a0 = a + r * cols;
    const double* a1 = a0 + cols;
    const double* a2 = a1 + cols;
    const double* a3 = a2 + cols;
    const __m256d v0 = _mm256_set1_pd(v[r]);
    const __m256d v1 = _mm256_set1_pd(v[r + 1]);
    const __m256d v2 = _mm256_set1_pd(v[r + 2]);
    const __m256d v3 = _mm256_set1_pd(v[r + 3]);
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      __m256d o = _mm256_loadu_pd(out + j);
      o = _mm256_fmadd_pd(v0, _mm256_loadu_pd(a0 + j), o);
      o = _mm256_fmadd_pd(v1, _mm256_loadu_pd(a1 + j), o);
      o = _mm256_fmadd_pd(v2, _mm256_loadu_pd(a2 + j), o);
      o = _mm256_fmadd_pd(v3, _mm256_loadu_pd(a3 + j), o);
      _mm256_storeu_pd(out + j, o);
    }
    for (; j < cols; ++j) {
      out[j] += v[r] * a0[j] + v[r + 1] * a1[j] + v[r + 2] * a2[j] + v[r + 3] * a3[j];
    }
  }
  for (; r < rows; ++r) axpy(v[r], a + r * cols, out, cols);
}

void soft_threshold(const double* in, double tau, double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vt = _mm256_set1_pd(tau);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in + i);
    const __m256d sign = _mm256_and_pd(x, sign_mask);
    const __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(sign_mask, x), vt), zero);
    _mm256_storeu_pd(out + i, _mm256_or_pd(mag, sign));
  }
  for (; i < n; ++i) {
    const double mag = std::max(std::abs(in[i]) - tau, 0.0);
    out[i] = std::copysign(mag, in[i]);
  }
}

}  // namespace

const KernelTable table{dot, axpy, gemv_rows, gemv_rows_transposed, soft_threshold};

}  // namespace proxlr::kernels::avx2

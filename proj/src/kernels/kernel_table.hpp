#pragma once

// Per-ISA kernel variants. Not part of the public API; the equivalence
// tests include this header to call each variant directly.

#include <cstddef>

namespace proxlr::kernels {

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*gemv_rows)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                    double* out);
  void (*gemv_rows_transposed)(const double* a, std::size_t rows, std::size_t cols,
                               const double* v, double* out);
  void (*soft_threshold)(const double* in, double tau, double* out, std::size_t n);
};

namespace scalar {
extern const KernelTable table;
}

#if defined(PROXLR_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif

#if defined(PROXLR_HAVE_NEON)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace proxlr::kernels

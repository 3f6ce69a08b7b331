#include <atomic>
#include <stdexcept>
#include <string>

#include "kernel_table.hpp"
#include "proxlr/kernels.hpp"

namespace proxlr::kernels {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(PROXLR_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(PROXLR_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(PROXLR_HAVE_AVX2)
    case Isa::Avx2:
      return avx2::table;
#endif
#if defined(PROXLR_HAVE_NEON)
    case Isa::Neon:
      return neon::table;
#endif
    default:
      return scalar::table;
  }
}

Isa best_isa() {
  if (cpu_has(Isa::Avx2)) return Isa::Avx2;
  if (cpu_has(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{best_isa()};
  return isa;
}

const KernelTable& active() { return table_for(current().load(std::memory_order_relaxed)); }

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string("kernels: length mismatch in ") + what);
  }
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return cpu_has(isa); }

Isa active_isa() { return current().load(); }

void force_isa(std::optional<Isa> isa) {
  if (!isa) {
    current().store(best_isa());
    return;
  }
  if (!cpu_has(*isa)) {
    throw std::invalid_argument("kernels: " + std::string(isa_name(*isa)) +
                                " is not available on this host");
  }
  current().store(*isa);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv_rows(std::span<const double> a, std::size_t rows, std::size_t cols,
               std::span<const double> x, std::span<double> out) {
  require_same(a.size(), rows * cols, "gemv_rows (matrix)");
  require_same(x.size(), cols, "gemv_rows (x)");
  require_same(out.size(), rows, "gemv_rows (out)");
  active().gemv_rows(a.data(), rows, cols, x.data(), out.data());
}

void gemv_rows_transposed(std::span<const double> a, std::size_t rows, std::size_t cols,
                          std::span<const double> v, std::span<double> out) {
  require_same(a.size(), rows * cols, "gemv_rows_transposed (matrix)");
  require_same(v.size(), rows, "gemv_rows_transposed (v)");
  require_same(out.size(), cols, "gemv_rows_transposed (out)");
  active().gemv_rows_transposed(a.data(), rows, cols, v.data(), out.data());
}

void soft_threshold(std::span<const double> in, double tau, std::span<double> out) {
  require_same(in.size(), out.size(), "soft_threshold");
  active().soft_threshold(in.data(), tau, out.data(), in.size());
}

}  // namespace proxlr::kernels

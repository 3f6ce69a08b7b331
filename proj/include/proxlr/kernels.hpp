#pragma once

// Dense inner loops behind the sensing operator and the l1 prox.
// Every entry point dispatches at runtime to the widest instruction set
// the host supports; the scalar variants are the reference semantics.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace proxlr::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// True when this build contains a variant for `isa` and the CPU can run it.
bool isa_available(Isa isa);

/// The variant the dispatching entry points currently call.
Isa active_isa();

/// Pin dispatch to a specific variant (tests, benchmarks). std::nullopt
/// restores automatic selection. Throws std::invalid_argument when the
/// requested variant is not available on this host.
void force_isa(std::optional<Isa> isa);

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// out[i] = <row i of a, x>, with `a` row-major rows x cols.
void gemv_rows(std::span<const double> a, std::size_t rows, std::size_t cols,
               std::span<const double> x, std::span<double> out);

// out = sum_i v[i] * (row i of a). `out` is overwritten.
void gemv_rows_transposed(std::span<const double> a, std::size_t rows, std::size_t cols,
                          std::span<const double> v, std::span<double> out);

// out[i] = sign(in[i]) * max(|in[i]| - tau, 0). `in` and `out` may alias.
void soft_threshold(std::span<const double> in, double tau, std::span<double> out);

}  // namespace proxlr::kernels

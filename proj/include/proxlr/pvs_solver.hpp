#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "proxlr/losses.hpp"
#include "proxlr/sensing.hpp"
#include "proxlr/spectral_set.hpp"
#include "proxlr/trace.hpp"
#include "proxlr/types.hpp"

namespace proxlr {

enum class InitKind { Spectral, RandomFeasible };

/// Hyperparameters of projected variable smoothing.
struct SolverConfig {
  double c = std::ldexp(1.0, -13);  // sufficient-decrease constant, in (0, 1/2)
  double rho = 0.5;                 // backtracking ratio, in (0, 1)
  double gamma_tilde = 1.0;         // initial trial stepsize
  double alpha = 3.0;               // smoothing decay exponent, >= 1
  /// Base of the smoothing schedule. <= 0 means "derive from the loss":
  /// eta when eta > 0, otherwise 1.
  double eta_sched = 0.0;
  double tol_rel = 1e-9;
  double max_time_s = 60.0;
  std::size_t max_iters = 200000;
  int max_backtracks = 100;
  InitKind init = InitKind::Spectral;
  std::uint64_t init_seed = 0;  // RandomFeasible only
  bool record_trace = true;

  /// Throws ParameterError on any out-of-range field.
  void validate() const;
};

/// eta_sched with the loss-derived default resolved.
double resolved_eta_sched(const SolverConfig& cfg, const ScalarLoss& loss);

/// mu_n = (2 eta_sched)^{-1} n^{-1/alpha}. cfg.eta_sched must be > 0.
double smoothing_schedule(const SolverConfig& cfg, std::size_t n);

/// F(x) = g^mu(y - A x).
double smoothed_objective(const Observation& obs, const SeparableLoss& g, double mu, const Matrix& x);

struct BacktrackResult {
  Matrix x_next;
  double gamma = 0.0;
  int backtracks = 0;   // accepted exponent m, gamma = rho^m * gamma_tilde
  double f_current = 0.0;  // F_n(x_n)
  double f_next = 0.0;     // F_n(x_next)
  double measure = 0.0;    // |x_n - x_next| / gamma
  bool unchanged = false;  // projection returned x_n up to SVD round-off (1e-12 relative)
};

/// One outer iteration: tries gamma = rho^m gamma_tilde for m = 0, 1, ...
/// until F_n(x) <= F_n(x_n) - c gamma |(x_n - x)/gamma|^2 with
/// x = P_C(x_n - gamma grad F_n(x_n)). The smoothing level comes from
/// smoothing_schedule(cfg, n) (with eta_sched resolved from g).
/// Throws PreconditionError if x_n is not in `set`, NumericalFailure when
/// cfg.max_backtracks trials all fail.
BacktrackResult backtrack_step(const Matrix& x_n, std::size_t n, const SolverConfig& cfg,
                               const Observation& obs, const SeparableLoss& g, const SpectralSet& set);

/// |x - P_C(x - gamma grad F(x))| / gamma for F = g^mu o S.
double stationarity_measure(const Matrix& x, double gamma, const Observation& obs,
                            const SeparableLoss& g, double mu, const SpectralSet& set);

/// Everything an observer sees about an accepted step.
struct StepEvent {
  std::size_t n;
  double mu;
  const Matrix& x_n;
  const Matrix& x_next;
  const BacktrackResult& step;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct SolveResult {
  Matrix x_hat;  // final iterate
  SolverTrace trace;
  // Iterate with the smallest logged stationarity measure so far.
  Matrix x_min_measure;
  double min_measure = INFINITY;
  std::size_t min_measure_iter = 0;
};

/// Projected variable smoothing for min g(y - A X) s.t. X in `set`.
///
/// Stops when the relative change of the unsmoothed cost g(y - A x_n)
/// falls below cfg.tol_rel, at cfg.max_time_s, or after cfg.max_iters.
/// Default start: P_C(A^*(y)/m). Throws PreconditionError for an infeasible
/// x_init and propagates NumericalFailure from backtracking.
SolveResult solve_proposed(const Observation& obs, const SeparableLoss& g, const SpectralSet& set,
                           const SolverConfig& cfg, const std::optional<Matrix>& x_init = std::nullopt,
                           const StepObserver& observer = {});

}  // namespace proxlr

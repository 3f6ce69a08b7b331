#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "proxlr/sensing.hpp"
#include "proxlr/trace.hpp"
#include "proxlr/types.hpp"

namespace proxlr {

// ---------------------------------------------------------------------------
// Factored l1 model
//
//   min_{U,V} w |y - A(U V^T)|_1 + lambda |U^T U - V^T V|_F
//
// solved by a subgradient method with geometric steps
// gamma_n = step_base * step_decay^n. The fit weight w is 1/m when
// normalize_by_m is set (the scaling the method's step rule was designed for)
// and 1 otherwise.
// ---------------------------------------------------------------------------

enum class FactoredInit { Gaussian, Spectral };

struct FactoredModelConfig {
  double lambda = 1.0;
  double step_base = 1.0;
  double step_decay = 0.95;
  std::size_t rank = 5;
  double max_time_s = 60.0;
  double tol_rel = 1e-9;
  std::size_t max_iters = 200000;
  FactoredInit init = FactoredInit::Gaussian;
  /// Entry scale for Gaussian init; <= 0 selects |A^*(y)|_F^{1/2} / (m r)^{1/2}.
  double init_scale = 0.0;
  std::uint64_t seed = 0;
  bool normalize_by_m = true;
  bool record_trace = true;

  void validate() const;
};

/// Hyperparameter grids for the factored model: lambda x step_base.
std::vector<double> factored_lambda_grid();
std::vector<double> factored_step_base_grid();

struct FactoredPair {
  Matrix u;  // n1 x r
  Matrix v;  // n2 x r
};

/// Data-fit and balance terms of the factored cost, reported separately.
struct FactoredCost {
  double fit;      // w |y - A(U V^T)|_1
  double balance;  // lambda |U^T U - V^T V|_F
  double total() const { return fit + balance; }
};

FactoredCost factored_cost(const Observation& obs, const FactoredPair& uv, double lambda,
                           bool normalize_by_m);

/// One subgradient of the factored cost. Uses sign 0 at exact residual zeros
/// and drops the balance term when U^T U = V^T V.
FactoredPair factored_subgradient_at(const Observation& obs, const FactoredPair& uv, double lambda,
                                     bool normalize_by_m);

/// Starting pair per cfg.init.
FactoredPair factored_initial_pair(const Observation& obs, const FactoredModelConfig& cfg);

struct FactoredResult {
  Matrix x_hat;          // U V^T at the best-cost iterate
  FactoredPair best;
  double best_cost = 0.0;
  std::size_t best_iter = 0;
  SolverTrace trace;
};

FactoredResult factored_subgradient(const Observation& obs, const FactoredModelConfig& cfg,
                                    const std::optional<FactoredPair>& start = std::nullopt);

// ---------------------------------------------------------------------------
// Nuclear-minus-Frobenius l1 model
//
//   min_X |y - A(X)|_1 + lambda (|X|_nuc - beta |X|_F),
//   lambda = t sqrt(m n2 log(n1 + n2)),
//
// solved by DCA: linearize -beta|X|_F at X_k and solve the convex remainder
// with ADMM.
// ---------------------------------------------------------------------------

struct NuclearModelConfig {
  double t_weight = 0.1;
  double beta = 0.5;
  double admm_penalty = 1.0;  // initial value; adapted by residual balancing
  std::size_t admm_max_iters = 1000;
  double admm_tol = 1e-6;
  std::size_t dca_max_iters = 1000;
  double max_time_s = 60.0;
  double tol_rel = 1e-9;
  bool record_trace = true;

  void validate() const;
};

std::vector<double> nuclear_t_grid();
std::vector<double> nuclear_beta_grid();

double nuclear_lambda(double t_weight, std::size_t m, std::size_t n1, std::size_t n2);

/// |y - A(X)|_1 + lambda (|X|_nuc - beta |X|_F).
double nuclear_model_cost(const Observation& obs, const Matrix& x, double lambda, double beta);

struct AdmmResult {
  Matrix x;  // the low-rank split variable S at exit
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;  // normalized
  double dual_residual = 0.0;    // normalized
  std::vector<double> primal_history;
  std::vector<double> dual_history;
};

/// ADMM for the convex DCA subproblem
///   min_X |y - A X|_1 + lambda |X|_nuc - lambda beta <W, X>
/// with splitting Z = A X, S = X. The X-update system (A^*A + I) X = b is
/// factored once per operator (Woodbury on the smaller Gram side).
class DcaSubproblemSolver {
 public:
  explicit DcaSubproblemSolver(const Observation& obs);
  ~DcaSubproblemSolver();
  DcaSubproblemSolver(DcaSubproblemSolver&&) noexcept;
  DcaSubproblemSolver& operator=(DcaSubproblemSolver&&) noexcept;

  /// Resets the split variables to X = S = x0, Z = A x0, zero duals.
  void warm_start(const Matrix& x0, double rho);

  /// Warm-starts from the previous call's split and dual variables (or from
  /// zero with cfg.admm_penalty on the first call).
  /// `deadline_s` bounds wall time for this call (<= 0: unbounded).
  AdmmResult solve(const Matrix& w, double lambda, double beta, const NuclearModelConfig& cfg,
                   double deadline_s = 0.0);

  /// Solves (A^*A + I) X = b.
  Matrix solve_normal(const Matrix& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct NuclearResult {
  Matrix x_hat;
  double lambda = 0.0;
  SolverTrace trace;
  std::vector<double> outer_costs;  // model cost after each DCA step, [0] = start
};

NuclearResult nuclear_dca(const Observation& obs, const NuclearModelConfig& cfg);

}  // namespace proxlr

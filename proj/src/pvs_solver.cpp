#include "proxlr/pvs_solver.hpp"

#include <chrono>
#include <random>
#include <string>

#include "proxlr/errors.hpp"

namespace proxlr {

void SolverConfig::validate() const {
  if (!(c > 0.0 && c < 0.5)) throw ParameterError("SolverConfig: c must lie in (0, 1/2)");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("SolverConfig: rho must lie in (0, 1)");
  if (!(gamma_tilde > 0.0)) throw ParameterError("SolverConfig: gamma_tilde must be positive");
  if (!(alpha >= 1.0)) throw ParameterError("SolverConfig: alpha must be >= 1");
  if (!(tol_rel > 0.0)) throw ParameterError("SolverConfig: tol_rel must be positive");
  if (!(max_time_s > 0.0)) throw ParameterError("SolverConfig: max_time_s must be positive");
  if (max_iters < 1) throw ParameterError("SolverConfig: max_iters must be >= 1");
  if (max_backtracks < 1) throw ParameterError("SolverConfig: max_backtracks must be >= 1");
}

double resolved_eta_sched(const SolverConfig& cfg, const ScalarLoss& loss) {
  if (cfg.eta_sched > 0.0) return cfg.eta_sched;
  return loss.eta() > 0.0 ? loss.eta() : 1.0;
}

double smoothing_schedule(const SolverConfig& cfg, std::size_t n) {
  if (!(cfg.eta_sched > 0.0)) throw ParameterError("smoothing_schedule: eta_sched must be positive");
  if (n < 1) throw ParameterError("smoothing_schedule: n must be >= 1");
  return std::pow(static_cast<double>(n), -1.0 / cfg.alpha) / (2.0 * cfg.eta_sched);
}

double smoothed_objective(const Observation& obs, const SeparableLoss& g, double mu, const Matrix& x) {
  return envelope_eval(g, mu, residual_map(obs, x));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Relative distance below which a projected point counts as x_n itself. An
// SVD round trip perturbs x_n by a few hundred ulps, so smaller steps are
// indistinguishable from the identity.
constexpr double kUnchangedRel = 1e-12;

// State of the smoothed objective at the current iterate.
struct Anchor {
  Vector residual;  // y - A x_n
  double value;     // F_n(x_n)
  Matrix grad;      // grad F_n(x_n)
};

Anchor make_anchor(const Observation& obs, const SeparableLoss& g, double mu, Vector residual) {
  EnvelopeEval env = envelope_eval_grad(g, mu, residual);
  Matrix grad = -obs.op->adjoint(env.grad);
  return {std::move(residual), env.value, std::move(grad)};
}

struct Accepted {
  BacktrackResult step;
  Vector residual_next;
};

Accepted backtrack_from(const Matrix& x_n, const Anchor& anchor, double mu, const SolverConfig& cfg,
                        const Observation& obs, const SeparableLoss& g, const SpectralSet& set) {
  const double x_norm = x_n.norm();
  double gamma = cfg.gamma_tilde;
  for (int m = 0; m < cfg.max_backtracks; ++m, gamma *= cfg.rho) {
    Matrix x = project(set, x_n - gamma * anchor.grad);
    const double dist = (x_n - x).norm();
    Vector residual = obs.y - obs.op->forward(x);
    const double f_next = envelope_eval(g, mu, residual);
    const double measure = dist / gamma;
    const bool unchanged = dist < kUnchangedRel * x_norm;
    if (unchanged || f_next <= anchor.value - cfg.c * gamma * measure * measure) {
      return {BacktrackResult{std::move(x), gamma, m, anchor.value, f_next, measure, unchanged},
              std::move(residual)};
    }
  }
  throw NumericalFailure("backtracking: no sufficient decrease after " +
                         std::to_string(cfg.max_backtracks) +
                         " trials (mu = " + std::to_string(mu) + ")");
}

SolverConfig with_resolved_eta(SolverConfig cfg, const SeparableLoss& g) {
  cfg.eta_sched = resolved_eta_sched(cfg, g.scalar);
  return cfg;
}

void check_problem(const Observation& obs, const SeparableLoss& g, const SpectralSet& set) {
  if (g.dim != obs.m()) throw DimensionError("solver: loss dimension does not match m");
  if (set.n1() != obs.op->n1() || set.n2() != obs.op->n2()) {
    throw DimensionError("solver: constraint set shape does not match the operator");
  }
}

Matrix random_feasible(const SpectralSet& set, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(set.n1(), set.n2());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = normal(rng);
  return project(set, x);
}

Matrix default_init(const Observation& obs, const SpectralSet& set, const SolverConfig& cfg) {
  if (cfg.init == InitKind::RandomFeasible) return random_feasible(set, cfg.init_seed);
  const Matrix back = obs.op->adjoint(obs.y) / static_cast<double>(obs.m());
  if (back.isZero(0.0)) return random_feasible(set, cfg.init_seed);
  return project(set, back);
}

}  // namespace

BacktrackResult backtrack_step(const Matrix& x_n, std::size_t n, const SolverConfig& cfg_in,
                               const Observation& obs, const SeparableLoss& g, const SpectralSet& set) {
  cfg_in.validate();
  check_problem(obs, g, set);
  if (!contains(set, x_n)) throw PreconditionError("backtrack_step: x_n is not in the constraint set");
  const SolverConfig cfg = with_resolved_eta(cfg_in, g);
  const double mu = smoothing_schedule(cfg, n);
  const Anchor anchor = make_anchor(obs, g, mu, residual_map(obs, x_n));
  return backtrack_from(x_n, anchor, mu, cfg, obs, g, set).step;
}

double stationarity_measure(const Matrix& x, double gamma, const Observation& obs,
                            const SeparableLoss& g, double mu, const SpectralSet& set) {
  if (!(gamma > 0.0)) throw ParameterError("stationarity_measure: gamma must be positive");
  check_problem(obs, g, set);
  const Matrix grad = composite_grad(obs, g, mu, x);
  return (x - project(set, x - gamma * grad)).norm() / gamma;
}

SolveResult solve_proposed(const Observation& obs, const SeparableLoss& g, const SpectralSet& set,
                           const SolverConfig& cfg_in, const std::optional<Matrix>& x_init,
                           const StepObserver& observer) {
  const auto t0 = Clock::now();
  cfg_in.validate();
  check_problem(obs, g, set);
  const SolverConfig cfg = with_resolved_eta(cfg_in, g);

  Matrix x;
  if (x_init) {
    if (static_cast<std::size_t>(x_init->rows()) != set.n1() ||
        static_cast<std::size_t>(x_init->cols()) != set.n2()) {
      throw DimensionError("solve_proposed: x_init has the wrong shape");
    }
    if (!contains(set, *x_init)) throw PreconditionError("solve_proposed: x_init is not in the constraint set");
    x = *x_init;
  } else {
    x = default_init(obs, set, cfg);
  }

  SolveResult result;
  result.trace.method = TraceMethod::Proposed;
  result.x_min_measure = x;

  Vector residual = residual_map(obs, x);
  double raw_cost = loss_eval(g, residual);
  result.trace.termination = TerminationReason::IterLimit;

  for (std::size_t n = 1; n <= cfg.max_iters; ++n) {
    if (raw_cost == 0.0) {
      result.trace.termination = TerminationReason::RelTol;
      break;
    }
    const double mu = smoothing_schedule(cfg, n);
    const Anchor anchor = make_anchor(obs, g, mu, std::move(residual));
    Accepted acc = backtrack_from(x, anchor, mu, cfg, obs, g, set);
    const BacktrackResult& step = acc.step;

    if (observer) observer(StepEvent{n, mu, x, step.x_next, step});

    const double next_raw = loss_eval(g, acc.residual_next);
    const double elapsed = seconds_since(t0);
    if (cfg.record_trace) {
      TraceRow row;
      row.n = n;
      row.mu = mu;
      row.gamma = step.gamma;
      row.backtracks = step.backtracks;
      row.f_n = step.f_current;
      row.f_next = step.f_next;
      row.raw_cost = raw_cost;
      row.measure = step.measure;
      row.elapsed_s = elapsed;
      result.trace.rows.push_back(row);
    }
    if (step.measure < result.min_measure) {
      result.min_measure = step.measure;
      result.min_measure_iter = n;
      result.x_min_measure = x;
    }

    const double rel_change = std::abs(next_raw - raw_cost) / std::abs(raw_cost);
    x = std::move(acc.step.x_next);
    residual = std::move(acc.residual_next);
    raw_cost = next_raw;
    result.trace.iterations = n;

    if (rel_change < cfg.tol_rel) {
      result.trace.termination = TerminationReason::RelTol;
      break;
    }
    if (elapsed >= cfg.max_time_s) {
      result.trace.termination = TerminationReason::TimeLimit;
      break;
    }
  }

  result.x_hat = std::move(x);
  result.trace.final_raw_cost = raw_cost;
  result.trace.elapsed_s = seconds_since(t0);
  return result;
}

}  // namespace proxlr

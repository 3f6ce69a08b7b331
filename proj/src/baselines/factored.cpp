#include <chrono>
#include <cmath>
#include <random>

#include "proxlr/baselines.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/spectral_set.hpp"

namespace proxlr {

void FactoredModelConfig::validate() const {
  if (!(lambda >= 0.0)) throw ParameterError("FactoredModelConfig: lambda must be >= 0");
  if (!(step_base > 0.0)) throw ParameterError("FactoredModelConfig: step_base must be positive");
  if (!(step_decay > 0.0 && step_decay < 1.0)) {
    throw ParameterError("FactoredModelConfig: step_decay must lie in (0, 1)");
  }
  if (rank < 1) throw ParameterError("FactoredModelConfig: rank must be >= 1");
  if (!(max_time_s > 0.0)) throw ParameterError("FactoredModelConfig: max_time_s must be positive");
  if (!(tol_rel > 0.0)) throw ParameterError("FactoredModelConfig: tol_rel must be positive");
  if (max_iters < 1) throw ParameterError("FactoredModelConfig: max_iters must be >= 1");
}

std::vector<double> factored_lambda_grid() { return {1e-2, 1e-1, 1.0, 2.0, 5.0}; }
std::vector<double> factored_step_base_grid() { return {1.0, 2.0}; }

namespace {

double fit_weight(const Observation& obs, bool normalize_by_m) {
  return normalize_by_m ? 1.0 / static_cast<double>(obs.m()) : 1.0;
}

void check_pair(const Observation& obs, const FactoredPair& uv) {
  if (static_cast<std::size_t>(uv.u.rows()) != obs.op->n1() ||
      static_cast<std::size_t>(uv.v.rows()) != obs.op->n2() || uv.u.cols() != uv.v.cols() ||
      uv.u.cols() < 1) {
    throw DimensionError("factored: U must be n1 x r and V n2 x r");
  }
}

}  // namespace

FactoredCost factored_cost(const Observation& obs, const FactoredPair& uv, double lambda,
                           bool normalize_by_m) {
  check_pair(obs, uv);
  const Vector r = residual_map(obs, uv.u * uv.v.transpose());
  const Matrix d = uv.u.transpose() * uv.u - uv.v.transpose() * uv.v;
  return {fit_weight(obs, normalize_by_m) * r.lpNorm<1>(), lambda * d.norm()};
}

FactoredPair factored_subgradient_at(const Observation& obs, const FactoredPair& uv, double lambda,
                                     bool normalize_by_m) {
  check_pair(obs, uv);
  // d/dX of w|y - A X|_1 contains w A^*(sign(A X - y)).
  const Vector r = obs.op->forward(uv.u * uv.v.transpose()) - obs.y;
  Vector s(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) s[i] = (r[i] > 0.0) - (r[i] < 0.0);
  const Matrix g = fit_weight(obs, normalize_by_m) * obs.op->adjoint(s);

  FactoredPair out{g * uv.v, g.transpose() * uv.u};
  const Matrix d = uv.u.transpose() * uv.u - uv.v.transpose() * uv.v;
  const double dn = d.norm();
  if (lambda > 0.0 && dn > 0.0) {
    out.u += (2.0 * lambda / dn) * (uv.u * d);
    out.v -= (2.0 * lambda / dn) * (uv.v * d);
  }
  return out;
}

FactoredPair factored_initial_pair(const Observation& obs, const FactoredModelConfig& cfg) {
  const auto n1 = static_cast<Eigen::Index>(obs.op->n1());
  const auto n2 = static_cast<Eigen::Index>(obs.op->n2());
  const auto r = static_cast<Eigen::Index>(cfg.rank);
  if (r > std::min(n1, n2)) throw ParameterError("factored: rank exceeds min(n1, n2)");
  const Matrix back = obs.op->adjoint(obs.y);

  if (cfg.init == FactoredInit::Spectral) {
    const Svd svd = thin_svd(back / static_cast<double>(obs.m()));
    const Vector root = svd.s.head(r).cwiseSqrt();
    return {svd.u.leftCols(r) * root.asDiagonal(), svd.v.leftCols(r) * root.asDiagonal()};
  }

  double scale = cfg.init_scale;
  if (!(scale > 0.0)) {
    scale = std::sqrt(back.norm()) / std::sqrt(static_cast<double>(obs.m() * cfg.rank));
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FactoredPair uv{Matrix(n1, r), Matrix(n2, r)};
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n1; ++i) uv.u(i, j) = scale * normal(rng);
  for (Eigen::Index j = 0; j < r; ++j)
    for (Eigen::Index i = 0; i < n2; ++i) uv.v(i, j) = scale * normal(rng);
  return uv;
}

FactoredResult factored_subgradient(const Observation& obs, const FactoredModelConfig& cfg,
                                    const std::optional<FactoredPair>& start) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  cfg.validate();

  FactoredPair uv = start ? *start : factored_initial_pair(obs, cfg);
  check_pair(obs, uv);

  FactoredResult result;
  result.trace.method = TraceMethod::Factored;
  result.trace.termination = TerminationReason::IterLimit;
  double cost = factored_cost(obs, uv, cfg.lambda, cfg.normalize_by_m).total();
  result.best = uv;
  result.best_cost = cost;

  double step = cfg.step_base;
  for (std::size_t n = 1; n <= cfg.max_iters; ++n) {
    if (cost == 0.0) {
      result.trace.termination = TerminationReason::RelTol;
      break;
    }
    step *= cfg.step_decay;
    const FactoredPair g = factored_subgradient_at(obs, uv, cfg.lambda, cfg.normalize_by_m);
    uv.u -= step * g.u;
    uv.v -= step * g.v;
    const double next = factored_cost(obs, uv, cfg.lambda, cfg.normalize_by_m).total();
    if (next < result.best_cost) {
      result.best_cost = next;
      result.best = uv;
      result.best_iter = n;
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (cfg.record_trace) {
      TraceRow row;
      row.n = n;
      row.gamma = step;
      row.f_n = cost;
      row.raw_cost = cost;
      row.measure = std::sqrt(g.u.squaredNorm() + g.v.squaredNorm());
      row.elapsed_s = elapsed;
      row.incumbent_cost = result.best_cost;
      result.trace.rows.push_back(row);
    }
    const double rel_change = std::abs(next - cost) / std::abs(cost);
    cost = next;
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

  result.x_hat = result.best.u * result.best.v.transpose();
  result.trace.final_raw_cost = result.best_cost;
  result.trace.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

}  // namespace proxlr

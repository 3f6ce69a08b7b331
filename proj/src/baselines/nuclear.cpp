#include <chrono>
#include <cmath>
#include <span>

#include "proxlr/baselines.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/kernels.hpp"
#include "proxlr/spectral_set.hpp"

namespace proxlr {

void NuclearModelConfig::validate() const {
  if (!(t_weight >= 0.0)) throw ParameterError("NuclearModelConfig: t must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("NuclearModelConfig: beta must lie in [0, 1)");
  if (!(admm_penalty > 0.0)) throw ParameterError("NuclearModelConfig: admm_penalty must be positive");
  if (admm_max_iters < 1) throw ParameterError("NuclearModelConfig: admm_max_iters must be >= 1");
  if (!(admm_tol > 0.0)) throw ParameterError("NuclearModelConfig: admm_tol must be positive");
  if (dca_max_iters < 1) throw ParameterError("NuclearModelConfig: dca_max_iters must be >= 1");
  if (!(max_time_s > 0.0)) throw ParameterError("NuclearModelConfig: max_time_s must be positive");
  if (!(tol_rel > 0.0)) throw ParameterError("NuclearModelConfig: tol_rel must be positive");
}

std::vector<double> nuclear_t_grid() { return {0.1, 0.5}; }
std::vector<double> nuclear_beta_grid() { return {0.1, 0.5, 0.9}; }

double nuclear_lambda(double t_weight, std::size_t m, std::size_t n1, std::size_t n2) {
  return t_weight * std::sqrt(static_cast<double>(m) * static_cast<double>(n2) *
                              std::log(static_cast<double>(n1 + n2)));
}

double nuclear_model_cost(const Observation& obs, const Matrix& x, double lambda, double beta) {
  return residual_map(obs, x).lpNorm<1>() + lambda * (nuclear_norm(x) - beta * x.norm());
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vector soft_threshold(const Vector& in, double tau) {
  Vector out(in.size());
  kernels::soft_threshold({in.data(), static_cast<std::size_t>(in.size())}, tau,
                          {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

}  // namespace

struct DcaSubproblemSolver::Impl {
  const Observation& obs;
  std::size_t n1, n2, m, d;
  bool woodbury;  // factor I_m + A A^T instead of I_d + A^T A
  Eigen::LLT<Matrix> llt;

  // ADMM state, kept across calls for warm starts.
  bool started = false;
  double rho = 1.0;
  Matrix x, s, v;
  Vector z, u;
  Matrix at_z, at_u;  // A^* z, A^* u

  explicit Impl(const Observation& o)
      : obs(o), n1(o.op->n1()), n2(o.op->n2()), m(o.op->m()), d(n1 * n2), woodbury(m <= d) {
    const RowMajorMatrix& a = obs.op->rows();
    const auto k = static_cast<Eigen::Index>(woodbury ? m : d);
    Matrix gram = Matrix::Identity(k, k);
    if (woodbury) {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
    } else {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    }
    llt.compute(gram);
    if (llt.info() != Eigen::Success) throw NumericalFailure("DCA subproblem: Gram factorization failed");
  }

  // Returns X solving (A^*A + I) X = b; also writes A X into ax.
  Matrix solve_normal(const Matrix& b, Vector* ax) const {
    if (woodbury) {
      // (I + A^T A)^{-1} b = b - A^T (I + A A^T)^{-1} A b, and then A X = (I + A A^T)^{-1} A b.
      const Vector zeta = llt.solve(obs.op->forward(b));
      Matrix out = b - obs.op->adjoint(zeta);
      if (ax) *ax = zeta;
      return out;
    }
    Matrix out(b.rows(), b.cols());
    Eigen::Map<Vector>(out.data(), out.size()) = llt.solve(Eigen::Map<const Vector>(b.data(), b.size()));
    if (ax) *ax = obs.op->forward(out);
    return out;
  }

  void warm_start(const Matrix& x0) {
    x = x0;
    s = x0;
    v = Matrix::Zero(x0.rows(), x0.cols());
    z = obs.op->forward(x0);
    u = Vector::Zero(z.size());
    at_z = obs.op->adjoint(z);
    at_u = Matrix::Zero(x0.rows(), x0.cols());
    started = true;
  }
};

DcaSubproblemSolver::DcaSubproblemSolver(const Observation& obs) : impl_(std::make_unique<Impl>(obs)) {}
DcaSubproblemSolver::~DcaSubproblemSolver() = default;
DcaSubproblemSolver::DcaSubproblemSolver(DcaSubproblemSolver&&) noexcept = default;
DcaSubproblemSolver& DcaSubproblemSolver::operator=(DcaSubproblemSolver&&) noexcept = default;

Matrix DcaSubproblemSolver::solve_normal(const Matrix& b) const { return impl_->solve_normal(b, nullptr); }

void DcaSubproblemSolver::warm_start(const Matrix& x0, double rho) {
  if (static_cast<std::size_t>(x0.rows()) != impl_->n1 || static_cast<std::size_t>(x0.cols()) != impl_->n2) {
    throw DimensionError("DCA subproblem: start point has the wrong shape");
  }
  if (!(rho > 0.0)) throw ParameterError("DCA subproblem: penalty must be positive");
  impl_->rho = rho;
  impl_->warm_start(x0);
}

AdmmResult DcaSubproblemSolver::solve(const Matrix& w, double lambda, double beta,
                                      const NuclearModelConfig& cfg, double deadline_s) {
  const auto t0 = Clock::now();
  Impl& st = *impl_;
  if (static_cast<std::size_t>(w.rows()) != st.n1 || static_cast<std::size_t>(w.cols()) != st.n2) {
    throw DimensionError("DCA subproblem: W has the wrong shape");
  }
  if (!st.started) {
    st.rho = cfg.admm_penalty;
    st.warm_start(Matrix::Zero(w.rows(), w.cols()));
  }
  const Vector& y = st.obs.y;

  AdmmResult res;
  Vector ax;
  for (std::size_t k = 1; k <= cfg.admm_max_iters; ++k) {
    // X-update: rho (A^*A + I) X = lambda beta W + rho (A^*(z - u) + s - v).
    const Matrix rhs = (lambda * beta / st.rho) * w + (st.at_z - st.at_u) + (st.s - st.v);
    st.x = st.solve_normal(rhs, &ax);

    // z-update: argmin |y - z|_1 + rho/2 |A X + u - z|^2.
    const Vector z_old = st.z;
    const Matrix at_z_old = st.at_z;
    st.z = y - soft_threshold(y - (ax + st.u), 1.0 / st.rho);
    st.at_z = st.obs.op->adjoint(st.z);

    // S-update: singular value shrinkage.
    const Matrix s_old = st.s;
    st.s = singular_value_shrink(st.x + st.v, lambda / st.rho);

    // Scaled duals. A^*(A X) is reused for A^* u.
    const Vector pz = ax - st.z;
    const Matrix ps = st.x - st.s;
    st.u += pz;
    st.v += ps;
    st.at_u += st.obs.op->adjoint(ax) - st.at_z;

    const double r = std::sqrt(pz.squaredNorm() + ps.squaredNorm());
    const double s = st.rho * ((st.at_z - at_z_old) + (st.s - s_old)).norm();
    const double pri_scale = std::max({std::sqrt(ax.squaredNorm() + st.x.squaredNorm()),
                                       std::sqrt(st.z.squaredNorm() + st.s.squaredNorm()), 1.0});
    const double dual_scale = std::max(st.rho * (st.at_u + st.v).norm(), 1.0);
    res.primal_residual = r / pri_scale;
    res.dual_residual = s / dual_scale;
    res.primal_history.push_back(res.primal_residual);
    res.dual_history.push_back(res.dual_residual);
    res.iterations = static_cast<int>(k);

    if (res.primal_residual <= cfg.admm_tol && res.dual_residual <= cfg.admm_tol) {
      res.converged = true;
      break;
    }
    if (deadline_s > 0.0 && seconds_since(t0) >= deadline_s) break;

    // Residual balancing.
    if (r > 10.0 * s) {
      st.rho *= 2.0;
      st.u /= 2.0;
      st.v /= 2.0;
      st.at_u /= 2.0;
    } else if (s > 10.0 * r) {
      st.rho /= 2.0;
      st.u *= 2.0;
      st.v *= 2.0;
      st.at_u *= 2.0;
    }
  }
  res.x = st.s;
  return res;
}

NuclearResult nuclear_dca(const Observation& obs, const NuclearModelConfig& cfg) {
  const auto t0 = Clock::now();
  cfg.validate();
  const std::size_t n1 = obs.op->n1();
  const std::size_t n2 = obs.op->n2();

  NuclearResult result;
  result.lambda = nuclear_lambda(cfg.t_weight, obs.m(), n1, n2);
  result.trace.method = TraceMethod::Nuclear;
  result.trace.termination = TerminationReason::IterLimit;

  Matrix x = truncated_rank_project(obs.op->adjoint(obs.y) / static_cast<double>(obs.m()),
                                    std::min(n1, n2));
  double cost = nuclear_model_cost(obs, x, result.lambda, cfg.beta);
  result.outer_costs.push_back(cost);

  DcaSubproblemSolver sub(obs);
  sub.warm_start(x, cfg.admm_penalty);

  for (std::size_t k = 1; k <= cfg.dca_max_iters; ++k) {
    const double xn = x.norm();
    const Matrix w = xn > 0.0 ? Matrix(x / xn) : Matrix::Zero(x.rows(), x.cols());
    const double remaining = cfg.max_time_s - seconds_since(t0);
    AdmmResult inner = sub.solve(w, result.lambda, cfg.beta, cfg, std::max(remaining, 1e-3));
    if (!inner.converged) {
      result.trace.warnings.push_back("DCA step " + std::to_string(k) + ": ADMM stopped after " +
                                      std::to_string(inner.iterations) + " iterations without reaching admm_tol");
    }
    const double next = nuclear_model_cost(obs, inner.x, result.lambda, cfg.beta);
    const double elapsed = seconds_since(t0);
    if (cfg.record_trace) {
      TraceRow row;
      row.n = k;
      row.f_n = cost;
      row.f_next = next;
      row.raw_cost = cost;
      row.measure = (inner.x - x).norm();
      row.elapsed_s = elapsed;
      row.inner_iters = inner.iterations;
      row.inner_converged = inner.converged;
      result.trace.rows.push_back(row);
    }
    result.outer_costs.push_back(next);
    const double rel_change = cost != 0.0 ? std::abs(next - cost) / std::abs(cost) : 0.0;
    x = std::move(inner.x);
    cost = next;
    result.trace.iterations = k;
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
  result.trace.final_raw_cost = cost;
  result.trace.elapsed_s = seconds_since(t0);
  return result;
}

}  // namespace proxlr

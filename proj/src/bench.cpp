#include "proxlr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "proxlr/baselines.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/losses.hpp"
#include "proxlr/pvs_solver.hpp"
#include "proxlr/spectral_set.hpp"

namespace proxlr {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

enum class Stream : std::uint32_t { Left = 1, Right, Sensing, Noise, OutlierPositions, OutlierValues };

std::mt19937_64 stream_rng(std::uint64_t seed, std::size_t trial, Stream stream) {
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Matrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal(rng);
  return out;
}

}  // namespace

std::string ModelSpec::label() const {
  switch (kind) {
    case ModelKind::ProposedL1:
      return "proposed-l1";
    case ModelKind::ProposedScad:
      return "proposed-scad(theta=" + fmt_short(theta) + ")";
    case ModelKind::ProposedMcp:
      return "proposed-mcp(theta=" + fmt_short(theta) + ")";
    case ModelKind::Factored:
      return "factored(lambda=" + fmt_short(lambda) + ",step=" + fmt_short(step_base) + "x" +
             fmt_short(step_decay) + "^n)";
    case ModelKind::Nuclear:
      return "nuclear(t=" + fmt_short(t) + ",beta=" + fmt_short(beta) + ")";
  }
  return "unknown";
}

std::vector<ModelSpec> model_grid(ModelKind kind) {
  std::vector<ModelSpec> grid;
  ModelSpec base;
  base.kind = kind;
  switch (kind) {
    case ModelKind::ProposedL1:
      grid.push_back(base);
      break;
    case ModelKind::ProposedScad:
      for (double th : {2.5, 2.7, 2.9, 3.1}) {
        base.theta = th;
        grid.push_back(base);
      }
      break;
    case ModelKind::ProposedMcp:
      for (double th : {2.0, 3.0, 4.0}) {
        base.theta = th;
        grid.push_back(base);
      }
      break;
    case ModelKind::Factored:
      for (double lam : factored_lambda_grid()) {
        for (double step : factored_step_base_grid()) {
          base.lambda = lam;
          base.step_base = step;
          grid.push_back(base);
        }
      }
      break;
    case ModelKind::Nuclear:
      for (double t : nuclear_t_grid()) {
        for (double beta : nuclear_beta_grid()) {
          base.t = t;
          base.beta = beta;
          grid.push_back(base);
        }
      }
      break;
  }
  return grid;
}

void ExperimentSpec::validate() const {
  if (n1 < 1 || n2 < 1) throw ParameterError("ExperimentSpec: n1, n2 must be positive");
  if (r < 1 || r > std::min(n1, n2)) throw ParameterError("ExperimentSpec: rank must lie in [1, min(n1, n2)]");
  if (!(p_m > 0.0 && p_m <= 1.0)) throw ParameterError("ExperimentSpec: p_m must lie in (0, 1]");
  if (!(p_out >= 0.0 && p_out < 1.0)) throw ParameterError("ExperimentSpec: p_out must lie in [0, 1)");
  if (!(noise_var >= 0.0)) throw ParameterError("ExperimentSpec: noise variance must be >= 0");
  if (!(sigma_floor > 0.0)) throw ParameterError("ExperimentSpec: sigma must be positive");
  if (trials < 1) throw ParameterError("ExperimentSpec: need at least one trial");
  if (!(max_time_s > 0.0)) throw ParameterError("ExperimentSpec: max time must be positive");
  if (!(tol_rel > 0.0)) throw ParameterError("ExperimentSpec: tol must be positive");
  if (max_iters < 1) throw ParameterError("ExperimentSpec: max_iters must be >= 1");
  if (n1 * n2 * m() > kMaxSensingEntries) {
    throw ParameterError("ExperimentSpec: dense sensing operator would hold " + std::to_string(n1 * n2 * m()) +
                         " entries (cap " + std::to_string(kMaxSensingEntries) + ")");
  }
  switch (model.kind) {
    case ModelKind::ProposedScad:
      ScalarLoss::scad(model.theta);
      break;
    case ModelKind::ProposedMcp:
      ScalarLoss::mcp(model.theta);
      break;
    default:
      break;
  }
}

std::size_t ExperimentSpec::m() const {
  const auto v = static_cast<std::size_t>(std::llround(p_m * static_cast<double>(n1 * n2)));
  return std::max<std::size_t>(v, 1);
}

std::size_t ExperimentSpec::outlier_count() const {
  return static_cast<std::size_t>(std::llround(p_out * static_cast<double>(m())));
}

std::string ExperimentSpec::canonical() const {
  std::string s = "proxlr-spec-v1";
  s += ";n1=" + std::to_string(n1) + ";n2=" + std::to_string(n2) + ";r=" + std::to_string(r);
  s += ";pm=" + fmt_double(p_m) + ";pout=" + fmt_double(p_out) + ";outliers=" + to_string(outliers);
  s += ";noise_var=" + fmt_double(noise_var) + ";sigma=" + fmt_double(sigma_floor);
  s += ";seed=" + std::to_string(seed) + ";max_time=" + fmt_double(max_time_s);
  s += ";tol=" + fmt_double(tol_rel) + ";max_iters=" + std::to_string(max_iters);
  s += ";model=" + model.label();
  return s;
}

std::uint64_t ExperimentSpec::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_string(OutlierKind kind) { return kind == OutlierKind::Uniform ? "uniform" : "cauchy"; }

OutlierKind parse_outlier_kind(const std::string& text) {
  if (text == "uniform") return OutlierKind::Uniform;
  if (text == "cauchy") return OutlierKind::Cauchy;
  throw ParameterError("unknown outlier kind '" + text + "' (expected uniform or cauchy)");
}

Instance generate_instance(const ExperimentSpec& spec, std::size_t trial) {
  spec.validate();
  const std::size_t m = spec.m();
  const std::size_t d = spec.n1 * spec.n2;

  auto rng_left = stream_rng(spec.seed, trial, Stream::Left);
  auto rng_right = stream_rng(spec.seed, trial, Stream::Right);
  const Matrix u_star = gaussian_matrix(rng_left, spec.n1, spec.r);
  const Matrix v_star = gaussian_matrix(rng_right, spec.n2, spec.r);

  GroundTruth truth;
  truth.x_star = u_star * v_star.transpose();
  truth.rank = static_cast<int>(spec.r);

  auto rng_sensing = stream_rng(spec.seed, trial, Stream::Sensing);
  RowMajorMatrix rows(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  {
    std::normal_distribution<double> normal(0.0, 1.0);
    double* p = rows.data();
    for (std::size_t k = 0; k < m * d; ++k) p[k] = normal(rng_sensing);
  }
  auto op = std::make_shared<const SensingOperator>(spec.n1, spec.n2, std::move(rows));
  const Vector clean = op->forward(truth.x_star);

  auto rng_noise = stream_rng(spec.seed, trial, Stream::Noise);
  truth.noise.resize(static_cast<Eigen::Index>(m));
  {
    std::normal_distribution<double> normal(0.0, std::sqrt(spec.noise_var));
    for (std::size_t i = 0; i < m; ++i) truth.noise[static_cast<Eigen::Index>(i)] = spec.noise_var > 0.0 ? normal(rng_noise) : 0.0;
  }

  auto rng_pos = stream_rng(spec.seed, trial, Stream::OutlierPositions);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng_pos);
  const std::size_t n_out = spec.outlier_count();
  truth.outlier_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_out));
  truth.inlier_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_out), perm.end());
  std::sort(truth.outlier_idx.begin(), truth.outlier_idx.end());
  std::sort(truth.inlier_idx.begin(), truth.inlier_idx.end());

  const double omega = clean.cwiseAbs().maxCoeff();
  auto rng_val = stream_rng(spec.seed, trial, Stream::OutlierValues);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  truth.outliers.reserve(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    double u = unit(rng_val);
    if (spec.outliers == OutlierKind::Uniform) {
      truth.outliers.push_back(omega * u);
    } else {
      while (u == -1.0) u = unit(rng_val);  // open interval (-1, 1)
      truth.outliers.push_back(omega * std::tan(std::numbers::pi * u / 2.0));
    }
  }

  Vector y = clean + truth.noise;
  for (std::size_t k = 0; k < n_out; ++k) {
    const auto i = static_cast<Eigen::Index>(truth.outlier_idx[k]);
    truth.noise[i] = 0.0;
    y[i] = truth.outliers[k];
  }
  truth.validate(m);
  return {Observation(std::move(op), std::move(y)), std::move(truth)};
}

double compute_rmse(const Matrix& x_hat, const GroundTruth& truth) {
  if (x_hat.rows() != truth.x_star.rows() || x_hat.cols() != truth.x_star.cols()) {
    throw DimensionError("compute_rmse: estimate and truth have different shapes");
  }
  return (x_hat - truth.x_star).norm() / std::sqrt(static_cast<double>(x_hat.size()));
}

SolveOutcome solve_with_model(const ExperimentSpec& spec, const Observation& obs) {
  const ModelSpec& model = spec.model;
  switch (model.kind) {
    case ModelKind::ProposedL1:
    case ModelKind::ProposedScad:
    case ModelKind::ProposedMcp: {
      const ScalarLoss loss = model.kind == ModelKind::ProposedL1   ? ScalarLoss::absolute_value()
                              : model.kind == ModelKind::ProposedScad ? ScalarLoss::scad(model.theta)
                                                                      : ScalarLoss::mcp(model.theta);
      SolverConfig cfg;
      cfg.max_time_s = spec.max_time_s;
      cfg.tol_rel = spec.tol_rel;
      cfg.max_iters = spec.max_iters;
      const SpectralSet set(spec.n1, spec.n2, spec.r, spec.sigma_floor);
      SolveResult res = solve_proposed(obs, SeparableLoss{loss, obs.m()}, set, cfg);
      return {std::move(res.x_hat), std::move(res.trace)};
    }
    case ModelKind::Factored: {
      FactoredModelConfig cfg;
      cfg.lambda = model.lambda;
      cfg.step_base = model.step_base;
      cfg.step_decay = model.step_decay;
      cfg.rank = spec.r;
      cfg.max_time_s = spec.max_time_s;
      cfg.tol_rel = spec.tol_rel;
      cfg.max_iters = spec.max_iters;
      cfg.seed = spec.seed;
      FactoredResult res = factored_subgradient(obs, cfg);
      return {std::move(res.x_hat), std::move(res.trace)};
    }
    case ModelKind::Nuclear: {
      NuclearModelConfig cfg;
      cfg.t_weight = model.t;
      cfg.beta = model.beta;
      cfg.max_time_s = spec.max_time_s;
      cfg.tol_rel = spec.tol_rel;
      cfg.dca_max_iters = std::max<std::size_t>(1, std::min<std::size_t>(spec.max_iters, cfg.dca_max_iters));
      NuclearResult res = nuclear_dca(obs, cfg);
      return {std::move(res.x_hat), std::move(res.trace)};
    }
  }
  throw ParameterError("solve_with_model: unknown model");
}

TrialRecord run_trial(const ExperimentSpec& spec, std::size_t trial) {
  TrialRecord rec;
  rec.spec_hash = spec.hash();
  rec.trial = trial;
  rec.method = spec.model.label();
  const Instance inst = generate_instance(spec, trial);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SolveOutcome out = solve_with_model(spec, inst.obs);
    rec.rmse = compute_rmse(out.x_hat, inst.truth);
    rec.termination = out.trace.termination;
    rec.final_cost = out.trace.final_raw_cost;
    rec.iterations = out.trace.iterations;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;
  report.records.resize(spec.trials);

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, spec.trials);
  if (jobs == 1) {
    for (std::size_t t = 0; t < spec.trials; ++t) report.records[t] = run_trial(spec, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t t = next++; t < spec.trials; t = next++) report.records[t] = run_trial(spec, t);
      });
    }
    for (auto& w : workers) w.join();
  }

  double sum_rmse = 0.0;
  double sum_time = 0.0;
  std::size_t ok = 0;
  for (const auto& rec : report.records) {
    sum_time += rec.runtime_s;
    if (rec.failed) {
      ++report.failures;
      continue;
    }
    sum_rmse += rec.rmse;
    ++ok;
  }
  report.mean_rmse = ok > 0 ? sum_rmse / static_cast<double>(ok) : kNaN;
  report.mean_runtime_s = sum_time / static_cast<double>(spec.trials);
  return report;
}

std::vector<ExperimentReport> run_grid(const ExperimentSpec& base, const std::vector<ModelSpec>& grid,
                                       const RunOptions& options) {
  std::vector<ExperimentReport> out;
  out.reserve(grid.size());
  for (const auto& model : grid) {
    ExperimentSpec spec = base;
    spec.model = model;
    out.push_back(run_experiment(spec, options));
  }
  return out;
}

std::size_t best_report(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) throw ParameterError("best_report: no reports");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double a = reports[i].mean_rmse;
    const double b = reports[best].mean_rmse;
    if (!std::isnan(a) && (std::isnan(b) || a < b)) best = i;
  }
  return best;
}

void write_report_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
  os << "schema_version,spec_hash,n1,n2,rank,pm,pout,outliers,method,trial,rmse,termination,"
        "final_cost,iterations,status\n";
  char hash[17];
  for (const auto& rep : reports) {
    const ExperimentSpec& s = rep.spec;
    for (const auto& rec : rep.records) {
      std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(rec.spec_hash));
      os << kReportSchemaVersion << ',' << hash << ',' << s.n1 << ',' << s.n2 << ',' << s.r << ','
         << fmt_short(s.p_m) << ',' << fmt_short(s.p_out) << ',' << to_string(s.outliers) << ",\""
         << rec.method << "\"," << rec.trial << ',';
      if (rec.failed) {
        os << ",,,," << "failed\n";
        continue;
      }
      os << fmt_double(rec.rmse) << ',' << to_string(rec.termination) << ',' << fmt_double(rec.final_cost)
         << ',' << rec.iterations << ",ok\n";
    }
  }
}

void write_report_json(std::ostream& os, const std::vector<ExperimentReport>& reports) {
  using nlohmann::json;
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  json settings = json::array();
  for (const auto& rep : reports) {
    const ExperimentSpec& s = rep.spec;
    json entry;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.hash()));
    entry["spec_hash"] = hash;
    entry["method"] = s.model.label();
    entry["n1"] = s.n1;
    entry["n2"] = s.n2;
    entry["rank"] = s.r;
    entry["pm"] = s.p_m;
    entry["pout"] = s.p_out;
    entry["m"] = s.m();
    entry["outliers"] = to_string(s.outliers);
    entry["trials"] = s.trials;
    entry["seed"] = s.seed;
    entry["mean_rmse"] = std::isnan(rep.mean_rmse) ? json(nullptr) : json(rep.mean_rmse);
    entry["mean_runtime_s"] = rep.mean_runtime_s;
    entry["failures"] = rep.failures;
    json runtimes = json::array();
    for (const auto& rec : rep.records) runtimes.push_back(rec.runtime_s);
    entry["runtime_s"] = runtimes;
    json errors = json::array();
    for (const auto& rec : rep.records)
      if (rec.failed) errors.push_back({{"trial", rec.trial}, {"error", rec.error}});
    entry["errors"] = errors;
    settings.push_back(entry);
  }
  doc["settings"] = settings;
  if (!reports.empty()) {
    const std::size_t best = best_report(reports);
    doc["best"] = {{"index", best}, {"method", reports[best].spec.model.label()},
                   {"mean_rmse", std::isnan(reports[best].mean_rmse) ? json(nullptr) : json(reports[best].mean_rmse)}};
  }
  os << doc.dump(2) << '\n';
}

}  // namespace proxlr

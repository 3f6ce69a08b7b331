#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "proxlr/bench.hpp"
#include "proxlr/errors.hpp"
#include "proxlr/io.hpp"
#include "proxlr/kernels.hpp"
#include "proxlr/losses.hpp"
#include "proxlr/trace.hpp"

namespace {

using namespace proxlr;

struct ModelArgs {
  std::string model = "proposed";
  std::string loss = "scad:2.5";
  double lambda = 1.0;
  double step_decay = 0.95;
  double step_base = 1.0;
  double t = 0.1;
  double beta = 0.5;
};

void add_model_options(CLI::App& app, ModelArgs& a) {
  app.add_option("--model", a.model, "proposed | factored | nuclear")
      ->check(CLI::IsMember({"proposed", "factored", "nuclear"}))
      ->capture_default_str();
  app.add_option("--loss", a.loss, "l1 | scad:<theta> | mcp:<theta> (proposed model)")->capture_default_str();
  app.add_option("--lambda", a.lambda, "balance weight (factored)")->capture_default_str();
  app.add_option("--step", a.step_decay, "step decay q, step = base * q^n (factored)")->capture_default_str();
  app.add_option("--step-base", a.step_base, "step base (factored)")->capture_default_str();
  app.add_option("--t", a.t, "nuclear weight multiplier t")->capture_default_str();
  app.add_option("--beta", a.beta, "concave weight beta in [0,1) (nuclear)")->capture_default_str();
}

ModelSpec to_model(const ModelArgs& a) {
  ModelSpec m;
  if (a.model == "proposed") {
    const ScalarLoss loss = ScalarLoss::parse(a.loss);
    m.kind = loss.kind() == LossKind::AbsoluteValue     ? ModelKind::ProposedL1
             : loss.kind() == LossKind::Scad ? ModelKind::ProposedScad
                                             : ModelKind::ProposedMcp;
    m.theta = loss.theta();
  } else if (a.model == "factored") {
    m.kind = ModelKind::Factored;
  } else {
    m.kind = ModelKind::Nuclear;
  }
  m.lambda = a.lambda;
  m.step_decay = a.step_decay;
  m.step_base = a.step_base;
  m.t = a.t;
  m.beta = a.beta;
  return m;
}

void add_data_options(CLI::App& app, ExperimentSpec& s, std::string& outliers) {
  app.add_option("--n1", s.n1)->capture_default_str();
  app.add_option("--n2", s.n2)->capture_default_str();
  app.add_option("--rank", s.r)->capture_default_str();
  app.add_option("--pm", s.p_m, "m = round(pm n1 n2)")->capture_default_str();
  app.add_option("--pout", s.p_out, "outlier fraction of m")->capture_default_str();
  app.add_option("--outliers", outliers)->check(CLI::IsMember({"uniform", "cauchy"}))->capture_default_str();
  app.add_option("--noise-var", s.noise_var)->capture_default_str();
  app.add_option("--seed", s.seed)->capture_default_str();
}

void add_solver_options(CLI::App& app, ExperimentSpec& s) {
  app.add_option("--sigma", s.sigma_floor, "singular value floor")->capture_default_str();
  app.add_option("--max-time", s.max_time_s, "per-solve wall clock cap in seconds")->capture_default_str();
  app.add_option("--tol", s.tol_rel, "relative cost change tolerance")->capture_default_str();
  app.add_option("--max-iters", s.max_iters)->capture_default_str();
}

std::filesystem::path json_path_for(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".json");
  return p;
}

int run_bench(ExperimentSpec spec, const ModelArgs& margs, const std::string& outliers, bool grid,
              std::size_t jobs, const std::string& out, std::string json_out) {
  spec.outliers = parse_outlier_kind(outliers);
  spec.model = to_model(margs);
  std::vector<ModelSpec> models{spec.model};
  if (grid) models = model_grid(spec.model.kind);
  const std::vector<ExperimentReport> reports = run_grid(spec, models, RunOptions{jobs});

  std::size_t failures = 0;
  for (const auto& rep : reports) {
    failures += rep.failures;
    std::printf("%-48s mean_rmse=%.3e mean_runtime=%.2fs failures=%zu\n", rep.spec.model.label().c_str(),
                rep.mean_rmse, rep.mean_runtime_s, rep.failures);
  }
  if (reports.size() > 1) std::printf("best: %s\n", reports[best_report(reports)].spec.model.label().c_str());

  if (!out.empty()) {
    std::ofstream csv(out);
    if (!csv) throw std::runtime_error("cannot open " + out);
    write_report_csv(csv, reports);
    if (json_out.empty()) json_out = json_path_for(out).string();
  }
  if (!json_out.empty()) {
    std::ofstream js(json_out);
    if (!js) throw std::runtime_error("cannot open " + json_out);
    write_report_json(js, reports);
  }
  return failures > 0 ? 2 : 0;
}

int run_gen(ExperimentSpec spec, const std::string& outliers, std::size_t trial, const std::string& out) {
  spec.outliers = parse_outlier_kind(outliers);
  Instance inst = generate_instance(spec, trial);
  save_fixture(out, Fixture{inst.obs.op, inst.obs.y, inst.truth});
  std::printf("wrote %s: n1=%zu n2=%zu m=%zu outliers=%zu\n", out.c_str(), spec.n1, spec.n2, spec.m(),
              inst.truth.outlier_idx.size());
  return 0;
}

int run_solve(ExperimentSpec spec, const ModelArgs& margs, const std::string& fixture, const std::string& trace_out,
              const std::string& x_out) {
  const Fixture fx = load_fixture(fixture);
  const Observation obs = fx.observation();
  spec.n1 = obs.op->n1();
  spec.n2 = obs.op->n2();
  spec.model = to_model(margs);
  SolveOutcome res;
  try {
    res = solve_with_model(spec, obs);
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "solver failed: %s\n", e.what());
    return 2;
  }
  std::printf("method=%s termination=%s iterations=%zu final_cost=%.17g elapsed=%.3fs\n",
              spec.model.label().c_str(), std::string(to_string(res.trace.termination)).c_str(), res.trace.iterations,
              res.trace.final_raw_cost, res.trace.elapsed_s);
  if (fx.truth) std::printf("rmse=%.6e\n", compute_rmse(res.x_hat, *fx.truth));
  for (const auto& w : res.trace.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!trace_out.empty()) {
    std::ofstream os(trace_out);
    if (!os) throw std::runtime_error("cannot open " + trace_out);
    write_trace_csv(os, res.trace);
  }
  if (!x_out.empty()) {
    std::ofstream os(x_out);
    if (!os) throw std::runtime_error("cannot open " + x_out);
    const Eigen::IOFormat csv(Eigen::FullPrecision, Eigen::DontAlignCols, ",", "\n");
    os << res.x_hat.format(csv) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust low-rank matrix recovery with a spectral floor"};
  app.require_subcommand(1);
  std::string isa;
  app.add_option("--isa", isa, "force kernel variant: scalar | avx2 | neon");

  ExperimentSpec spec;
  ModelArgs margs;
  std::string outliers = "uniform";

  auto* bench = app.add_subcommand("bench", "run Monte Carlo trials and write a report");
  add_data_options(*bench, spec, outliers);
  add_solver_options(*bench, spec);
  add_model_options(*bench, margs);
  bench->add_option("--trials", spec.trials)->capture_default_str();
  bool grid = false;
  std::size_t jobs = 1;
  std::string out;
  std::string json_out;
  bench->add_flag("--grid", grid, "sweep the hyperparameter grid of the chosen model family");
  bench->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  bench->add_option("--out", out, "report CSV");
  bench->add_option("--json", json_out, "summary JSON (default: next to --out)");

  auto* gen = app.add_subcommand("gen", "write one synthetic instance as a fixture");
  add_data_options(*gen, spec, outliers);
  std::size_t trial = 0;
  std::string fixture_out;
  gen->add_option("--trial", trial)->capture_default_str();
  gen->add_option("--out", fixture_out, "fixture path (.json for JSON, binary otherwise)")->required();

  auto* solve = app.add_subcommand("solve", "run one solver on a fixture");
  std::string fixture_in;
  std::string trace_out;
  std::string x_out;
  solve->add_option("--fixture", fixture_in)->required()->check(CLI::ExistingFile);
  solve->add_option("--rank", spec.r)->capture_default_str();
  add_solver_options(*solve, spec);
  add_model_options(*solve, margs);
  solve->add_option("--trace", trace_out, "per-iteration trace CSV");
  solve->add_option("--x-out", x_out, "estimate as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty()) {
      if (isa == "scalar")
        kernels::force_isa(kernels::Isa::Scalar);
      else if (isa == "avx2")
        kernels::force_isa(kernels::Isa::Avx2);
      else if (isa == "neon")
        kernels::force_isa(kernels::Isa::Neon);
      else
        throw ParameterError("unknown --isa '" + isa + "'");
    }
    if (*bench) return run_bench(spec, margs, outliers, grid, jobs, out, json_out);
    if (*gen) return run_gen(spec, outliers, trial, fixture_out);
    return run_solve(spec, margs, fixture_in, trace_out, x_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

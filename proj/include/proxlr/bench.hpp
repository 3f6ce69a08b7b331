#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "proxlr/sensing.hpp"
#include "proxlr/trace.hpp"
#include "proxlr/types.hpp"

namespace proxlr {

enum class OutlierKind { Uniform, Cauchy };

enum class ModelKind { ProposedL1, ProposedScad, ProposedMcp, Factored, Nuclear };

/// A model plus the hyperparameters it uses; unused fields are ignored.
struct ModelSpec {
  ModelKind kind = ModelKind::ProposedScad;
  double theta = 2.5;      // SCAD / MCP
  double lambda = 1.0;     // factored balance weight
  double step_base = 1.0;  // factored
  double step_decay = 0.95;
  double t = 0.1;          // nuclear
  double beta = 0.5;       // nuclear

  /// e.g. "proposed-scad(theta=2.5)", "factored(lambda=1,step=1)".
  std::string label() const;
};

/// The hyperparameter grid used for a model family (SCAD/MCP theta,
/// factored lambda x step_base, nuclear t x beta). ProposedL1 has one point.
std::vector<ModelSpec> model_grid(ModelKind kind);

/// Dense sensing storage cap: n1 * n2 * m doubles.
inline constexpr std::size_t kMaxSensingEntries = std::size_t{1} << 27;  // 1 GiB

struct ExperimentSpec {
  std::size_t n1 = 40;
  std::size_t n2 = 50;
  std::size_t r = 5;
  double p_m = 0.5;
  double p_out = 0.5;
  OutlierKind outliers = OutlierKind::Uniform;
  double noise_var = 1e-6;
  ModelSpec model;
  double sigma_floor = 1.0;
  std::size_t trials = 10;
  std::uint64_t seed = 42;
  double max_time_s = 60.0;
  double tol_rel = 1e-9;
  std::size_t max_iters = 200000;

  /// Throws ParameterError on an invalid field or when the sensing
  /// operator would exceed kMaxSensingEntries.
  void validate() const;

  std::size_t m() const;              // round(p_m n1 n2), at least 1
  std::size_t outlier_count() const;  // round(p_out m)

  /// Canonical text form of the data-defining fields and the model; stable
  /// across runs and platforms.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;
};

struct Instance {
  Observation obs;
  GroundTruth truth;
};

/// Deterministic in (spec.seed, trial). Each random component (U*, V*, A,
/// noise, outlier positions, outlier values) has its own stream, so the data
/// never depends on the solver or on the order trials are run in.
Instance generate_instance(const ExperimentSpec& spec, std::size_t trial);

/// |x_hat - X*|_F / sqrt(n1 n2).
double compute_rmse(const Matrix& x_hat, const GroundTruth& truth);

struct TrialRecord {
  std::uint64_t spec_hash = 0;
  std::size_t trial = 0;
  std::string method;
  double rmse = kNaN;
  double runtime_s = 0.0;
  TerminationReason termination = TerminationReason::IterLimit;
  double final_cost = kNaN;
  std::size_t iterations = 0;
  bool failed = false;
  std::string error;
};

struct SolveOutcome {
  Matrix x_hat;
  SolverTrace trace;
};

/// Runs the spec's model on one observation with the spec's stopping rule.
SolveOutcome solve_with_model(const ExperimentSpec& spec, const Observation& obs);

/// Generates trial `trial` and solves it; solver exceptions are captured in
/// the record.
TrialRecord run_trial(const ExperimentSpec& spec, std::size_t trial);

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<TrialRecord> records;
  double mean_rmse = kNaN;     // over successful trials
  double mean_runtime_s = kNaN;
  std::size_t failures = 0;
};

struct RunOptions {
  std::size_t jobs = 1;  // worker threads
};

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// One report per grid point, same data (seed) for all of them.
std::vector<ExperimentReport> run_grid(const ExperimentSpec& base, const std::vector<ModelSpec>& grid,
                                       const RunOptions& options = {});

/// Index of the report with the smallest mean RMSE.
std::size_t best_report(const std::vector<ExperimentReport>& reports);

inline constexpr int kReportSchemaVersion = 1;

/// One row per (setting, trial). Wall-clock runtime is not part of the CSV
/// so that fixed-seed reruns compare byte-for-byte; it lives in the JSON summary.
void write_report_csv(std::ostream& os, const std::vector<ExperimentReport>& reports);

/// Means, per-trial runtimes and the best grid point.
void write_report_json(std::ostream& os, const std::vector<ExperimentReport>& reports);

std::string to_string(OutlierKind kind);
OutlierKind parse_outlier_kind(const std::string& text);

}  // namespace proxlr

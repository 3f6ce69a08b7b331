#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace proxlr {

enum class TerminationReason { RelTol, TimeLimit, IterLimit };

std::string_view to_string(TerminationReason reason);

enum class TraceMethod { Proposed, Factored, Nuclear };

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One iteration of any solver. Columns that do not apply to a method stay NaN.
struct TraceRow {
  std::size_t n = 0;
  double mu = kNaN;
  double gamma = kNaN;
  int backtracks = 0;
  double f_n = kNaN;       // smoothed objective at x_n (proposed), model cost otherwise
  double f_next = kNaN;    // F_n(x_{n+1}), same smoothing level as f_n
  double raw_cost = kNaN;  // unsmoothed model cost at x_n
  double measure = kNaN;   // |x_n - x_{n+1}| / gamma_n
  double elapsed_s = 0.0;
  // factored subgradient
  double incumbent_cost = kNaN;
  // nuclear DCA
  int inner_iters = 0;
  bool inner_converged = true;
};

struct SolverTrace {
  TraceMethod method = TraceMethod::Proposed;
  std::vector<TraceRow> rows;
  TerminationReason termination = TerminationReason::IterLimit;
  std::size_t iterations = 0;
  double final_raw_cost = kNaN;
  double elapsed_s = 0.0;
  std::vector<std::string> warnings;
};

/// Columns n,mu,gamma,backtracks,F_n,raw_cost,measure,elapsed_s, followed by
/// incumbent_cost (factored) or inner_iters,inner_converged (nuclear).
/// NaN cells are left empty.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);

}  // namespace proxlr

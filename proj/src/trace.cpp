#include "proxlr/trace.hpp"

#include <cmath>
#include <ostream>

namespace proxlr {

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::RelTol:
      return "RelTol";
    case TerminationReason::TimeLimit:
      return "TimeLimit";
    case TerminationReason::IterLimit:
      return "IterLimit";
  }
  return "Unknown";
}

namespace {

struct Cell {
  double v;
};

std::ostream& operator<<(std::ostream& os, Cell c) {
  if (!std::isnan(c.v)) os << c.v;
  return os;
}

}  // namespace

void write_trace_csv(std::ostream& os, const SolverTrace& trace) {
  const auto old_precision = os.precision(17);
  os << "n,mu,gamma,backtracks,F_n,raw_cost,measure,elapsed_s";
  if (trace.method == TraceMethod::Factored) os << ",incumbent_cost";
  if (trace.method == TraceMethod::Nuclear) os << ",inner_iters,inner_converged";
  os << '\n';
  for (const auto& r : trace.rows) {
    os << r.n << ',' << Cell{r.mu} << ',' << Cell{r.gamma} << ',' << r.backtracks << ','
       << Cell{r.f_n} << ',' << Cell{r.raw_cost} << ',' << Cell{r.measure} << ',' << r.elapsed_s;
    if (trace.method == TraceMethod::Factored) os << ',' << Cell{r.incumbent_cost};
    if (trace.method == TraceMethod::Nuclear) os << ',' << r.inner_iters << ',' << (r.inner_converged ? 1 : 0);
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace proxlr

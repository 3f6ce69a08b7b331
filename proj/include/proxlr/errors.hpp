#pragma once

#include <stdexcept>
#include <string>

namespace proxlr {

/// Shapes or lengths of operands disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter lies outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-supplied state violates an operation's precondition
/// (e.g. an infeasible starting point).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input sits exactly where the operation is undefined.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative routine failed in a way that indicates a bug upstream
/// (wrong gradient, broken projection) rather than a hard problem.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A serialized fixture is truncated, corrupt or of an unknown version.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace proxlr

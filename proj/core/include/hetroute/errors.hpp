#ifndef HETROUTE_ERRORS_HPP
#define HETROUTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hetroute {

/// Malformed input file (bad JSON, wrong field types). The message carries
/// file and field context.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally well-formed input that violates a model invariant
/// (negative throughput, unknown node, uncovered link, ...). The message
/// names the violated invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: NaN states, step-size underflow, singular systems
/// that have no fallback, eigen-solver breakdown.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was invoked on inputs outside its stated precondition
/// (e.g. Lyapunov monitoring of a game without potential structure).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hetroute

#endif

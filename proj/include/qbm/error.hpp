#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qbm {

/// A model or configuration violates one of its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed model/config text. Carries the 1-based line number (0 if the
/// problem is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string{}) +
                           ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Root bracketing or refinement failed.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach the requested tolerance, or an
/// oscillatory rule was asked for a time beyond its phase resolution.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double error_estimate = 0.0)
      : std::runtime_error(what), error_estimate_(error_estimate) {}
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

/// A value cannot be represented (e.g. thermal occupancy as beta*omega -> 0).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// A fit window is unusable (too few points, non-positive data).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qbm

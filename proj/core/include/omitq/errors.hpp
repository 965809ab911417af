// Exception types shared across the library. The CLI maps these to exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace omitq {

// Operator/state built or combined with mismatched dimensions.
struct InvalidDimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Time integration left its validity envelope (trace drift, stationarity
// never reached, ...).
struct IntegrationFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Demodulation window does not cover a whole number of beat periods.
struct WindowAlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The vectorized generator has a null space of dimension > 1 at tolerance.
struct AmbiguousSteadyStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shifted linear-response system is singular (beat frequency on a resonance).
struct ResonanceDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncation growth exceeded the configured ceiling.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too few grid points inside an analysis window.
struct InsufficientResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file problems; line is 1-based, 0 when not tied to a line.
struct ConfigError : std::runtime_error {
  int line;
  explicit ConfigError(const std::string& what, int line_number = 0)
      : std::runtime_error(what), line(line_number) {}
};

}  // namespace omitq

#pragma once

#include <stdexcept>
#include <string>

namespace contactlab {

/// Contact condition violated numerically (rank-deficient stacked system,
/// singular frame matrix, ...).
struct degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input to an operation (non-closing loop, too few samples, ...).
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A re-verification step measured a residual above its bound.
struct verification_error : std::runtime_error {
  double residual;
  verification_error(const std::string& what, double r)
      : std::runtime_error(what), residual(r) {}
};

struct integration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct optimization_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace contactlab

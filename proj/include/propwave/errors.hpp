#pragma once

#include <stdexcept>

namespace propwave {

// invalid configuration or parameter document
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// the model admits no solution in the requested regime (bracket failures,
// inadmissible slopes, expansion limits)
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a numerical stage failed (integrator breakdown, Newton stagnation)
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace propwave

#pragma once

#include <stdexcept>
#include <string>

namespace crsched {

// Invalid configuration or parameter set (CLI exit code 1).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A caller broke a documented precondition.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Queueing formula evaluated outside its stability region.
struct UnstableError : std::domain_error {
  using std::domain_error::domain_error;
};

// No stable (priority, power) configuration exists on the grid (exit code 2).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A frame outgrew the configured guard (exit code 3).
struct NonTerminationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace crsched

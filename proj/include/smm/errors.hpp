#pragma once

#include <stdexcept>
#include <string>

namespace smm {

/// Invalid parameters or malformed input (CLI exit code 1).
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A checked model invariant failed during a run (CLI exit code 2).
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Monte Carlo conditioning could not be met at a usable rate (CLI exit code 3).
class MonteCarloAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace smm

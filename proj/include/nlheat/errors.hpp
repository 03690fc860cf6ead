#pragma once

#include <stdexcept>
#include <string>

namespace nlheat {

// Invalid user-facing configuration (grid shape, timestep, CLI values).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A read of a field value that was never delivered. Always a scheduling bug.
class MissingValueError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Cross-node protocol violation detected by the simulated runtime
// (undeliverable ghost data, plan/ownership mismatch).
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Balancer precondition failure (zero busy time, disconnected node graph).
class BalanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlheat

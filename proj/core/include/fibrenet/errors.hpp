#pragma once

#include <stdexcept>
#include <string>

namespace fibrenet {

// Malformed or inconsistent scenario/config input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulated loop diverged or lost lock.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibrenet

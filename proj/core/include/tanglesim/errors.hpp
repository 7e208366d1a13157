#pragma once

#include <stdexcept>
#include <string>

namespace tanglesim {

// Invalid experiment configuration: bad key, missing key, value out of range.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Broken runtime invariant or an aborted run. Not recoverable mid-run.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failed file write or filesystem operation.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void sim_check(bool cond, const char* msg) {
  if (!cond) throw SimError(msg);
}

}  // namespace tanglesim

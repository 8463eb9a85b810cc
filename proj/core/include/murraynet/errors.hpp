#pragma once

#include <stdexcept>
#include <string>

namespace murraynet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// hard shape violations: bad node index, self-loop, duplicate edge,
// nonpositive length, negative conductivity
struct StructuralError : Error {
  using Error::Error;
};

// positive-conductivity subgraph splits into components whose sources
// do not balance component-wise
struct DisconnectedGraph : Error {
  using Error::Error;
};

struct NonConvergence : Error {
  NonConvergence(const std::string& msg, double achieved_residual)
      : Error(msg), achieved(achieved_residual) {}
  double achieved;
};

struct NotATree : Error {
  using Error::Error;
};

struct ZeroConductivity : Error {
  using Error::Error;
};

struct EmptySubdomain : Error {
  using Error::Error;
};

struct BisectionFailure : Error {
  using Error::Error;
};

// bad run parameters (gamma/nu/tolerance ranges, unknown presets, ...)
struct ConfigError : Error {
  using Error::Error;
};

// malformed input files; message carries path and, where known, line
struct InputError : Error {
  using Error::Error;
};

}  // namespace murraynet

#pragma once

#include <stdexcept>
#include <string>

namespace klemu {

// Error taxonomy mirrors the CLI exit-code contract:
//   UsageError -> 1, DataError -> 2, NumericalError -> 3.

/// Bad invocation: unknown flags, missing arguments, malformed config.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent data: broken invariants, out-of-domain inputs,
/// malformed or mismatched artifacts.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular systems, non-converging eigensolver,
/// irreparably ill-conditioned kernel matrices.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace klemu

#pragma once

#include <stdexcept>
#include <string>

namespace triqnet {

// Caller misuse: bad arguments, dimension mismatches, malformed input files.
// The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure: integrator divergence, non-convergent eigensolver.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace triqnet

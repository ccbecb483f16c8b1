#pragma once

#include <stdexcept>

namespace grls {

// Invalid input: malformed files, shape mismatches, bad labels, out-of-range
// indices, invalid parameter values. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerically degenerate computation: failed factorizations, non-positive
// leverage denominators, detected state drift. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace grls

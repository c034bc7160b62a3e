#pragma once

#include <stdexcept>
#include <string>

namespace pixsteg {

// Bad or missing input data: unreadable files, malformed containers,
// mismatched dimensions. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite activations, losses or gradients. The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pixsteg

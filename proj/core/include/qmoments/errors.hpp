#pragma once

#include <stdexcept>
#include <string>

namespace qmoments {

/// A precondition on an argument was violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The request is well formed but exceeds a memory or enumeration cap.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operation is not defined for this parameter combination.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qmoments

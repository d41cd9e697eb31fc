#pragma once

#include <stdexcept>
#include <string>

namespace rw {

// Malformed or invalid user input (model files, flags). CLI exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A computation would exceed the configured memory or enumeration cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric sequence violated an invariant it must satisfy (e.g. a negative
// first-return probability emerging from inversion).
class InconsistentSequence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rw

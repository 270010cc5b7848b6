#pragma once

#include <stdexcept>
#include <string>

namespace adgen {

// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by loaders when an input file violates its format or an invariant.
class InputError : public Error {
 public:
  using Error::Error;
};

// Raised when a function is called with arguments outside its contract.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace adgen

#pragma once

#include <stdexcept>
#include <string>

namespace hdloc {

// Base of every error raised by the library. exit_code() is the CLI status
// the error maps to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

// Bad arguments, malformed files, unsupported dimensions.
class InvalidInput : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

// The data cannot support the computation (zero radii with negative weight
// exponents, constant columns, non-positive variance estimates).
class DegenerateData : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

}  // namespace hdloc

#pragma once

#include <stdexcept>
#include <string>

namespace mrfuse {

// Base class for every structured error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible operand shapes; the message names both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter value (bad downsampling ratio, kappa outside (0,1), ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Numerical contract violated: NaN/Inf/negative entry, domain error,
// or a non-monotone optimizer step.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrfuse

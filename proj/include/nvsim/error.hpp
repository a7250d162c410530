#pragma once

#include <stdexcept>
#include <string>

namespace nvsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation (bad spin value, unknown subsystem, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant (Hermiticity, trace, positivity, unitarity) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration file rejected; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvsim

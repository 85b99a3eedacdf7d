#pragma once

#include <stdexcept>
#include <string>

namespace cfhb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or parameter set violates a documented invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operating point cannot be realized (duty out of range, timing overflow).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A scheme was used without the per-interval values it needs.
class MissingParameterError : public Error {
 public:
  using Error::Error;
};

}  // namespace cfhb

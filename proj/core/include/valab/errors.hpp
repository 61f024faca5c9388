#pragma once

#include <stdexcept>
#include <string>

namespace valab {

/// Invalid dimensions, probabilities or hyper-parameters passed to an API.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An API called in a mode it does not support (e.g. TD update in control mode).
class MisuseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numerical failure that should be impossible for valid inputs.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace valab

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cqg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Identifier that is neither a coordinate, a bound constant nor a builtin.
class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t position)
      : ParseError("unknown identifier '" + name + "'", position),
        name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Evaluation left the domain of a builtin (log of non-positive, division
/// by zero, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Metric singular or too ill-conditioned to invert.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Group chart evaluated at (or too close to) a coordinate singularity.
class ChartError : public Error {
 public:
  using Error::Error;
};

/// Velocity outside the cone where the homogeneous Lagrangian is real.
class ConeError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration problem. The message carries the key path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cqg

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reebpa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in an expression; `offset` is the byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnboundVariable : public Error {
 public:
  using Error::Error;
};

/// Division by zero, sqrt of a negative value, or any other non-finite result.
class DomainError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// G + H_chi <= 0 where a Reeb field was requested.
class NonContactPoint : public Error {
 public:
  using Error::Error;
};

class NoEpsilonFound : public Error {
 public:
  using Error::Error;
};

class StepFailure : public Error {
 public:
  using Error::Error;
};

class NoReturn : public Error {
 public:
  explicit NoReturn(double horizon)
      : Error("no return to section before horizon " + std::to_string(horizon)),
        horizon_(horizon) {}
  double horizon() const { return horizon_; }

 private:
  double horizon_;
};

class NotTransverse : public Error {
 public:
  using Error::Error;
};

class DegenerateCircle : public Error {
 public:
  using Error::Error;
};

class Degenerate : public Error {
 public:
  using Error::Error;
};

class IncompleteCensus : public Error {
 public:
  using Error::Error;
};

class MixedClass : public Error {
 public:
  using Error::Error;
};

class CaseMismatch : public Error {
 public:
  using Error::Error;
};

class NonPrimitive : public Error {
 public:
  using Error::Error;
};

/// Config schema violation; `pointer` is a JSON pointer to the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace reebpa

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sprl {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the command-line tool reports for this error family.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  int exit_code() const noexcept override { return 2; }

 private:
  std::size_t line_;
};

/// Data-integrity violation (missing annotations, empty inputs, ...).
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class LoadError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Raised when a training loss becomes non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& instance_id, double loss)
      : Error("non-finite loss (" + std::to_string(loss) + ") on instance " + instance_id),
        instance_id_(instance_id) {}
  const std::string& instance_id() const noexcept { return instance_id_; }
  int exit_code() const noexcept override { return 3; }

 private:
  std::string instance_id_;
};

}  // namespace sprl

#pragma once

#include <stdexcept>
#include <string>

namespace entroheat {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kTransport = 4,
  kValidation = 5,
};

/// Base class for every error raised by the library. Each subclass maps to
/// one exit code so the CLI can report failures uniformly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Malformed input text (bad JSON, wrong field types). Carries the 1-based
/// line number when the input is line oriented, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }

 private:
  std::size_t line_;
};

/// Well-formed input whose shape is wrong (non-contiguous token indices,
/// mismatched lengths, mixed documents).
class StructuralError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
};

/// A value violates a numeric invariant (logprob > 0, mass > 1).
class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
};

/// An argument is outside the domain of an operation (W > n, alpha >= 100).
class DomainError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

/// Raised before any request is built: missing image, missing credential.
class StartupError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what)
      : Error(status > 0 ? "HTTP " + std::to_string(status) + ": " + what : what),
        status_(status) {}
  int status() const noexcept { return status_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kTransport; }

 private:
  int status_;
};

/// The endpoint answered but the response lacks token log-probabilities.
class CapabilityError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kTransport; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

}  // namespace entroheat

#pragma once

#include <stdexcept>
#include <string>

namespace amp {

// Failure categories surfaced by the library. The CLI maps each kind to a
// stable exit code and a one-line machine-parsable message.
enum class ErrorKind {
  kInvalidArgument,
  kContractViolation,
  kNumericFailure,
  kProtocolViolation,
  kProtocolFailure,
  kParseError,
  kOutOfDomain,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorKind::kContractViolation, what) {}
};

class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, long long step)
      : Error(ErrorKind::kNumericFailure, what), step_(step) {}

  // Index of the offending engine step or training iteration.
  long long step() const { return step_; }

 private:
  long long step_;
};

class ProtocolViolation : public Error {
 public:
  explicit ProtocolViolation(const std::string& what)
      : Error(ErrorKind::kProtocolViolation, what) {}
};

class ProtocolFailure : public Error {
 public:
  explicit ProtocolFailure(const std::string& what)
      : Error(ErrorKind::kProtocolFailure, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, long long line, const std::string& what)
      : Error(ErrorKind::kParseError,
              file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  long long line() const { return line_; }

 private:
  long long line_;
};

class OutOfDomain : public Error {
 public:
  explicit OutOfDomain(const std::string& what)
      : Error(ErrorKind::kOutOfDomain, what) {}
};

}  // namespace amp

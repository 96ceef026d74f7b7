#pragma once

#include <stdexcept>
#include <string>

namespace psforge {

// Base class for all errors raised by the library. Subclasses map to
// distinct CLI exit codes (see commands.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (bad token, wrong field count). Carries the file
// label and 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_ = 0;
};

// Structurally valid input that violates cross-reference or value
// invariants (dangling ids, zero quaternion, out-of-bounds keypoint).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (non-unit vector, wrong patch
// size, margin <= 0, index out of range).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of an operation, e.g. a patch
// behind the camera.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Corrupt or mismatched binary file (bad magic, unsupported version).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Row counts of files that must be aligned disagree.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Not enough data to satisfy a request (e.g. batch size > tracks).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace psforge

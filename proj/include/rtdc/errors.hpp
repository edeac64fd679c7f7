#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rtdc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A proposed cut lands on an exactly zero off-diagonal entry; the matrix is
/// already block diagonal there and must be split into independent problems.
class DecoupledMatrix : public Error {
 public:
  DecoupledMatrix(std::size_t position, const std::string& what)
      : Error(what), position_(position) {}
  /// 0-based index into the off-diagonal array.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class PoleError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class RootExtractionError : public Error {
 public:
  using Error::Error;
};

class DegenerateSystemError : public Error {
 public:
  using Error::Error;
};

/// Raised when an internal invariant fails (for example roots that do not
/// interlace the poles they were computed for).
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtdc

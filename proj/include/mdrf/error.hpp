#pragma once

#include <stdexcept>
#include <string>

namespace mdrf {

enum class ErrorCode {
  invalid_argument = 1,
  out_of_range = 2,
  numeric = 3,
  config = 4,
  io = 5,
};

/// Base exception for every failure raised by the library. The code is what
/// the C API hands back to callers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::invalid_argument, what) {}
};

/// A threshold or tilt beyond the trust region. Carries the boundary that was
/// crossed, in the same units as the request.
class OutOfRange : public Error {
 public:
  OutOfRange(const std::string& what, double boundary)
      : Error(ErrorCode::out_of_range, what), boundary_(boundary) {}
  double boundary() const noexcept { return boundary_; }

 private:
  double boundary_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

/// Schema violation in a run configuration; line is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(ErrorCode::config, line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace mdrf

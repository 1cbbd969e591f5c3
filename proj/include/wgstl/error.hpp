#pragma once

#include <stdexcept>
#include <string>

namespace wgstl {

// Base class for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, inconsistent shapes, unknown ids.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numeric breakdown during evaluation or training (NaN/Inf loss, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& msg, int line, int column)
      : ValidationError(std::to_string(line) + ":" + std::to_string(column) +
                        ": " + msg),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace wgstl

#pragma once

#include <stdexcept>
#include <string>

namespace kt {

/// Base of every error raised by the workbench.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact arithmetic grew past the configured coefficient size.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// A total derivative would exceed the configured maximum jet order.
class OrderLimitError : public Error {
 public:
  using Error::Error;
};

/// Evaluation hit a variable or function with no bound value.
class UnboundError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside a function's domain (sqrt of a negative, 1/0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a coframe (nondegeneracy, time-like section) failed.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A result contradicted a structural guarantee; never expected.
class InternalLogicError : public Error {
 public:
  using Error::Error;
};

/// Ill-formed theory declaration (undeclared symbol, duplicate field, ...).
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace kt

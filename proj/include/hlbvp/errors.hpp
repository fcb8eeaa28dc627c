#ifndef HLBVP_ERRORS_HPP
#define HLBVP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hlbvp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Syntax error in an expression, with a 0-based character position.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

// Non-finite value or domain violation while evaluating an expression.
struct EvalError : Error {
  EvalError(const std::string& what, std::string subexpr)
      : Error(what + " in subexpression: " + subexpr), subexpression(std::move(subexpr)) {}
  std::string subexpression;
};

struct ConfigError : Error {
  using Error::Error;
};

// k^2 - 4M >= 0: the shifted operator has no oscillatory kernel.
struct NonOscillatoryError : Error {
  using Error::Error;
};

// Kernel denominator below tolerance; pick a different (k, M).
struct DegenerateShiftError : Error {
  using Error::Error;
};

struct QuadratureError : Error {
  using Error::Error;
};

}  // namespace hlbvp

#endif

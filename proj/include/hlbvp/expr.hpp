#ifndef HLBVP_EXPR_HPP
#define HLBVP_EXPR_HPP

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hlbvp/errors.hpp"

namespace hlbvp::expr {

// Immutable arithmetic expression over a fixed variable set.
//
// Grammar: decimal literals (optional exponent), variables, + - * / ^
// (^ binds tightest and is right-associative, then unary minus, then * /,
// then + -), calls sin cos tan exp log sqrt abs atan (unary) and min max
// (binary), constants pi and e, parentheses.
//
// Expressions are immutable after parsing; evaluation is reentrant.
class Expression {
 public:
  Expression() = default;

  // Values in the same order as variables(). Throws EvalError on any
  // non-finite intermediate (division by zero, log of non-positive,
  // sqrt of a negative, negative base with non-integer exponent, overflow).
  double operator()(std::span<const double> values) const;
  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }
  double operator()(const std::map<std::string, double>& bindings) const;

  const std::vector<std::string>& variables() const;

  // Round-trippable text form: parse(str(), variables()) evaluates
  // identically on every input.
  std::string str() const;

  bool valid() const { return impl_ != nullptr; }

 private:
  friend Expression parse(std::string_view, std::vector<std::string>);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Throws ParseError (syntax, with position; unknown identifier; arity
// mismatch). allowed_vars is the declared variable set; values passed to
// operator() follow its order.
Expression parse(std::string_view source, std::vector<std::string> allowed_vars);

}  // namespace hlbvp::expr

#endif

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "hlbvp/expr.hpp"

using namespace hlbvp;

TEST_CASE("operator precedence") {
  CHECK(expr::parse("1+2*3", {})({}) == 7.0);
  CHECK(expr::parse("2^3^2", {})({}) == 512.0);  // right-associative
  CHECK(expr::parse("2-3-4", {})({}) == -5.0);   // left-associative
  CHECK(expr::parse("-2^2", {})({}) == -4.0);    // unary minus binds below ^
  CHECK(expr::parse("2*-3", {})({}) == -6.0);
  CHECK(expr::parse("6/3/2", {})({}) == 1.0);
}

TEST_CASE("reference nonlinearity and lower solution evaluate as expected") {
  auto f = expr::parse("(2+sin(t))/1000*exp(-abs(x))*abs(1-x)/(x^2+1)*(y-1)", {"t", "x", "y"});
  CHECK(f({0.0, 0.0, 0.0}) == -0.002);

  auto alpha = expr::parse("-(t+1)*exp(-t)*3/400 + 3/400*(t^2-t)/(t^2+1)", {"t"});
  CHECK(alpha({0.0}) == -0.0075);
}

TEST_CASE("constants and functions") {
  CHECK(expr::parse("sin(pi)", {})({}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(expr::parse("log(e)", {})({}) == doctest::Approx(1.0));
  CHECK(expr::parse("min(3, max(1, 2))", {})({}) == 2.0);
  CHECK(expr::parse("atan(1)*4", {})({}) == doctest::Approx(3.14159265358979324));
  CHECK(expr::parse("2.5e-1", {})({}) == 0.25);
}

TEST_CASE("errors carry positions and subexpressions") {
  CHECK_THROWS_AS(expr::parse("", {}), ParseError);
  CHECK_THROWS_AS(expr::parse("sin(q)", {"t"}), ParseError);   // unknown identifier
  CHECK_THROWS_AS(expr::parse("min(1)", {}), ParseError);      // arity
  CHECK_THROWS_AS(expr::parse("sin(1,2)", {}), ParseError);    // arity
  CHECK_THROWS_AS(expr::parse("(1+2", {}), ParseError);        // syntax
  CHECK_THROWS_AS(expr::parse("1+2)", {}), ParseError);        // trailing

  try {
    expr::parse("1 + bogus7", {"t"});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 4);
  }

  auto pole = expr::parse("1/t", {"t"});
  CHECK_THROWS_AS(pole({0.0}), EvalError);
  try {
    pole({0.0});
  } catch (const EvalError& e) {
    CHECK(e.subexpression.find("1/t") != std::string::npos);
  }

  CHECK_THROWS_AS(expr::parse("log(t)", {"t"})({-1.0}), EvalError);
  CHECK_THROWS_AS(expr::parse("sqrt(t)", {"t"})({-4.0}), EvalError);
  CHECK_THROWS_AS(expr::parse("t^0.5", {"t"})({-4.0}), EvalError);  // negative base
  CHECK(expr::parse("t^2", {"t"})({-4.0}) == 16.0);                  // integer exponent fine
  CHECK_THROWS_AS(expr::parse("exp(t)", {"t"})({1.0e4}), EvalError);  // overflow
}

namespace {

// random tree in variables {a, b} for the round-trip property
std::string random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  switch (pick(rng)) {
    case 0: {
      std::uniform_real_distribution<double> lit(0.0, 9.5);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", lit(rng));
      return buf;
    }
    case 1:
      return "a";
    case 2:
      return "b";
    case 3:
      return "(" + random_tree(rng, depth - 1) + "+" + random_tree(rng, depth - 1) + ")";
    case 4:
      return "(" + random_tree(rng, depth - 1) + "-" + random_tree(rng, depth - 1) + ")";
    case 5:
      return "(" + random_tree(rng, depth - 1) + "*" + random_tree(rng, depth - 1) + ")";
    case 6:
      return "sin(" + random_tree(rng, depth - 1) + ")";
    case 7:
      return "-" + random_tree(rng, depth - 1);
    case 8:
      return "max(" + random_tree(rng, depth - 1) + "," + random_tree(rng, depth - 1) + ")";
    default:
      return "abs(" + random_tree(rng, depth - 1) + ")";
  }
}

}  // namespace

TEST_CASE("print-parse round trip is evaluation-equivalent on 1000 random inputs") {
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> input(-3.0, 3.0);
  int inputs_checked = 0;
  for (int tree = 0; tree < 50; ++tree) {
    const std::string src = random_tree(rng, 4);
    auto e1 = expr::parse(src, {"a", "b"});
    auto e2 = expr::parse(e1.str(), {"a", "b"});
    for (int i = 0; i < 20; ++i) {
      const double a = input(rng), b = input(rng);
      CHECK(e1({a, b}) == e2({a, b}));
      ++inputs_checked;
    }
  }
  CHECK(inputs_checked == 1000);
}

TEST_CASE("mixed operator round trip keeps precedence") {
  for (const char* src : {"1-2-3-4", "2^3^2", "-2^2", "1-(2-3)", "2*(3+4)^2", "-(1+2)*3",
                          "1/2/4", "2^-2", "min(1+2,2*2)-max(0-1,0)"}) {
    auto e1 = expr::parse(src, {});
    auto e2 = expr::parse(e1.str(), {});
    CHECK(e1({}) == e2({}));
  }
}

TEST_CASE("evaluation is deterministic") {
  auto e = expr::parse("sin(a)*exp(-b)+a^3/(b+2)", {"a", "b"});
  const double v1 = e({0.7, 1.3});
  const double v2 = e({0.7, 1.3});
  CHECK(std::memcmp(&v1, &v2, sizeof v1) == 0);
}

TEST_CASE("bindings map covers declared variables in declaration order") {
  auto e = expr::parse("x-y", {"x", "y"});
  CHECK(e(std::map<std::string, double>{{"x", 5.0}, {"y", 2.0}}) == 3.0);
  CHECK_THROWS_AS(e(std::map<std::string, double>{{"x", 5.0}}), EvalError);
}

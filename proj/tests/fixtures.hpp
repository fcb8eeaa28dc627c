#ifndef HLBVP_TESTS_FIXTURES_HPP
#define HLBVP_TESTS_FIXTURES_HPP

#include <cmath>
#include <random>

#include "hlbvp/cli.hpp"
#include "hlbvp/config.hpp"
#include "hlbvp/model.hpp"

namespace fixtures {

// Reference two-node problem used across the suite (the built-in CLI example):
// f(t,x,y) = (2+sin t)/1000 e^{-|x|} |1-x|/(x^2+1) (y-1),
// weights (0.11, 0.89) at nodes (0, 0.11), shift k = 0.86, M = 0.35.
inline hlbvp::config::Setup reference_setup() {
  return hlbvp::config::make_setup(
      hlbvp::config::parse_config_text(hlbvp::cli::builtin_example_config()));
}

inline hlbvp::model::MultipointProblem reference_problem() {
  hlbvp::model::MultipointProblem p;
  p.alphas = {0.11, 0.89};
  p.xis = {0.0, 0.11};
  p.f = hlbvp::expr::parse("(2+sin(t))/1000*exp(-abs(x))*abs(1-x)/(x^2+1)*(y-1)", {"t", "x", "y"});
  return p;
}

inline hlbvp::model::BoundFamily reference_bounds() {
  hlbvp::model::BoundFamily bf;
  bf.kind = hlbvp::model::BoundKind::Linf;
  bf.phi = hlbvp::expr::parse("(2+sin(t))/1000*(r+1)^2", {"t", "r"});
  return bf;
}

inline hlbvp::model::BracketPair reference_bracket() {
  hlbvp::model::BracketPair br;
  br.alpha_low = hlbvp::expr::parse("3/400*(-(t+1)*exp(-t)+(t^2-t)/(t^2+1))", {"t"});
  br.beta_up = hlbvp::expr::parse("1", {"t"});
  return br;
}

constexpr double kRefK = 0.86;
constexpr double kRefM = 0.35;

// 5-point central first derivative, O(h^4)
template <class F>
double fd_deriv(const F& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

// 5-point central second derivative, O(h^4)
template <class F>
double fd_deriv2(const F& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12.0 * h * h);
}

}  // namespace fixtures

#endif

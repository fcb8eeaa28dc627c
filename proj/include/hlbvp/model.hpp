#ifndef HLBVP_MODEL_HPP
#define HLBVP_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlbvp/expr.hpp"
#include "hlbvp/quad.hpp"

namespace hlbvp::model {

// u'' = f(t, u, u') on [0, inf), u(0) = 0, u'(+inf) = sum_i a_i u'(x_i),
// with sum_i a_i = 1 (the weights make the linear part noninvertible).
struct MultipointProblem {
  std::vector<double> alphas;  // weights a_1..a_{m-1}, each > 0
  std::vector<double> xis;     // nodes 0 = x_1 < ... < x_{m-1}
  expr::Expression f;          // in (t, x, y)

  std::size_t m() const { return alphas.size() + 1; }
  double last_node() const { return xis.empty() ? 0.0 : xis.back(); }
  double f_at(double t, double x, double y) const { return f({t, x, y}); }
};

enum class BoundKind { L1, Linf };

// Dominating family: |f(t, x, y)| <= phi(t, r) whenever |x|, |y| < r.
struct BoundFamily {
  BoundKind kind = BoundKind::Linf;
  expr::Expression phi;  // in (t, r)

  double at(double t, double r) const { return phi({t, r}); }
};

// Lower/upper solution pair bracketing a prospective solution.
struct BracketPair {
  expr::Expression alpha_low;  // in t
  expr::Expression beta_up;    // in t

  double lower(double t) const { return alpha_low({t}); }
  double upper(double t) const { return beta_up({t}); }
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool ok = true;

  void add(std::string name, bool pass, std::string detail = {}) {
    ok = ok && pass;
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
};

inline constexpr double kResonanceTol = 1e-12;

// Pure: same input, same report. Failures are carried, not thrown.
ValidationReport validate_problem(const MultipointProblem& p);

struct NontrivialityWitness {
  double t0;
  double f_value;
};

// First sampled t0 with |f(t0, 0, 0)| > 1e-12, if any. Expression
// evaluation errors propagate.
std::optional<NontrivialityWitness> check_nontriviality(const MultipointProblem& p,
                                                        std::span<const double> t_samples);

struct BoundFamilyReport {
  ValidationReport checks;
  std::vector<double> r_samples;
  double t_window = 0.0;
  // For L1 kind: the sampled integrals; for Linf: the sampled sups.
  std::vector<double> per_r;
  // Heuristic L1 probe (informational for Linf families): integral over
  // [0, T] vs [0, T/2]; a ratio near 2 indicates non-integrable growth.
  bool looks_integrable = true;
};

inline const std::vector<double> kDefaultRSamples{0.5, 1.0, 2.0, 10.0};

// Samples the Caratheodory domination family: phi >= 0 on a (t, r) grid;
// L1 kind additionally requires a finite adaptive integral over [0, T] for
// each sampled r, Linf kind a finite sup. Quantification over every r > 0 is
// untestable; the report names the samples used.
BoundFamilyReport check_bound_family(const BoundFamily& bf,
                                     std::span<const double> r_samples = kDefaultRSamples,
                                     double t_window = 200.0);

}  // namespace hlbvp::model

#endif

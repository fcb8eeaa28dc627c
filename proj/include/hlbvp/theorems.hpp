#ifndef HLBVP_THEOREMS_HPP
#define HLBVP_THEOREMS_HPP

#include <functional>
#include <optional>

#include "hlbvp/kernel.hpp"
#include "hlbvp/model.hpp"

namespace hlbvp::theorems {

// Decomposition of the radius inequality's left-hand side
//   LHS(R) = max{C1,C2} max{I1, I2}
//          + max{C1,C2} max{1/2, 2(1 - e^{-k xi/2})} (1 + M/k) R
// evaluated at rho = max{R, rtilde} (rho = R when no brackets are involved).
//
// I2 = int_0^xi e^{-ks/2} phi_rho(s) ds is always direct quadrature. I1
// depends on the family kind: L1 families take the genuine supremum of
// e^{-kt/2} int_0^t e^{-ks/2} phi_rho ds over t > xi; Linf families use the
// closed-form bound through ess-sup phi_rho (the route the reference analysis
// takes, valid since x(1-x) maximizes at 1/4), which upper-bounds the sup.
struct ExistenceTerms {
  double c_max = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double k_factor = 0.0;  // c_max * max{1/2, 2(1-e^{-k xi/2})} * (1 + M/k)
  double lhs = 0.0;
  double rho = 0.0;
  bool linf_route = false;
  double phi_sup = 0.0;  // ess-sup estimate used by the Linf route
};

struct ExistenceOptions {
  double phi_sup_window = 50.0;  // window for the sampled ess-sup of phi
  quad::QuadOptions quad;
};

// Requires as_printed kernel constants (c1/c2 present).
ExistenceTerms existence_lhs(const model::MultipointProblem& p, const kernel::ShiftParams& sp,
                             const kernel::KernelConstants& kc, const model::BoundFamily& bf,
                             double R, std::optional<double> rtilde,
                             const ExistenceOptions& opt = {});

struct RInterval {
  bool found = false;
  double r0 = 0.0, r1 = 0.0;
  bool open_low = false;   // inequality already strict at the scan's low edge
  bool open_high = false;  // still strict at the scan's high edge
};

struct RScanOptions {
  double r_min = 1e-6;
  double r_max = 1e6;
  int points_per_decade = 64;
  double bisect_rel_tol = 1e-6;
};

// Sign-change bracketing of g(R) = lhs(R) - R over a log-spaced scan,
// refined by bisection. Returns not-found when g > 0 everywhere scanned.
RInterval find_R_interval(const std::function<double(double)>& lhs_of_R,
                          const RScanOptions& opt = {});

struct BallInvariance {
  bool ok = false;
  double s1 = 0.0;  // sup_t int |G|(phi_R + (k+M) R) ds
  double s2 = 0.0;  // same with |dG/dt|
  double window = 0.0;
};

// Derived-mode analogue of the ball-invariance step: checks both sups
// against R by direct quadrature over a stated t-window.
BallInvariance check_ball_invariance_derived(const kernel::GreenKernel& gk,
                                             const model::MultipointProblem& p,
                                             const model::BoundFamily& bf, double R,
                                             const quad::QuadOptions& qopt = {});

// Margins are signed so that >= 0 means the condition holds.
struct BracketReport {
  double ordering_margin = 0.0;     // min (beta - alpha)
  double lower_diff_margin = 0.0;   // min (alpha'' - f(t, alpha, alpha'))
  double lower_bc0_margin = 0.0;    // -alpha(0)
  double lower_binf_margin = 0.0;   // alpha'(inf) - sum a_i alpha'(xi_i)
  double upper_diff_margin = 0.0;   // min (f(t, beta, beta') - beta'')
  double upper_bc0_margin = 0.0;    // beta(0)
  double upper_binf_margin = 0.0;   // sum a_i beta'(xi_i) - beta'(inf)
  double t_check = 0.0;
  int grid_nodes = 0;
  bool ok = false;
};

// Differential inequalities sampled with finite-difference derivatives at
// interior grid nodes; t -> inf limits by evaluation at t_check with
// Richardson extrapolation at 2 t_check.
BracketReport verify_bracket(const model::MultipointProblem& p, const model::BracketPair& br,
                             double t_check, int grid_nodes);

struct MonotoneVerdict {
  bool ok = true;
  double t = 0.0, x = 0.0, y1 = 0.0, y2 = 0.0, f1 = 0.0, f2 = 0.0;  // counterexample
};

MonotoneVerdict check_monotone_in_y(const model::MultipointProblem& p,
                                    std::span<const double> t_grid,
                                    std::span<const double> x_grid,
                                    std::span<const double> y_grid);

// sup over [0, inf) of |e(t)| for a scalar expression in t: windowed scan
// with golden refinement plus a Richardson tail-limit estimate.
double norm_sup_of(const expr::Expression& e, double window = 60.0);

// Full evaluation record of the radius-inequality route: constants, the
// left-hand side as a function of R, the admissible interval, and one
// verdict per hypothesis. Only meaningful with as_printed envelope
// constants; the builder re-evaluates the interval midpoint independently.
struct TheoremReport {
  ExistenceTerms at_r1;                    // decomposition evaluated at R = 1
  std::function<double(double)> lhs;       // R -> LHS(R)
  RInterval interval;
  double midpoint = 0.0;                   // (R0+R1)/2 when found
  double lhs_at_midpoint = 0.0;
  std::optional<double> rtilde;
  std::optional<BracketReport> bracket;
  std::optional<MonotoneVerdict> monotone;
  std::optional<model::NontrivialityWitness> witness;
  model::ValidationReport hypothesis_checks;  // one entry per hypothesis
  const char* mode_label = "as_printed";
};

struct TheoremReportInputs {
  std::optional<model::BracketPair> bracket;
  std::span<const double> nontriviality_grid;
  RScanOptions scan;
  ExistenceOptions existence;
};

TheoremReport build_theorem_report(const model::MultipointProblem& p,
                                   const kernel::ShiftParams& sp,
                                   const kernel::KernelConstants& kc,
                                   const model::BoundFamily& bf,
                                   const TheoremReportInputs& in);

}  // namespace hlbvp::theorems

#endif

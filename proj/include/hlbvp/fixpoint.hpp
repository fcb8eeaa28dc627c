#ifndef HLBVP_FIXPOINT_HPP
#define HLBVP_FIXPOINT_HPP

#include <optional>
#include <utility>

#include "hlbvp/kernel.hpp"
#include "hlbvp/model.hpp"

namespace hlbvp::fixpoint {

// Half-line function carried as (value, derivative) samples on a graded grid
// with an exponential tail model beyond the last node:
//   u(t) = u_N e^{-rate (t - T_max)},  u'(t) = du_N e^{-rate (t - T_max)}.
// Between nodes: cubic Hermite from the stored pairs. Immutable snapshots are
// passed between solver iterations.
struct GridFunction {
  std::vector<double> nodes;   // strictly increasing, nodes[0] == 0
  std::vector<double> values;
  std::vector<double> derivs;
  double tail_rate = 0.0;      // k/2 for solutions of the shifted problem

  double tmax() const { return nodes.back(); }
  double value_at(double t) const;
  double deriv_at(double t) const;

  static GridFunction zero(std::vector<double> nodes, double tail_rate);
};

// Geometric step grading (last step / first step = 20) on [0, t_max] with
// n_nodes nodes; every entry of must_include below t_max is snapped onto the
// grid so boundary nodes and kernel kinks sit on grid points.
std::vector<double> make_graded_grid(double t_max, int n_nodes,
                                     std::span<const double> must_include);

// max over nodes of |values| and |derivs|; the tail model is a decaying
// multiple of the endpoint pair and adds nothing.
double norm(const GridFunction& u);

// Clamp of x into [alpha(t), beta(t)].
double truncate_delta(double t, double x, const model::BracketPair& br);

struct ApplyOptions {
  quad::QuadOptions quad;
  // Derived mode normally factors the causal part through an exact complex
  // prefix integral (one Gauss-Kronrod panel per grid segment); this forces
  // the generic per-node adaptive route instead.
  bool force_reference_quadrature = false;
};

// Tu(t) = int_0^inf G(t,s) (f(s,u,u') + k u'(s) + M u(s)) ds, value row from
// G and derivative row from dG/dt; per-node integrals use breakpoints
// {xi_i} u {t_j} and the mode's tail handling (as_printed: Remark-type
// A e^{-ks/2} envelope; derived: support truncation at max(t_j, xi_{m-1})).
GridFunction apply_T(const kernel::GreenKernel& gk, const model::MultipointProblem& p,
                     const GridFunction& u, const ApplyOptions& opt = {});

// Bracket-truncated operator: the integrand replaces the state by
// delta(s, u(s)) in f and adds the penalty eps (u - delta(s, u)).
GridFunction apply_Tstar(const kernel::GreenKernel& gk, const model::MultipointProblem& p,
                         const GridFunction& u, const model::BracketPair& br, double eps,
                         const ApplyOptions& opt = {});

struct ResidualReport {
  double ode_residual = 0.0;        // sup_j |FD''(u)(t_j) - f(t_j, u_j, du_j)|, interior nodes
  double scheme_error_estimate = 0.0;  // same residual on the decimated grid / 4
  double bc0_residual = 0.0;        // |u(0)|
  double bc_inf_residual = 0.0;     // |u'_inf - sum_i a_i u'(xi_i)|, tail model u'_inf = 0
  double deriv_consistency = 0.0;   // sup_j |central slope of values - derivs_j|
  double du_at_tmax = 0.0;          // so the tail truncation can be judged
  double norm_value = 0.0;
};

ResidualReport verify(const model::MultipointProblem& p, const GridFunction& u);

struct SolveOptions {
  double damping = 1.0;  // in (0, 1]; halved on sustained growth, floor 1/64
  double tol = 1e-8;
  int max_iter = 200;
  std::optional<std::pair<model::BracketPair, double>> bracket;  // (brackets, eps)
  ApplyOptions apply;
};

struct SolveResult {
  GridFunction u;
  bool converged = false;
  int iterations = 0;
  double final_increment = 0.0;
  double final_damping = 1.0;
  ResidualReport residuals;
  std::vector<double> increments;
};

// Damped iteration u_{n+1} = (1 - lambda) u_n + lambda T u_n (T* when a
// bracket is given). Non-convergence is a reported outcome, not an error.
SolveResult picard_solve(const kernel::GreenKernel& gk, const model::MultipointProblem& p,
                         GridFunction u0, const SolveOptions& opt = {});

}  // namespace hlbvp::fixpoint

#endif

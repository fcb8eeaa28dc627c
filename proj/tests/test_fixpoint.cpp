#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hlbvp/fixpoint.hpp"

using namespace hlbvp;
using fixtures::kRefK;
using fixtures::kRefM;

namespace {

fixpoint::GridFunction sampled(const std::vector<double>& nodes, double tail_rate,
                               double (*f)(double), double (*df)(double)) {
  fixpoint::GridFunction u;
  u.nodes = nodes;
  u.tail_rate = tail_rate;
  for (double t : nodes) {
    u.values.push_back(f(t));
    u.derivs.push_back(df(t));
  }
  return u;
}

std::vector<double> uniform_nodes(double t_max, int n) {
  std::vector<double> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = t_max * i / (n - 1);
  return nodes;
}

}  // namespace

TEST_CASE("graded grid contains required points and endpoints") {
  const double xi[] = {0.11};
  auto nodes = fixpoint::make_graded_grid(23.0, 400, xi);
  CHECK(nodes.size() == 400);
  CHECK(nodes.front() == 0.0);
  CHECK(nodes.back() == 23.0);
  CHECK(std::find(nodes.begin(), nodes.end(), 0.11) != nodes.end());
  CHECK(std::is_sorted(nodes.begin(), nodes.end()));
  for (std::size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);
}

TEST_CASE("norm is the max of the two node sup-norms") {
  auto u = sampled(uniform_nodes(10.0, 200), 0.43, [](double t) { return std::exp(-t); },
                   [](double t) { return -std::exp(-t); });
  CHECK(fixpoint::norm(u) == 1.0);

  auto z = fixpoint::GridFunction::zero(uniform_nodes(10.0, 50), 0.43);
  CHECK(fixpoint::norm(z) == 0.0);

  auto s = sampled(uniform_nodes(6.2831853071795865, 10001), 0.43,
                   [](double t) { return 0.5 * std::sin(t); },
                   [](double t) { return 0.5 * std::cos(t); });
  CHECK(std::fabs(fixpoint::norm(s) - 0.5) < 1e-6);
}

TEST_CASE("Hermite evaluation hits nodes exactly and the tail decays") {
  auto u = sampled(uniform_nodes(5.0, 21), 0.5, [](double t) { return std::sin(t); },
                   [](double t) { return std::cos(t); });
  CHECK(u.value_at(2.5) == std::sin(2.5));
  CHECK(u.deriv_at(2.5) == std::cos(2.5));
  CHECK(std::fabs(u.value_at(2.37) - std::sin(2.37)) < 1e-4);
  CHECK(std::fabs(u.deriv_at(2.37) - std::cos(2.37)) < 1e-3);
  CHECK(u.value_at(7.0) == doctest::Approx(std::sin(5.0) * std::exp(-1.0)));
}

TEST_CASE("truncate_delta clamps into the bracket") {
  const auto br = fixtures::reference_bracket();
  CHECK(fixpoint::truncate_delta(0.0, 5.0, br) == 1.0);      // beta(0) = 1
  CHECK(fixpoint::truncate_delta(0.0, 0.0, br) == 0.0);      // inside
  CHECK(fixpoint::truncate_delta(0.0, -1.0, br) == -0.0075); // alpha(0)
}

TEST_CASE("zero nonlinearity and zero state map to exactly zero") {
  auto p = fixtures::reference_problem();
  p.f = expr::parse("0", {"t", "x", "y"});
  for (auto mode : {kernel::KernelMode::as_printed, kernel::KernelMode::derived}) {
    const kernel::GreenKernel gk(p, kernel::make_shift(kRefK, kRefM, mode));
    auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(10.0, 60, p.xis), 0.43);
    const auto Tu = fixpoint::apply_T(gk, p, u0);
    for (double v : Tu.values) CHECK(v == 0.0);
    for (double d : Tu.derivs) CHECK(d == 0.0);
  }
}

TEST_CASE("operator image vanishes at the origin for arbitrary states") {
  const auto p = fixtures::reference_problem();
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (auto mode : {kernel::KernelMode::as_printed, kernel::KernelMode::derived}) {
    const kernel::GreenKernel gk(p, kernel::make_shift(kRefK, kRefM, mode));
    auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(8.0, 40, p.xis), 0.43);
    for (auto& v : u.values) v = val(rng);
    for (auto& d : u.derivs) d = val(rng);
    const auto Tu = fixpoint::apply_T(gk, p, u);
    CHECK(Tu.values.front() == 0.0);
  }
}

TEST_CASE("derived-mode image solves the shifted equation for a decaying load") {
  auto p = fixtures::reference_problem();
  p.f = expr::parse("exp(-t)", {"t", "x", "y"});
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u0 = fixpoint::GridFunction::zero(uniform_nodes(20.0, 801), 0.43);
  const auto Tu = fixpoint::apply_T(gk, p, u0);
  // u = 0: forcing is exactly e^{-t}, so (Tu)'' + k (Tu)' + M Tu = e^{-t}
  const double h = 20.0 / 800.0;
  double worst = 0.0;
  for (std::size_t j = 2; j + 2 < Tu.nodes.size(); ++j) {
    const auto& v = Tu.values;
    const double vpp =
        (-v[j + 2] + 16.0 * v[j + 1] - 30.0 * v[j] + 16.0 * v[j - 1] - v[j - 2]) / (12.0 * h * h);
    const double vp = (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
    worst = std::max(worst,
                     std::fabs(vpp + kRefK * vp + kRefM * v[j] - std::exp(-Tu.nodes[j])));
  }
  CHECK(worst < 1e-4);
  // and the derivative row is the t-derivative of the value row
  for (std::size_t j = 2; j + 2 < Tu.nodes.size(); j += 40) {
    const auto& v = Tu.values;
    const double slope = (-v[j + 2] + 8.0 * v[j + 1] - 8.0 * v[j - 1] + v[j - 2]) / (12.0 * h);
    CHECK(std::fabs(slope - Tu.derivs[j]) < 1e-5);
  }
}

TEST_CASE("bounded states satisfy the well-definedness display bound") {
  const auto p = fixtures::reference_problem();
  const auto bf = fixtures::reference_bounds();
  const kernel::GreenKernel gk(p, kernel::make_shift(kRefK, kRefM, kernel::KernelMode::as_printed));
  const auto kc = kernel::kernel_constants(gk);
  // valid instance of the step-one bound: the genuine envelope constants
  const double cmax = std::max(*kc.c1_global, *kc.c2_global);

  std::mt19937 rng(11);
  auto nodes = fixpoint::make_graded_grid(23.3, 120, p.xis);
  for (double r : {0.5, 1.0, 5.0}) {
    quad::Integrand phi;
    phi.eval = [&](double s) { return std::exp(-0.5 * kRefK * s) * bf.at(s, r); };
    phi.envelope = quad::Envelope{3.0 / 1000.0 * (r + 1) * (r + 1), 0.5 * kRefK};
    const double phi_mass = quad::integrate_halfline(phi).value;
    const double bound = cmax * (phi_mass + (2.0 + 2.0 * kRefM / kRefK) * r);

    std::uniform_real_distribution<double> val(-0.95 * r, 0.95 * r);
    for (int trial = 0; trial < 20; ++trial) {
      auto u = fixpoint::GridFunction::zero(nodes, 0.5 * kRefK);
      for (auto& v : u.values) v = val(rng);
      for (auto& d : u.derivs) d = val(rng);
      const auto Tu = fixpoint::apply_T(gk, p, u);
      CHECK(fixpoint::norm(Tu) <= bound + 1e-9);
      // pointwise equiconvergence surrogate at a few nodes
      for (std::size_t j = 0; j < Tu.nodes.size(); j += 17) {
        const double envj = *kc.c1_global * std::exp(-0.5 * kRefK * Tu.nodes[j]) *
                            (phi_mass + (2.0 + 2.0 * kRefM / kRefK) * r);
        CHECK(std::fabs(Tu.values[j]) <= envj + 1e-9);
      }
    }
  }
}

TEST_CASE("derived prefix factoring agrees with the per-node adaptive route") {
  fixpoint::ApplyOptions fast;
  fast.quad.rel_tol = 1e-12;
  fast.quad.abs_tol = 1e-14;
  fixpoint::ApplyOptions reference;
  reference.force_reference_quadrature = true;
  reference.quad.rel_tol = 1e-12;
  reference.quad.abs_tol = 1e-13;

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-0.4, 0.4);

  // smooth nonlinearity: the per-segment integrand is analytic, so both
  // routes are exact to roundoff
  auto smooth = fixtures::reference_problem();
  smooth.f = expr::parse("sin(t)/100*(x+1)*(y-1)", {"t", "x", "y"});
  const auto gks = kernel::rebuild_kernel(smooth, kRefK, kRefM);
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(14.0, 90, smooth.xis), 0.43);
  for (auto& v : u.values) v = val(rng);
  for (auto& d : u.derivs) d = val(rng);
  auto a = fixpoint::apply_T(gks, smooth, u, fast);
  auto b = fixpoint::apply_T(gks, smooth, u, reference);
  for (std::size_t j = 0; j < u.nodes.size(); ++j) {
    CHECK(std::fabs(a.values[j] - b.values[j]) < 1e-10);
    CHECK(std::fabs(a.derivs[j] - b.derivs[j]) < 1e-10);
  }

  // the reference nonlinearity has |.| kinks inside segments; both routes
  // then carry kink-resolution error at their tolerance scale
  const auto p = fixtures::reference_problem();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  a = fixpoint::apply_T(gk, p, u, fast);
  b = fixpoint::apply_T(gk, p, u, reference);
  for (std::size_t j = 0; j < u.nodes.size(); ++j) {
    CHECK(std::fabs(a.values[j] - b.values[j]) < 2e-7);
    CHECK(std::fabs(a.derivs[j] - b.derivs[j]) < 2e-7);
  }
}

TEST_CASE("penalty operator equals the plain operator inside the bracket") {
  const auto p = fixtures::reference_problem();
  const auto br = fixtures::reference_bracket();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(12.0, 80, p.xis), 0.43);
  for (std::size_t j = 0; j < u.nodes.size(); ++j) {
    u.values[j] = 0.4 + 0.1 * std::sin(u.nodes[j]);  // inside [alpha, 1] everywhere
    u.derivs[j] = 0.1 * std::cos(u.nodes[j]);
  }
  const auto plain = fixpoint::apply_T(gk, p, u);
  const auto star = fixpoint::apply_Tstar(gk, p, u, br, 0.01);
  for (std::size_t j = 0; j < u.nodes.size(); ++j) {
    CHECK(plain.values[j] == star.values[j]);
    CHECK(plain.derivs[j] == star.derivs[j]);
  }
}

TEST_CASE("clamped state is used outside the bracket") {
  const auto p = fixtures::reference_problem();
  const auto br = fixtures::reference_bracket();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(12.0, 80, p.xis), 0.43);
  for (auto& v : u.values) v = 2.0;  // above beta = 1
  const auto star = fixpoint::apply_Tstar(gk, p, u, br, 0.5);
  const auto plain = fixpoint::apply_T(gk, p, u);
  // the penalty eps (u - beta) = 0.5 shifts the forcing; images must differ
  double delta = 0.0;
  for (std::size_t j = 0; j < u.nodes.size(); ++j)
    delta = std::max(delta, std::fabs(star.values[j] - plain.values[j]));
  CHECK(delta > 1e-4);
}

TEST_CASE("zero penalty is rejected") {
  const auto p = fixtures::reference_problem();
  const auto br = fixtures::reference_bracket();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(8.0, 30, p.xis), 0.43);
  CHECK_THROWS_AS(fixpoint::apply_Tstar(gk, p, u, br, 0.0), std::invalid_argument);
}

TEST_CASE("verify reports the forcing residual for the zero state") {
  const auto p = fixtures::reference_problem();
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(23.3, 400, p.xis), 0.43);
  const auto rep = fixpoint::verify(p, u);
  // residual = sup |f(t, 0, 0)| = sup (2 + sin t)/1000 over interior nodes
  CHECK(rep.ode_residual > 0.00299);
  CHECK(rep.ode_residual <= 0.003 + 1e-12);
  CHECK(rep.bc0_residual == 0.0);
  CHECK(rep.bc_inf_residual == 0.0);
}

TEST_CASE("verify on a manufactured decaying solution") {
  model::MultipointProblem p = fixtures::reference_problem();
  p.f = expr::parse("x", {"t", "x", "y"});  // u'' = u holds for u = e^{-t}
  auto u = sampled(uniform_nodes(12.0, 1201), 1.0, [](double t) { return std::exp(-t); },
                   [](double t) { return -std::exp(-t); });
  const auto rep = fixpoint::verify(p, u);
  CHECK(rep.ode_residual < 5e-4);  // finite-difference scheme error scale
  CHECK(rep.ode_residual > 0.0);
  CHECK(rep.scheme_error_estimate > 0.0);
  CHECK(rep.ode_residual < 10.0 * rep.scheme_error_estimate);
  CHECK(rep.deriv_consistency < 5e-4);
}

TEST_CASE("verify picks up a boundary offset") {
  const auto p = fixtures::reference_problem();
  auto u = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(10.0, 100, p.xis), 0.43);
  u.values[0] = 0.5;
  CHECK(fixpoint::verify(p, u).bc0_residual == 0.5);
}

TEST_CASE("trivial fixed point converges immediately") {
  auto p = fixtures::reference_problem();
  p.f = expr::parse("0", {"t", "x", "y"});
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(10.0, 60, p.xis), 0.43);
  const auto res = fixpoint::picard_solve(gk, p, u0);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(fixpoint::norm(res.u) == 0.0);
}

TEST_CASE("zero iteration budget reports non-convergence without iterating") {
  const auto p = fixtures::reference_problem();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(10.0, 60, p.xis), 0.43);
  fixpoint::SolveOptions opt;
  opt.max_iter = 0;
  const auto res = fixpoint::picard_solve(gk, p, u0, opt);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 0);
}

TEST_CASE("reference solve in derived mode: converges to a genuine solution that leaves the bracket") {
  const auto setup = fixtures::reference_setup();
  const auto p = setup.problem;
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  const double t_max = std::max(10.0 * 2.0 / kRefK, 2.0 * p.last_node());
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(t_max, 400, p.xis), 0.43);

  fixpoint::SolveOptions opt;
  opt.tol = 1e-8;
  opt.max_iter = 200;
  const auto res = fixpoint::picard_solve(gk, p, u0, opt);
  REQUIRE(res.converged);
  CHECK(res.iterations <= 200);
  CHECK(res.residuals.bc0_residual == 0.0);
  CHECK(res.residuals.bc_inf_residual < 1e-7);
  CHECK(res.residuals.ode_residual < 1e-3);

  // the converged iterate is a solution of the differential problem on the
  // window, but it escapes below the lower bracket function: the iteration's
  // limit is the branch with genuinely decreasing derivative, and no bounded
  // bracket-confined solution exists for this nonlinearity (its sign
  // structure forces u' to be non-increasing whenever u' <= 1)
  const auto br = fixtures::reference_bracket();
  double min_margin = 1e308;
  for (std::size_t j = 0; j < res.u.nodes.size(); ++j)
    min_margin = std::min(min_margin, res.u.values[j] - br.lower(res.u.nodes[j]));
  CHECK(min_margin < -0.05);
}

TEST_CASE("runaway nonlinearity drives the damping schedule down") {
  // f = 10 x has Lipschitz constant far beyond the kernel's contraction
  // budget: increments grow explosively for dozens of steps, which is the
  // divergence signature the halving schedule exists for
  auto p = fixtures::reference_problem();
  p.f = expr::parse("10*x", {"t", "x", "y"});
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(23.3, 200, p.xis), 0.43);
  for (auto& v : u0.values) v = 1e-3;  // nonzero seed

  fixpoint::SolveOptions opt;
  opt.tol = 1e-8;
  opt.max_iter = 60;
  const auto res = fixpoint::picard_solve(gk, p, u0, opt);
  CHECK_FALSE(res.converged);
  CHECK(res.final_damping <= 0.5);  // halving fired at least once
  double lo = 1e308, hi = 0.0;
  for (double inc : res.increments) {
    lo = std::min(lo, inc);
    hi = std::max(hi, inc);
  }
  CHECK(hi > 50.0 * lo);  // the growth that triggered it
}

TEST_CASE("manufactured problem: bracket certificate holds end to end") {
  // target u*(t) = t^2 e^{-t}: u*(0) = 0 and u*'(0) = 0 = u*'(inf), so the
  // single-node boundary relation holds; f pulls states toward u* and
  // constant shifts of u* bracket it
  model::MultipointProblem p;
  p.alphas = {1.0};
  p.xis = {0.0};
  p.f = expr::parse("0.2*(x - t^2*exp(-t)) + (2 - 4*t + t^2)*exp(-t)", {"t", "x", "y"});
  model::BracketPair br;
  br.alpha_low = expr::parse("t^2*exp(-t) - 1", {"t"});
  br.beta_up = expr::parse("t^2*exp(-t) + 1", {"t"});

  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  const double t_max = std::max(10.0 * 2.0 / kRefK, 2.0 * p.last_node());
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(t_max, 400, p.xis), 0.43);

  fixpoint::SolveOptions opt;
  opt.tol = 1e-8;
  opt.max_iter = 200;
  opt.bracket = {br, 0.05};
  const auto res = fixpoint::picard_solve(gk, p, u0, opt);
  REQUIRE(res.converged);
  CHECK(res.residuals.bc0_residual == 0.0);
  CHECK(res.residuals.ode_residual < 1e-3);
  CHECK(res.residuals.ode_residual < 10.0 * std::max(res.residuals.scheme_error_estimate, 1e-12));

  double worst_target = 0.0, min_margin = 1e308;
  for (std::size_t j = 0; j < res.u.nodes.size(); ++j) {
    const double t = res.u.nodes[j];
    const double target = t * t * std::exp(-t);
    worst_target = std::max(worst_target, std::fabs(res.u.values[j] - target));
    min_margin = std::min(min_margin, std::min(res.u.values[j] - br.lower(t),
                                               br.upper(t) - res.u.values[j]));
  }
  CHECK(worst_target < 1e-5);  // the iteration recovered the target solution
  CHECK(min_margin > 0.9);     // and stayed well inside the bracket
}

TEST_CASE("penalty iteration on the reference problem also converges and also leaves the bracket") {
  const auto p = fixtures::reference_problem();
  const auto br = fixtures::reference_bracket();
  const auto gk = kernel::rebuild_kernel(p, kRefK, kRefM);
  const double t_max = std::max(10.0 * 2.0 / kRefK, 2.0 * p.last_node());
  auto u0 = fixpoint::GridFunction::zero(fixpoint::make_graded_grid(t_max, 400, p.xis), 0.43);

  fixpoint::SolveOptions opt;
  opt.tol = 1e-8;
  opt.max_iter = 200;
  opt.bracket = {br, 0.0104};
  const auto res = fixpoint::picard_solve(gk, p, u0, opt);
  REQUIRE(res.converged);
  double min_margin = 1e308;
  for (std::size_t j = 0; j < res.u.nodes.size(); ++j)
    min_margin = std::min(min_margin, res.u.values[j] - br.lower(res.u.nodes[j]));
  CHECK(min_margin < -0.05);
}

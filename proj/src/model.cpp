#include "hlbvp/model.hpp"

#include <cmath>
#include <cstdio>

namespace hlbvp::model {

namespace {
std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}
}  // namespace

ValidationReport validate_problem(const MultipointProblem& p) {
  ValidationReport rep;

  rep.add("m >= 2", p.m() >= 2, "m = " + std::to_string(p.m()));
  rep.add("weights/nodes same length", p.alphas.size() == p.xis.size());

  bool positive = !p.alphas.empty();
  for (double a : p.alphas) positive = positive && a > 0.0;
  rep.add("all weights positive", positive);

  const bool first_zero = !p.xis.empty() && p.xis.front() == 0.0;
  rep.add("first node is 0", first_zero,
          p.xis.empty() ? "no nodes" : fmt("xi_1 = %.17g", p.xis.front()));

  bool increasing = true;
  for (std::size_t i = 1; i < p.xis.size(); ++i)
    increasing = increasing && p.xis[i] > p.xis[i - 1];
  rep.add("nodes strictly increasing", increasing);

  double sum = 0.0;
  for (double a : p.alphas) sum += a;
  rep.add("resonance: sum of weights = 1", std::fabs(sum - 1.0) <= kResonanceTol,
          fmt("sum = %.17g, |sum - 1| = %.3g", sum, std::fabs(sum - 1.0)));

  bool f_ok = p.f.valid();
  if (f_ok) {
    try {
      (void)p.f_at(0.0, 0.0, 0.0);
    } catch (const EvalError&) {
      // evaluable at a probe point is not required; only well-formedness is
    }
  }
  rep.add("nonlinearity present", f_ok);
  return rep;
}

std::optional<NontrivialityWitness> check_nontriviality(const MultipointProblem& p,
                                                        std::span<const double> t_samples) {
  for (double t0 : t_samples) {
    const double v = p.f_at(t0, 0.0, 0.0);
    if (std::fabs(v) > 1e-12) return NontrivialityWitness{t0, v};
  }
  return std::nullopt;
}

BoundFamilyReport check_bound_family(const BoundFamily& bf, std::span<const double> r_samples,
                                     double t_window) {
  BoundFamilyReport rep;
  rep.r_samples.assign(r_samples.begin(), r_samples.end());
  rep.t_window = t_window;

  bool nonneg = true;
  double worst = 0.0, worst_t = 0.0, worst_r = 0.0;
  for (double r : r_samples) {
    for (int i = 0; i <= 400; ++i) {
      const double t = t_window * i / 400.0;
      const double v = bf.at(t, r);
      if (v < worst) {
        worst = v;
        worst_t = t;
        worst_r = r;
      }
      nonneg = nonneg && v >= 0.0;
    }
  }
  rep.checks.add("phi >= 0 on sampled (t, r)", nonneg,
                 nonneg ? "" : fmt("phi = %.3g at (t, r) = (%.3g, ", worst, worst_t) +
                                   fmt("%.3g)", worst_r));

  quad::QuadOptions opt;
  for (double r : r_samples) {
    if (bf.kind == BoundKind::L1) {
      const auto full = quad::integrate_interval(
          [&](double s) { return bf.at(s, r); }, 0.0, t_window, opt);
      const auto half = quad::integrate_interval(
          [&](double s) { return bf.at(s, r); }, 0.0, 0.5 * t_window, opt);
      rep.per_r.push_back(full.value);
      const bool finite = std::isfinite(full.value);
      // tail must have stopped accumulating for an integrable family
      const bool settled = full.value <= half.value * 1.05 + opt.abs_tol + 1e-6 * std::fabs(half.value);
      rep.looks_integrable = rep.looks_integrable && finite && settled;
      rep.checks.add(fmt("phi_r integrable on [0, inf), r = %.3g", r), finite && settled,
                     fmt("integral over window = %.6g (half-window %.6g)", full.value, half.value));
    } else {
      double sup = 0.0;
      for (int i = 0; i <= 4000; ++i) {
        const double t = t_window * i / 4000.0;
        sup = std::max(sup, bf.at(t, r));
      }
      rep.per_r.push_back(sup);
      rep.checks.add(fmt("phi_r bounded on sampled t, r = %.3g", r), std::isfinite(sup),
                     fmt("sampled sup = %.6g", sup));
      // informational: does phi_r also look integrable?
      const auto full = quad::integrate_interval(
          [&](double s) { return bf.at(s, r); }, 0.0, t_window, opt);
      const auto half = quad::integrate_interval(
          [&](double s) { return bf.at(s, r); }, 0.0, 0.5 * t_window, opt);
      if (full.value > half.value * 1.05 + 1e-6) rep.looks_integrable = false;
    }
  }
  return rep;
}

}  // namespace hlbvp::model

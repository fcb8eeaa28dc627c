#include "hlbvp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hlbvp::kernel {

namespace {

double printed_gamma(double k, double M) { return std::sqrt(4.0 * M - k * k); }

// Summand of the as_printed denominator at node xi, evaluated at angle g*arg.
double printed_term(double k, double g, double xi, double arg) {
  return std::exp(-0.5 * k * xi) * (-(0.5 * k) * std::sin(g * arg) + g * std::cos(g * arg));
}

}  // namespace

ShiftParams make_shift(double k, double M, KernelMode mode) {
  if (!(k > 0.0) || !(M > 0.0)) throw std::invalid_argument("k and M must be positive");
  if (k * k - 4.0 * M >= 0.0)
    throw NonOscillatoryError("k^2 - 4M >= 0: shifted operator is not oscillatory");
  ShiftParams sp;
  sp.k = k;
  sp.M = M;
  sp.mode = mode;
  sp.gamma = mode == KernelMode::as_printed ? printed_gamma(k, M) : 0.5 * printed_gamma(k, M);
  return sp;
}

double denominator(const model::MultipointProblem& p, const ShiftParams& sp) {
  // scale = sum of the absolute atomic terms, so cancellation both across
  // nodes and inside a single node's sin/cos pair counts as degenerate
  double sum = 0.0, scale = 0.0;
  const double w = sp.gamma;  // frequency for either mode's formula
  for (std::size_t i = 0; i < p.alphas.size(); ++i) {
    const double damp = p.alphas[i] * std::exp(-0.5 * sp.k * p.xis[i]);
    const double sin_part = -0.5 * sp.k * std::sin(w * p.xis[i]);
    const double cos_part = w * std::cos(w * p.xis[i]);
    sum += damp * (sin_part + cos_part);
    scale += damp * (std::fabs(sin_part) + std::fabs(cos_part));
  }
  if (std::fabs(sum) <= kDegeneracyTol * scale || scale == 0.0)
    throw DegenerateShiftError("kernel denominator is degenerate for this (k, M); pick another shift");
  return sum;
}

GreenKernel::GreenKernel(model::MultipointProblem p, ShiftParams sp)
    : problem_(std::move(p)), shift_(sp) {
  if (problem_.alphas.empty() || problem_.alphas.size() != problem_.xis.size())
    throw std::invalid_argument("problem needs matching nonempty weight/node tables");
  if (!std::is_sorted(problem_.xis.begin(), problem_.xis.end()))
    throw std::invalid_argument("nodes must be sorted");
  denom_ = hlbvp::kernel::denominator(problem_, shift_);
  if (problem_.xis.front() != 0.0)
    throw std::invalid_argument("first node must be 0 for kernel evaluation");
}

double GreenKernel::h(std::size_t l, double s) const {
  const std::size_t m = problem_.m();
  if (l < 2 || l > m - 1)
    throw std::out_of_range("segment index l out of range 2..m-1");
  const double k = shift_.k, g = shift_.gamma;
  double num = 0.0;
  for (std::size_t i = l - 1; i < problem_.alphas.size(); ++i)
    num += problem_.alphas[i] * printed_term(k, g, problem_.xis[i], s - problem_.xis[i]);
  return num / denom_;
}

namespace {
// index l of the segment [xi_{l-1}, xi_l) containing s, or 0 for the tail
std::size_t segment_of(const std::vector<double>& xis, double s) {
  if (s >= xis.back()) return 0;
  const auto it = std::upper_bound(xis.begin(), xis.end(), s);
  return static_cast<std::size_t>(it - xis.begin()) + 1;
}
}  // namespace

double GreenKernel::green(double t, double s) const {
  if (shift_.mode == KernelMode::derived)
    return (t > s ? impulse(t - s) : 0.0) + corrector(s) * homogeneous(t);

  const double k = shift_.k, g = shift_.gamma;
  const double pre = std::exp(-0.5 * k * (t + s)) / g;
  const std::size_t l = segment_of(problem_.xis, s);
  if (l == 0) {  // s beyond the last node
    if (t <= s) return 0.0;
    return pre * std::sin(g * (s - t));
  }
  const double hl = h(l, s);
  if (t <= s) return pre * (-std::sin(g * t) * hl);
  return pre * (-std::sin(g * t) * hl + std::sin(g * (s - t)));
}

GreenKernel::DtValue GreenKernel::green_dt_ex(double t, double s, DerivFormula formula) const {
  const bool kink = t == s;
  if (shift_.mode == KernelMode::derived) {
    // exact derivative; the printed formula has no derived-mode counterpart
    const double v = (t >= s ? impulse_dt(t - s) : 0.0) + corrector(s) * homogeneous_dt(t);
    return {v, kink};
  }

  const double k = shift_.k, g = shift_.gamma;
  const double pre = std::exp(-0.5 * k * (t + s)) / g;
  const double cos_factor = formula == DerivFormula::printed ? 1.0 : g;
  const std::size_t l = segment_of(problem_.xis, s);
  const double trailing = -(0.5 * k) * std::sin(g * (s - t)) - cos_factor * std::cos(g * (s - t));
  if (l == 0) {
    if (t < s) return {0.0, false};
    return {pre * trailing, kink};  // right limit at t == s
  }
  const double hl = h(l, s);
  const double head = ((0.5 * k) * std::sin(g * t) - g * std::cos(g * t)) * hl;
  if (t < s) return {pre * head, false};
  return {pre * (head + trailing), kink};
}

double GreenKernel::impulse(double tau) const {
  if (tau <= 0.0) return 0.0;
  const double w = shift_.mode == KernelMode::derived ? shift_.gamma : 0.5 * shift_.gamma;
  return std::exp(-0.5 * shift_.k * tau) * std::sin(w * tau) / w;
}

double GreenKernel::impulse_dt(double tau) const {
  if (tau < 0.0) return 0.0;
  const double w = shift_.mode == KernelMode::derived ? shift_.gamma : 0.5 * shift_.gamma;
  return std::exp(-0.5 * shift_.k * tau) *
         (std::cos(w * tau) - (0.5 * shift_.k / w) * std::sin(w * tau));
}

double GreenKernel::homogeneous(double t) const {
  const double w = shift_.mode == KernelMode::derived ? shift_.gamma : 0.5 * shift_.gamma;
  return std::exp(-0.5 * shift_.k * t) * std::sin(w * t);
}

double GreenKernel::homogeneous_dt(double t) const {
  const double w = shift_.mode == KernelMode::derived ? shift_.gamma : 0.5 * shift_.gamma;
  return std::exp(-0.5 * shift_.k * t) * (w * std::cos(w * t) - 0.5 * shift_.k * std::sin(w * t));
}

double GreenKernel::corrector(double s) const {
  double num = 0.0;
  for (std::size_t i = 0; i < problem_.alphas.size(); ++i)
    if (problem_.xis[i] > s) num -= problem_.alphas[i] * impulse_dt(problem_.xis[i] - s);
  if (num == 0.0) return 0.0;
  // derived-mode denominator: sum_i a_i y1'(xi_i)
  double den = 0.0;
  for (std::size_t i = 0; i < problem_.alphas.size(); ++i)
    den += problem_.alphas[i] * homogeneous_dt(problem_.xis[i]);
  return num / den;
}

GreenKernel rebuild_kernel(const model::MultipointProblem& p, double k, double M) {
  return GreenKernel(p, make_shift(k, M, KernelMode::derived));
}

namespace {

struct GridBest {
  double value = -1.0;
  double t = 0.0, s = 0.0;
  double cell_t = 0.0, cell_s = 0.0;
};

// Coarse grid + coordinate-wise golden refinement of |rescaled| over
// t in [0, s + period], s in [s_lo, s_hi).
template <class Rescaled>
GridBest search_branch(const Rescaled& f, double s_lo, double s_hi, double period, int nt, int ns,
                       double refine_tol) {
  GridBest best;
  for (int is = 0; is < ns; ++is) {
    const double s = s_lo + (s_hi - s_lo) * (is + 0.5) / ns;
    const double t_hi = s + period;
    for (int it = 0; it <= nt; ++it) {
      const double t = t_hi * it / nt;
      const double v = std::fabs(f(t, s));
      if (v > best.value) {
        best = {v, t, s, t_hi / nt, (s_hi - s_lo) / ns};
      }
    }
  }
  // alternate golden refinements in t and s around the best cell
  double t = best.t, s = best.s;
  for (int round = 0; round < 24; ++round) {
    auto gt = quad::golden_max([&](double tt) { return std::fabs(f(tt, s)); },
                               std::max(0.0, t - best.cell_t), t + best.cell_t, refine_tol);
    t = gt.argmax;
    auto gs = quad::golden_max([&](double ss) { return std::fabs(f(t, ss)); },
                               std::max(s_lo, s - best.cell_s),
                               std::min(s_hi - 1e-13 * (1 + s_hi), s + best.cell_s), refine_tol);
    s = gs.argmax;
    if (gs.value <= best.value * (1.0 + 1e-13)) {
      if (gs.value > best.value) { best.value = gs.value; best.t = t; best.s = s; }
      break;
    }
    best.value = gs.value;
    best.t = t;
    best.s = s;
  }
  return best;
}

}  // namespace

KernelConstants kernel_constants(const GreenKernel& gk, const KernelConstantsOptions& opt) {
  KernelConstants kc;
  kc.grid_t = opt.grid_t;
  kc.grid_s = opt.grid_s;
  kc.refine_tol = opt.refine_tol;

  const ShiftParams& sp = gk.shift();
  const double k = sp.k;
  const auto& xis = gk.problem().xis;
  const double xl = gk.tail_start();

  if (sp.mode == KernelMode::as_printed) {
    const double g = sp.gamma;
    const double period = 2.0 * std::numbers::pi / g;

    // Tail-branch suprema in closed form: |sin| attains 1, and the printed
    // derivative amplitude is sqrt(k^2/4 + 1).
    kc.c1 = 1.0 / g;
    kc.c2 = std::sqrt(0.25 * k * k + 1.0) / g;

    // Global sup over every branch. The rescaled kernel is period-periodic in
    // t on each s-branch, so t scans [0, s + period].
    auto resc_g = [&](double t, double s) { return gk.green(t, s) * std::exp(0.5 * k * (t + s)); };
    auto resc_dg = [&](double t, double s) {
      return gk.green_dt(t, s, DerivFormula::printed) * std::exp(0.5 * k * (t + s));
    };
    GridBest b1{*kc.c1, 0.0, xl + 0.25 * period, 0, 0};
    GridBest b2{*kc.c2, 0.0, xl + 0.25 * period, 0, 0};
    for (std::size_t i = 1; i < xis.size(); ++i) {
      GridBest g1 = search_branch(resc_g, xis[i - 1], xis[i], period, opt.grid_t, opt.grid_s,
                                  opt.refine_tol);
      GridBest g2 = search_branch(resc_dg, xis[i - 1], xis[i], period, opt.grid_t, opt.grid_s,
                                  opt.refine_tol);
      if (g1.value > b1.value) b1 = g1;
      if (g2.value > b2.value) b2 = g2;
    }
    // one period of the tail (covers the closed-form branch numerically too)
    GridBest t1 = search_branch(resc_g, xl, xl + period, period, opt.grid_t, opt.grid_s,
                                opt.refine_tol);
    GridBest t2 = search_branch(resc_dg, xl, xl + period, period, opt.grid_t, opt.grid_s,
                                opt.refine_tol);
    if (t1.value > b1.value) b1 = t1;
    if (t2.value > b2.value) b2 = t2;
    kc.c1_global = b1.value;
    kc.c2_global = b2.value;
    kc.c1_argmax = SearchPoint{b1.t, b1.s};
    kc.c2_argmax = SearchPoint{b2.t, b2.s};
  }

  // b1/b2: sup over t of the absolute s-integrals. The kernel vanishes for
  // s >= max(t, last node), so the s-integral is finite by truncation.
  auto absint = [&](double t, bool deriv) {
    std::vector<double> bps(xis.begin(), xis.end());
    bps.push_back(t);
    quad::Integrand gi;
    gi.eval = deriv ? std::function<double(double)>([&gk, t](double s) {
      return std::fabs(gk.green_dt(t, s, DerivFormula::printed));
    })
                    : std::function<double(double)>(
                          [&gk, t](double s) { return std::fabs(gk.green(t, s)); });
    gi.breakpoints = std::move(bps);
    gi.cutoff = std::max(t, xl);
    return quad::integrate_halfline(gi, opt.quad).value;
  };

  // window: the t-profile of the integral settles after a few decay lengths
  const double t_window = std::max(2.0 * xl + 10.0, 20.0 / k) + 2.0 * std::numbers::pi / sp.gamma;
  auto sup_profile = [&](bool deriv, double& arg) {
    double best = -1.0, bt = 0.0;
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      const double t = t_window * i / n;
      const double v = absint(t, deriv);
      if (v > best) {
        best = v;
        bt = t;
      }
    }
    const double cell = t_window / n;
    auto g = quad::golden_max([&](double t) { return absint(t, deriv); },
                              std::max(0.0, bt - cell), bt + cell, 1e-6);
    if (g.value > best) {
      best = g.value;
      bt = g.argmax;
    }
    // derived kernel: the profile tends to the full impulse-response mass
    if (sp.mode == KernelMode::derived) {
      quad::Integrand tailm;
      tailm.eval = [&gk](double tau) { return std::fabs(gk.impulse(tau)); };
      tailm.envelope = quad::Envelope{1.0 / sp.gamma, 0.5 * k};
      const double limit = quad::integrate_halfline(tailm, opt.quad).value;
      if (limit > best) {
        best = limit;
        bt = t_window;
      }
    }
    arg = bt;
    return best;
  };
  kc.b1 = sup_profile(false, kc.b1_argmax_t);
  kc.b2 = sup_profile(true, kc.b2_argmax_t);
  return kc;
}

}  // namespace hlbvp::kernel

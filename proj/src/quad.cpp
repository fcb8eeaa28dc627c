#include "hlbvp/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace hlbvp::quad {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half; symmetric).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
  double value;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv1[7], fv2[7];
  const double fc = f(c);
  double result_g = fc * kWg[3];
  double result_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    fv1[j] = f(c - x);
    fv2[j] = f(c + x);
    result_k += kWgk[j] * (fv1[j] + fv2[j]);
    if (j % 2 == 1) result_g += kWg[j / 2] * (fv1[j] + fv2[j]);
  }
  const double mean = 0.5 * result_k;
  double resasc = kWgk[7] * std::fabs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  double err = std::fabs((result_k - result_g) * h);
  resasc *= std::fabs(h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return {result_k * h, err};
}

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const {
    if (error != o.error) return error < o.error;
    return a > o.a;  // deterministic tie-break: leftmost first
  }
};

QuadResult adaptive(const std::function<double(double)>& f, const std::vector<double>& edges,
                    const QuadOptions& opt) {
  std::priority_queue<Panel> heap;
  std::vector<Panel> accepted;  // panels at rounding resolution
  double total = 0.0, total_err = 0.0;
  int panels = 0;
  auto push = [&](double a, double b) {
    if (!(b > a)) return;
    const PanelResult r = gk15(f, a, b);
    heap.push({a, b, r.value, r.error});
    total += r.value;
    total_err += r.error;
    ++panels;
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push(edges[i], edges[i + 1]);
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total)) && !heap.empty()) {
    if (panels >= opt.max_subdivisions)
      throw QuadratureError("integral did not converge after " +
                            std::to_string(opt.max_subdivisions) + " panels");
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval at rounding resolution; keep its value, stop counting its error
      total_err -= worst.error;
      worst.error = 0.0;
      accepted.push_back(worst);
      continue;
    }
    total -= worst.value;
    total_err -= worst.error;
    push(worst.a, mid);
    push(mid, worst.b);
  }
  // re-sum left to right for reproducibility
  std::vector<Panel> all = std::move(accepted);
  all.reserve(all.size() + heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  double value = 0.0, err = 0.0;
  for (const Panel& p : all) {
    value += p.value;
    err += p.error;
  }
  return {value, err, panels, edges.empty() ? 0.0 : edges.back()};
}

std::vector<double> make_edges(double lo, double hi, const std::vector<double>& breakpoints) {
  std::vector<double> edges;
  edges.push_back(lo);
  for (double b : breakpoints)
    if (b > lo && b < hi) edges.push_back(b);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

QuadResult integrate_halfline(const Integrand& g, const QuadOptions& opt) {
  if (opt.rel_tol <= 0 || opt.abs_tol <= 0)
    throw std::invalid_argument("quadrature tolerances must be positive");
  double last_bp = 0.0;
  for (double b : g.breakpoints) last_bp = std::max(last_bp, b);

  double T;
  double tail_bound = 0.0;
  if (g.cutoff) {
    T = *g.cutoff;
  } else if (g.envelope) {
    const Envelope& env = *g.envelope;
    if (!(env.rate > 0.0)) throw std::invalid_argument("envelope rate must be positive");
    if (env.amplitude <= 0.0) {
      T = last_bp;  // nothing beyond the breakpoints
    } else {
      // (A / c) e^{-cT} <= abs_tol / 2
      T = std::log(2.0 * env.amplitude / (env.rate * opt.abs_tol)) / env.rate;
      T = std::max(T, last_bp);
      tail_bound = env.amplitude / env.rate * std::exp(-env.rate * T);
    }
  } else {
    throw std::invalid_argument("half-line integrand needs an envelope or an explicit cutoff");
  }
  if (T <= 0.0) return {0.0, tail_bound, 0, 0.0};

  QuadResult r = adaptive(g.eval, make_edges(0.0, T, g.breakpoints), opt);
  r.error_estimate += tail_bound;
  r.upper_limit = T;
  return r;
}

QuadResult integrate_interval(const std::function<double(double)>& g, double a, double b,
                              const QuadOptions& opt, const std::vector<double>& breakpoints) {
  if (!(b > a)) return {0.0, 0.0, 0, b};
  return adaptive(g, make_edges(a, b, breakpoints), opt);
}

namespace {

std::complex<double> gk15_complex_panel(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::complex<double> fv[15];
  fv[7] = f(c);
  std::complex<double> acc_k = fv[7] * kWgk[7];
  std::complex<double> acc_g = fv[7] * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    fv[j] = f(c - x);
    fv[14 - j] = f(c + x);
    acc_k += kWgk[j] * (fv[j] + fv[14 - j]);
    if (j % 2 == 1) acc_g += kWg[j / 2] * (fv[j] + fv[14 - j]);
  }
  const std::complex<double> mean = acc_k * 0.5;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  resasc *= std::fabs(h);
  err = std::abs(acc_k - acc_g) * std::fabs(h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return acc_k * h;
}

std::complex<double> complex_segment_rec(const std::function<std::complex<double>(double)>& f,
                                         double a, double b, double rel_tol, double abs_tol,
                                         int depth) {
  double err;
  const std::complex<double> v = gk15_complex_panel(f, a, b, err);
  if (depth >= 14 || err <= std::max(abs_tol, rel_tol * std::abs(v))) return v;
  const double mid = 0.5 * (a + b);
  if (mid <= a || mid >= b) return v;
  return complex_segment_rec(f, a, mid, rel_tol, 0.5 * abs_tol, depth + 1) +
         complex_segment_rec(f, mid, b, rel_tol, 0.5 * abs_tol, depth + 1);
}

}  // namespace

std::complex<double> integrate_complex_segment(
    const std::function<std::complex<double>(double)>& f, double a, double b, double rel_tol,
    double abs_tol) {
  if (!(b > a)) return {0.0, 0.0};
  return complex_segment_rec(f, a, b, rel_tol, abs_tol, 0);
}

SupResult golden_max(const std::function<double(double)>& F, double a, double b, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = F(c), fd = F(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = F(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = F(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {F(x), x, b, 0};
}

SupResult sup_on_ray(const std::function<double(double)>& F, double t_min, Envelope decay,
                     double refine_tol, int scan_points) {
  if (!(decay.rate > 0.0)) throw std::invalid_argument("decay rate must be positive");
  double T = t_min + 8.0 / decay.rate;
  const double t_hard = t_min + 40.0 / decay.rate;  // e^{-40}: below any representable gain
  double best = -1e308, best_t = t_min;
  int total_points = 0;

  auto scan = [&](double lo, double hi, int n) {
    for (int i = 0; i <= n; ++i) {
      const double t = lo + (hi - lo) * i / n;
      const double v = F(t);
      ++total_points;
      if (v > best) {
        best = v;
        best_t = t;
      }
    }
  };

  scan(t_min, T, scan_points);
  while (decay.amplitude * std::exp(-decay.rate * T) > best - 1e-12 && T < t_hard) {
    const double T2 = std::min(T + 8.0 / decay.rate, t_hard);
    scan(T, T2, scan_points / 2);
    T = T2;
  }

  const double cell = (T - t_min) / scan_points;
  const double lo = std::max(t_min, best_t - 2.0 * cell);
  const double hi = std::min(T, best_t + 2.0 * cell);
  if (hi > lo) {
    SupResult g = golden_max(F, lo, hi, refine_tol * (1.0 + std::fabs(best_t)));
    if (g.value > best) {
      best = g.value;
      best_t = g.argmax;
    }
  }
  return {best, best_t, T, total_points};
}

}  // namespace hlbvp::quad

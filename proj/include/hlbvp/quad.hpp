#ifndef HLBVP_QUAD_HPP
#define HLBVP_QUAD_HPP

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "hlbvp/errors.hpp"

namespace hlbvp::quad {

// |g(s)| <= amplitude * exp(-rate * s) beyond the last breakpoint.
struct Envelope {
  double amplitude = 0.0;
  double rate = 0.0;  // must be > 0 when used
};

struct Integrand {
  std::function<double(double)> eval;
  std::vector<double> breakpoints;  // sorted ascending; segments never straddle one
  std::optional<Envelope> envelope;
  std::optional<double> cutoff;  // explicit upper limit when no envelope is known
};

struct QuadOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int max_subdivisions = 20000;
};

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int segments = 0;       // adaptive segments actually used
  double upper_limit = 0.0;  // truncation point T actually integrated to
};

// Adaptive Gauss-Kronrod 7/15 over [0, inf) with breakpoint splitting and an
// envelope-based tail cut: T is chosen so (A/rate) e^{-rate T} <= abs_tol/2.
// Throws std::invalid_argument when neither envelope nor cutoff is given and
// QuadratureError when max_subdivisions is exhausted.
QuadResult integrate_halfline(const Integrand& g, const QuadOptions& opt = {});

// Same machinery on a finite interval.
QuadResult integrate_interval(const std::function<double(double)>& g, double a, double b,
                              const QuadOptions& opt = {},
                              const std::vector<double>& breakpoints = {});

struct SupResult {
  double value = 0.0;
  double argmax = 0.0;
  double scan_end = 0.0;  // window actually searched
  int scan_points = 0;
};

// Supremum of F over [t_min, inf) for F with |F(t)| <= A e^{-c t} beyond some
// point: grid scan over an adaptively extended window (stopping once the
// envelope bound falls below the incumbent) plus golden-section refinement of
// the best cell.
SupResult sup_on_ray(const std::function<double(double)>& F, double t_min, Envelope decay,
                     double refine_tol = 1e-10, int scan_points = 1024);

// Golden-section maximum of a unimodal F on [a, b].
SupResult golden_max(const std::function<double(double)>& F, double a, double b,
                     double tol = 1e-10);

// Complex-valued Gauss-Kronrod 7/15 integral over [a, b] with recursive
// bisection until |GK15 - GK7| meets the tolerances; building block for
// prefix accumulation over grid segments (a smooth segment costs one panel,
// a kinked one a handful).
std::complex<double> integrate_complex_segment(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double rel_tol = 1e-11, double abs_tol = 1e-13);

}  // namespace hlbvp::quad

#endif

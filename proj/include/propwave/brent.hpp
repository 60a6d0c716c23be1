#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace propwave {

struct BracketError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  double bracket_width = 0.0;  // |b - a| of the final enclosing interval
};

// Brent's method: inverse quadratic / secant steps with a bisection fallback.
// Stops when the enclosing interval is below xtol + xtol_rel*|x| (plus a
// machine-precision floor) or |f| <= ftol. Never evaluates f outside [lo, hi].
template <class F>
RootResult find_root(F&& f, double lo, double hi, double xtol,
                     double ftol = 0.0, int max_iterations = 100,
                     double xtol_rel = 0.0) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo >= hi)
    throw std::invalid_argument("find_root: invalid interval");
  if (xtol < 0.0 || xtol_rel < 0.0)
    throw std::invalid_argument("find_root: negative tolerance");

  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return {a, fa, 0, 0.0};
  if (fb == 0.0) return {b, fb, 0, 0.0};
  if ((fa > 0.0) == (fb > 0.0))
    throw BracketError("find_root: f(lo) and f(hi) have the same sign");

  const double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa;
  double d = b - a, e = d;

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 =
        2.0 * eps * std::abs(b) + 0.5 * (xtol + xtol_rel * std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= ftol) break;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // interpolation step (secant or inverse quadratic)
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  return {b, fb, iter, std::abs(c - b)};
}

}  // namespace propwave

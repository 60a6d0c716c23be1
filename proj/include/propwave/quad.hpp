#pragma once

#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace propwave {

struct QuadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

// Odd node indices (1,3,5) and the centre (7) form the embedded Gauss-7 rule.
template <class F>
void gk15(F& f, double a, double b, double& value, double& error) {
  const double hc = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double res_g = 0.0, res_k = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = hc * kGk15Nodes[i];
    const double fsum = (i == 7) ? f(mid) : f(mid - dx) + f(mid + dx);
    res_k += kGk15WeightsK[i] * fsum;
    if (i % 2 == 1) res_g += kGk15WeightsG[i / 2] * fsum;
  }
  value = res_k * hc;
  error = std::abs((res_k - res_g) * hc);
}

}  // namespace detail

// Adaptive quadrature on [a, b]: globally refines the subinterval with the
// largest Gauss-Kronrod error estimate until the summed error is below
// rtol * |integral| + atol. Handles integrable endpoint singularities via
// subdivision (the Kronrod nodes are interior).
template <class F>
double quad(F&& f, double a, double b, double rtol = 1e-10, double atol = 0.0,
            int max_intervals = 2000) {
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw std::invalid_argument("quad: non-finite bounds");
  if (a == b) return 0.0;

  struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
  };

  auto evaluate = [&](double lo, double hi) {
    Interval iv{lo, hi, 0.0, 0.0};
    detail::gk15(f, lo, hi, iv.value, iv.error);
    if (!std::isfinite(iv.value))
      throw QuadError("quad: non-finite integrand value");
    return iv;
  };

  std::priority_queue<Interval> heap;
  heap.push(evaluate(a, b));
  double total = heap.top().value;
  double total_err = heap.top().error;
  int n_intervals = 1;

  while (total_err > rtol * std::abs(total) + atol) {
    if (n_intervals >= max_intervals)
      throw QuadError("quad: did not converge within the interval budget");
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      throw QuadError("quad: interval underflow before convergence");
    Interval left = evaluate(worst.a, mid);
    Interval right = evaluate(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++n_intervals;
  }
  return total;
}

}  // namespace propwave

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "propwave/brent.hpp"

namespace propwave {

struct IvpSpec {
  // dy/dt = rhs(t, y); y has fixed dimension y0.size()
  std::function<void(double, const double*, double*)> rhs;
  std::vector<double> y0;
  double t0 = 0.0;
  double t_end = 1.0;
  double rtol = 1e-10;
  double atol = 1e-10;
  // optional: integration terminates where event(t, y) first reaches <= 0
  std::function<double(double, const double*)> event;
  int max_steps = 200000;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = |t_end - t0|
};

enum class IvpStatus { ReachedEnd, Event, StepFailure, MaxSteps };

namespace radau {

inline const double kSq6 = std::sqrt(6.0);
inline const double kC1 = (4.0 - kSq6) / 10.0;
inline const double kC2 = (4.0 + kSq6) / 10.0;
inline const double kC1M1 = kC1 - 1.0;
inline const double kC2M1 = kC2 - 1.0;
inline const double kC1MC2 = kC1 - kC2;

// collocation polynomial of the last step, Horner form in s = (t - t_right)/h
struct DenseSegment {
  double t_left = 0.0, t_right = 0.0, h = 0.0;
  std::vector<double> y_right, a1, a2, a3;

  double eval(double t, int comp) const {
    const double s = (t - t_right) / h;
    return y_right[comp] +
           s * (a1[comp] +
                (s - kC2M1) * (a2[comp] + (s - kC1M1) * a3[comp]));
  }
};

}  // namespace radau

struct IvpResult {
  IvpStatus status = IvpStatus::StepFailure;
  std::string message;
  double t_final = 0.0;
  std::vector<double> y_final;
  std::vector<double> t_nodes;                // accepted nodes, includes t0
  std::vector<std::vector<double>> y_nodes;   // states at the nodes
  std::vector<radau::DenseSegment> segments;  // one per accepted step
  double event_t = 0.0;
  int steps_accepted = 0;
  int steps_rejected = 0;
  int rhs_evaluations = 0;

  bool ok() const {
    return status == IvpStatus::ReachedEnd || status == IvpStatus::Event;
  }

  // Collocation-polynomial evaluation; exact (bit-for-bit) at accepted nodes.
  double eval(double t, int comp = 0) const {
    if (segments.empty()) return y_nodes.front()[comp];
    if (t == t_nodes.front()) return y_nodes.front()[comp];
    const double dir = segments.front().h > 0 ? 1.0 : -1.0;
    // binary search for the segment with t in (t_left, t_right]
    std::size_t lo = 0, hi = segments.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (dir * t <= dir * segments[mid].t_right)
        hi = mid;
      else
        lo = mid + 1;
    }
    const auto& seg = segments[lo];
    if (t == seg.t_right) return seg.y_right[comp];
    return seg.eval(t, comp);
  }
};

// 3-stage Radau IIA collocation (order 5), adaptive step size, simplified
// Newton iteration on the transformed stage system, following the classical
// RADAU5 implementation of Hairer & Wanner. State dimensions here are small,
// so the Jacobian is dense and recomputed every step.
inline IvpResult integrate(const IvpSpec& spec) {
  using Eigen::MatrixXcd;
  using Eigen::MatrixXd;
  using Eigen::VectorXcd;
  using Eigen::VectorXd;
  using namespace radau;

  const int n = static_cast<int>(spec.y0.size());
  if (n == 0) throw std::invalid_argument("integrate: empty state");
  if (!spec.rhs) throw std::invalid_argument("integrate: missing rhs");
  if (!(spec.rtol >= 1e-15 && spec.rtol <= 1e-1) ||
      !(spec.atol >= 1e-15 && spec.atol <= 1e-1))
    throw std::invalid_argument("integrate: tolerances outside [1e-15, 1e-1]");

  const double uround = std::numeric_limits<double>::epsilon();
  const double span = spec.t_end - spec.t0;

  IvpResult res;
  res.y_final = spec.y0;
  res.t_final = spec.t0;
  res.t_nodes.push_back(spec.t0);
  res.y_nodes.push_back(spec.y0);

  if (span == 0.0) {
    res.status = IvpStatus::ReachedEnd;
    return res;
  }
  const double posneg = span > 0 ? 1.0 : -1.0;
  const double hmax = spec.max_step > 0 ? spec.max_step : std::abs(span);

  // eigenvalues of the inverse Radau IIA coefficient matrix
  const double u1 =
      30.0 / (6.0 + std::pow(81.0, 1.0 / 3.0) - std::pow(9.0, 1.0 / 3.0));
  double alph = (12.0 - std::pow(81.0, 1.0 / 3.0) + std::pow(9.0, 1.0 / 3.0)) / 60.0;
  double beta = (std::pow(81.0, 1.0 / 3.0) + std::pow(9.0, 1.0 / 3.0)) *
                std::sqrt(3.0) / 60.0;
  const double cno = alph * alph + beta * beta;
  alph /= cno;
  beta /= cno;

  // stage transformation T, T^-1
  const double t11 = 9.1232394870892942792e-02, t12 = -0.14125529502095420843,
               t13 = -3.0029194105147424492e-02, t21 = 0.24171793270710701896,
               t22 = 0.20412935229379993199, t23 = 0.38294211275726193779,
               t31 = 0.96604818261509293619;
  const double ti11 = 4.3255798900631553510, ti12 = 0.33919925181580986954,
               ti13 = 0.54177053993587487119, ti21 = -4.1787185915519047273,
               ti22 = -0.32768282076106238708, ti23 = 0.47662355450055045196,
               ti31 = -0.50287263494578687595, ti32 = 2.5719269498556054292,
               ti33 = -0.59603920482822492497;

  // embedded 3rd-order error weights
  const double de1 = -(13.0 + 7.0 * kSq6) / 3.0;
  const double de2 = (-13.0 + 7.0 * kSq6) / 3.0;
  const double de3 = -1.0 / 3.0;

  const int nit = 7;
  const double safe = 0.9;
  const double facl = 5.0;   // max step decrease h/5
  const double facr = 1.0 / 8.0;  // max step increase 8h
  const double cfac = safe * (1 + 2 * nit);
  const double fnewt =
      std::max(10.0 * uround / spec.rtol, std::min(0.03, std::sqrt(spec.rtol)));

  VectorXd y = Eigen::Map<const VectorXd>(spec.y0.data(), n);
  VectorXd f0(n), scal(n);
  auto call_rhs = [&](double t, const VectorXd& yy, VectorXd& ff) {
    spec.rhs(t, yy.data(), ff.data());
    ++res.rhs_evaluations;
  };
  auto update_scal = [&] {
    for (int i = 0; i < n; ++i)
      scal(i) = spec.atol + spec.rtol * std::abs(y(i));
  };
  update_scal();
  call_rhs(spec.t0, y, f0);
  if (!f0.allFinite()) {
    res.status = IvpStatus::StepFailure;
    res.message = "non-finite derivative at the initial point";
    return res;
  }

  double g_prev = 0.0;
  if (spec.event) {
    g_prev = spec.event(spec.t0, y.data());
    if (g_prev <= 0.0) {
      res.status = IvpStatus::Event;
      res.event_t = spec.t0;
      return res;
    }
  }

  // automatic initial step (forward-Euler probe)
  double h;
  if (spec.initial_step != 0.0) {
    h = posneg * std::min(std::abs(spec.initial_step), hmax);
  } else {
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < n; ++i) {
      d0 += std::pow(y(i) / scal(i), 2);
      d1 += std::pow(f0(i) / scal(i), 2);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, hmax);
    VectorXd y1p = y + posneg * h0 * f0;
    VectorXd f1p(n);
    call_rhs(spec.t0 + posneg * h0, y1p, f1p);
    double d2 = 0.0;
    if (f1p.allFinite()) {
      for (int i = 0; i < n; ++i) d2 += std::pow((f1p(i) - f0(i)) / scal(i), 2);
      d2 = std::sqrt(d2 / n) / h0;
    }
    double h1;
    if (std::max(d1, d2) <= 1e-15)
      h1 = std::max(1e-6, h0 * 1e-3);
    else
      h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    h = posneg * std::min({100.0 * h0, h1, hmax});
  }

  double t = spec.t0;
  MatrixXd jac(n, n);
  VectorXd z1(n), z2(n), z3(n), w1(n), w2(n), w3(n), tmp(n);
  Eigen::PartialPivLU<MatrixXd> lu_real;
  Eigen::PartialPivLU<MatrixXcd> lu_cplx;

  auto compute_jacobian = [&] {
    VectorXd ypert = y, fpert(n);
    for (int j = 0; j < n; ++j) {
      const double ysafe = ypert(j);
      const double delt = std::sqrt(uround * std::max(1e-5, std::abs(ysafe)));
      ypert(j) = ysafe + delt;
      call_rhs(t, ypert, fpert);
      jac.col(j) = (fpert - f0) / delt;
      ypert(j) = ysafe;
    }
  };

  bool first = true, reject = false, last = false;
  double faccon = 1.0, hold = h, hacc = h, erracc = 1e-2, thqold = 1.0;
  std::vector<double> cont1(n), cont2(n), cont3(n);
  bool have_cont = false;
  int naccpt = 0, nsing = 0;

  auto fail = [&](const std::string& msg) {
    res.status = IvpStatus::StepFailure;
    res.message = msg + " at t = " + std::to_string(t);
    return res;
  };

  int nsteps = 0;
  compute_jacobian();
  bool need_decomp = true;

  while (true) {
    if (++nsteps >= spec.max_steps) {
      res.status = IvpStatus::MaxSteps;
      res.message = "maximum number of steps exceeded";
      return res;
    }
    if (0.1 * std::abs(h) <= std::abs(t) * uround)
      return fail("step size underflow");
    if ((t + 1.0001 * h - spec.t_end) * posneg >= 0.0) {
      h = spec.t_end - t;
      last = true;
    }

    if (need_decomp) {
      const double fac1 = u1 / h;
      MatrixXd e1 = -jac;
      e1.diagonal().array() += fac1;
      lu_real.compute(e1);
      MatrixXcd e2 = -jac.cast<std::complex<double>>();
      const std::complex<double> alphn(alph / h, beta / h);
      e2.diagonal().array() += alphn;
      lu_cplx.compute(e2);
      need_decomp = false;
    }

    // Newton starting values: zero, or extrapolation of the previous
    // collocation polynomial
    if (first || !have_cont) {
      z1.setZero(); z2.setZero(); z3.setZero();
      w1.setZero(); w2.setZero(); w3.setZero();
    } else {
      const double c3q = h / hold;
      const double c1q = kC1 * c3q;
      const double c2q = kC2 * c3q;
      for (int i = 0; i < n; ++i) {
        const double ak1 = cont1[i], ak2 = cont2[i], ak3 = cont3[i];
        z1(i) = c1q * (ak1 + (c1q - kC2M1) * (ak2 + (c1q - kC1M1) * ak3));
        z2(i) = c2q * (ak1 + (c2q - kC2M1) * (ak2 + (c2q - kC1M1) * ak3));
        z3(i) = c3q * (ak1 + (c3q - kC2M1) * (ak2 + (c3q - kC1M1) * ak3));
      }
      for (int i = 0; i < n; ++i) {
        w1(i) = ti11 * z1(i) + ti12 * z2(i) + ti13 * z3(i);
        w2(i) = ti21 * z1(i) + ti22 * z2(i) + ti23 * z3(i);
        w3(i) = ti31 * z1(i) + ti32 * z2(i) + ti33 * z3(i);
      }
    }

    // simplified Newton iteration
    int newt = 0;
    faccon = std::pow(std::max(faccon, uround), 0.8);
    double theta = 0.001;
    double dyno = 0.0, dynold = 0.0;
    bool newton_ok = false, retry_step = false;
    VectorXd ff1(n), ff2(n), ff3(n), yst(n);

    while (true) {
      if (newt >= nit) { retry_step = true; break; }
      yst = y + z1;
      call_rhs(t + kC1 * h, yst, ff1);
      yst = y + z2;
      call_rhs(t + kC2 * h, yst, ff2);
      yst = y + z3;
      call_rhs(t + h, yst, ff3);
      if (!ff1.allFinite() || !ff2.allFinite() || !ff3.allFinite()) {
        retry_step = true;
        break;
      }
      // transform the right-hand side and solve the two linear systems
      VectorXd r1(n), r3(n);
      VectorXcd r2(n);
      const double fac1 = u1 / h;
      const std::complex<double> alphn(alph / h, beta / h);
      for (int i = 0; i < n; ++i) {
        const double g1 = ti11 * ff1(i) + ti12 * ff2(i) + ti13 * ff3(i);
        const double g2 = ti21 * ff1(i) + ti22 * ff2(i) + ti23 * ff3(i);
        const double g3 = ti31 * ff1(i) + ti32 * ff2(i) + ti33 * ff3(i);
        r1(i) = g1 - fac1 * w1(i);
        r2(i) = std::complex<double>(g2, g3) -
                alphn * std::complex<double>(w2(i), w3(i));
        r3(i) = 0.0;
      }
      VectorXd dw1 = lu_real.solve(r1);
      VectorXcd dw23 = lu_cplx.solve(r2);
      if (!dw1.allFinite() || !dw23.allFinite()) { retry_step = true; break; }
      ++newt;
      dyno = 0.0;
      for (int i = 0; i < n; ++i) {
        dyno += std::pow(dw1(i) / scal(i), 2) +
                std::pow(dw23(i).real() / scal(i), 2) +
                std::pow(dw23(i).imag() / scal(i), 2);
      }
      dyno = std::sqrt(dyno / (3 * n));
      if (newt > 1 && newt < nit) {
        const double thq = dyno / dynold;
        theta = (newt == 2) ? thq : std::sqrt(thq * thqold);
        thqold = thq;
        if (theta < 0.99) {
          faccon = theta / (1.0 - theta);
          const double dyth =
              faccon * dyno * std::pow(theta, nit - 1 - newt) / fnewt;
          if (dyth >= 1.0) {
            // predicted to miss the tolerance within the remaining iterations
            const double qnewt = std::max(1e-4, std::min(20.0, dyth));
            const double hhfac =
                0.8 * std::pow(qnewt, -1.0 / (4.0 + nit - 1 - newt));
            h *= hhfac;
            reject = true;
            last = false;
            need_decomp = true;
            retry_step = true;
            break;
          }
        } else {
          retry_step = true;
          break;
        }
      }
      dynold = std::max(dyno, uround);
      w1 += dw1;
      for (int i = 0; i < n; ++i) {
        w2(i) += dw23(i).real();
        w3(i) += dw23(i).imag();
      }
      for (int i = 0; i < n; ++i) {
        z1(i) = t11 * w1(i) + t12 * w2(i) + t13 * w3(i);
        z2(i) = t21 * w1(i) + t22 * w2(i) + t23 * w3(i);
        z3(i) = t31 * w1(i) + w2(i);
      }
      if (faccon * dyno <= fnewt) { newton_ok = true; break; }
    }

    if (retry_step && !newton_ok) {
      if (!need_decomp) {  // plain convergence failure: halve the step
        h *= 0.5;
        reject = true;
        last = false;
        need_decomp = true;
      }
      if (++nsing >= 50) return fail("repeated Newton failures");
      continue;
    }

    // embedded error estimate, smoothed by the real factorisation
    const double hee1 = de1 / h, hee2 = de2 / h, hee3 = de3 / h;
    for (int i = 0; i < n; ++i)
      tmp(i) = hee1 * z1(i) + hee2 * z2(i) + hee3 * z3(i);
    VectorXd errv = lu_real.solve(VectorXd(f0 + tmp));
    double err = 0.0;
    for (int i = 0; i < n; ++i) err += std::pow(errv(i) / scal(i), 2);
    err = std::max(std::sqrt(err / n), 1e-10);
    if (err >= 1.0 && (first || reject)) {
      VectorXd yerr = y + errv, ferr(n);
      call_rhs(t, yerr, ferr);
      if (ferr.allFinite()) {
        errv = lu_real.solve(VectorXd(ferr + tmp));
        err = 0.0;
        for (int i = 0; i < n; ++i) err += std::pow(errv(i) / scal(i), 2);
        err = std::max(std::sqrt(err / n), 1e-10);
      }
    }

    const double fac = std::min(safe, cfac / (newt + 2 * nit));
    double quot = std::max(facr, std::min(facl, std::pow(err, 0.25) / fac));
    double hnew = h / quot;

    if (err < 1.0) {
      // accept
      ++naccpt;
      ++res.steps_accepted;
      nsing = 0;
      if (naccpt > 1) {
        // Gustafsson predictive controller
        double facgus = (hacc / h) * std::pow(err * err / erracc, 0.25) / safe;
        facgus = std::max(facr, std::min(facl, facgus));
        quot = std::max(quot, facgus);
        hnew = h / quot;
      }
      hacc = h;
      erracc = std::max(1e-2, err);
      hold = h;

      const double t_new = t + h;
      VectorXd ynew = y + z3;

      DenseSegment seg;
      seg.t_left = t;
      seg.t_right = t_new;
      seg.h = h;
      seg.y_right.assign(ynew.data(), ynew.data() + n);
      seg.a1.resize(n); seg.a2.resize(n); seg.a3.resize(n);
      for (int i = 0; i < n; ++i) {
        const double a1c = (z2(i) - z3(i)) / kC2M1;
        const double ak = (z1(i) - z2(i)) / kC1MC2;
        double acont3 = z1(i) / kC1;
        acont3 = (ak - acont3) / kC2;
        const double a2c = (ak - a1c) / kC1M1;
        seg.a1[i] = a1c;
        seg.a2[i] = a2c;
        seg.a3[i] = a2c - acont3;
        cont1[i] = seg.a1[i];
        cont2[i] = seg.a2[i];
        cont3[i] = seg.a3[i];
      }
      have_cont = true;
      res.segments.push_back(seg);

      // event localisation on the fresh segment (checks the interior
      // collocation nodes too, then refines on the dense polynomial)
      if (spec.event) {
        const double tc1 = t + kC1 * h, tc2 = t + kC2 * h;
        VectorXd yc1 = y + z1, yc2 = y + z2;
        const double gc1 = spec.event(tc1, yc1.data());
        const double gc2 = spec.event(tc2, yc2.data());
        const double g_end = spec.event(t_new, ynew.data());
        double ta = t, ga = g_prev, tb = 0.0, gb = 0.0;
        bool hit = false;
        const double tpts[3] = {tc1, tc2, t_new};
        const double gpts[3] = {gc1, gc2, g_end};
        for (int k = 0; k < 3; ++k) {
          if (gpts[k] <= 0.0) {
            tb = tpts[k];
            gb = gpts[k];
            hit = true;
            break;
          }
          ta = tpts[k];
          ga = gpts[k];
        }
        if (hit) {
          double t_ev = tb;
          if (gb < 0.0 && ga > 0.0 && ta != tb) {
            std::vector<double> ybuf(n);
            auto gfun = [&](double tt) {
              for (int i = 0; i < n; ++i) ybuf[i] = seg.eval(tt, i);
              return spec.event(tt, ybuf.data());
            };
            const auto r = find_root(gfun, std::min(ta, tb), std::max(ta, tb),
                                     1e-12, 0.0);
            t_ev = r.x;
          }
          res.t_nodes.push_back(t_ev);
          std::vector<double> yev(n);
          for (int i = 0; i < n; ++i) yev[i] = seg.eval(t_ev, i);
          res.y_nodes.push_back(yev);
          res.t_final = t_ev;
          res.y_final = yev;
          res.event_t = t_ev;
          res.status = IvpStatus::Event;
          return res;
        }
        g_prev = g_end;
      }

      t = t_new;
      y = ynew;
      res.t_nodes.push_back(t);
      res.y_nodes.emplace_back(y.data(), y.data() + n);
      update_scal();

      if (last) {
        res.t_final = t;
        res.y_final.assign(y.data(), y.data() + n);
        res.status = IvpStatus::ReachedEnd;
        return res;
      }
      call_rhs(t, y, f0);
      if (!f0.allFinite()) return fail("non-finite derivative");
      hnew = posneg * std::min(std::abs(hnew), hmax);
      if (reject) hnew = posneg * std::min(std::abs(hnew), std::abs(h));
      reject = false;
      first = false;
      h = hnew;
      compute_jacobian();
      need_decomp = true;
    } else {
      // reject
      reject = true;
      last = false;
      ++res.steps_rejected;
      if (first)
        h *= 0.1;
      else
        h = hnew;
      need_decomp = true;
    }
  }
}

}  // namespace propwave

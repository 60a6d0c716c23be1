#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "propwave/errors.hpp"
#include "propwave/problem.hpp"
#include "propwave/quad.hpp"
#include "propwave/radau5.hpp"

namespace propwave {

struct ShooterOptions {
  double dtheta_offset = 1e-6;   // departure offset from the burnt point
  double gamma_floor = 1e-13;    // early-termination event level
  double ode_rtol = 1e-14;
  double ode_atol = 1e-14;
  // exit bracket width <= (xtol_rel + 4 eps) |c|, kept below 1e-14 relative
  double brent_xtol_rel = 9e-15;
  double bracket_eps_b = 1e-9;   // relative offset inside c~_max
  double bracket_eps_s = 1e-9;   // offset on theta_s for the upper endpoint
  int bracket_retries = 6;
  double profile_truncation = 1e-9;  // |theta - limit| at the profile ends
  double profile_max_dtheta = 5e-4;  // gas profile resolution in theta
  double quad_rtol = 1e-10;
};

// Gas-phase trajectory gamma(theta) of the reduced system, integrated from
// the hyperbolic burnt critical point down to the surface.
struct Orbit {
  std::vector<double> theta_grid;    // strictly decreasing accepted nodes
  std::vector<double> gamma_values;  // matching values, > 0
  double c_tilde = 0.0;
  double theta_s = 0.0;
  double gamma_plus = 0.0;   // gamma(theta_s+); 0 when terminated early
  double gamma_minus = 0.0;  // analytic solid value -c~ theta_s
  double alpha = 0.0;        // departure slope at the critical point
  bool terminated_early = false;
  double theta_crossing = 0.0;  // where gamma hit the floor, if it did
  bool degenerate = false;      // theta_s within dtheta_offset of 1
  IvpResult ivp;                // dense trajectory for reconstruction
};

struct WaveProfiles {
  std::vector<double> x;    // m, ascending, interface at x = 0
  std::vector<double> T;    // K
  std::vector<double> Y;    // reactant mass fraction (1 inside the solid)
  std::vector<double> u;    // m/s (0 inside the solid)
  std::vector<double> rho;  // kg/m^3
  std::size_t gas_begin = 0;  // index of the first gas point
};

struct WaveSolution {
  double c = 0.0;        // regression velocity, m/s (< 0)
  double c_tilde = 0.0;
  double T_s = 0.0;      // surface temperature, K
  double mass_flux = 0.0;
  double xi_residual = 0.0;
  double c_lo_tilde = 0.0, c_hi_tilde = 0.0;  // bracket used
  double bracket_width = 0.0;  // enclosing interval on c~ at root-finder exit
  int iterations = 0;
  bool mass_fraction_exceeds_unity = false;
  WaveProfiles profiles;
  Orbit orbit;
};

// Negative root of alpha^2 - m~ alpha + beta = 0 in a cancellation-free
// form, valid for m~ >= 0 and beta < 0 (equals (m~/2)(1 - sqrt(1 - 4 beta/m~^2))).
inline double critical_slope_root(double mtilde, double beta) {
  return 2.0 * beta / (mtilde + std::sqrt(mtilde * mtilde - 4.0 * beta));
}

// Departure slope at the burnt critical point, with m~ = -eta (c_p/c_s) c~ > 0
// and beta = dPsi/dtheta(1) < 0.
inline double critical_slope(double c_tilde, const DimensionlessProblem& pb) {
  if (c_tilde > 0.0)
    throw std::domain_error("critical_slope: c~ must be <= 0");
  const double beta = pb.psi_slope_at_burnt();
  if (!(beta < 0.0))
    throw ModelError("critical_slope: dPsi/dtheta(1) >= 0, no hyperbolic departure");
  return critical_slope_root(pb.mtilde(c_tilde), beta);
}

// Integrates d gamma/d theta = -eta (c_p/c_s) c~ - Psi(theta)/gamma backward
// from (1 - dtheta, -alpha dtheta) to theta_s. A gamma-floor event marks the
// loss of gas heat feedback before the surface is reached.
inline Orbit integrate_gas_orbit(double c_tilde,
                                 const DimensionlessProblem& pb,
                                 const ShooterOptions& opts = {}) {
  Orbit orbit;
  orbit.c_tilde = c_tilde;
  orbit.theta_s = pb.theta_s_of_c(c_tilde);
  if (orbit.theta_s < 0.0)
    throw std::domain_error(
        "integrate_gas_orbit: theta_s < 0 (surface below the cold state)");
  if (orbit.theta_s > 1.0 + 1e-12)
    throw std::domain_error("integrate_gas_orbit: theta_s > 1 (beyond c~_max)");
  orbit.alpha = critical_slope(std::min(c_tilde, 0.0), pb);
  orbit.gamma_minus = -c_tilde * orbit.theta_s;

  const double theta_start = 1.0 - opts.dtheta_offset;
  if (orbit.theta_s >= theta_start) {
    // the integration interval vanishes: gamma(theta_s+) -> 0 in this limit
    orbit.degenerate = true;
    orbit.gamma_plus = 0.0;
    return orbit;
  }

  const double mt = pb.mtilde(c_tilde);
  IvpSpec spec;
  spec.rhs = [&pb, mt](double theta, const double* y, double* dydt) {
    dydt[0] = mt - pb.psi(theta) / y[0];
  };
  spec.y0 = {-orbit.alpha * opts.dtheta_offset};
  spec.t0 = theta_start;
  spec.t_end = orbit.theta_s;
  spec.rtol = opts.ode_rtol;
  spec.atol = opts.ode_atol;
  const double floor = opts.gamma_floor;
  spec.event = [floor](double, const double* y) { return y[0] - floor; };

  orbit.ivp = integrate(spec);
  if (!orbit.ivp.ok())
    throw SolverError("gas orbit integration failed at c~ = " +
                      std::to_string(c_tilde) + ": " + orbit.ivp.message);

  orbit.theta_grid = orbit.ivp.t_nodes;
  orbit.gamma_values.reserve(orbit.ivp.y_nodes.size());
  for (const auto& y : orbit.ivp.y_nodes) orbit.gamma_values.push_back(y[0]);

  if (orbit.ivp.status == IvpStatus::Event) {
    orbit.terminated_early = true;
    orbit.theta_crossing = orbit.ivp.event_t;
    orbit.gamma_plus = 0.0;
  } else {
    orbit.gamma_plus = orbit.ivp.y_final[0];
  }
  return orbit;
}

// Interface mismatch xi(c~) = gamma(theta_s+) - eta gamma(theta_s-) - S(c~);
// its unique zero is the travelling-wave eigenvalue.
inline double mismatch_xi(double c_tilde, const DimensionlessProblem& pb,
                          const ShooterOptions& opts = {}) {
  const Orbit orbit = integrate_gas_orbit(c_tilde, pb, opts);
  return orbit.gamma_plus - pb.eta() * orbit.gamma_minus -
         pb.target_S(c_tilde);
}

// Eigenvalue bracket (c_lo, c_hi), verified to satisfy xi(c_lo) < 0 < xi(c_hi)
// with epsilon-enlargement retries; endpoints are limits, not evaluable states.
inline std::pair<double, double> bracket(const DimensionlessProblem& pb,
                                         const ShooterOptions& opts = {}) {
  if (pb.constant_Ts())
    throw std::logic_error("bracket: use solve_constant_ts for fixed T_s");
  const double ct_max = pb.c_tilde_max();

  double eps_b = opts.bracket_eps_b;
  double c_lo = 0.0, xi_lo = 0.0;
  bool ok = false;
  for (int k = 0; k <= opts.bracket_retries; ++k, eps_b *= 10.0) {
    c_lo = ct_max * (1.0 - eps_b);
    try {
      xi_lo = mismatch_xi(c_lo, pb, opts);
    } catch (const std::exception&) {
      continue;
    }
    if (xi_lo < 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw ModelError("bracket: xi(c_lo) < 0 unachievable near c~_max = " +
                     std::to_string(ct_max) + ", last xi = " +
                     std::to_string(xi_lo));

  double eps_s = opts.bracket_eps_s;
  double c_hi = 0.0, xi_hi = 0.0;
  ok = false;
  const auto& d = pb.derived();
  for (int k = 0; k <= opts.bracket_retries; ++k, eps_s *= 10.0) {
    const double theta_hi = d.has_c_min ? d.theta_s_min + eps_s : eps_s;
    try {
      c_hi = pb.c_of_theta_s(theta_hi);
      xi_hi = mismatch_xi(c_hi, pb, opts);
    } catch (const std::exception&) {
      continue;
    }
    if (xi_hi > 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw ModelError("bracket: xi(c_hi) > 0 unachievable; endpoint values "
                     "xi(c_lo) = " +
                     std::to_string(xi_lo) + ", xi(c_hi) = " +
                     std::to_string(xi_hi));
  if (!(c_lo < c_hi && c_hi < 0.0))
    throw ModelError("bracket: endpoints out of order");
  return {c_lo, c_hi};
}

// Builds the spatial profiles from a converged orbit. The gas abscissa is
// x~(theta) = integral_{theta_s}^{theta} dz/gamma(z) on the dense orbit
// interpolant, extended past the last node with the linearised tail
// gamma = alpha (theta - 1); the solid side is the closed form
// theta(x~) = theta_s exp(-c~ x~).
inline WaveProfiles reconstruct_profile(const Orbit& orbit,
                                        const DimensionlessProblem& pb,
                                        const ShooterOptions& opts = {}) {
  if (orbit.terminated_early || orbit.degenerate)
    throw SolverError("reconstruct_profile: orbit did not reach the surface");
  const auto& p = pb.params();
  const double c = pb.c_from_tilde(orbit.c_tilde);
  const double mdot = -p.rho_s * c;
  const double trunc = opts.profile_truncation;

  WaveProfiles prof;
  auto push_gas = [&](double theta, double x_tilde) {
    const double T = pb.temperature(theta);
    const double Y = pb.mass_fraction(theta);
    const double rho = gas_density(T, p);
    prof.x.push_back(pb.x_from_tilde(x_tilde));
    prof.T.push_back(T);
    prof.Y.push_back(Y);
    prof.u.push_back(c + mdot / rho);
    prof.rho.push_back(rho);
  };
  auto push_solid = [&](double theta, double x_tilde) {
    prof.x.push_back(pb.x_from_tilde(x_tilde));
    prof.T.push_back(pb.temperature(theta));
    prof.Y.push_back(1.0);
    prof.u.push_back(0.0);
    prof.rho.push_back(p.rho_s);
  };

  // solid: theta from the truncation level up to theta_s, log-spaced
  {
    const double theta_lo = std::min(trunc, 0.5 * orbit.theta_s);
    const int n_solid = 200;
    const double lr = std::log(orbit.theta_s / theta_lo);
    for (int i = 0; i <= n_solid; ++i) {
      const double theta =
          (i == n_solid)
              ? orbit.theta_s  // pin the interface value exactly
              : theta_lo * std::exp(lr * static_cast<double>(i) / n_solid);
      const double x_tilde =
          (i == n_solid) ? 0.0 : std::log(theta / orbit.theta_s) / (-orbit.c_tilde);
      push_solid(theta, x_tilde);
    }
  }
  prof.gas_begin = prof.x.size();

  // gas: accumulate x~ over the orbit nodes (ascending theta), subdividing
  // wide steps so downstream finite differences stay second-order accurate
  {
    const auto& ivp = orbit.ivp;
    std::vector<double> thetas;
    for (auto it = orbit.theta_grid.rbegin(); it != orbit.theta_grid.rend();
         ++it) {
      if (!thetas.empty()) {
        const double prev = thetas.back();
        const double step = *it - prev;
        const int nsub =
            std::max(1, static_cast<int>(std::ceil(step /
                                                   opts.profile_max_dtheta)));
        for (int s = 1; s < nsub; ++s)
          thetas.push_back(prev + step * s / nsub);
      }
      thetas.push_back(*it);
    }
    double x_tilde = 0.0;
    // the surface point shares x = 0 with the solid but carries the
    // gas-side mass fraction and velocity (both jump across the interface)
    push_gas(thetas.front(), 0.0);
    for (std::size_t k = 1; k < thetas.size(); ++k) {
      x_tilde += quad([&](double z) { return 1.0 / ivp.eval(z, 0); },
                      thetas[k - 1], thetas[k], opts.quad_rtol);
      push_gas(thetas[k], x_tilde);
    }
    // linearised tail up to |theta - 1| = truncation level
    const double dtheta_end = 1.0 - thetas.back();
    if (dtheta_end > trunc) {
      const int per_decade = 8;
      const int n_tail = std::max(
          2, static_cast<int>(per_decade * std::log10(dtheta_end / trunc)));
      double prev = dtheta_end;
      for (int i = 1; i <= n_tail; ++i) {
        const double frac = static_cast<double>(i) / n_tail;
        const double dth = dtheta_end * std::pow(trunc / dtheta_end, frac);
        x_tilde += std::log(dth / prev) / orbit.alpha;
        push_gas(1.0 - dth, x_tilde);
        prev = dth;
      }
    }
  }
  return prof;
}

namespace detail {

inline WaveSolution finish_solve(const DimensionlessProblem& pb,
                                 double c_lo, double c_hi,
                                 const ShooterOptions& opts) {
  const auto xi = [&](double ct) { return mismatch_xi(ct, pb, opts); };
  const auto root =
      find_root(xi, c_lo, c_hi, 0.0, 0.0, 100, opts.brent_xtol_rel);

  WaveSolution sol;
  sol.c_tilde = root.x;
  sol.c = pb.c_from_tilde(root.x);
  sol.xi_residual = root.fx;
  sol.iterations = root.iterations;
  sol.bracket_width = root.bracket_width;
  sol.c_lo_tilde = c_lo;
  sol.c_hi_tilde = c_hi;
  sol.mass_flux = -pb.params().rho_s * sol.c;
  sol.orbit = integrate_gas_orbit(root.x, pb, opts);
  sol.T_s = pb.temperature(sol.orbit.theta_s);
  sol.profiles = reconstruct_profile(sol.orbit, pb, opts);
  const auto& d = pb.derived();
  sol.mass_fraction_exceeds_unity =
      d.has_c_min && sol.orbit.theta_s < d.theta_s_min;
  return sol;
}

}  // namespace detail

// Full travelling-wave solve: bracket the eigenvalue, root-find the mismatch,
// reconstruct the profiles.
inline WaveSolution solve_wave(const PhysicalParams& p,
                               const ShooterOptions& opts = {}) {
  p.validate();
  if (p.Le != 1.0)
    throw ConfigError(
        "solve_wave: the phase-plane reduction requires Le = 1; "
        "use the finite-volume reference solver for Le != 1");
  const DimensionlessProblem pb(p);
  const auto [c_lo, c_hi] = bracket(pb, opts);
  return detail::finish_solve(pb, c_lo, c_hi, opts);
}

// Fixed surface temperature variant: the pyrolysis law is replaced by
// T_s = const, the single root is bracketed by doubling c until xi < 0.
inline WaveSolution solve_constant_ts(double Ts_fixed, const PhysicalParams& p,
                                      const ShooterOptions& opts = {}) {
  p.validate();
  if (p.Le != 1.0)
    throw ConfigError("solve_constant_ts: requires Le = 1");
  const DimensionlessProblem pb(p, Ts_fixed);
  const double theta_s = pb.theta_s_of_c(0.0);
  const double K =
      theta_s - q_pyro(Ts_fixed, p) /
                    (p.c_s * (pb.derived().T_f - p.T0));
  if (!(K > 0.0))
    throw std::domain_error(
        "solve_constant_ts: Ts below the zero-feedback temperature T0 + Q_p/c_s");

  const double c_hi = 0.0;
  const double xi_hi = mismatch_xi(c_hi, pb, opts);
  if (!(xi_hi > 0.0))
    throw ModelError("solve_constant_ts: xi(0) <= 0");
  double c_lo = -1.0;
  bool ok = false;
  for (int k = 0; k < 60; ++k, c_lo *= 2.0) {
    if (mismatch_xi(c_lo, pb, opts) < 0.0) {
      ok = true;
      break;
    }
  }
  if (!ok)
    throw ModelError("solve_constant_ts: xi stayed positive after 60 doublings");
  return detail::finish_solve(pb, c_lo, c_hi, opts);
}

// Overall hydrodynamic pressure variation across the gas phase, -mdot * du.
// Small and negative; its magnitude validates the uniform-pressure assumption.
inline double pressure_drop(const WaveProfiles& prof, double mass_flux) {
  if (prof.gas_begin >= prof.x.size())
    throw std::invalid_argument("pressure_drop: no gas profile");
  const double u_surface = prof.u[prof.gas_begin];
  const double u_far = prof.u.back();
  return -mass_flux * (u_far - u_surface);
}

}  // namespace propwave

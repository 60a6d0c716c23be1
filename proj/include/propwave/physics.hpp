#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "propwave/brent.hpp"
#include "propwave/errors.hpp"

namespace propwave {

inline constexpr double kGasConstant = 8.31446261815324;  // J/(mol K)

// Smooth pyrolysis cut-off near T0. Disabled by default: the shooting method
// does not need it, it exists as a modelling switch.
struct CutoffSpec {
  bool enabled = false;
  double width = 50.0;  // K
};

// All dimensional constants of the propellant, gas, kinetics and pyrolysis.
// SI units throughout.
struct PhysicalParams {
  double T0 = 300.0;        // far-field solid temperature, K
  double P = 5.0e6;         // pressure, Pa
  double rho_s = 1800.0;    // solid density, kg/m^3
  double lambda_s = 0.4;    // solid conductivity, W/(m K)
  double c_s = 1.2e3;       // solid specific heat, J/(kg K)
  double lambda_g = 0.08;   // gas conductivity, W/(m K)
  double c_p = 1.2e3;       // gas specific heat, J/(kg K)
  double M = 0.024;         // molar mass of both gas species, kg/mol
  double nu = -1.0;         // stoichiometric coefficient of the reactant, < 0
  double Q_g = 3.9e6;       // gas heat of reaction per unit mass, J/kg
  double Q_p_std = 1.8e5;   // pyrolysis heat at T_std, J/kg
  double T_std = 298.15;    // standard temperature, K
  double A_reac = 850.0;    // gas reaction pre-exponential, 1/(K s)
  double T_a = 7216.0;      // gas activation temperature, K
  double A_p = 4.0e5;       // pyrolysis pre-exponential, kg/(m^2 s)
  double T_ap = 1.0e4;      // pyrolysis activation temperature, K
  double Le = 1.0;          // Lewis number (finite-volume solver only)
  double L_ref = 1.0e-4;    // nondimensionalisation length scale, m
  CutoffSpec cutoff;

  void validate() const;

  // Default configuration: an AP/HTPB-like propellant at 5 MPa. Transport and
  // pyrolysis constants are plausible literature-scale values chosen so that
  // the solved regression speed lands in the mm/s range.
  static PhysicalParams reference() { return PhysicalParams{}; }
};

// Q_p(T_s) = Q_p_std + (c_s - c_p)(T_s - T_std); constant when c_s = c_p.
inline double q_pyro(double Ts, const PhysicalParams& p) {
  if (!std::isfinite(Ts)) throw std::domain_error("q_pyro: non-finite Ts");
  return p.Q_p_std + (p.c_s - p.c_p) * (Ts - p.T_std);
}

// Burnt-gas temperature from the global energy balance. Independent of the
// surface temperature and of the mass flux.
inline double flame_temperature(const PhysicalParams& p) {
  const double r = p.c_s / p.c_p;
  const double Tf = r * p.T0 + (p.Q_p_std + p.Q_g) / p.c_p + (1.0 - r) * p.T_std;
  if (!(Tf > p.T0))
    throw ConfigError("flame_temperature: T_f <= T0 (inadmissible heat release)");
  return Tf;
}

namespace detail {
// C-infinity ramp: 0 for y <= 0, approaches 1 on the scale of `width`.
inline double cutoff_phi(double y, double width) {
  if (y <= 0.0) return 0.0;
  return std::exp(-width / y);
}
}  // namespace detail

// Arrhenius pyrolysis law m = A_p exp(-T_ap/T_s), optionally multiplied by
// the smooth cut-off phi(T_s - T0). Strictly increasing in T_s.
inline double pyrolysis_mass_flux(double Ts, const PhysicalParams& p) {
  if (!std::isfinite(Ts) || Ts <= 0.0)
    throw std::domain_error("pyrolysis_mass_flux: Ts must be positive");
  double m = p.A_p * std::exp(-p.T_ap / Ts);
  if (p.cutoff.enabled) m *= detail::cutoff_phi(Ts - p.T0, p.cutoff.width);
  return m;
}

// Inverse of the pyrolysis law for a given regression velocity c < 0.
inline double surface_temperature_from_mass_flux(double mdot,
                                                 const PhysicalParams& p) {
  if (!(mdot > 0.0))
    throw std::domain_error("surface temperature: mass flux must be positive");
  if (!(mdot < p.A_p))
    throw std::domain_error("surface temperature: mass flux >= A_p, pyrolysis law not invertible");
  if (!p.cutoff.enabled) return p.T_ap / std::log(p.A_p / mdot);
  // with the cut-off the law is not analytically invertible
  const double Ts_upper = p.T_ap / std::log(p.A_p / mdot);  // phi <= 1
  double lo = p.T0 * (1.0 + 1e-12), hi = std::max(Ts_upper, p.T0 + 1.0);
  auto f = [&](double Ts) { return pyrolysis_mass_flux(Ts, p) - mdot; };
  while (f(hi) < 0.0) hi *= 2.0;
  const auto root = find_root(f, lo, hi, 1e-13 * hi);
  return root.x;
}

inline double surface_temperature_from_c(double c, const PhysicalParams& p) {
  if (!(c < 0.0))
    throw std::domain_error("surface_temperature_from_c: c >= 0, no regression");
  return surface_temperature_from_mass_flux(-p.rho_s * c, p);
}

// Reactant mass fraction as a function of the dimensionless temperature,
// from the constant combustion enthalpy Q_g Y + c_p (T - T0) = c_p (T_f - T0).
// Values above 1 (possible for theta below the zero-feedback surface
// temperature) are returned as-is, never clamped; callers flag them.
inline double mass_fraction_of_theta(double theta, const PhysicalParams& p) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::domain_error("mass_fraction_of_theta: theta outside [0, 1]");
  const double Tf = flame_temperature(p);
  return (1.0 - theta) * p.c_p * (Tf - p.T0) / p.Q_g;
}

// Ideal gas law with a single molar mass.
inline double gas_density(double T, const PhysicalParams& p) {
  if (!(T > 0.0)) throw std::domain_error("gas_density: T must be positive");
  return p.P * p.M / (kGasConstant * T);
}

// Global reaction rate w = A [G1] T exp(-T_a/T), [G1] = rho Y / M, mol/(m^3 s).
inline double reaction_rate(double T, double Y, const PhysicalParams& p) {
  if (Y < 0.0) throw std::domain_error("reaction_rate: negative mass fraction");
  const double conc = gas_density(T, p) * Y / p.M;
  return p.A_reac * conc * T * std::exp(-p.T_a / T);
}

inline void PhysicalParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("PhysicalParams: ") + name +
                        " must be strictly positive");
  };
  positive(T0, "T0");
  positive(P, "P");
  positive(rho_s, "rho_s");
  positive(lambda_s, "lambda_s");
  positive(c_s, "c_s");
  positive(lambda_g, "lambda_g");
  positive(c_p, "c_p");
  positive(M, "M");
  positive(A_reac, "A_reac");
  positive(A_p, "A_p");
  positive(T_ap, "T_ap");
  positive(L_ref, "L_ref");
  positive(Le, "Le");
  positive(T_std, "T_std");
  if (!(nu < 0.0)) throw ConfigError("PhysicalParams: nu must be negative");
  if (!(Q_g > 0.0)) throw ConfigError("PhysicalParams: Q_g must be positive");
  if (!(T_a >= 0.0)) throw ConfigError("PhysicalParams: T_a must be >= 0");
  if (cutoff.enabled && !(cutoff.width > 0.0))
    throw ConfigError("PhysicalParams: cutoff.width must be positive");
  // admissibility: Q_p(T_s) > -Q_g over [T0, T_f]; Q_p is affine in T_s so the
  // endpoints suffice
  const double Tf = flame_temperature(*this);
  if (!(q_pyro(T0, *this) > -Q_g) || !(q_pyro(Tf, *this) > -Q_g))
    throw ConfigError("PhysicalParams: Q_p(T_s) <= -Q_g on [T0, T_f]");
}

// Nondimensional derived constants of an admissible parameter set.
struct DerivedQuantities {
  double T_f = 0.0;          // flame temperature, K
  double eta = 0.0;          // lambda_s / lambda_g
  double D_s = 0.0;          // solid thermal diffusivity, m^2/s
  double ratio_cs_cp = 0.0;  // c_s / c_p
  double theta_s_min = 0.0;  // only meaningful when has_c_min
  double c_max = 0.0;        // wave velocity with theta_s = 1, m/s
  double c_min = 0.0;        // wave velocity with theta_s = theta_s_min, m/s
  bool has_c_min = false;    // exothermic pyrolysis at the zero-feedback point

  static DerivedQuantities from(const PhysicalParams& p) {
    p.validate();
    DerivedQuantities d;
    d.T_f = flame_temperature(p);
    d.eta = p.lambda_s / p.lambda_g;
    d.D_s = p.lambda_s / (p.rho_s * p.c_s);
    d.ratio_cs_cp = p.c_s / p.c_p;
    d.c_max = -pyrolysis_mass_flux(d.T_f, p) / p.rho_s;
    // zero-feedback surface temperature: T_s = T0 + Q_p(T_s)/c_s, affine in T_s
    const double denom = 1.0 - (p.c_s - p.c_p) / p.c_s;
    const double Ts_min =
        (p.T0 + (p.Q_p_std - (p.c_s - p.c_p) * p.T_std) / p.c_s) / denom;
    if (Ts_min > p.T0 && Ts_min < d.T_f && q_pyro(Ts_min, p) > 0.0) {
      d.has_c_min = true;
      d.theta_s_min = (Ts_min - p.T0) / (d.T_f - p.T0);
      d.c_min = -pyrolysis_mass_flux(Ts_min, p) / p.rho_s;
    }
    return d;
  }
};

}  // namespace propwave

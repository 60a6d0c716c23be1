#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "propwave/physics.hpp"

namespace propwave {

// Nondimensional travelling-wave problem on theta in [0, 1]:
//   solid:  c~ gamma + gamma' = 0
//   gas:    eta (c_p/c_s) c~ gamma + gamma' = -Psi(theta)
//   jump:   gamma(theta_s+) - eta gamma(theta_s-) = S(c~)
// with theta = (T - T0)/(T_f - T0), x~ = x/L_ref and c~ = c L_ref / D_s.
// The gas convective factor is eta (c_p/c_s) c~ = -mdot c_p L / lambda_g,
// which reduces to eta c~ when c_s = c_p.
//
// An optional fixed surface temperature replaces the pyrolysis law
// (constant-T_s analysis); Q_p is then frozen at that temperature.
class DimensionlessProblem {
 public:
  explicit DimensionlessProblem(const PhysicalParams& p)
      : params_(p), derived_(DerivedQuantities::from(p)) {
    init();
  }

  DimensionlessProblem(const PhysicalParams& p, double Ts_fixed)
      : params_(p), derived_(DerivedQuantities::from(p)), fixed_Ts_(Ts_fixed) {
    // keep the energy balance consistent: T_f does not depend on T_s
    if (!(Ts_fixed > p.T0 && Ts_fixed < derived_.T_f))
      throw std::domain_error("constant-T_s mode: Ts outside (T0, T_f)");
    init();
  }

  const PhysicalParams& params() const { return params_; }
  const DerivedQuantities& derived() const { return derived_; }
  double eta() const { return derived_.eta; }
  double ratio_cs_cp() const { return derived_.ratio_cs_cp; }
  bool constant_Ts() const { return fixed_Ts_.has_value(); }

  // scale conversions
  double c_to_tilde(double c) const { return c * params_.L_ref / derived_.D_s; }
  double c_from_tilde(double ct) const { return ct * derived_.D_s / params_.L_ref; }
  double x_from_tilde(double xt) const { return xt * params_.L_ref; }
  double temperature(double theta) const {
    return params_.T0 + theta * (derived_.T_f - params_.T0);
  }
  double theta_of_temperature(double T) const {
    return (T - params_.T0) / (derived_.T_f - params_.T0);
  }
  double mdot_of_c_tilde(double ct) const {
    return -params_.rho_s * c_from_tilde(ct);
  }
  double c_tilde_max() const { return c_to_tilde(derived_.c_max); }

  // dimensionless gas mass flux m~ = mdot c_p L / lambda_g = -eta (c_p/c_s) c~
  double mtilde(double c_tilde) const {
    return -derived_.eta * (params_.c_p / params_.c_s) * c_tilde;
  }

  double mass_fraction(double theta) const {
    return (1.0 - theta) * y_unburnt_slope_;
  }

  // dimensionless heat source Psi(theta) >= 0, Psi(1) = 0
  double psi(double theta) const {
    if (!(theta >= 0.0 && theta <= 1.0))
      throw std::domain_error("psi: theta outside [0, 1]");
    const double w =
        reaction_rate(temperature(theta), mass_fraction(theta), params_);
    return k_psi_ * w;
  }

  // analytic dPsi/dtheta at theta = 1 (< 0); the kinetics are affine in Y and
  // Y(1) = 0, so only the Y-slope survives
  double psi_slope_at_burnt() const { return beta_; }

  // one-sided finite-difference fallback (Richardson-extrapolated)
  double psi_slope_at_burnt_fd(double step = 1e-7) const {
    const double d1 = (psi(1.0) - psi(1.0 - step)) / step;
    const double d2 = (psi(1.0) - psi(1.0 - 0.5 * step)) / (0.5 * step);
    return 2.0 * d2 - d1;
  }

  // pyrolysis target S(c~) = eta Q_p(T_s(c~)) c~ / (c_s (T_f - T0));
  // reduces to eta c~ Q_p/(Q_p + Q_g) when c_s = c_p
  double target_S(double c_tilde) const {
    if (c_tilde == 0.0) return 0.0;
    const double Ts =
        fixed_Ts_ ? *fixed_Ts_ : temperature(theta_s_of_c(c_tilde));
    return derived_.eta * q_pyro(Ts, params_) * c_tilde /
           (params_.c_s * (derived_.T_f - params_.T0));
  }

  // surface temperature map theta_s(c~), strictly decreasing in c~
  double theta_s_of_c(double c_tilde) const {
    if (fixed_Ts_) return theta_of_temperature(*fixed_Ts_);
    const double mdot = mdot_of_c_tilde(c_tilde);
    return theta_of_temperature(
        surface_temperature_from_mass_flux(mdot, params_));
  }

  double c_of_theta_s(double theta_s) const {
    if (fixed_Ts_)
      throw std::logic_error("c_of_theta_s: undefined in constant-T_s mode");
    const double mdot = pyrolysis_mass_flux(temperature(theta_s), params_);
    return c_to_tilde(-mdot / params_.rho_s);
  }

 private:
  void init() {
    const double q_mol = -params_.nu * params_.M * params_.Q_g;  // J/mol
    k_psi_ = params_.L_ref * params_.L_ref * q_mol /
             (params_.lambda_g * (derived_.T_f - params_.T0));
    y_unburnt_slope_ =
        params_.c_p * (derived_.T_f - params_.T0) / params_.Q_g;
    // d/dtheta [k_psi A (P/R) Y exp(-T_a/T)] at theta = 1 where Y = 0
    const double arrh = std::exp(-params_.T_a / derived_.T_f);
    beta_ = -k_psi_ * params_.A_reac * (params_.P / kGasConstant) *
            y_unburnt_slope_ * arrh;
  }

  PhysicalParams params_;
  DerivedQuantities derived_;
  std::optional<double> fixed_Ts_;
  double k_psi_ = 0.0;
  double y_unburnt_slope_ = 0.0;  // Y(theta) = slope * (1 - theta)
  double beta_ = 0.0;
};

}  // namespace propwave

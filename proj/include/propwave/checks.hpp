#pragma once

#include <cmath>
#include <cstddef>

#include "propwave/fv.hpp"
#include "propwave/problem.hpp"
#include "propwave/quad.hpp"
#include "propwave/shooter.hpp"

namespace propwave {

// Total molar reaction rate across the gas phase of a shooter solution,
// integral of omega dx = L * integral of omega(theta)/gamma(theta) dtheta on
// the dense orbit, plus the linearised tail where omega/gamma is smooth.
inline double reaction_integral(const WaveSolution& sol,
                                const DimensionlessProblem& pb,
                                double rtol = 1e-9) {
  const auto& p = pb.params();
  const auto& orbit = sol.orbit;
  auto omega_theta = [&](double th) {
    return reaction_rate(pb.temperature(th), pb.mass_fraction(th), p);
  };
  const double theta_end = orbit.theta_grid.front();  // closest to 1
  double integral =
      quad([&](double th) { return omega_theta(th) / orbit.ivp.eval(th, 0); },
           orbit.theta_s, theta_end, rtol);
  // tail: gamma = alpha (theta - 1), omega ~ (1 - theta), ratio smooth
  integral += quad(
      [&](double th) { return omega_theta(th) / (-orbit.alpha * (1.0 - th)); },
      theta_end, 1.0, rtol);
  return p.L_ref * integral;
}

// Discrete counterpart on a finite-volume solution: cell sum of omega h.
inline double reaction_integral(const FvSolution& sol,
                                const PhysicalParams& p) {
  const auto& L = sol.layout;
  double acc = 0.0;
  for (std::size_t g = 0; g < L.ng; ++g) {
    const double T = sol.state.u[L.iTgas(g)];
    const double Y = std::max(0.0, sol.state.u[L.iY(g)]);
    acc += reaction_rate(std::max(T, 1.0), Y, p) *
           sol.mesh.width(L.ns + g);
  }
  return acc;
}

// Largest relative deviation of the combustion enthalpy
// Q_g Y + c_p (T - T0) from its burnt-state value across the gas points.
inline double enthalpy_deviation(const WaveProfiles& prof,
                                 const PhysicalParams& p) {
  const double Tf = flame_temperature(p);
  const double h_ref = p.c_p * (Tf - p.T0);
  double worst = 0.0;
  for (std::size_t i = prof.gas_begin; i < prof.x.size(); ++i) {
    const double h = p.Q_g * prof.Y[i] + p.c_p * (prof.T[i] - p.T0);
    worst = std::max(worst, std::abs(h - h_ref) / h_ref);
  }
  return worst;
}

// Worst monotonicity violation of the temperature profile, in Kelvin.
inline double monotonicity_violation(const WaveProfiles& prof) {
  double worst = 0.0;
  for (std::size_t i = 1; i < prof.x.size(); ++i)
    worst = std::max(worst, prof.T[i - 1] - prof.T[i]);
  return worst;
}

}  // namespace propwave

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "propwave/errors.hpp"
#include "propwave/physics.hpp"
#include "propwave/shooter.hpp"

namespace propwave {

enum class ConvectionScheme { Upwind, HybridPeclet, Centred };

inline const char* to_string(ConvectionScheme s) {
  switch (s) {
    case ConvectionScheme::Upwind: return "upwind";
    case ConvectionScheme::HybridPeclet: return "hybrid";
    case ConvectionScheme::Centred: return "centred";
  }
  return "?";
}

struct FvOptions {
  ConvectionScheme scheme = ConvectionScheme::HybridPeclet;
  double newton_tol = 1e-8;  // scaled Newton step norm
  int max_newton_iters = 60;
  int max_damping_halvings = 10;
  double refine_delta_T = 0.75;    // K across a cell pair
  double refine_curvature = 1.5;   // K, second-difference measure
  int max_refine_rounds = 20;
  std::size_t max_cells = 400000;
  double boundary_gradient_frac = 1e-6;  // vs the peak gradient
  double extension_growth = 1.4;
  double domain_factor = 10.0;  // domain half-length vs profile extent
  // pseudo-transient continuation
  double pt_dtau0 = 1e-2;
  double pt_switch = 1e-3;  // scaled residual norm handing off to Newton
  int pt_max_steps = 500;
  // verification hooks: manufactured volumetric sources added to the
  // right-hand sides (gas energy W/m^3, species kg/(m^3 s), solid W/m^3)
  std::function<double(double)> forcing_energy;
  std::function<double(double)> forcing_species;
  std::function<double(double)> forcing_solid;
};

// Finite-volume mesh: strictly increasing faces with one face exactly at the
// solid/gas interface x = 0.
struct FvMesh {
  std::vector<double> faces;
  std::size_t interface = 0;  // faces[interface] == 0

  std::size_t n_cells() const { return faces.size() - 1; }
  std::size_t n_solid() const { return interface; }
  std::size_t n_gas() const { return n_cells() - interface; }
  double center(std::size_t j) const {
    return 0.5 * (faces[j] + faces[j + 1]);
  }
  double width(std::size_t j) const { return faces[j + 1] - faces[j]; }

  void validate() const {
    if (faces.size() < 7) throw ConfigError("FvMesh: too few faces");
    for (std::size_t i = 1; i < faces.size(); ++i)
      if (!(faces[i] > faces[i - 1]))
        throw ConfigError("FvMesh: faces not strictly increasing");
    if (interface >= faces.size() || faces[interface] != 0.0)
      throw ConfigError("FvMesh: interface face must sit exactly at x = 0");
    if (n_solid() < 3 || n_gas() < 3)
      throw ConfigError("FvMesh: need at least 3 cells on each side");
  }
};

// Unknown ordering: solid T | T_s | interleaved gas (T, Y) | c.
struct FvLayout {
  std::size_t ns = 0, ng = 0;
  std::size_t size() const { return ns + 1 + 2 * ng + 1; }
  std::size_t iTs() const { return ns; }
  std::size_t iTsol(std::size_t j) const { return j; }
  std::size_t iTgas(std::size_t g) const { return ns + 1 + 2 * g; }
  std::size_t iY(std::size_t g) const { return ns + 2 + 2 * g; }
  std::size_t iC() const { return size() - 1; }
};

struct NewtonRecord {
  double step_norm = 0.0;
  double residual_norm = 0.0;
  double damping = 1.0;
};

struct FvState {
  std::vector<double> u;  // packed per FvLayout
  std::vector<double> residual;
  std::vector<NewtonRecord> history;
  bool converged = false;
  int newton_iterations = 0;
  int pseudo_steps = 0;

  double c(const FvLayout& L) const { return u[L.iC()]; }
  double T_s(const FvLayout& L) const { return u[L.iTs()]; }
};

struct FvRound {
  std::size_t cells = 0;
  double c = 0.0, T_s = 0.0, residual_norm = 0.0;
  int newton_iterations = 0;
  bool used_pseudo_transient = false;
};

struct FvSolution {
  FvMesh mesh;
  FvLayout layout;
  FvState state;
  double c = 0.0, T_s = 0.0, mass_flux = 0.0;
  bool converged = false;
  std::vector<FvRound> rounds;
  WaveProfiles profiles;
};

namespace fvdetail {

// derivative at xs of the parabola through three points
inline double quad_deriv(double x1, double f1, double x2, double f2, double x3,
                         double f3, double xs) {
  const double l1 = ((xs - x2) + (xs - x3)) / ((x1 - x2) * (x1 - x3));
  const double l2 = ((xs - x1) + (xs - x3)) / ((x2 - x1) * (x2 - x3));
  const double l3 = ((xs - x1) + (xs - x2)) / ((x3 - x1) * (x3 - x2));
  return f1 * l1 + f2 * l2 + f3 * l3;
}

inline double face_value(ConvectionScheme scheme, double peclet, double vl,
                         double vr, double xl, double xr, double xf) {
  const double centred = vl + (vr - vl) * (xf - xl) / (xr - xl);
  switch (scheme) {
    case ConvectionScheme::Upwind: return vl;  // the flow runs towards +x
    case ConvectionScheme::Centred: return centred;
    case ConvectionScheme::HybridPeclet: {
      const double w = 1.0 - std::min(1.0, std::abs(peclet) / 2.0);
      return w * centred + (1.0 - w) * vl;
    }
  }
  return vl;
}

inline double interp(const std::vector<double>& xs,
                     const std::vector<double>& vs, double x) {
  if (x <= xs.front()) return vs.front();
  if (x >= xs.back()) return vs.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return vs[i - 1] + t * (vs[i] - vs[i - 1]);
}

}  // namespace fvdetail

// Steady wave-frame residuals, physical units. Rows follow FvLayout: solid
// cell balances, the interface energy jump, interleaved gas energy/species
// balances, and the pyrolysis closure linking c to T_s.
inline std::vector<double> assemble_residual(const std::vector<double>& u,
                                             const FvMesh& mesh,
                                             const PhysicalParams& p,
                                             const FvOptions& opts) {
  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  if (u.size() != L.size())
    throw std::invalid_argument("assemble_residual: state/mesh size mismatch");

  const std::size_t ns = L.ns, ng = L.ng;
  const double c = u[L.iC()];
  const double T_s = u[L.iTs()];
  const double mdot = -p.rho_s * c;
  const double D_Y = p.lambda_g / (p.c_p * p.Le);  // rho(T) * D_g(T), constant
  const double q_mol = -p.nu * p.M * p.Q_g;

  auto Tsol = [&](std::size_t j) { return u[L.iTsol(j)]; };
  auto Tgas = [&](std::size_t g) { return u[L.iTgas(g)]; };
  auto Ygas = [&](std::size_t g) { return u[L.iY(g)]; };
  auto xs = [&](std::size_t j) { return mesh.center(j); };
  auto xg = [&](std::size_t g) { return mesh.center(ns + g); };

  // guarded source evaluation: clamps keep transient Newton states evaluable
  auto omega = [&](double T, double Y) {
    return reaction_rate(std::max(T, 1.0), std::max(Y, 0.0), p);
  };

  std::vector<double> r(L.size(), 0.0);

  // one-sided second-order interface gradients
  const double g_solid = fvdetail::quad_deriv(xs(ns - 2), Tsol(ns - 2),
                                              xs(ns - 1), Tsol(ns - 1), 0.0,
                                              T_s, 0.0);
  const double g_gas =
      fvdetail::quad_deriv(0.0, T_s, xg(0), Tgas(0), xg(1), Tgas(1), 0.0);

  // ---- solid energy ----
  auto solid_flux = [&](std::size_t f) -> double {
    // flux through face index f in [0, ns]
    if (f == 0) {
      const double grad = fvdetail::quad_deriv(mesh.faces[0], p.T0, xs(0),
                                               Tsol(0), xs(1), Tsol(1),
                                               mesh.faces[0]);
      return mdot * p.c_s * p.T0 - p.lambda_s * grad;
    }
    if (f == ns) return mdot * p.c_s * T_s - p.lambda_s * g_solid;
    const double xl = xs(f - 1), xr = xs(f);
    const double pe = mdot * p.c_s * (xr - xl) / p.lambda_s;
    const double tf = fvdetail::face_value(opts.scheme, pe, Tsol(f - 1),
                                           Tsol(f), xl, xr, mesh.faces[f]);
    const double grad = (Tsol(f) - Tsol(f - 1)) / (xr - xl);
    return mdot * p.c_s * tf - p.lambda_s * grad;
  };
  for (std::size_t j = 0; j < ns; ++j) {
    double res = solid_flux(j + 1) - solid_flux(j);
    if (opts.forcing_solid) res -= opts.forcing_solid(xs(j)) * mesh.width(j);
    r[L.iTsol(j)] = res;
  }

  // ---- interface energy jump: lambda_s T'(0-) = mdot Q_p + lambda_g T'(0+) ----
  r[L.iTs()] = p.lambda_s * g_solid - mdot * q_pyro(T_s, p) - p.lambda_g * g_gas;

  // ---- gas energy and species ----
  auto gas_T_flux = [&](std::size_t f) -> double {
    // face index f in [0, ng] relative to the interface
    if (f == 0) return mdot * p.c_p * T_s - p.lambda_g * g_gas;
    if (f == ng) return mdot * p.c_p * Tgas(ng - 1);  // zero-gradient outflow
    const double xl = xg(f - 1), xr = xg(f);
    const double pe = mdot * p.c_p * (xr - xl) / p.lambda_g;
    const double tf =
        fvdetail::face_value(opts.scheme, pe, Tgas(f - 1), Tgas(f), xl, xr,
                             mesh.faces[ns + f]);
    const double grad = (Tgas(f) - Tgas(f - 1)) / (xr - xl);
    return mdot * p.c_p * tf - p.lambda_g * grad;
  };
  auto gas_Y_flux = [&](std::size_t f) -> double {
    if (f == 0) return mdot * 1.0;  // species injection, exact
    if (f == ng) return mdot * Ygas(ng - 1);
    const double xl = xg(f - 1), xr = xg(f);
    const double pe = mdot * (xr - xl) / D_Y;
    const double yf =
        fvdetail::face_value(opts.scheme, pe, Ygas(f - 1), Ygas(f), xl, xr,
                             mesh.faces[ns + f]);
    const double grad = (Ygas(f) - Ygas(f - 1)) / (xr - xl);
    return mdot * yf - D_Y * grad;
  };
  for (std::size_t g = 0; g < ng; ++g) {
    const double h = mesh.width(ns + g);
    const double w = omega(Tgas(g), Ygas(g));
    double re = gas_T_flux(g + 1) - gas_T_flux(g) - q_mol * w * h;
    double ry = gas_Y_flux(g + 1) - gas_Y_flux(g) - p.nu * p.M * w * h;
    if (opts.forcing_energy) re -= opts.forcing_energy(xg(g)) * h;
    if (opts.forcing_species) ry -= opts.forcing_species(xg(g)) * h;
    r[L.iTgas(g)] = re;
    r[L.iY(g)] = ry;
  }

  // ---- pyrolysis closure ----
  r[L.iC()] = mdot - pyrolysis_mass_flux(std::max(T_s, 1.0), p);

  return r;
}

namespace fvdetail {

struct Scales {
  std::vector<double> row;  // residual scales
  std::vector<double> col;  // unknown scales
};

inline Scales make_scales(const FvLayout& L, const PhysicalParams& p,
                          double c_ref) {
  const double Tf = flame_temperature(p);
  const double mref = std::max(p.rho_s * std::abs(c_ref),
                               1e-6 * pyrolysis_mass_flux(Tf, p));
  const double e_scale = mref * p.c_p * (Tf - p.T0);
  Scales s;
  s.row.assign(L.size(), e_scale);
  s.col.assign(L.size(), Tf);
  for (std::size_t g = 0; g < L.ng; ++g) {
    s.row[L.iY(g)] = mref;
    s.col[L.iY(g)] = 1.0;
  }
  s.row[L.iC()] = mref;
  s.col[L.iC()] = std::max(std::abs(c_ref), 1e-9);
  return s;
}

inline double scaled_norm(const std::vector<double>& v,
                          const std::vector<double>& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double q = v[i] / s[i];
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Numerical Jacobian of the scaled residual in scaled unknowns. The band
// (half-width 3) is filled by simultaneous perturbation of stride-7 column
// groups; the eigenvalue column and the pyrolysis row are handled separately.
class ScaledSystem {
 public:
  ScaledSystem(const FvMesh& mesh, const PhysicalParams& p,
               const FvOptions& opts, const Scales& scales)
      : mesh_(mesh), p_(p), opts_(opts), scales_(scales) {
    L_ = FvLayout{mesh.n_solid(), mesh.n_gas()};
  }

  const FvLayout& layout() const { return L_; }

  Eigen::VectorXd residual(const std::vector<double>& u_phys) const {
    const auto r = assemble_residual(u_phys, mesh_, p_, opts_);
    Eigen::VectorXd rs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rs(i) = r[i] / scales_.row[i];
    return rs;
  }

  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u_phys,
                                       const Eigen::VectorXd& r0,
                                       double dtau_inv = 0.0) const {
    const std::size_t n = L_.size();
    constexpr std::size_t kBand = 3;
    constexpr std::size_t kStride = 2 * kBand + 1;
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * (2 * kBand + 3));
    std::vector<double> up = u_phys;

    auto scaled_value = [&](std::size_t j) {
      return u_phys[j] / scales_.col[j];
    };
    auto perturbation = [&](std::size_t j) {
      return sqrt_eps * std::max(1e-5, std::abs(scaled_value(j)));
    };

    for (std::size_t color = 0; color < kStride; ++color) {
      bool any = false;
      for (std::size_t j = color; j + 1 < n; j += kStride) {
        up[j] = u_phys[j] + perturbation(j) * scales_.col[j];
        any = true;
      }
      if (!any) continue;
      const Eigen::VectorXd rp = residual(up);
      for (std::size_t j = color; j + 1 < n; j += kStride) {
        const double eps_j = perturbation(j);
        const std::size_t lo = j >= kBand ? j - kBand : 0;
        const std::size_t hi = std::min(j + kBand, n - 2);
        for (std::size_t i = lo; i <= hi; ++i) {
          const double d = (rp(i) - r0(i)) / eps_j;
          if (d != 0.0) trip.emplace_back(static_cast<int>(i),
                                          static_cast<int>(j), d);
        }
        if (j == L_.iTs()) {
          // the pyrolysis closure row couples to T_s outside the band
          const double d = (rp(n - 1) - r0(n - 1)) / eps_j;
          if (d != 0.0)
            trip.emplace_back(static_cast<int>(n - 1), static_cast<int>(j), d);
        }
        up[j] = u_phys[j];
      }
    }

    {  // dense eigenvalue column
      const std::size_t j = L_.iC();
      const double eps_j = perturbation(j);
      up[j] = u_phys[j] + eps_j * scales_.col[j];
      const Eigen::VectorXd rp = residual(up);
      up[j] = u_phys[j];
      for (std::size_t i = 0; i < n; ++i) {
        const double d = (rp(i) - r0(i)) / eps_j;
        if (d != 0.0)
          trip.emplace_back(static_cast<int>(i), static_cast<int>(j), d);
      }
    }

    if (dtau_inv > 0.0) {
      for (std::size_t i = 0; i < n; ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), dtau_inv);
    }

    Eigen::SparseMatrix<double> J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

 private:
  const FvMesh& mesh_;
  const PhysicalParams& p_;
  const FvOptions& opts_;
  const Scales& scales_;
  FvLayout L_;
};

}  // namespace fvdetail

// Damped Newton iteration on the augmented unknown vector (T, Y, c).
// Converges when the scaled step norm drops below the tolerance; on failure
// returns a non-converged state with its history intact.
inline FvState newton_solve(const FvState& state0, const FvMesh& mesh,
                            const PhysicalParams& p, const FvOptions& opts) {
  mesh.validate();
  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  FvState st = state0;
  st.history.clear();
  st.converged = false;
  st.newton_iterations = 0;

  const auto scales = fvdetail::make_scales(L, p, state0.u[L.iC()]);
  fvdetail::ScaledSystem sys(mesh, p, opts, scales);

  Eigen::VectorXd r = sys.residual(st.u);
  if (!r.allFinite())
    throw SolverError("newton_solve: non-finite residual at the initial state");
  double rnorm = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));

  for (int iter = 0; iter < opts.max_newton_iters; ++iter) {
    const auto J = sys.jacobian(st.u, r);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("newton_solve: singular Jacobian");
    const Eigen::VectorXd delta = lu.solve(-r);
    if (!delta.allFinite())
      throw SolverError("newton_solve: linear solve produced non-finite step");

    const double step_norm =
        std::sqrt(delta.squaredNorm() / static_cast<double>(delta.size()));
    ++st.newton_iterations;

    // Smooke-style damping: halve until the residual norm decreases
    double damping = 1.0;
    bool accepted = false;
    std::vector<double> u_try(st.u.size());
    Eigen::VectorXd r_try;
    for (int k = 0; k <= opts.max_damping_halvings; ++k) {
      for (std::size_t i = 0; i < st.u.size(); ++i)
        u_try[i] = st.u[i] + damping * delta(i) * scales.col[i];
      r_try = sys.residual(u_try);
      if (r_try.allFinite()) {
        const double rn =
            std::sqrt(r_try.squaredNorm() / static_cast<double>(r_try.size()));
        if (rn < rnorm || step_norm <= opts.newton_tol) {
          st.u = u_try;
          r = r_try;
          rnorm = rn;
          accepted = true;
          break;
        }
      }
      damping *= 0.5;
    }
    st.history.push_back({step_norm, rnorm, damping});
    if (!accepted) {
      st.converged = false;
      st.residual.assign(r.data(), r.data() + r.size());
      return st;  // caller may fall back to pseudo-transient stepping
    }
    if (step_norm * damping <= opts.newton_tol ||
        step_norm <= opts.newton_tol) {
      st.converged = true;
      break;
    }
  }
  st.residual.assign(r.data(), r.data() + r.size());
  return st;
}

// Backward-Euler pseudo-transient continuation with a switched-evolution
// ramp; marches a poor initial state into Newton's convergence basin.
inline FvState pseudo_transient(const FvState& state0, const FvMesh& mesh,
                                const PhysicalParams& p,
                                const FvOptions& opts) {
  mesh.validate();
  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  FvState st = state0;

  const auto scales = fvdetail::make_scales(L, p, state0.u[L.iC()]);
  fvdetail::ScaledSystem sys(mesh, p, opts, scales);

  Eigen::VectorXd r = sys.residual(st.u);
  if (!r.allFinite())
    throw SolverError("pseudo_transient: non-finite initial residual");
  double rnorm = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
  double dtau = opts.pt_dtau0;

  auto try_newton = [&](int steps_taken) -> FvState {
    FvState out = newton_solve(st, mesh, p, opts);
    out.pseudo_steps = steps_taken;
    return out;
  };
  if (rnorm <= opts.pt_switch) return try_newton(0);

  int step = 0;
  int shrinks = 0;
  int since_attempt = 0;
  for (; step < opts.pt_max_steps; ++step) {
    const auto J = sys.jacobian(st.u, r, 1.0 / dtau);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("pseudo_transient: singular system");
    const Eigen::VectorXd delta = lu.solve(-r);
    if (!delta.allFinite())
      throw SolverError("pseudo_transient: non-finite step");

    std::vector<double> u_try(st.u.size());
    for (std::size_t i = 0; i < st.u.size(); ++i)
      u_try[i] = st.u[i] + delta(i) * scales.col[i];
    const Eigen::VectorXd r_try = sys.residual(u_try);
    const double rn_try =
        r_try.allFinite()
            ? std::sqrt(r_try.squaredNorm() / static_cast<double>(r.size()))
            : std::numeric_limits<double>::infinity();

    if (rn_try <= rnorm * (1.0 + 1e-8)) {
      st.u = u_try;
      r = r_try;
      rnorm = rn_try;
      dtau = std::min(dtau * 2.0, 1e8);  // switched-evolution ramp
      shrinks = 0;
      ++since_attempt;
    } else {
      dtau *= 0.25;
      if (++shrinks > 40)
        throw SolverError("pseudo_transient: time step collapsed");
    }
    // hand off to the damped Newton solver once the residual is low, and
    // probe it periodically; its own damping decides whether to accept
    if (rnorm <= opts.pt_switch) return try_newton(step + 1);
    if (since_attempt >= 25) {
      since_attempt = 0;
      FvState probe = try_newton(step + 1);
      if (probe.converged) return probe;
    }
  }
  throw SolverError("pseudo_transient: stagnated after " +
                    std::to_string(step) + " steps, |R| = " +
                    std::to_string(rnorm));
}

// Faces equidistributed in temperature along a monotone profile: marching
// from the interface, a face is placed each time the interpolated temperature
// changes by `threshold`; the mesh is then extended with geometrically
// growing cells out to [x_lo, x_hi].
inline FvMesh build_equidistributed_mesh(const std::vector<double>& x,
                                         const std::vector<double>& T,
                                         double threshold, double x_lo,
                                         double x_hi, double growth = 1.4) {
  if (x.size() != T.size() || x.size() < 4)
    throw std::invalid_argument("build_equidistributed_mesh: bad profile");
  if (!(threshold > 0.0))
    throw std::invalid_argument("build_equidistributed_mesh: threshold <= 0");

  // the profile temperature is monotone: invert it to place faces at
  // T_s -/+ k*threshold on each side of the interface
  std::vector<double> tx, tt;  // strictly increasing T -> x table
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!tt.empty() && !(T[i] > tt.back())) continue;
    tt.push_back(T[i]);
    tx.push_back(x[i]);
  }
  const double T_at_0 = fvdetail::interp(x, T, 0.0);

  auto x_of_T = [&](double Tq) {
    const auto it = std::lower_bound(tt.begin(), tt.end(), Tq);
    const std::size_t i = static_cast<std::size_t>(it - tt.begin());
    if (i == 0) return tx.front();
    if (i >= tt.size()) return tx.back();
    const double f = (Tq - tt[i - 1]) / (tt[i] - tt[i - 1]);
    return tx[i - 1] + f * (tx[i] - tx[i - 1]);
  };

  std::vector<double> left, right;  // interior faces on each side
  for (double Tq = T_at_0 - threshold; Tq > tt.front(); Tq -= threshold) {
    const double xq = x_of_T(Tq);
    if (xq >= 0.0) continue;
    if (!left.empty() && !(xq < left.back() - 1e-18)) break;
    left.push_back(xq);
  }
  for (double Tq = T_at_0 + threshold; Tq < tt.back(); Tq += threshold) {
    const double xq = x_of_T(Tq);
    if (xq <= 0.0) continue;
    if (!right.empty() && !(xq > right.back() + 1e-18)) break;
    right.push_back(xq);
  }

  auto extend = [&](std::vector<double>& pts, double target,
                    double first_width) {
    double from = pts.empty() ? 0.0 : pts.back();
    double w = std::max(first_width, 1e-3 * std::abs(target - from));
    const double dir = target > from ? 1.0 : -1.0;
    double xp = from;
    while (dir * (target - xp) > 0.0) {
      xp += dir * w;
      if (dir * (target - xp) <= 0.0) {
        pts.push_back(target);
        break;
      }
      pts.push_back(xp);
      w *= growth;
    }
  };

  {
    const double wl = left.size() >= 2 ? std::abs(left.back() - left[left.size() - 2])
                                       : std::abs(x_lo) / 64.0;
    if ((left.empty() ? 0.0 : left.back()) > x_lo) extend(left, x_lo, wl);
    const double wr = right.size() >= 2
                          ? std::abs(right.back() - right[right.size() - 2])
                          : std::abs(x_hi) / 64.0;
    if ((right.empty() ? 0.0 : right.back()) < x_hi) extend(right, x_hi, wr);
  }

  std::vector<double> faces(left.rbegin(), left.rend());
  faces.push_back(0.0);
  const std::size_t iface = faces.size() - 1;
  faces.insert(faces.end(), right.begin(), right.end());

  FvMesh mesh;
  mesh.faces = std::move(faces);
  mesh.interface = iface;

  // guarantee a minimal cell count per side
  auto split_side = [&](bool solid) {
    while ((solid ? mesh.n_solid() : mesh.n_gas()) < 3) {
      std::vector<double> nf;
      nf.reserve(mesh.faces.size() * 2);
      std::size_t new_iface = 0;
      for (std::size_t j = 0; j + 1 < mesh.faces.size(); ++j) {
        nf.push_back(mesh.faces[j]);
        const bool in_side = solid ? (j + 1 <= mesh.interface)
                                   : (j >= mesh.interface);
        if (in_side)
          nf.push_back(0.5 * (mesh.faces[j] + mesh.faces[j + 1]));
      }
      nf.push_back(mesh.faces.back());
      for (std::size_t j = 0; j < nf.size(); ++j)
        if (nf[j] == 0.0) new_iface = j;
      mesh.faces = std::move(nf);
      mesh.interface = new_iface;
    }
  };
  split_side(true);
  split_side(false);
  mesh.validate();
  return mesh;
}

// Inserts faces wherever the converged solution changes too fast (|dT| across
// a cell pair or its second difference above the thresholds; mass fraction is
// measured in temperature-equivalent units) and extends the outer cells when
// the boundary-adjacent gradient is not yet negligible. The interface face is
// never moved.
inline std::pair<FvMesh, bool> refine_mesh(const FvState& state,
                                           const FvMesh& mesh,
                                           const PhysicalParams& p,
                                           const FvOptions& opts) {
  if (!(opts.refine_delta_T > 0.0))
    throw ConfigError("refine_mesh: refine_delta_T must be positive");
  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  const std::size_t nc = mesh.n_cells();

  // cell-centred fields; Y in enthalpy-equivalent Kelvin (Q_g Y / c_p equals
  // the temperature defect T_f - T at Le = 1)
  std::vector<double> Tc(nc), Yeq(nc, 0.0);
  for (std::size_t j = 0; j < L.ns; ++j) Tc[j] = state.u[L.iTsol(j)];
  for (std::size_t g = 0; g < L.ng; ++g) {
    Tc[L.ns + g] = state.u[L.iTgas(g)];
    Yeq[L.ns + g] = state.u[L.iY(g)] * (p.Q_g / p.c_p);
  }

  // the species field only exists in the gas; its injection jump at the
  // interface is physical, so Y criteria apply strictly inside the gas
  std::vector<bool> split(nc, false);
  auto flag_pair = [&](std::size_t a, std::size_t b) {
    if (std::abs(Tc[b] - Tc[a]) > opts.refine_delta_T ||
        (a >= L.ns && std::abs(Yeq[b] - Yeq[a]) > opts.refine_delta_T)) {
      split[a] = split[b] = true;
    }
  };
  for (std::size_t j = 0; j + 1 < nc; ++j) flag_pair(j, j + 1);
  if (opts.refine_curvature > 0.0) {
    for (std::size_t j = 1; j + 1 < nc; ++j) {
      const double d2T = std::abs(Tc[j + 1] - 2.0 * Tc[j] + Tc[j - 1]);
      const double d2Y = (j >= L.ns + 1)
                             ? std::abs(Yeq[j + 1] - 2.0 * Yeq[j] + Yeq[j - 1])
                             : 0.0;
      if (d2T > opts.refine_curvature || d2Y > opts.refine_curvature)
        split[j] = true;
    }
  }

  bool changed = false;
  std::vector<double> faces;
  faces.reserve(mesh.faces.size() * 2);
  std::size_t iface = 0;
  for (std::size_t j = 0; j < nc; ++j) {
    faces.push_back(mesh.faces[j]);
    if (split[j]) {
      faces.push_back(mesh.center(j));
      changed = true;
    }
  }
  faces.push_back(mesh.faces.back());

  // boundary extension when the edge gradient is too large vs the peak
  double peak_grad = 0.0;
  for (std::size_t j = 0; j + 1 < nc; ++j)
    peak_grad = std::max(peak_grad,
                         std::abs(Tc[j + 1] - Tc[j]) /
                             (mesh.center(j + 1) - mesh.center(j)));
  const double g_left =
      std::abs(Tc[1] - Tc[0]) / (mesh.center(1) - mesh.center(0));
  const double g_right = std::abs(Tc[nc - 1] - Tc[nc - 2]) /
                         (mesh.center(nc - 1) - mesh.center(nc - 2));
  if (g_left > opts.boundary_gradient_frac * peak_grad) {
    const double w0 = mesh.faces[1] - mesh.faces[0];
    double xnew = mesh.faces[0];
    double w = w0;
    for (int k = 0; k < 4; ++k) {
      w *= opts.extension_growth;
      xnew -= w;
      faces.insert(faces.begin(), xnew);
    }
    changed = true;
  }
  if (g_right > opts.boundary_gradient_frac * peak_grad) {
    const double wN = mesh.faces[nc] - mesh.faces[nc - 1];
    double xnew = mesh.faces.back();
    double w = wN;
    for (int k = 0; k < 4; ++k) {
      w *= opts.extension_growth;
      xnew += w;
      faces.push_back(xnew);
    }
    changed = true;
  }

  for (std::size_t j = 0; j < faces.size(); ++j)
    if (faces[j] == 0.0) iface = j;
  if (faces.size() - 1 > opts.max_cells)
    throw SolverError("refine_mesh: cell budget exceeded");

  FvMesh out;
  out.faces = std::move(faces);
  out.interface = iface;
  out.validate();
  return {out, changed};
}

namespace fvdetail {

// samples (x, T, Y) data onto a mesh, producing a packed state
inline FvState sample_state(const FvMesh& mesh, const std::vector<double>& x,
                            const std::vector<double>& T,
                            const std::vector<double>& xg,
                            const std::vector<double>& Y, double T_s,
                            double c) {
  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  FvState st;
  st.u.assign(L.size(), 0.0);
  for (std::size_t j = 0; j < L.ns; ++j)
    st.u[L.iTsol(j)] = interp(x, T, mesh.center(j));
  st.u[L.iTs()] = T_s;
  for (std::size_t g = 0; g < L.ng; ++g) {
    st.u[L.iTgas(g)] = interp(x, T, mesh.center(L.ns + g));
    st.u[L.iY(g)] = std::max(0.0, interp(xg, Y, mesh.center(L.ns + g)));
  }
  st.u[L.iC()] = c;
  return st;
}

}  // namespace fvdetail

// Reference solve: assemble -> Newton (pseudo-transient fallback) -> refine,
// repeated to the refinement fixed point. Initial data comes from a shooter
// solution when provided, otherwise from a crude exponential-profile guess.
inline FvSolution solve_fv(const PhysicalParams& p, const FvOptions& opts = {},
                           const WaveSolution* init = nullptr) {
  p.validate();
  const double Tf = flame_temperature(p);

  FvMesh mesh;
  FvState st;
  FvSolution sol;

  auto build_from_profile = [&](const std::vector<double>& px,
                                const std::vector<double>& pT,
                                const std::vector<double>& pxg,
                                const std::vector<double>& pY, double Ts0,
                                double c0, double threshold) {
    const double x_lo = opts.domain_factor * px.front();
    const double x_hi = opts.domain_factor * px.back();
    mesh = build_equidistributed_mesh(px, pT, threshold, x_lo, x_hi,
                                      opts.extension_growth);
    st = fvdetail::sample_state(mesh, px, pT, pxg, pY, Ts0, c0);
  };

  auto make_guess_profile = [&](double mdot0, std::vector<double>& px,
                                std::vector<double>& pT,
                                std::vector<double>& pxg,
                                std::vector<double>& pY, double& Ts0,
                                double& c0) {
    Ts0 = surface_temperature_from_mass_flux(mdot0, p);
    c0 = -mdot0 / p.rho_s;
    const double ls = p.lambda_s / (mdot0 * p.c_s);
    const double lg = 5.0 * p.lambda_g / (mdot0 * p.c_p);
    const double Y0 = p.c_p * (Tf - p.T0) / p.Q_g;
    px.clear(); pT.clear(); pxg.clear(); pY.clear();
    const int n = 300;
    for (int i = n; i >= 1; --i) {
      const double x = -10.0 * ls * i / n;
      px.push_back(x);
      pT.push_back(p.T0 + (Ts0 - p.T0) * std::exp(x / ls));
    }
    px.push_back(0.0);
    pT.push_back(Ts0);
    pxg.push_back(0.0);
    pY.push_back(std::min(1.0, Y0 * (Tf - Ts0) / (Tf - p.T0)));
    for (int i = 1; i <= n; ++i) {
      const double x = 10.0 * lg * i / n;
      const double T = Tf - (Tf - Ts0) * std::exp(-x / lg);
      px.push_back(x);
      pT.push_back(T);
      pxg.push_back(x);
      pY.push_back(std::max(0.0, Y0 * (Tf - T) / (Tf - p.T0)));
    }
  };

  auto solve_round = [&](FvRound& round) {
    FvState next = newton_solve(st, mesh, p, opts);
    if (!next.converged) {
      // pseudo-transient rescue, tightening the handoff level if needed
      FvOptions o2 = opts;
      for (int attempt = 0; attempt < 3 && !next.converged; ++attempt) {
        round.used_pseudo_transient = true;
        next = pseudo_transient(st, mesh, p, o2);
        o2.pt_switch *= 1e-2;
      }
    }
    if (!next.converged)
      throw SolverError("solve_fv: Newton failed to converge");
    st = std::move(next);
    const FvLayout L{mesh.n_solid(), mesh.n_gas()};
    round.cells = mesh.n_cells();
    round.c = st.u[L.iC()];
    round.T_s = st.u[L.iTs()];
    round.newton_iterations = st.newton_iterations;
    round.residual_norm =
        st.history.empty() ? 0.0 : st.history.back().residual_norm;
  };

  if (init) {
    std::vector<double> pxg(init->profiles.x.begin() +
                                static_cast<long>(init->profiles.gas_begin),
                            init->profiles.x.end());
    std::vector<double> pY(init->profiles.Y.begin() +
                               static_cast<long>(init->profiles.gas_begin),
                           init->profiles.Y.end());
    // build finer than the refinement trigger so the first mesh is already a
    // fixed point of the criteria
    build_from_profile(init->profiles.x, init->profiles.T, pxg, pY, init->T_s,
                       init->c, 0.5 * opts.refine_delta_T);
    FvRound r0;
    solve_round(r0);
    sol.rounds.push_back(r0);
  } else {
    // no initial data: bracket the mass flux geometrically between the
    // zero-feedback and maximal surface temperatures, then walk the mesh in
    // from a coarse threshold via the refinement loop
    const auto d = DerivedQuantities::from(p);
    const double th_lo = d.has_c_min ? d.theta_s_min + 0.02 : 0.05;
    const double m_lo =
        pyrolysis_mass_flux(p.T0 + th_lo * (Tf - p.T0), p);
    const double m_hi = pyrolysis_mass_flux(Tf - 1.0, p);
    const double m_geo = std::sqrt(m_lo * m_hi);

    const double coarse = std::max(opts.refine_delta_T, (Tf - p.T0) / 80.0);
    bool started = false;
    std::string last_err = "no candidates";
    for (double scale : {1.0, 3.0, 1.0 / 3.0, 9.0, 1.0 / 9.0}) {
      std::vector<double> px, pT, pxg, pY;
      double Ts0 = 0.0, c0 = 0.0;
      try {
        make_guess_profile(m_geo * scale, px, pT, pxg, pY, Ts0, c0);
        build_from_profile(px, pT, pxg, pY, Ts0, c0, coarse);
        FvRound r0;
        solve_round(r0);
        sol.rounds.push_back(r0);
        started = true;
        break;
      } catch (const std::exception& e) {
        last_err = e.what();
      }
    }
    if (!started)
      throw SolverError(std::string("solve_fv: no initial guess converged (") +
                        last_err + ")");
  }
  for (int round = 0; round < opts.max_refine_rounds; ++round) {
    auto [next_mesh, changed] = refine_mesh(st, mesh, p, opts);
    if (!changed) break;
    // transfer the converged fields onto the refined mesh
    const FvLayout L{mesh.n_solid(), mesh.n_gas()};
    std::vector<double> ox, oT, oxg, oY;
    ox.reserve(mesh.n_cells() + 1);
    for (std::size_t j = 0; j < L.ns; ++j) {
      ox.push_back(mesh.center(j));
      oT.push_back(st.u[L.iTsol(j)]);
    }
    ox.push_back(0.0);
    oT.push_back(st.u[L.iTs()]);
    oxg.push_back(0.0);
    oY.push_back(st.u[L.iY(0)]);
    for (std::size_t g = 0; g < L.ng; ++g) {
      ox.push_back(mesh.center(L.ns + g));
      oT.push_back(st.u[L.iTgas(g)]);
      oxg.push_back(mesh.center(L.ns + g));
      oY.push_back(st.u[L.iY(g)]);
    }
    const double Ts_cur = st.u[L.iTs()];
    const double c_cur = st.u[L.iC()];
    mesh = std::move(next_mesh);
    st = fvdetail::sample_state(mesh, ox, oT, oxg, oY, Ts_cur, c_cur);
    FvRound r;
    solve_round(r);
    sol.rounds.push_back(r);
  }

  const FvLayout L{mesh.n_solid(), mesh.n_gas()};
  sol.layout = L;
  sol.converged = st.converged;
  sol.c = st.u[L.iC()];
  sol.T_s = st.u[L.iTs()];
  sol.mass_flux = -p.rho_s * sol.c;

  // cell-centred output profiles
  WaveProfiles& prof = sol.profiles;
  for (std::size_t j = 0; j < L.ns; ++j) {
    prof.x.push_back(mesh.center(j));
    prof.T.push_back(st.u[L.iTsol(j)]);
    prof.Y.push_back(1.0);
    prof.u.push_back(0.0);
    prof.rho.push_back(p.rho_s);
  }
  prof.gas_begin = prof.x.size();
  for (std::size_t g = 0; g < L.ng; ++g) {
    const double T = st.u[L.iTgas(g)];
    const double rho = gas_density(std::max(T, 1.0), p);
    prof.x.push_back(mesh.center(L.ns + g));
    prof.T.push_back(T);
    prof.Y.push_back(st.u[L.iY(g)]);
    prof.u.push_back(sol.c + sol.mass_flux / rho);
    prof.rho.push_back(rho);
  }

  sol.mesh = std::move(mesh);
  sol.state = std::move(st);
  return sol;
}

// Overall hydrodynamic pressure variation -mdot (u_far - u_surface); negative
// and tiny compared to P, which justifies the uniform-pressure model.
inline double pressure_drop_diagnostic(const FvSolution& sol) {
  if (sol.profiles.gas_begin >= sol.profiles.x.size())
    throw std::invalid_argument("pressure_drop_diagnostic: no gas profile");
  const double u0 = sol.profiles.u[sol.profiles.gas_begin];
  const double u1 = sol.profiles.u.back();
  return -sol.mass_flux * (u1 - u0);
}

inline double pressure_drop_diagnostic(const WaveSolution& sol) {
  return pressure_drop(sol.profiles, sol.mass_flux);
}

}  // namespace propwave

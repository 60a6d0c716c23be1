#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "propwave/csv.hpp"
#include "propwave/fv.hpp"
#include "propwave/json_io.hpp"
#include "propwave/shooter.hpp"
#include "propwave/svg.hpp"
#include "propwave/sweep.hpp"
#include "propwave/version.hpp"

namespace propwave {

// process exit codes shared by all subcommands
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitPartial = 3;

namespace cmddetail {

namespace fs = std::filesystem;

inline void prepare_output(const RunConfig& cfg,
                           const std::vector<std::string>& artifacts) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec)
    throw ConfigError("output directory " + cfg.out_dir +
                      " is not writable: " + ec.message());
  if (cfg.overwrite) return;
  for (const auto& a : artifacts) {
    const fs::path p = fs::path(cfg.out_dir) / a;
    if (fs::exists(p))
      throw ConfigError("output " + p.string() +
                        " already exists (use --overwrite or a fresh directory)");
  }
}

inline std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

inline void write_profile_csv(const std::string& path,
                              const WaveProfiles& prof,
                              const std::string& hash) {
  CsvWriter csv(path);
  csv.header({"x", "T", "Y", "u", "rho", "config_hash"});
  for (std::size_t i = 0; i < prof.x.size(); ++i)
    csv.row({prof.x[i], prof.T[i], prof.Y[i], prof.u[i], prof.rho[i], hash});
}

inline void write_profile_svg(const std::string& path,
                              const WaveProfiles& prof,
                              const PhysicalParams& p) {
  const double Tf = flame_temperature(p);
  std::vector<double> theta(prof.T.size());
  for (std::size_t i = 0; i < prof.T.size(); ++i)
    theta[i] = (prof.T[i] - p.T0) / (Tf - p.T0);
  SvgPlot plot("travelling-wave profiles", "x [m]", "dimensionless value");
  plot.add(prof.x, theta, "theta = (T - T0)/(Tf - T0)");
  plot.add({prof.x.begin() + static_cast<long>(prof.gas_begin), prof.x.end()},
           {prof.Y.begin() + static_cast<long>(prof.gas_begin), prof.Y.end()},
           "Y (gas)");
  plot.write(path);
}

// phase portrait gamma(theta) spanning both phases; for finite-volume
// solutions the gradient is reconstructed by central differences
inline void portrait_from_wave(const WaveSolution& sol,
                               std::vector<double>& theta,
                               std::vector<double>& gamma) {
  // analytic solid branch gamma = -c~ theta
  for (int i = 0; i <= 40; ++i) {
    const double th = sol.orbit.theta_s * i / 40.0;
    theta.push_back(th);
    gamma.push_back(-sol.c_tilde * th);
  }
  for (std::size_t i = sol.orbit.theta_grid.size(); i-- > 0;) {
    theta.push_back(sol.orbit.theta_grid[i]);
    gamma.push_back(sol.orbit.gamma_values[i]);
  }
}

inline void portrait_from_fv(const FvSolution& sol, const PhysicalParams& p,
                             std::vector<double>& theta,
                             std::vector<double>& gamma) {
  const double Tf = flame_temperature(p);
  const auto& prof = sol.profiles;
  for (std::size_t i = 1; i + 1 < prof.x.size(); ++i) {
    const double dT = prof.T[i + 1] - prof.T[i - 1];
    const double dx = prof.x[i + 1] - prof.x[i - 1];
    theta.push_back((prof.T[i] - p.T0) / (Tf - p.T0));
    gamma.push_back(dT / dx * p.L_ref / (Tf - p.T0));
  }
}

inline void write_portrait_csv(const std::string& path,
                               const std::vector<double>& theta,
                               const std::vector<double>& gamma,
                               const std::string& hash) {
  CsvWriter csv(path);
  csv.header({"theta", "gamma", "config_hash"});
  for (std::size_t i = 0; i < theta.size(); ++i)
    csv.row({theta[i], gamma[i], hash});
}

inline void write_portrait_svg(const std::string& path,
                               const std::vector<double>& theta,
                               const std::vector<double>& gamma) {
  SvgPlot plot("phase portrait", "theta", "gamma");
  plot.add(theta, gamma, "gamma(theta)");
  plot.write(path);
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace cmddetail

// solve: single run, writes profile.csv, portrait.csv, meta.json and SVGs
inline int cmd_solve(const RunConfig& cfg) {
  using namespace cmddetail;
  try {
    prepare_output(cfg, {"profile.csv", "portrait.csv", "meta.json",
                         "profile.svg", "portrait.svg"});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  json meta;
  meta["version"] = kVersion;
  meta["config_hash"] = cfg.hash;
  meta["solver"] = cfg.solver;
  meta["params"] = params_to_json(cfg.params);

  try {
    if (cfg.solver == "shoot") {
      const auto sol = solve_wave(cfg.params, cfg.shooter);
      write_profile_csv(path_in(cfg, "profile.csv"), sol.profiles, cfg.hash);
      std::vector<double> th, ga;
      portrait_from_wave(sol, th, ga);
      write_portrait_csv(path_in(cfg, "portrait.csv"), th, ga, cfg.hash);
      write_profile_svg(path_in(cfg, "profile.svg"), sol.profiles, cfg.params);
      write_portrait_svg(path_in(cfg, "portrait.svg"), th, ga);
      meta["c"] = sol.c;
      meta["c_tilde"] = sol.c_tilde;
      meta["T_s"] = sol.T_s;
      meta["mass_flux"] = sol.mass_flux;
      meta["xi_residual"] = sol.xi_residual;
      meta["iterations"] = sol.iterations;
      meta["bracket"] = {sol.c_lo_tilde, sol.c_hi_tilde};
      meta["pressure_drop"] = pressure_drop(sol.profiles, sol.mass_flux);
      meta["mass_fraction_exceeds_unity"] = sol.mass_fraction_exceeds_unity;
      meta["tolerances"] = {{"ode_rtol", cfg.shooter.ode_rtol},
                            {"ode_atol", cfg.shooter.ode_atol},
                            {"brent_xtol_rel", cfg.shooter.brent_xtol_rel},
                            {"dtheta", cfg.shooter.dtheta_offset}};
    } else {
      WaveSolution shoot;
      const WaveSolution* init = nullptr;
      if (cfg.init == "shooter") {
        PhysicalParams p1 = cfg.params;
        p1.Le = 1.0;
        shoot = solve_wave(p1, cfg.shooter);
        init = &shoot;
      }
      const auto sol = solve_fv(cfg.params, cfg.fv, init);
      write_profile_csv(path_in(cfg, "profile.csv"), sol.profiles, cfg.hash);
      std::vector<double> th, ga;
      portrait_from_fv(sol, cfg.params, th, ga);
      write_portrait_csv(path_in(cfg, "portrait.csv"), th, ga, cfg.hash);
      write_profile_svg(path_in(cfg, "profile.svg"), sol.profiles, cfg.params);
      write_portrait_svg(path_in(cfg, "portrait.svg"), th, ga);
      meta["c"] = sol.c;
      meta["T_s"] = sol.T_s;
      meta["mass_flux"] = sol.mass_flux;
      meta["cells"] = sol.mesh.n_cells();
      meta["scheme"] = to_string(cfg.fv.scheme);
      meta["newton_tol"] = cfg.fv.newton_tol;
      meta["pressure_drop"] = pressure_drop_diagnostic(sol);
      meta["residual_norm"] = sol.rounds.empty()
                                  ? 0.0
                                  : sol.rounds.back().residual_norm;
      json rounds = json::array();
      for (const auto& r : sol.rounds)
        rounds.push_back({{"cells", r.cells},
                          {"c", r.c},
                          {"T_s", r.T_s},
                          {"newton_iterations", r.newton_iterations},
                          {"pseudo_transient", r.used_pseudo_transient}});
      meta["rounds"] = rounds;
      if (init) {
        meta["init_c_shoot"] = shoot.c;
        meta["relative_difference_c"] =
            std::abs(shoot.c - sol.c) / std::abs(sol.c);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }

  meta["runtime_ms"] = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  cmddetail::write_json(cmddetail::path_in(cfg, "meta.json"), meta);
  return kExitOk;
}

// sweep: independent solves over the registered parameter, sweep.csv +
// summary SVG (+ Lewis error curve); partial failures exit with code 3
inline int cmd_sweep(const RunConfig& cfg) {
  using namespace cmddetail;
  if (!cfg.sweep) {
    std::cerr << "config error: sweep block missing\n";
    return kExitConfig;
  }
  try {
    prepare_output(cfg, {"sweep.csv", "sweep.svg", "sweep_meta.json"});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<SweepPointResult> results;
  try {
    results = run_sweep(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }

  const bool lewis = cfg.sweep->parameter == "Le";
  {
    CsvWriter csv(path_in(cfg, "sweep.csv"));
    csv.header({"parameter", "value", "solver", "status", "c", "T_s", "mdot",
                "xi_residual", "iterations", "c_shoot_le1", "config_hash"});
    for (const auto& r : results)
      csv.row({cfg.sweep->parameter, r.value, r.solver, r.status, r.c, r.T_s,
               r.mdot, r.xi_residual, r.iterations, r.c_shoot_le1, cfg.hash});
  }
  {
    json meta;
    meta["version"] = kVersion;
    meta["config_hash"] = cfg.hash;
    meta["parameter"] = cfg.sweep->parameter;
    json pts = json::array();
    for (const auto& r : results)
      pts.push_back({{"value", r.value},
                     {"status", r.status},
                     {"wall_ms", r.wall_ms}});
    meta["points"] = pts;
    write_json(path_in(cfg, "sweep_meta.json"), meta);
  }
  {
    std::vector<double> xs, ys;
    for (const auto& r : results)
      if (r.ok()) {
        xs.push_back(r.value);
        ys.push_back(std::abs(r.c));
      }
    SvgPlot plot("regression speed vs " + cfg.sweep->parameter,
                 cfg.sweep->parameter, "|c| [m/s]");
    plot.log_y(true);
    plot.add(xs, ys, "|c|");
    plot.write(path_in(cfg, "sweep.svg"));
  }
  if (lewis) {
    std::vector<double> xs, ys;
    for (const auto& r : results)
      if (r.ok()) {
        xs.push_back(r.value);
        ys.push_back((r.c_shoot_le1 - r.c) / r.c);
      }
    SvgPlot plot("unit-Lewis shooter error vs Le", "Le",
                 "(c_shoot - c_fv)/c_fv");
    plot.add(xs, ys, "relative error on c");
    plot.write(path_in(cfg, "lewis_error.svg"));
  }

  for (const auto& r : results)
    if (!r.ok()) return kExitPartial;
  return kExitOk;
}

// xi-scan: tabulates the mismatch over the bracket for the base parameter set
// or each sweep point; reports monotonicity, crossing counts and the
// c_sol/c_max, c_min/c_max trends
inline int cmd_xi_scan(const RunConfig& cfg) {
  using namespace cmddetail;
  try {
    prepare_output(cfg, {"xi_scan.csv", "xi_scan.svg", "xi_meta.json"});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<double> values = {std::nan("")};  // base set only
  std::string pname = "base";
  if (cfg.sweep) {
    values = cfg.sweep->values;
    std::sort(values.begin(), values.end());
    pname = cfg.sweep->parameter;
  }

  try {
    CsvWriter csv(path_in(cfg, "xi_scan.csv"));
    csv.header({"set", "value", "c_tilde", "xi", "xi_over_xi0", "config_hash"});
    SvgPlot plot("mismatch over the bracket", "c~ / c~_max", "xi / xi(0)");
    json meta;
    meta["version"] = kVersion;
    meta["config_hash"] = cfg.hash;
    json sets = json::array();

    for (std::size_t vi = 0; vi < values.size(); ++vi) {
      PhysicalParams p = cfg.params;
      std::string label = "base";
      if (cfg.sweep) {
        apply_sweep_value(p, pname, values[vi]);
        label = pname + "=" + CsvWriter::format_double(values[vi]);
      }
      const DimensionlessProblem pb(p);
      const auto [c_lo, c_hi] = bracket(pb, cfg.shooter);
      const double xi0 = std::sqrt(
          2.0 * quad([&](double th) { return pb.psi(th); }, 0.0, 1.0, 1e-10));

      ShooterOptions so = cfg.shooter;
      so.ode_rtol = so.ode_atol = std::max(so.ode_rtol, 1e-12);
      std::vector<double> cts(static_cast<std::size_t>(cfg.xi_scan_points));
      for (std::size_t i = 0; i < cts.size(); ++i) {
        const double f = static_cast<double>(i) / (cts.size() - 1);
        cts[i] = -std::exp(std::log(-c_lo) * (1.0 - f) +
                           std::log(-c_hi) * f);
      }
      std::vector<double> xis(cts.size());
      int crossings = 0;
      bool monotone = true;
      for (std::size_t i = 0; i < cts.size(); ++i) {
        xis[i] = mismatch_xi(cts[i], pb, so);
        if (i > 0 && xis[i] < xis[i - 1]) monotone = false;
        if (i > 0 && (xis[i] > 0.0) != (xis[i - 1] > 0.0)) ++crossings;
        csv.row({label, values[vi], cts[i], xis[i], xis[i] / xi0, cfg.hash});
      }
      const auto sol = solve_wave(p, cfg.shooter);
      const auto& d = pb.derived();
      const double ct_max = pb.c_tilde_max();
      json set;
      set["label"] = label;
      set["monotone"] = monotone;
      set["zero_crossings"] = crossings;
      set["c_sol_over_c_max"] = sol.c / d.c_max;
      if (d.has_c_min) set["c_min_over_c_max"] = d.c_min / d.c_max;
      sets.push_back(set);

      std::vector<double> xnorm(cts.size()), ynorm(cts.size());
      for (std::size_t i = 0; i < cts.size(); ++i) {
        xnorm[i] = cts[i] / ct_max;
        ynorm[i] = xis[i] / xi0;
      }
      plot.add(xnorm, ynorm, label);
    }
    meta["sets"] = sets;
    write_json(path_in(cfg, "xi_meta.json"), meta);
    plot.write(path_in(cfg, "xi_scan.svg"));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

// compare: shooter vs finite-volume on the same configuration
inline int cmd_compare(const RunConfig& cfg) {
  using namespace cmddetail;
  try {
    prepare_output(cfg, {"compare.json", "profile_shoot.csv",
                         "profile_fv.csv"});
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    PhysicalParams p1 = cfg.params;
    p1.Le = 1.0;
    const auto shoot = solve_wave(p1, cfg.shooter);
    const auto fv = solve_fv(cfg.params, cfg.fv, &shoot);
    write_profile_csv(path_in(cfg, "profile_shoot.csv"), shoot.profiles,
                      cfg.hash);
    write_profile_csv(path_in(cfg, "profile_fv.csv"), fv.profiles, cfg.hash);
    json j;
    j["version"] = kVersion;
    j["config_hash"] = cfg.hash;
    j["c_shoot"] = shoot.c;
    j["c_fv"] = fv.c;
    j["relative_difference_c"] = std::abs(shoot.c - fv.c) / std::abs(fv.c);
    j["T_s_shoot"] = shoot.T_s;
    j["T_s_fv"] = fv.T_s;
    j["relative_difference_T_s"] =
        std::abs(shoot.T_s - fv.T_s) / std::abs(fv.T_s);
    j["fv_cells"] = fv.mesh.n_cells();
    j["Le"] = cfg.params.Le;
    write_json(path_in(cfg, "compare.json"), j);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace propwave

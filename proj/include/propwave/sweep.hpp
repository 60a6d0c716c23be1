#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "propwave/fv.hpp"
#include "propwave/json_io.hpp"
#include "propwave/shooter.hpp"

namespace propwave {

struct SweepPointResult {
  double value = 0.0;
  std::string solver;
  std::string status = "ok";  // "ok" or "failed: <reason>"
  double c = std::nan("");
  double T_s = std::nan("");
  double mdot = std::nan("");
  double xi_residual = std::nan("");
  long long iterations = 0;
  double wall_ms = 0.0;
  double c_shoot_le1 = std::nan("");  // Lewis sweeps: unit-Lewis prediction
  bool ok() const { return status == "ok"; }
};

inline void apply_sweep_value(PhysicalParams& p, const std::string& name,
                              double v) {
  if (name == "T_a")
    p.T_a = v;
  else if (name == "cp_over_cs")
    p.c_p = v * p.c_s;
  else if (name == "Le")
    p.Le = v;
  else if (name == "P")
    p.P = v;
  else if (name == "Ts_fixed")
    ;  // handled by the fixed-T_s solver mode
  else
    throw ConfigError("unregistered sweep parameter \"" + name + "\"");
}

// Runs the sweep points concurrently (independent solves), aggregates in
// parameter order; failures are recorded per point, never dropped. Lewis
// sweeps force the finite-volume solver and carry the unit-Lewis shooter
// prediction alongside for the error curve.
inline std::vector<SweepPointResult> run_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("run_sweep: no sweep block in the config");
  const auto& spec = *cfg.sweep;

  std::vector<double> values = spec.values;
  std::sort(values.begin(), values.end());

  const bool lewis = spec.parameter == "Le";
  const bool fixed_ts = spec.parameter == "Ts_fixed";

  double c_le1 = std::nan("");
  if (lewis) {
    PhysicalParams p1 = cfg.params;
    p1.Le = 1.0;
    c_le1 = solve_wave(p1, cfg.shooter).c;
  }

  std::vector<SweepPointResult> results(values.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      SweepPointResult& r = results[i];
      r.value = values[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        PhysicalParams p = cfg.params;
        apply_sweep_value(p, spec.parameter, values[i]);
        if (fixed_ts) {
          r.solver = "shoot";
          const auto s = solve_constant_ts(values[i], p, cfg.shooter);
          r.c = s.c;
          r.T_s = s.T_s;
          r.mdot = s.mass_flux;
          r.xi_residual = s.xi_residual;
          r.iterations = s.iterations;
        } else if (lewis || cfg.solver == "fv") {
          r.solver = "fv";
          WaveSolution init;
          const WaveSolution* init_ptr = nullptr;
          if (cfg.init == "shooter" || lewis) {
            PhysicalParams p1 = p;
            p1.Le = 1.0;
            init = solve_wave(p1, cfg.shooter);
            init_ptr = &init;
          }
          const auto s = solve_fv(p, cfg.fv, init_ptr);
          r.c = s.c;
          r.T_s = s.T_s;
          r.mdot = s.mass_flux;
          r.xi_residual = 0.0;
          r.iterations = s.rounds.empty()
                             ? 0
                             : s.rounds.back().newton_iterations;
          if (lewis) r.c_shoot_le1 = c_le1;
        } else {
          r.solver = "shoot";
          const auto s = solve_wave(p, cfg.shooter);
          r.c = s.c;
          r.T_s = s.T_s;
          r.mdot = s.mass_flux;
          r.xi_residual = s.xi_residual;
          r.iterations = s.iterations;
        }
      } catch (const std::exception& e) {
        r.status = std::string("failed: ") + e.what();
      }
      r.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace propwave

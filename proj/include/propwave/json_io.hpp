#pragma once

#include <json.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "propwave/errors.hpp"
#include "propwave/fv.hpp"
#include "propwave/physics.hpp"
#include "propwave/shooter.hpp"

namespace propwave {

using nlohmann::json;

namespace jsondetail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key))
      throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

inline double require_number(const json& j, const std::string& key,
                             const std::string& where) {
  if (!j.contains(key))
    throw ConfigError("missing key \"" + key + "\" in " + where);
  if (!j.at(key).is_number())
    throw ConfigError("key \"" + key + "\" in " + where + " must be a number");
  return j.at(key).get<double>();
}

inline double optional_number(const json& j, const std::string& key,
                              double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError("key \"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

}  // namespace jsondetail

// Strict ingestion: exactly the PhysicalParams field names, SI units,
// unknown keys rejected. Le, L_ref and cutoff are optional.
inline PhysicalParams params_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("params: expected a JSON object");
  jsondetail::reject_unknown_keys(
      j,
      {"T0", "P", "rho_s", "lambda_s", "c_s", "lambda_g", "c_p", "M", "nu",
       "Q_g", "Q_p_std", "T_std", "A_reac", "T_a", "A_p", "T_ap", "Le",
       "L_ref", "cutoff"},
      "params");
  PhysicalParams p;
  using jsondetail::require_number;
  p.T0 = require_number(j, "T0", "params");
  p.P = require_number(j, "P", "params");
  p.rho_s = require_number(j, "rho_s", "params");
  p.lambda_s = require_number(j, "lambda_s", "params");
  p.c_s = require_number(j, "c_s", "params");
  p.lambda_g = require_number(j, "lambda_g", "params");
  p.c_p = require_number(j, "c_p", "params");
  p.M = require_number(j, "M", "params");
  p.nu = require_number(j, "nu", "params");
  p.Q_g = require_number(j, "Q_g", "params");
  p.Q_p_std = require_number(j, "Q_p_std", "params");
  p.T_std = require_number(j, "T_std", "params");
  p.A_reac = require_number(j, "A_reac", "params");
  p.T_a = require_number(j, "T_a", "params");
  p.A_p = require_number(j, "A_p", "params");
  p.T_ap = require_number(j, "T_ap", "params");
  p.Le = jsondetail::optional_number(j, "Le", 1.0);
  p.L_ref = jsondetail::optional_number(j, "L_ref", 1e-4);
  if (j.contains("cutoff")) {
    const auto& c = j.at("cutoff");
    jsondetail::reject_unknown_keys(c, {"enabled", "width"}, "params.cutoff");
    if (c.contains("enabled")) p.cutoff.enabled = c.at("enabled").get<bool>();
    p.cutoff.width = jsondetail::optional_number(c, "width", p.cutoff.width);
  }
  p.validate();
  return p;
}

inline json params_to_json(const PhysicalParams& p) {
  json j;
  j["T0"] = p.T0;
  j["P"] = p.P;
  j["rho_s"] = p.rho_s;
  j["lambda_s"] = p.lambda_s;
  j["c_s"] = p.c_s;
  j["lambda_g"] = p.lambda_g;
  j["c_p"] = p.c_p;
  j["M"] = p.M;
  j["nu"] = p.nu;
  j["Q_g"] = p.Q_g;
  j["Q_p_std"] = p.Q_p_std;
  j["T_std"] = p.T_std;
  j["A_reac"] = p.A_reac;
  j["T_a"] = p.T_a;
  j["A_p"] = p.A_p;
  j["T_ap"] = p.T_ap;
  j["Le"] = p.Le;
  j["L_ref"] = p.L_ref;
  j["cutoff"] = {{"enabled", p.cutoff.enabled}, {"width", p.cutoff.width}};
  return j;
}

struct SweepSpec {
  std::string parameter;  // T_a | cp_over_cs | Le | P | Ts_fixed
  std::vector<double> values;
};

struct RunConfig {
  PhysicalParams params;
  std::string solver = "shoot";  // shoot | fv
  std::string init = "none";     // none | shooter (fv initial data)
  ShooterOptions shooter;
  FvOptions fv;
  std::optional<SweepSpec> sweep;
  std::string out_dir = "out";
  int jobs = 1;
  bool overwrite = false;
  int xi_scan_points = 50;
  std::string hash;  // FNV-1a of the canonical config document
};

namespace jsondetail {

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline ConvectionScheme scheme_from_string(const std::string& s) {
  if (s == "upwind") return ConvectionScheme::Upwind;
  if (s == "hybrid") return ConvectionScheme::HybridPeclet;
  if (s == "centred" || s == "centered") return ConvectionScheme::Centred;
  throw ConfigError("unknown convection scheme \"" + s + "\"");
}

}  // namespace jsondetail

inline RunConfig run_config_from_json(const json& j,
                                      const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  jsondetail::reject_unknown_keys(j,
                                  {"params", "params_file", "solver", "init",
                                   "output_dir", "options", "sweep", "xi_scan"},
                                  "config");
  RunConfig cfg;

  if (j.contains("params") == j.contains("params_file"))
    throw ConfigError("config: provide exactly one of params / params_file");
  if (j.contains("params")) {
    cfg.params = params_from_json(j.at("params"));
  } else {
    const auto path = base_dir / j.at("params_file").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open params_file " + path.string());
    json pj;
    try {
      in >> pj;
    } catch (const json::exception& e) {
      throw ConfigError("config: params_file is not valid JSON: " +
                        std::string(e.what()));
    }
    cfg.params = params_from_json(pj);
  }

  if (j.contains("solver")) {
    cfg.solver = j.at("solver").get<std::string>();
    if (cfg.solver != "shoot" && cfg.solver != "fv")
      throw ConfigError("config: solver must be \"shoot\" or \"fv\"");
  }
  if (j.contains("init")) {
    cfg.init = j.at("init").get<std::string>();
    if (cfg.init != "none" && cfg.init != "shooter")
      throw ConfigError("config: init must be \"none\" or \"shooter\"");
  }
  if (j.contains("output_dir"))
    cfg.out_dir = j.at("output_dir").get<std::string>();

  if (j.contains("options")) {
    const auto& o = j.at("options");
    jsondetail::reject_unknown_keys(
        o, {"dtheta", "gamma_floor", "ode_rtol", "ode_atol", "brent_xtol_rel",
            "fv"},
        "options");
    using jsondetail::optional_number;
    auto& sh = cfg.shooter;
    sh.dtheta_offset = optional_number(o, "dtheta", sh.dtheta_offset);
    sh.gamma_floor = optional_number(o, "gamma_floor", sh.gamma_floor);
    sh.ode_rtol = optional_number(o, "ode_rtol", sh.ode_rtol);
    sh.ode_atol = optional_number(o, "ode_atol", sh.ode_atol);
    sh.brent_xtol_rel =
        optional_number(o, "brent_xtol_rel", sh.brent_xtol_rel);
    if (o.contains("fv")) {
      const auto& f = o.at("fv");
      jsondetail::reject_unknown_keys(
          f,
          {"scheme", "newton_tol", "max_newton_iterations", "refine_delta_T",
           "refine_curvature", "max_refine_rounds", "max_cells",
           "domain_factor"},
          "options.fv");
      auto& fv = cfg.fv;
      if (f.contains("scheme"))
        fv.scheme =
            jsondetail::scheme_from_string(f.at("scheme").get<std::string>());
      fv.newton_tol = optional_number(f, "newton_tol", fv.newton_tol);
      fv.max_newton_iters = static_cast<int>(optional_number(
          f, "max_newton_iterations", fv.max_newton_iters));
      fv.refine_delta_T =
          optional_number(f, "refine_delta_T", fv.refine_delta_T);
      fv.refine_curvature =
          optional_number(f, "refine_curvature", fv.refine_curvature);
      fv.max_refine_rounds = static_cast<int>(
          optional_number(f, "max_refine_rounds", fv.max_refine_rounds));
      fv.max_cells = static_cast<std::size_t>(
          optional_number(f, "max_cells", static_cast<double>(fv.max_cells)));
      fv.domain_factor = optional_number(f, "domain_factor", fv.domain_factor);
    }
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    jsondetail::reject_unknown_keys(
        s, {"parameter", "values", "from", "to", "count", "log_spacing"},
        "sweep");
    SweepSpec spec;
    spec.parameter = s.at("parameter").get<std::string>();
    static const std::set<std::string> registered = {"T_a", "cp_over_cs", "Le",
                                                     "P", "Ts_fixed"};
    if (!registered.count(spec.parameter))
      throw ConfigError("sweep: parameter \"" + spec.parameter +
                        "\" is not registered");
    if (s.contains("values")) {
      for (const auto& v : s.at("values")) spec.values.push_back(v.get<double>());
    } else {
      const double from = jsondetail::require_number(s, "from", "sweep");
      const double to = jsondetail::require_number(s, "to", "sweep");
      const int count =
          static_cast<int>(jsondetail::require_number(s, "count", "sweep"));
      const bool logsp = s.contains("log_spacing") &&
                         s.at("log_spacing").get<bool>();
      if (count < 2) throw ConfigError("sweep: count must be >= 2");
      for (int i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / (count - 1);
        spec.values.push_back(
            logsp ? from * std::pow(to / from, f) : from + f * (to - from));
      }
    }
    if (spec.values.empty()) throw ConfigError("sweep: empty value list");
    cfg.sweep = std::move(spec);
  }

  if (j.contains("xi_scan")) {
    const auto& s = j.at("xi_scan");
    jsondetail::reject_unknown_keys(s, {"points"}, "xi_scan");
    cfg.xi_scan_points =
        static_cast<int>(jsondetail::optional_number(s, "points", 50));
    if (cfg.xi_scan_points < 2)
      throw ConfigError("xi_scan: points must be >= 2");
  }

  cfg.hash = jsondetail::fnv1a_hex(j.dump());
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j, path.parent_path());
}

}  // namespace propwave

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "propwave/commands.hpp"
#include "propwave/version.hpp"

using namespace propwave;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string solver, init, out_dir;
  int jobs = 0;
  bool overwrite = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_jobs) {
  cmd->add_option("--config", a.config_path, "run configuration JSON")
      ->required();
  cmd->add_option("--solver", a.solver, "shoot | fv (overrides the config)");
  cmd->add_option("--init", a.init,
                  "none | shooter: initial data for the fv solver");
  cmd->add_option("--out", a.out_dir, "output directory");
  if (with_jobs)
    cmd->add_option("--jobs", a.jobs, "concurrent solves for sweep points");
  cmd->add_flag("--overwrite", a.overwrite, "replace existing artifacts");
}

int load_and_merge(const CommonArgs& a, RunConfig& cfg) {
  try {
    cfg = load_run_config(a.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!a.solver.empty()) {
    if (a.solver != "shoot" && a.solver != "fv") {
      std::cerr << "config error: --solver must be shoot or fv\n";
      return kExitConfig;
    }
    cfg.solver = a.solver;
  }
  if (!a.init.empty()) {
    if (a.init != "none" && a.init != "shooter") {
      std::cerr << "config error: --init must be none or shooter\n";
      return kExitConfig;
    }
    cfg.init = a.init;
  }
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  cfg.overwrite = a.overwrite;
  return -1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"travelling-wave solid propellant combustion solver"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, scan_args, compare_args;
  auto* solve = app.add_subcommand("solve", "single travelling-wave solve");
  add_common(solve, solve_args, false);
  auto* sweep = app.add_subcommand("sweep", "parametric sweep");
  add_common(sweep, sweep_args, true);
  auto* scan =
      app.add_subcommand("xi-scan", "tabulate the mismatch over the bracket");
  add_common(scan, scan_args, false);
  auto* compare =
      app.add_subcommand("compare", "cross-verify shooter and fv solvers");
  add_common(compare, compare_args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  RunConfig cfg;
  if (solve->parsed()) {
    const int rc = load_and_merge(solve_args, cfg);
    return rc >= 0 ? rc : cmd_solve(cfg);
  }
  if (sweep->parsed()) {
    const int rc = load_and_merge(sweep_args, cfg);
    return rc >= 0 ? rc : cmd_sweep(cfg);
  }
  if (scan->parsed()) {
    const int rc = load_and_merge(scan_args, cfg);
    return rc >= 0 ? rc : cmd_xi_scan(cfg);
  }
  if (compare->parsed()) {
    const int rc = load_and_merge(compare_args, cfg);
    return rc >= 0 ? rc : cmd_compare(cfg);
  }
  return kExitConfig;
}

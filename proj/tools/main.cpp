#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scalefree/experiment.hpp"

namespace {

// Option handles for the flags that override config values; count() > 0
// tells us the user actually passed one.
struct RunFlags {
  CLI::Option* horizon = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* allow = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic synchronization toolkit for multi-agent systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int horizon = 0;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  bool allow_unverified = false;
  std::vector<std::string> batch_paths;

  auto add_run_flags = [&](CLI::App* cmd) {
    RunFlags f;
    f.horizon = cmd->add_option("--horizon", horizon, "override the config horizon")
                    ->check(CLI::NonNegativeNumber);
    f.seed = cmd->add_option("--seed", seed, "override the config seed");
    f.tol = cmd->add_option("--tol", tol, "override the settled-step tolerance")
                ->check(CLI::PositiveNumber);
    f.allow = cmd->add_flag("--allow-unverified", allow_unverified,
                            "run even when the graph fails structural admission");
    return f;
  };

  CLI::App* design = app.add_subcommand(
      "design", "synthesize gains and compensators for a config");
  design->add_option("config", config_path, "experiment config file")->required();
  design->add_option("--out", out_dir, "output directory");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the closed loop; writes trace.csv, metrics.csv, "
                  "summary.txt and plot.gp");
  simulate->add_option("config", config_path, "experiment config file")->required();
  simulate->add_option("--out", out_dir, "output directory");
  const RunFlags simulate_flags = add_run_flags(simulate);

  CLI::App* verify = app.add_subcommand(
      "verify", "certify the closed loop and cross-check the simulator "
                "against the matrix model");
  verify->add_option("config", config_path, "experiment config file")->required();
  verify->add_option("--out", out_dir, "output directory");
  const RunFlags verify_flags = add_run_flags(verify);

  CLI::App* paper = app.add_subcommand(
      "paper-example", "reproduce the bundled reference example on the three "
                       "bundled network cases");
  paper->add_option("--out", out_dir, "output directory");
  CLI::Option* paper_horizon =
      paper->add_option("--horizon", horizon, "simulation horizon")
          ->check(CLI::PositiveNumber);

  CLI::App* batch = app.add_subcommand(
      "batch", "simulate several configs into per-config subdirectories");
  batch->add_option("configs", batch_paths, "experiment config files")
      ->required()
      ->expected(-1);
  batch->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto apply_overrides = [&](scalefree::ExperimentConfig& cfg, const RunFlags& f) {
    if (f.horizon->count() > 0) {
      cfg.horizon = horizon;
    }
    if (f.seed->count() > 0) {
      cfg.seed = seed;
    }
    if (f.tol->count() > 0) {
      cfg.tol = tol;
    }
    if (f.allow->count() > 0) {
      cfg.allow_unverified = true;
    }
  };

  try {
    if (design->parsed()) {
      const scalefree::ExperimentConfig cfg =
          scalefree::load_experiment_file(config_path);
      return scalefree::cmd_design(cfg, out_dir);
    }
    if (simulate->parsed()) {
      scalefree::ExperimentConfig cfg =
          scalefree::load_experiment_file(config_path);
      apply_overrides(cfg, simulate_flags);
      return scalefree::cmd_simulate(cfg, out_dir);
    }
    if (verify->parsed()) {
      scalefree::ExperimentConfig cfg =
          scalefree::load_experiment_file(config_path);
      apply_overrides(cfg, verify_flags);
      return scalefree::cmd_verify(cfg, out_dir);
    }
    if (paper->parsed()) {
      return scalefree::cmd_paper_example(
          out_dir, paper_horizon->count() > 0 ? horizon : -1);
    }
    if (batch->parsed()) {
      const std::vector<std::filesystem::path> paths(batch_paths.begin(),
                                                     batch_paths.end());
      return scalefree::cmd_batch(paths, out_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return scalefree::exit_code_for_error(e);
  }
  return 1;
}

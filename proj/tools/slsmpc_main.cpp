#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slsmpc/experiment.hpp"

using namespace slsmpc;

int main(int argc, char** argv) {
  CLI::App app{"Robust MPC toolkit: system-level controller synthesis, tube "
               "and DP baselines, and the closed-loop experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool seed_set = false;
  std::string method;
  int horizon = 0;
  int jobs = 1;
  std::vector<int> horizons;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master RNG seed")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--method", method, "sls|tube_unit|tube_zinv");
    sub->add_option("--horizon", horizon, "override the config horizon");
    sub->add_option("--jobs", jobs, "worker threads");
  };

  CLI::App* invset = app.add_subcommand(
      "invset", "compute the maximal robust control-invariant terminal set");
  add_common(invset);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "closed-loop receding-horizon episodes with sampled "
                  "uncertainty");
  add_common(simulate);
  CLI::App* feasmap = app.add_subcommand(
      "feasmap", "feasibility classification over a grid of initial states");
  add_common(feasmap);
  CLI::App* bench = app.add_subcommand(
      "bench", "solver-time benchmark across horizons");
  add_common(bench);
  bench->add_option("--horizons", horizons, "horizon list");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig config = ExperimentConfig::load(config_path);
    CliOverrides ov;
    if (seed_set) ov.seed = seed;
    if (!method.empty()) ov.method = method;
    if (horizon > 0) ov.horizon = horizon;
    ov.jobs = jobs;
    if (invset->parsed()) return cmd_invset(config, out_dir, ov);
    if (simulate->parsed()) return cmd_simulate(config, out_dir, ov);
    if (feasmap->parsed()) return cmd_feasmap(config, out_dir, ov);
    if (bench->parsed()) return cmd_bench(config, out_dir, horizons, ov);
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

// gail-lin: experiment driver for the imitation-learning library.
//
//   gail-lin run --config <path> [--seed N] [--out DIR] [--diagnostics]
//   gail-lin invariants [--suite NAME]
//   gail-lin plot --in curve.csv --out curve.svg
//
// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 runtime abort.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "gaillin/experiment.hpp"
#include "gaillin/plot.hpp"

namespace {

void apply_thread_bound() {
  if (const char* env = std::getenv("GAIL_LIN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(n);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online/offline adversarial imitation learning in linear kernel MDPs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute an experiment config");
  std::string config_path;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  std::string out_override;
  bool diagnostics = false;
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--seed", seed_override, "Override the seed list with one seed")
      ->each([&](const std::string&) { has_seed = true; });
  run->add_option("--out", out_override, "Override the output directory");
  run->add_flag("--diagnostics", diagnostics, "Write full-tensor binary dumps");

  auto* invariants = app.add_subcommand("invariants", "Run invariant suites");
  std::string suite;
  invariants->add_option("--suite", suite, "Run a single named suite");

  auto* plot = app.add_subcommand("plot", "Render a CSV curve to SVG");
  std::string plot_in, plot_out;
  plot->add_option("--in", plot_in, "Input csv (x,y,series)")->required();
  plot->add_option("--out", plot_out, "Output svg")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  apply_thread_bound();
  try {
    if (run->parsed()) {
      gaillin::ExperimentConfig config = gaillin::parse_config(config_path);
      gaillin::ConfigOverrides overrides;
      if (has_seed) overrides.seed = seed_override;
      if (!out_override.empty()) overrides.out_dir = out_override;
      if (diagnostics) overrides.diagnostics = true;
      gaillin::apply_overrides(config, overrides);
      return gaillin::run_experiment(config);
    }
    if (invariants->parsed()) {
      gaillin::ExperimentConfig config;
      config.mode = gaillin::ExperimentConfig::Mode::Invariants;
      config.suite = suite;
      return gaillin::run_experiment(config);
    }
    gaillin::render_plot(plot_in, plot_out);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

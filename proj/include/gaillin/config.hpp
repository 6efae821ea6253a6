#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gaillin {

// Experiment description, read from a flat sectioned key-value file.
// CLI flags override file fields after parsing.
struct ExperimentConfig {
  enum class Mode { Ogap, Pgap, Invariants, Sweep };
  Mode mode = Mode::Ogap;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds = {1};
  bool diagnostics = false;
  std::string suite;  // invariants mode: run one named suite, empty = all

  // [mdp] — inline tabular dims or an instance file.
  std::string mdp_source = "tabular-random";  // or "file"
  std::string mdp_path;
  int states = 4;
  int actions = 3;
  int horizon = 4;
  std::uint64_t instance_seed = 1;
  double truth_scale = 1.0;     // ground-truth reward scale for the expert
  bool nonneg_rewards = false;  // restricted reward convention

  // [data]
  int n1 = 1000;
  int n2 = 0;
  std::string behavior = "uniform";  // or "expert"

  // [alg] — absent step sizes fall back to the theorem defaults.
  std::vector<int> k_grid = {512};
  std::vector<int> n2_grid;  // pgap sweeps over N2 when nonempty
  std::optional<double> alpha;
  std::optional<double> eta;
  double lambda = 1.0;
  double kappa_scale = 1.0;
  double xi = 0.1;

  void validate() const;  // throws std::invalid_argument with the field path
};

ExperimentConfig parse_config(const std::string& path);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<bool> diagnostics;
};
void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);

}  // namespace gaillin

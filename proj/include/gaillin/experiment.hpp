#pragma once

#include <string>
#include <vector>

#include "gaillin/config.hpp"
#include "gaillin/datasets.hpp"
#include "gaillin/mdp.hpp"

namespace gaillin {

// Named invariant suites runnable from the CLI (`gail-lin invariants`).
struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// filter empty = all suites; unknown name throws std::invalid_argument.
std::vector<SuiteResult> run_invariant_suites(const std::string& filter = "");

// Seed sweeps used by both the invariant suites and the acceptance tests.
struct OgapSweepResult {
  int seeds_total = 0;
  int seeds_ok = 0;      // seeds whose every visited iota sits in [-2*Gamma, 0]
  bool audits_ok = true;  // elliptical potential audit on every run log
  double worst_breach = 0.0;
  std::vector<double> final_regret;  // per seed, for reuse by callers
};
OgapSweepResult ogap_optimism_sweep(const LinearKernelMdp& mdp,
                                    const RewardFeatures& features, const Policy& expert,
                                    int episodes, int n1, int n_seeds, double kappa_scale,
                                    double xi, bool nonneg, std::uint64_t base_seed,
                                    bool eval_regret = false);

struct PgapSweepResult {
  int seeds_total = 0;
  int seeds_ok = 0;  // seeds with all (k,h,s,a) iota in [0, 2*Gamma] (flags permitting)
  int feasibility_failures = 0;
  bool concavity_ok = true;  // 100 midpoint segments per run
  double worst_breach = 0.0;
  std::vector<double> gap;         // per seed
  std::vector<double> int_uncert;  // per seed
};
PgapSweepResult pgap_pessimism_sweep(const LinearKernelMdp& mdp,
                                     const RewardFeatures& features, const Policy& expert,
                                     int iterations, int n1, int n2, int n_seeds,
                                     double kappa_scale, double xi, bool nonneg,
                                     std::uint64_t base_seed, bool eval_gap = false,
                                     bool check_concavity = true);

// Executes the configured mode and writes the artifact tree. Exit codes:
// 0 success, 1 invariant failure, 3 runtime abort (config errors surface as
// std::invalid_argument before this runs).
int run_experiment(const ExperimentConfig& config);

}  // namespace gaillin

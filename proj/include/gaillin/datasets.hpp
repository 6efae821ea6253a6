#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gaillin/mdp.hpp"

namespace gaillin {

// Expert demonstration: independent trajectories of the expert policy.
struct DemoSet {
  std::vector<Trajectory> trajectories;
  std::string source_policy_id;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(trajectories.size()); }
  int horizon() const { return trajectories.empty() ? 0 : trajectories.front().length(); }
  void validate() const;
};

// Offline dataset of (s, a, s') transitions collected a priori by an
// experimenter who may adapt to the filtration (all previously recorded
// triples).
struct AdditionalSet {
  std::vector<Trajectory> trajectories;
  std::string behavior_spec;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(trajectories.size()); }
  int horizon() const { return trajectories.empty() ? 0 : trajectories.front().length(); }
  void validate(int num_states, int num_actions) const;
};

// The experimenter behind an AdditionalSet. History callbacks receive every
// prior (s, a, s') triple in filtration order plus the pending (h, s).
using HistoryRule =
    std::function<int(const std::vector<std::array<int, 3>>& history, int h, int s)>;

struct Behavior {
  enum class Kind { FixedPolicy, Uniform, History } kind = Kind::Uniform;
  Policy policy;  // FixedPolicy only
  HistoryRule rule;
  std::string spec = "uniform";

  static Behavior uniform();
  static Behavior fixed(Policy policy, std::string id);
  static Behavior history(HistoryRule rule, std::string id);
};

// n1 independent seeded rollouts of the expert policy (parallel across
// trajectories via derived per-trajectory seeds).
DemoSet generate_demos(const LinearKernelMdp& mdp, const Policy& expert, int n1,
                       std::uint64_t seed, std::string source_policy_id = "expert");

AdditionalSet generate_additional(const LinearKernelMdp& mdp, const Behavior& behavior,
                                  int n2, std::uint64_t seed);

// Minimum over h of the smallest generalized eigenvalue of the dataset
// feature second moment against the expert's, restricted to the column span
// of the expert matrix. Empty datasets score 0.
double coverage_ratio(const LinearKernelMdp& mdp, const AdditionalSet& data,
                      const Policy& expert);

// psibar_h = mean of psi(s^E_h, a^E_h) over demo trajectories.
std::vector<Eigen::VectorXd> demo_mean_features(const DemoSet& demos,
                                                const RewardFeatures& features);

// JSON Lines files: a header object, then one trajectory per line.
void save_dataset(const DemoSet& set, const std::string& path);
void save_dataset(const AdditionalSet& set, const std::string& path);
DemoSet load_demo_set(const std::string& path, const LinearKernelMdp* mdp = nullptr,
                      std::vector<std::string>* warnings = nullptr);
AdditionalSet load_additional_set(const std::string& path,
                                  const LinearKernelMdp* mdp = nullptr,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace gaillin

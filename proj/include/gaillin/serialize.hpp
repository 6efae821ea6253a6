#pragma once

#include <string>

#include "gaillin/mdp.hpp"
#include "gaillin/ogap.hpp"
#include "gaillin/pgap.hpp"

namespace gaillin {

// Instance document: dimensions, phi as nested arrays or a "tabular" tag,
// theta, psi, mu, R, the initial state, and the horizon. Loaders validate
// every invariant.
void save_instance(const LinearKernelMdp& mdp, const RewardModel& reward,
                   const std::string& path);
struct Instance {
  LinearKernelMdp mdp;
  RewardModel reward;
};
Instance load_instance(const std::string& path);

// Round-trip-stable decimal formatting shared by every CSV artifact.
std::string format_double(double x);

// Run-log directories: manifest.json, episodes.csv with per-(k,h) summary
// rows, regret.csv / gap diagnostics written by the experiment driver, and
// full-tensor binary dumps when diagnostics are enabled.
void save_ogap_log(const OgapRunLog& log, const std::string& dir,
                   const std::string& mdp_ref, bool diagnostics);
void save_pgap_log(const PgapRunLog& log, const std::string& dir,
                   const std::string& mdp_ref, bool diagnostics);

}  // namespace gaillin

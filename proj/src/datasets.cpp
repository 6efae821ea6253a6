#include "gaillin/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "gaillin/kernels.hpp"

namespace gaillin {

using nlohmann::json;

void DemoSet::validate() const {
  if (trajectories.empty()) throw std::invalid_argument("demo set: N1 >= 1 required");
  const int h = trajectories.front().length();
  for (const auto& t : trajectories) {
    if (t.length() != h || static_cast<int>(t.states.size()) != h + 1)
      throw std::invalid_argument("demo set: inconsistent trajectory length");
  }
}

void AdditionalSet::validate(int num_states, int num_actions) const {
  for (const auto& t : trajectories) {
    if (static_cast<int>(t.states.size()) != t.length() + 1)
      throw std::invalid_argument("additional set: missing next states");
    for (int s : t.states)
      if (s < 0 || s >= num_states)
        throw std::invalid_argument("additional set: state index out of range");
    for (int a : t.actions)
      if (a < 0 || a >= num_actions)
        throw std::invalid_argument("additional set: action index out of range");
  }
}

Behavior Behavior::uniform() { return Behavior{}; }

Behavior Behavior::fixed(Policy policy, std::string id) {
  Behavior b;
  b.kind = Kind::FixedPolicy;
  b.policy = std::move(policy);
  b.spec = "fixed:" + id;
  return b;
}

Behavior Behavior::history(HistoryRule rule, std::string id) {
  Behavior b;
  b.kind = Kind::History;
  b.rule = std::move(rule);
  b.spec = "history:" + id;
  return b;
}

DemoSet generate_demos(const LinearKernelMdp& mdp, const Policy& expert, int n1,
                       std::uint64_t seed, std::string source_policy_id) {
  if (n1 < 1) throw std::invalid_argument("generate_demos: n1 >= 1 required");
  const TransitionTables trans = transition_tables(mdp);
  DemoSet set;
  set.seed = seed;
  set.source_policy_id = std::move(source_policy_id);
  set.trajectories.resize(n1);
#pragma omp parallel for schedule(static) if (n1 >= 256)
  for (int tau = 0; tau < n1; ++tau) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(tau)));
    set.trajectories[tau] = rollout(trans, mdp.init_state, expert, rng);
  }
  return set;
}

AdditionalSet generate_additional(const LinearKernelMdp& mdp, const Behavior& behavior,
                                  int n2, std::uint64_t seed) {
  if (n2 < 0) throw std::invalid_argument("generate_additional: n2 >= 0 required");
  const TransitionTables trans = transition_tables(mdp);
  AdditionalSet set;
  set.seed = seed;
  set.behavior_spec = behavior.spec;
  set.trajectories.resize(n2);

  if (behavior.kind == Behavior::Kind::History) {
    // Adaptive experimenters see the filtration, so trajectories are
    // generated strictly in order.
    std::vector<std::array<int, 3>> history;
    Rng rng(seed);
    for (int tau = 0; tau < n2; ++tau) {
      Trajectory traj;
      int s = mdp.init_state;
      traj.states.push_back(s);
      for (int h = 0; h < mdp.horizon; ++h) {
        const int a = behavior.rule(history, h, s);
        if (a < 0 || a >= mdp.num_actions)
          throw std::invalid_argument("generate_additional: behavior chose invalid action");
        const int sp = rng.categorical(trans.row(h, s, a));
        history.push_back({s, a, sp});
        traj.actions.push_back(a);
        traj.states.push_back(sp);
        s = sp;
      }
      set.trajectories[tau] = std::move(traj);
    }
    return set;
  }

  const Policy uniform = Policy::uniform(mdp.horizon, mdp.num_states, mdp.num_actions);
  const Policy& pi = behavior.kind == Behavior::Kind::FixedPolicy ? behavior.policy : uniform;
#pragma omp parallel for schedule(static) if (n2 >= 256)
  for (int tau = 0; tau < n2; ++tau) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(tau)));
    set.trajectories[tau] = rollout(trans, mdp.init_state, pi, rng);
  }
  return set;
}

double coverage_ratio(const LinearKernelMdp& mdp, const AdditionalSet& data,
                      const Policy& expert) {
  if (data.trajectories.empty()) return 0.0;
  const int d = mdp.dim_p;
  const double n2 = static_cast<double>(data.size());

  // Per-pair feature second moments M(s,a) = sum_{s'} phi phi^T.
  std::vector<Eigen::MatrixXd> pair_moment(
      static_cast<std::size_t>(mdp.num_states) * mdp.num_actions,
      Eigen::MatrixXd::Zero(d, d));
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) {
      Eigen::MatrixXd& m = pair_moment[static_cast<std::size_t>(s) * mdp.num_actions + a];
      for (int sp = 0; sp < mdp.num_states; ++sp) {
        const auto f = mdp.phi_vec(s, a, sp);
        m.noalias() += f * f.transpose();
      }
    }

  const std::vector<Grid2> rho = occupancy_measures(mdp, expert);

  double c = std::numeric_limits<double>::infinity();
  for (int h = 0; h < mdp.horizon; ++h) {
    Eigen::MatrixXd data_moment = Eigen::MatrixXd::Zero(d, d);
    for (const auto& traj : data.trajectories) {
      const int s = traj.states[h], a = traj.actions[h];
      data_moment += pair_moment[static_cast<std::size_t>(s) * mdp.num_actions + a];
    }
    data_moment /= n2;

    Eigen::MatrixXd expert_moment = Eigen::MatrixXd::Zero(d, d);
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double w = rho[h].at(s, a);
        if (w > 0.0)
          expert_moment += w * pair_moment[static_cast<std::size_t>(s) * mdp.num_actions + a];
      }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(expert_moment);
    const double max_eig = es.eigenvalues().maxCoeff();
    if (!(max_eig > 0.0)) continue;  // rank-0 expert moment: ordering is vacuous
    const double cutoff = 1e-12 * max_eig;
    std::vector<int> keep;
    for (int i = 0; i < d; ++i)
      if (es.eigenvalues()[i] > cutoff) keep.push_back(i);
    Eigen::MatrixXd basis(d, static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) basis.col(j) = es.eigenvectors().col(keep[j]);

    const Eigen::MatrixXd a_red = basis.transpose() * data_moment * basis;
    const Eigen::MatrixXd b_red = basis.transpose() * expert_moment * basis;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(a_red, b_red);
    c = std::min(c, ges.eigenvalues().minCoeff());
  }
  if (!std::isfinite(c)) return 0.0;
  return std::max(0.0, c);
}

std::vector<Eigen::VectorXd> demo_mean_features(const DemoSet& demos,
                                                const RewardFeatures& features) {
  const int horizon = demos.horizon();
  std::vector<Eigen::VectorXd> mean(horizon, Eigen::VectorXd::Zero(features.dim_r));
  for (const auto& traj : demos.trajectories)
    for (int h = 0; h < horizon; ++h)
      mean[h] += features.vec(traj.states[h], traj.actions[h]);
  for (auto& m : mean) m /= static_cast<double>(demos.size());
  return mean;
}

namespace {

constexpr int kDatasetVersion = 1;

json dataset_header(const char* kind, int horizon, int n, std::uint64_t seed,
                    const std::string& spec) {
  json h;
  h["version"] = kDatasetVersion;
  h["kind"] = kind;
  h["H"] = horizon;
  h["N"] = n;
  h["seed"] = seed;
  h["behavior_spec"] = spec;
  return h;
}

json parse_header(std::istream& in, const char* expect_kind,
                  std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: missing header line");
  json header = json::parse(line, nullptr, /*allow_exceptions=*/true);
  for (const char* key : {"version", "kind", "H", "N", "seed", "behavior_spec"})
    if (!header.contains(key))
      throw std::runtime_error(std::string("dataset: header missing field ") + key);
  for (auto it = header.begin(); it != header.end(); ++it) {
    static const std::vector<std::string> known = {"version", "kind", "H",
                                                   "N",       "seed", "behavior_spec"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      const std::string msg = "dataset: ignoring unknown header field '" + it.key() + "'";
      if (warnings)
        warnings->push_back(msg);
      else
        std::cerr << "warning: " << msg << "\n";
    }
  }
  if (header["kind"] != expect_kind) throw std::runtime_error("dataset: wrong kind");
  return header;
}

}  // namespace

void save_dataset(const DemoSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out << dataset_header("demos", set.horizon(), set.size(), set.seed, set.source_policy_id)
      << "\n";
  for (const auto& traj : set.trajectories) {
    json row = json::array();
    for (int h = 0; h < traj.length(); ++h)
      row.push_back({traj.states[h], traj.actions[h]});
    out << row << "\n";
  }
}

void save_dataset(const AdditionalSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  out << dataset_header("additional", set.horizon(), set.size(), set.seed, set.behavior_spec)
      << "\n";
  for (const auto& traj : set.trajectories) {
    json row = json::array();
    for (int h = 0; h < traj.length(); ++h)
      row.push_back({traj.states[h], traj.actions[h], traj.states[h + 1]});
    out << row << "\n";
  }
}

namespace {

Trajectory parse_trajectory(const json& row, int arity, int expect_h) {
  if (!row.is_array() || (expect_h >= 0 && static_cast<int>(row.size()) != expect_h))
    throw std::runtime_error("dataset: malformed trajectory line");
  Trajectory traj;
  int prev_next = -1;
  for (const auto& step : row) {
    if (!step.is_array() || static_cast<int>(step.size()) != arity)
      throw std::runtime_error("dataset: malformed step entry");
    const int s = step[0].get<int>();
    const int a = step[1].get<int>();
    if (arity == 3 && prev_next >= 0 && s != prev_next)
      throw std::runtime_error("dataset: discontinuous trajectory");
    traj.states.push_back(s);
    traj.actions.push_back(a);
    if (arity == 3) prev_next = step[2].get<int>();
  }
  // Demo files carry (s, a) pairs only; the terminal sentinel repeats the
  // last state and is never consumed.
  traj.states.push_back(arity == 3 ? prev_next : traj.states.back());
  return traj;
}

}  // namespace

DemoSet load_demo_set(const std::string& path, const LinearKernelMdp* mdp,
                      std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  const json header = parse_header(in, "demos", warnings);
  DemoSet set;
  set.seed = header["seed"].get<std::uint64_t>();
  set.source_policy_id = header["behavior_spec"].get<std::string>();
  const int horizon = header["H"].get<int>();
  const int n = header["N"].get<int>();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    set.trajectories.push_back(parse_trajectory(json::parse(line), 2, horizon));
  }
  if (static_cast<int>(set.trajectories.size()) != n)
    throw std::runtime_error("load_dataset: truncated file (trajectory count mismatch)");
  set.validate();
  if (mdp) {
    if (horizon != mdp->horizon) throw std::runtime_error("load_dataset: horizon mismatch");
    for (const auto& t : set.trajectories)
      for (std::size_t i = 0; i < t.actions.size(); ++i)
        if (t.states[i] < 0 || t.states[i] >= mdp->num_states || t.actions[i] < 0 ||
            t.actions[i] >= mdp->num_actions)
          throw std::runtime_error("load_dataset: index out of range for MDP manifest");
  }
  return set;
}

AdditionalSet load_additional_set(const std::string& path, const LinearKernelMdp* mdp,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  const json header = parse_header(in, "additional", warnings);
  AdditionalSet set;
  set.seed = header["seed"].get<std::uint64_t>();
  set.behavior_spec = header["behavior_spec"].get<std::string>();
  const int horizon = header["H"].get<int>();
  const int n = header["N"].get<int>();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    set.trajectories.push_back(parse_trajectory(json::parse(line), 3, horizon));
  }
  if (static_cast<int>(set.trajectories.size()) != n)
    throw std::runtime_error("load_dataset: truncated file (trajectory count mismatch)");
  if (mdp) {
    if (horizon != mdp->horizon) throw std::runtime_error("load_dataset: horizon mismatch");
    set.validate(mdp->num_states, mdp->num_actions);
  }
  return set;
}

}  // namespace gaillin

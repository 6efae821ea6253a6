#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gaillin/rng.hpp"
#include "gaillin/tables.hpp"

namespace gaillin {

// Tolerances shared by all invariant checks.
inline constexpr double kSimplexTol = 1e-9;     // row sums / ball memberships
inline constexpr double kEntryTol = 1e-12;      // nonnegativity slack
inline constexpr double kExactTol = 1e-9;       // exact-identity tests

// Episodic MDP whose step-h kernel is an inner product of a known feature
// map with an unknown parameter: P_h(s'|s,a) = phi(s,a,s')^T theta_h.
// Finite state/action spaces under counting measure; the initial state is
// fixed. phi is stored densely, indexed [s][a][s'][i].
struct LinearKernelMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int init_state = 0;
  int dim_p = 0;  // transition feature dimension
  std::vector<double> phi;
  std::vector<Eigen::VectorXd> theta;  // one per step
  double regularity_r = 1.0;

  Eigen::Map<const Eigen::VectorXd> phi_vec(int s, int a, int sp) const {
    const std::size_t off =
        ((static_cast<std::size_t>(s) * num_actions + a) * num_states + sp) * dim_p;
    return {phi.data() + off, dim_p};
  }

  double prob(int h, int s, int a, int sp) const {
    return phi_vec(s, a, sp).dot(theta[h]);
  }

  // phibar(s,a) = sum_{s'} phi(s,a,s') * value(s'); the regression feature of
  // the value-targeted ridge fits.
  Eigen::VectorXd phi_dot_value(int s, int a, std::span<const double> value) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_p);
    for (int sp = 0; sp < num_states; ++sp) out += value[sp] * phi_vec(s, a, sp);
    return out;
  }

  // Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

// Precomputed transition tables P_h(s'|s,a), indexed [h](s,a,s').
struct TransitionTables {
  int horizon = 0, num_states = 0, num_actions = 0;
  std::vector<Grid3> p;  // one Grid3 per step

  std::span<const double> row(int h, int s, int a) const { return p[h].row(s, a); }
};

// Linear reward class: r_h(s,a) = psi(s,a)^T mu_h with each mu_h in the
// centered ball of radius sqrt(d_R).
struct RewardFeatures {
  int num_states = 0, num_actions = 0, dim_r = 0;
  std::vector<double> psi;  // [s][a][i]

  Eigen::Map<const Eigen::VectorXd> vec(int s, int a) const {
    const std::size_t off = (static_cast<std::size_t>(s) * num_actions + a) * dim_r;
    return {psi.data() + off, dim_r};
  }

  double radius() const { return std::sqrt(static_cast<double>(dim_r)); }
  void validate() const;
};

struct RewardModel {
  RewardFeatures psi;
  std::vector<Eigen::VectorXd> mu;  // one per step

  double reward(int h, int s, int a) const { return psi.vec(s, a).dot(mu[h]); }
  Grid2 reward_table(int h) const;
  void validate(int horizon) const;
};

// Per-step stochastic action tables, indexed (h, s) -> distribution over a.
struct Policy {
  int horizon = 0, num_states = 0, num_actions = 0;
  Grid3 p;  // [h][s][a]

  static Policy uniform(int horizon, int num_states, int num_actions);
  std::span<const double> row(int h, int s) const { return p.row(h, s); }
  std::span<double> row(int h, int s) { return p.row(h, s); }
  void validate() const;
};

// q indexed [h](s,a); v indexed [h][s] with the extra terminal row v_H = 0.
struct ValueTables {
  int horizon = 0, num_states = 0, num_actions = 0;
  std::vector<Grid2> q;  // size H
  Grid2 v;               // (H+1) x S

  ValueTables() = default;
  ValueTables(int h, int s, int a)
      : horizon(h), num_states(s), num_actions(a), q(h, Grid2(s, a)), v(h + 1, s) {}
};

// One episode: states s_1..s_{H+1} (terminal state retained so offline
// datasets can store (s, a, s') triples) and actions a_1..a_H.
struct Trajectory {
  std::vector<int> states;   // H+1
  std::vector<int> actions;  // H

  int length() const { return static_cast<int>(actions.size()); }
};

// Canonical one-hot feature maps of the tabular reduction:
// phi(s,a,s') = e_{(s,a,s')} in R^{S^2 A}, psi(s,a) = e_{(s,a)} in R^{S A}.
struct TabularEmbedding {
  int dim_p = 0, dim_r = 0;
  std::vector<double> phi;
  std::vector<double> psi;
};
TabularEmbedding tabular_embedding(int num_states, int num_actions);

// Tabular MDP as a linear kernel MDP: theta_h is the flattened kernel, R = 1.
LinearKernelMdp make_tabular_mdp(int num_states, int num_actions, int horizon,
                                 int init_state, const std::vector<Grid3>& kernels);

RewardFeatures tabular_reward_features(int num_states, int num_actions);

// Row-stochastic matrix of step h; rejects rows violating the simplex
// invariant (a model construction bug, not an input error).
Grid3 transition_matrix(const LinearKernelMdp& mdp, int h);
TransitionTables transition_tables(const LinearKernelMdp& mdp);

// Exact backward recursion: Q_h = r_h + P_h V_{h+1}, V_h = <Q_h, pi_h>.
ValueTables policy_evaluation(const LinearKernelMdp& mdp, const RewardModel& reward,
                              const Policy& policy);
ValueTables policy_evaluation(const TransitionTables& trans, const RewardModel& reward,
                              const Policy& policy);

// J(pi, r) = V_1(x).
double expected_return(const LinearKernelMdp& mdp, const RewardModel& reward,
                       const Policy& policy);

// rho_h(s,a) = P(s_h = s, a_h = a) from the fixed initial state.
std::vector<Grid2> occupancy_measures(const LinearKernelMdp& mdp, const Policy& policy);
std::vector<Grid2> occupancy_measures(const TransitionTables& trans, int init_state,
                                      const Policy& policy);

Trajectory rollout(const LinearKernelMdp& mdp, const Policy& policy, Rng& rng);
Trajectory rollout(const TransitionTables& trans, int init_state, const Policy& policy,
                   Rng& rng);

// Greedy backward induction; ties broken toward the lowest action index.
Policy optimal_policy(const LinearKernelMdp& mdp, const RewardModel& reward);

// L(pi, mu) = J(pi^E, r^mu) - J(pi, r^mu).
double gail_objective(const LinearKernelMdp& mdp, const RewardModel& reward,
                      const Policy& expert, const Policy& policy);

}  // namespace gaillin

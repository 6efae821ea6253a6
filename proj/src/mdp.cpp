#include "gaillin/mdp.hpp"

#include <cmath>
#include <stdexcept>

#include "gaillin/kernels.hpp"

namespace gaillin {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void LinearKernelMdp::validate() const {
  require(num_states >= 1 && num_actions >= 1 && horizon >= 1, "mdp: empty dimensions");
  require(init_state >= 0 && init_state < num_states, "mdp: init_state out of range");
  require(static_cast<long>(phi.size()) ==
              static_cast<long>(num_states) * num_actions * num_states * dim_p,
          "mdp: phi tensor size mismatch");
  require(static_cast<int>(theta.size()) == horizon, "mdp: theta count != horizon");
  const double theta_cap = std::sqrt(static_cast<double>(dim_p)) + kSimplexTol;
  for (int h = 0; h < horizon; ++h) {
    require(theta[h].size() == dim_p, "mdp: theta dimension mismatch");
    require(theta[h].norm() <= theta_cap, "mdp: ||theta_h|| exceeds sqrt(d)");
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (int sp = 0; sp < num_states; ++sp) {
          const double p = prob(h, s, a, sp);
          require(p >= -kEntryTol, "mdp: negative transition probability");
          sum += p;
        }
        require(std::abs(sum - 1.0) <= kSimplexTol, "mdp: transition row does not sum to 1");
      }
    }
  }
  require(regularity_r > 0.0, "mdp: regularity constant must be positive");
}

void RewardFeatures::validate() const {
  require(num_states >= 1 && num_actions >= 1 && dim_r >= 1, "psi: empty dimensions");
  require(static_cast<long>(psi.size()) ==
              static_cast<long>(num_states) * num_actions * dim_r,
          "psi: table size mismatch");
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a)
      require(vec(s, a).norm() <= 1.0 + kEntryTol, "psi: ||psi(s,a)|| exceeds 1");
}

void RewardModel::validate(int horizon) const {
  psi.validate();
  require(static_cast<int>(mu.size()) == horizon, "reward: mu count != horizon");
  const double cap = psi.radius() + kSimplexTol;
  for (const auto& m : mu) {
    require(m.size() == psi.dim_r, "reward: mu dimension mismatch");
    require(m.norm() <= cap, "reward: ||mu_h|| exceeds sqrt(d)");
  }
}

Grid2 RewardModel::reward_table(int h) const {
  Grid2 r(psi.num_states, psi.num_actions);
  for (int s = 0; s < psi.num_states; ++s)
    for (int a = 0; a < psi.num_actions; ++a) r.at(s, a) = reward(h, s, a);
  return r;
}

Policy Policy::uniform(int horizon, int num_states, int num_actions) {
  Policy pi;
  pi.horizon = horizon;
  pi.num_states = num_states;
  pi.num_actions = num_actions;
  pi.p = Grid3(horizon, num_states, num_actions, 1.0 / num_actions);
  return pi;
}

void Policy::validate() const {
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a < num_actions; ++a) {
        require(p.at(h, s, a) >= 0.0, "policy: negative probability");
        sum += p.at(h, s, a);
      }
      require(std::abs(sum - 1.0) <= kSimplexTol, "policy: row does not sum to 1");
    }
  }
}

TabularEmbedding tabular_embedding(int num_states, int num_actions) {
  if (num_states < 1 || num_actions < 1)
    throw std::invalid_argument("tabular_embedding: cardinalities must be >= 1");
  TabularEmbedding e;
  e.dim_p = num_states * num_states * num_actions;
  e.dim_r = num_states * num_actions;
  e.phi.assign(static_cast<std::size_t>(num_states) * num_actions * num_states * e.dim_p, 0.0);
  e.psi.assign(static_cast<std::size_t>(num_states) * num_actions * e.dim_r, 0.0);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      for (int sp = 0; sp < num_states; ++sp) {
        const std::size_t triple = (static_cast<std::size_t>(s) * num_actions + a) * num_states + sp;
        e.phi[triple * e.dim_p + triple] = 1.0;
      }
      const std::size_t pair = static_cast<std::size_t>(s) * num_actions + a;
      e.psi[pair * e.dim_r + pair] = 1.0;
    }
  }
  return e;
}

LinearKernelMdp make_tabular_mdp(int num_states, int num_actions, int horizon,
                                 int init_state, const std::vector<Grid3>& kernels) {
  TabularEmbedding e = tabular_embedding(num_states, num_actions);
  LinearKernelMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.init_state = init_state;
  mdp.dim_p = e.dim_p;
  mdp.phi = std::move(e.phi);
  mdp.regularity_r = 1.0;
  mdp.theta.reserve(horizon);
  for (int h = 0; h < horizon; ++h) {
    Eigen::VectorXd th(e.dim_p);
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a)
        for (int sp = 0; sp < num_states; ++sp)
          th[(static_cast<long>(s) * num_actions + a) * num_states + sp] =
              kernels[h].at(s, a, sp);
    mdp.theta.push_back(std::move(th));
  }
  mdp.validate();
  return mdp;
}

RewardFeatures tabular_reward_features(int num_states, int num_actions) {
  TabularEmbedding e = tabular_embedding(num_states, num_actions);
  RewardFeatures f;
  f.num_states = num_states;
  f.num_actions = num_actions;
  f.dim_r = e.dim_r;
  f.psi = std::move(e.psi);
  return f;
}

Grid3 transition_matrix(const LinearKernelMdp& mdp, int h) {
  Grid3 p(mdp.num_states, mdp.num_actions, mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      double sum = 0.0;
      for (int sp = 0; sp < mdp.num_states; ++sp) {
        const double val = mdp.prob(h, s, a, sp);
        if (val < -kEntryTol)
          throw std::invalid_argument("transition_matrix: negative entry");
        p.at(s, a, sp) = val;
        sum += val;
      }
      if (std::abs(sum - 1.0) > kSimplexTol)
        throw std::invalid_argument("transition_matrix: row does not sum to 1");
    }
  }
  return p;
}

TransitionTables transition_tables(const LinearKernelMdp& mdp) {
  TransitionTables t;
  t.horizon = mdp.horizon;
  t.num_states = mdp.num_states;
  t.num_actions = mdp.num_actions;
  t.p.reserve(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) t.p.push_back(transition_matrix(mdp, h));
  return t;
}

ValueTables policy_evaluation(const TransitionTables& trans, const RewardModel& reward,
                              const Policy& policy) {
  const int horizon = trans.horizon, s_n = trans.num_states, a_n = trans.num_actions;
  ValueTables vt(horizon, s_n, a_n);
  for (int h = horizon - 1; h >= 0; --h) {
    const Grid2 r = reward.reward_table(h);
    kernels::backup_q(trans.p[h], r, vt.v.row(h + 1), vt.q[h]);
    kernels::v_from_q(vt.q[h], policy.p, h, vt.v.row(h));
  }
  return vt;
}

ValueTables policy_evaluation(const LinearKernelMdp& mdp, const RewardModel& reward,
                              const Policy& policy) {
  return policy_evaluation(transition_tables(mdp), reward, policy);
}

double expected_return(const LinearKernelMdp& mdp, const RewardModel& reward,
                       const Policy& policy) {
  return policy_evaluation(mdp, reward, policy).v.at(0, mdp.init_state);
}

std::vector<Grid2> occupancy_measures(const TransitionTables& trans, int init_state,
                                      const Policy& policy) {
  const int horizon = trans.horizon, s_n = trans.num_states, a_n = trans.num_actions;
  std::vector<Grid2> rho(horizon, Grid2(s_n, a_n));
  for (int a = 0; a < a_n; ++a) rho[0].at(init_state, a) = policy.p.at(0, init_state, a);
  for (int h = 0; h + 1 < horizon; ++h)
    kernels::occupancy_step(trans.p[h], policy.p, h + 1, rho[h], rho[h + 1]);
  return rho;
}

std::vector<Grid2> occupancy_measures(const LinearKernelMdp& mdp, const Policy& policy) {
  return occupancy_measures(transition_tables(mdp), mdp.init_state, policy);
}

Trajectory rollout(const TransitionTables& trans, int init_state, const Policy& policy,
                   Rng& rng) {
  Trajectory traj;
  traj.states.reserve(trans.horizon + 1);
  traj.actions.reserve(trans.horizon);
  int s = init_state;
  traj.states.push_back(s);
  for (int h = 0; h < trans.horizon; ++h) {
    const int a = rng.categorical(policy.row(h, s));
    const int sp = rng.categorical(trans.row(h, s, a));
    traj.actions.push_back(a);
    traj.states.push_back(sp);
    s = sp;
  }
  return traj;
}

Trajectory rollout(const LinearKernelMdp& mdp, const Policy& policy, Rng& rng) {
  return rollout(transition_tables(mdp), mdp.init_state, policy, rng);
}

Policy optimal_policy(const LinearKernelMdp& mdp, const RewardModel& reward) {
  const TransitionTables trans = transition_tables(mdp);
  const int horizon = mdp.horizon, s_n = mdp.num_states, a_n = mdp.num_actions;
  Policy pi;
  pi.horizon = horizon;
  pi.num_states = s_n;
  pi.num_actions = a_n;
  pi.p = Grid3(horizon, s_n, a_n, 0.0);
  std::vector<double> v_next(s_n, 0.0), v(s_n, 0.0);
  Grid2 q(s_n, a_n);
  for (int h = horizon - 1; h >= 0; --h) {
    const Grid2 r = reward.reward_table(h);
    kernels::backup_q(trans.p[h], r, v_next, q);
    for (int s = 0; s < s_n; ++s) {
      int best = 0;
      for (int a = 1; a < a_n; ++a)
        if (q.at(s, a) > q.at(s, best)) best = a;
      pi.p.at(h, s, best) = 1.0;
      v[s] = q.at(s, best);
    }
    v_next = v;
  }
  return pi;
}

double gail_objective(const LinearKernelMdp& mdp, const RewardModel& reward,
                      const Policy& expert, const Policy& policy) {
  return expected_return(mdp, reward, expert) - expected_return(mdp, reward, policy);
}

}  // namespace gaillin

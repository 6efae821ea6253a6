#include <doctest.h>

#include <cmath>
#include <set>

#include "gaillin/generators.hpp"
#include "gaillin/mdp.hpp"
#include "oracles.hpp"

using namespace gaillin;

namespace {

// Deterministic two-state chain: action 0 stays, action 1 flips.
LinearKernelMdp chain_mdp(int horizon) {
  std::vector<Grid3> kernels;
  for (int h = 0; h < horizon; ++h) {
    Grid3 p(2, 2, 2, 0.0);
    p.at(0, 0, 0) = 1.0;
    p.at(0, 1, 1) = 1.0;
    p.at(1, 0, 1) = 1.0;
    p.at(1, 1, 0) = 1.0;
    kernels.push_back(p);
  }
  return make_tabular_mdp(2, 2, horizon, 0, kernels);
}

RewardModel zero_reward(const LinearKernelMdp& mdp) {
  RewardModel r;
  r.psi = tabular_reward_features(mdp.num_states, mdp.num_actions);
  r.mu.assign(mdp.horizon, Eigen::VectorXd::Zero(r.psi.dim_r));
  return r;
}

}  // namespace

TEST_SUITE("mdp") {

TEST_CASE("tabular embedding produces distinct one-hot features") {
  const TabularEmbedding e = tabular_embedding(2, 2);
  CHECK(e.dim_p == 8);
  CHECK(e.dim_r == 4);
  std::set<int> seen;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int sp = 0; sp < 2; ++sp) {
        const std::size_t off = ((static_cast<std::size_t>(s) * 2 + a) * 2 + sp) * e.dim_p;
        int hot = -1;
        for (int i = 0; i < e.dim_p; ++i) {
          if (e.phi[off + i] == 1.0) {
            CHECK(hot == -1);
            hot = i;
          } else {
            CHECK(e.phi[off + i] == 0.0);
          }
        }
        CHECK(hot >= 0);
        seen.insert(hot);
      }
  CHECK(seen.size() == 8);
}

TEST_CASE("tabular embedding degenerate 1x1 space") {
  const TabularEmbedding e = tabular_embedding(1, 1);
  CHECK(e.dim_p == 1);
  CHECK(e.dim_r == 1);
  CHECK(e.phi == std::vector<double>{1.0});
  CHECK(e.psi == std::vector<double>{1.0});
  Grid3 ident(1, 1, 1, 1.0);
  const LinearKernelMdp mdp = make_tabular_mdp(1, 1, 3, 0, {ident, ident, ident});
  CHECK(mdp.prob(0, 0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("tabular embedding rejects empty spaces") {
  CHECK_THROWS_AS(tabular_embedding(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(tabular_embedding(2, 0), std::invalid_argument);
}

TEST_CASE("transition matrix reproduces the tabular kernel exactly") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 2, 11);
  const Grid3 p = transition_matrix(mdp, 0);
  for (int s = 0; s < 3; ++s)
    for (int a = 0; a < 2; ++a) {
      double sum = 0.0;
      for (int sp = 0; sp < 3; ++sp) {
        CHECK(p.at(s, a, sp) == mdp.theta[0][(static_cast<long>(s) * 2 + a) * 3 + sp]);
        sum += p.at(s, a, sp);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("zero theta is an invalid kernel") {
  LinearKernelMdp mdp = random_tabular_mdp(2, 2, 2, 3);
  mdp.theta[1].setZero();
  CHECK_THROWS_AS(transition_matrix(mdp, 1), std::invalid_argument);
  CHECK_THROWS_AS(mdp.validate(), std::invalid_argument);
}

TEST_CASE("random instances have row-stochastic transitions") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const LinearKernelMdp mdp = random_rotated_mdp(3, 2, 3, seed);
    for (int h = 0; h < mdp.horizon; ++h) {
      const Grid3 p = transition_matrix(mdp, h);
      for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) {
          double sum = 0.0;
          for (int sp = 0; sp < 3; ++sp) sum += p.at(s, a, sp);
          CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
  }
}

TEST_CASE("regularity condition holds on sampled unit vectors") {
  const LinearKernelMdp mdp = random_rotated_mdp(3, 2, 2, 17);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd y(mdp.dim_p);
    for (int i = 0; i < mdp.dim_p; ++i) y[i] = rng.gaussian();
    y.normalize();
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        double sup = 0.0, sum = 0.0;
        for (int sp = 0; sp < mdp.num_states; ++sp) {
          const double val = mdp.phi_vec(s, a, sp).dot(y);
          sup = std::max(sup, val * val);
          sum += val * val;
        }
        const double r2 = mdp.regularity_r * mdp.regularity_r;
        CHECK(sup <= r2 * sum + 1e-12);
        CHECK(sum <= mdp.dim_p + 1e-12);
      }
  }
}

TEST_CASE("policy evaluation: zero reward gives zero values") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 4, 7);
  const RewardModel reward = zero_reward(mdp);
  const Policy pi = random_policy(4, 3, 2, 9);
  const ValueTables vt = policy_evaluation(mdp, reward, pi);
  for (double q : vt.q[0].v) CHECK(q == 0.0);
  for (double v : vt.v.v) CHECK(v == 0.0);
}

TEST_CASE("policy evaluation: single step horizon") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 1, 21);
  const RewardModel reward = random_reward_model(tabular_reward_features(3, 2), 1, 22);
  const Policy pi = random_policy(1, 3, 2, 23);
  const ValueTables vt = policy_evaluation(mdp, reward, pi);
  for (int s = 0; s < 3; ++s) {
    double expect_v = 0.0;
    for (int a = 0; a < 2; ++a) {
      CHECK(vt.q[0].at(s, a) == doctest::Approx(reward.reward(0, s, a)).epsilon(1e-12));
      expect_v += pi.p.at(0, s, a) * reward.reward(0, s, a);
    }
    CHECK(vt.v.at(0, s) == doctest::Approx(expect_v).epsilon(1e-12));
  }
}

TEST_CASE("policy evaluation matches exhaustive trajectory enumeration") {
  for (auto [s_n, a_n, horizon, seed] :
       {std::tuple{2, 2, 2, 31ULL}, {3, 2, 3, 32ULL}, {2, 3, 4, 33ULL}}) {
    const LinearKernelMdp mdp = random_tabular_mdp(s_n, a_n, horizon, seed);
    const RewardModel reward =
        random_reward_model(tabular_reward_features(s_n, a_n), horizon, seed + 100);
    const Policy pi = random_policy(horizon, s_n, a_n, seed + 200);
    REQUIRE(oracles::trajectory_count(mdp) <= 10000);
    const double oracle = oracles::enumerate_return(mdp, reward, pi);
    const double dp = expected_return(mdp, reward, pi);
    CHECK(dp == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("value identity v = <q, pi> after evaluation") {
  const LinearKernelMdp mdp = random_rotated_mdp(3, 3, 3, 41);
  const RewardModel reward = random_reward_model(tabular_reward_features(3, 3), 3, 42);
  const Policy pi = random_policy(3, 3, 3, 43);
  const ValueTables vt = policy_evaluation(mdp, reward, pi);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s) {
      double dot = 0.0;
      for (int a = 0; a < 3; ++a) dot += vt.q[h].at(s, a) * pi.p.at(h, s, a);
      CHECK(vt.v.at(h, s) == doctest::Approx(dot).epsilon(1e-12));
    }
}

TEST_CASE("expected return: deterministic chain with constant reward") {
  const int horizon = 5;
  const LinearKernelMdp mdp = chain_mdp(horizon);
  RewardModel reward = zero_reward(mdp);
  const double c = 0.75;
  for (auto& m : reward.mu) m.setConstant(c);  // one-hot psi: r == c everywhere
  Policy stay = Policy::uniform(horizon, 2, 2);
  const double ret = expected_return(mdp, reward, stay);
  CHECK(ret == doctest::Approx(horizon * c).epsilon(1e-12));
}

TEST_CASE("expected return equals occupancy-weighted reward sum") {
  const LinearKernelMdp mdp = random_rotated_mdp(4, 2, 3, 51);
  Rng feat_rng(52);
  const RewardFeatures features = rotated_reward_features(4, 2, feat_rng);
  const RewardModel reward = random_reward_model(features, 3, 53);
  const Policy pi = random_policy(3, 4, 2, 54);
  const double ret = expected_return(mdp, reward, pi);
  const auto rho = occupancy_measures(mdp, pi);
  double weighted = 0.0;
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) weighted += rho[h].at(s, a) * reward.reward(h, s, a);
  CHECK(ret == doctest::Approx(weighted).epsilon(1e-10));
}

TEST_CASE("occupancy: first step mass sits on the initial state") {
  const LinearKernelMdp mdp = random_tabular_mdp(4, 3, 3, 61);
  const Policy pi = random_policy(3, 4, 3, 62);
  const auto rho = occupancy_measures(mdp, pi);
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 3; ++a) {
      if (s == mdp.init_state)
        CHECK(rho[0].at(s, a) == doctest::Approx(pi.p.at(0, s, a)));
      else
        CHECK(rho[0].at(s, a) == 0.0);
    }
}

TEST_CASE("occupancy rows are nonnegative and normalized per step") {
  const LinearKernelMdp mdp = random_rotated_mdp(3, 3, 4, 63);
  const Policy pi = random_policy(4, 3, 3, 64);
  const auto rho = occupancy_measures(mdp, pi);
  for (int h = 0; h < 4; ++h) {
    double sum = 0.0;
    for (double x : rho[h].v) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("occupancy matches rollout frequencies within 4 standard errors") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 3, 65);
  const Policy pi = random_policy(3, 3, 2, 66);
  const auto rho = occupancy_measures(mdp, pi);
  const int n = 100000;
  const TransitionTables trans = transition_tables(mdp);
  std::vector<Grid2> freq(3, Grid2(3, 2));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(77, i));
    const Trajectory traj = rollout(trans, mdp.init_state, pi, rng);
    for (int h = 0; h < 3; ++h) freq[h].at(traj.states[h], traj.actions[h]) += 1.0;
  }
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        const double p = rho[h].at(s, a);
        const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
        CHECK(std::abs(freq[h].at(s, a) / n - p) <= 4 * se + 1e-9);
      }
}

TEST_CASE("rollout: deterministic kernel and policy give the unique path") {
  const LinearKernelMdp mdp = chain_mdp(4);
  Policy flip = Policy::uniform(4, 2, 2);
  for (int h = 0; h < 4; ++h)
    for (int s = 0; s < 2; ++s) {
      flip.p.at(h, s, 0) = 0.0;
      flip.p.at(h, s, 1) = 1.0;
    }
  Rng rng(1);
  const Trajectory traj = rollout(mdp, flip, rng);
  CHECK(traj.length() == 4);
  CHECK(traj.states == std::vector<int>{0, 1, 0, 1, 0});
}

TEST_CASE("optimal policy: zero reward breaks ties toward action 0") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 3, 2, 71);
  const RewardModel reward = zero_reward(mdp);
  const Policy pi = optimal_policy(mdp, reward);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 3; ++s) {
      CHECK(pi.p.at(h, s, 0) == 1.0);
      for (int a = 1; a < 3; ++a) CHECK(pi.p.at(h, s, a) == 0.0);
    }
}

TEST_CASE("optimal policy: single step is the per-state argmax") {
  const LinearKernelMdp mdp = random_tabular_mdp(4, 3, 1, 72);
  const RewardModel reward = random_reward_model(tabular_reward_features(4, 3), 1, 73);
  const Policy pi = optimal_policy(mdp, reward);
  for (int s = 0; s < 4; ++s) {
    int best = 0;
    for (int a = 1; a < 3; ++a)
      if (reward.reward(0, s, a) > reward.reward(0, s, best)) best = a;
    CHECK(pi.p.at(0, s, best) == 1.0);
  }
}

TEST_CASE("optimal policy matches exhaustive deterministic enumeration") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 3, 74);
  const RewardModel reward = random_reward_model(tabular_reward_features(3, 2), 3, 75);
  const double best = oracles::enumerate_best_return(mdp, reward);
  const Policy pi = optimal_policy(mdp, reward);
  CHECK(expected_return(mdp, reward, pi) == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("gail objective vanishes for the expert and for zero reward") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 3, 81);
  const RewardModel reward = random_reward_model(tabular_reward_features(3, 2), 3, 82);
  const Policy expert = optimal_policy(mdp, reward);
  CHECK(gail_objective(mdp, reward, expert, expert) == doctest::Approx(0.0));
  const RewardModel zero = zero_reward(mdp);
  const Policy other = random_policy(3, 3, 2, 83);
  CHECK(gail_objective(mdp, zero, expert, other) == doctest::Approx(0.0));
}

TEST_CASE("gail objective is linear in the reward parameter") {
  const LinearKernelMdp mdp = random_tabular_mdp(3, 2, 2, 84);
  const RewardFeatures features = tabular_reward_features(3, 2);
  const RewardModel m1 = random_reward_model(features, 2, 85, 0.4);
  const RewardModel m2 = random_reward_model(features, 2, 86, 0.4);
  const Policy expert = random_policy(2, 3, 2, 87);
  const Policy pi = random_policy(2, 3, 2, 88);
  const double a = 0.9, b = -0.6;
  RewardModel combo = m1;
  for (int h = 0; h < 2; ++h) combo.mu[h] = a * m1.mu[h] + b * m2.mu[h];
  combo.validate(2);
  const double lhs = gail_objective(mdp, combo, expert, pi);
  const double rhs =
      a * gail_objective(mdp, m1, expert, pi) + b * gail_objective(mdp, m2, expert, pi);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("trajectory invariants: length H, starts at the initial state") {
  const LinearKernelMdp mdp = random_tabular_mdp(4, 2, 6, 91);
  const Policy pi = random_policy(6, 4, 2, 92);
  Rng rng(93);
  const Trajectory traj = rollout(mdp, pi, rng);
  CHECK(traj.length() == 6);
  CHECK(static_cast<int>(traj.states.size()) == 7);
  CHECK(traj.states.front() == mdp.init_state);
}

}  // TEST_SUITE

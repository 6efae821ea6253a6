#include <doctest.h>

#include <cmath>

#include "gaillin/eval.hpp"
#include "gaillin/generators.hpp"
#include "gaillin/pgap.hpp"

using namespace gaillin;

namespace {

struct PgapFixture {
  LinearKernelMdp mdp;
  RewardFeatures features;
  Policy expert;
  DemoSet demos;
  AdditionalSet data;

  explicit PgapFixture(std::uint64_t seed, int s_n = 3, int a_n = 2, int horizon = 3,
                       int n1 = 100, int n2 = 2000, bool nonneg_truth = false) {
    mdp = random_tabular_mdp(s_n, a_n, horizon, seed);
    features = tabular_reward_features(s_n, a_n);
    const RewardModel truth =
        random_reward_model(features, horizon, seed + 1, 1.0, nonneg_truth);
    expert = optimal_policy(mdp, truth);
    demos = generate_demos(mdp, expert, n1, seed + 2);
    data = generate_additional(mdp, Behavior::fixed(expert, "expert"), n2, seed + 3);
  }
};

// Lhat(pi, mu) = Jtilde(pi^E, mu) - Jhat(pi, mu).
double lhat(const PgapFixture& f, const EstimatedKernel& est,
            const std::vector<Eigen::VectorXd>& demo_mean, const Policy& pi,
            const std::vector<Eigen::VectorXd>& mu) {
  double jtilde = 0.0;
  for (int h = 0; h < f.mdp.horizon; ++h) jtilde += demo_mean[h].dot(mu[h]);
  const PessimisticValues v = evaluate_pessimistic(est, f.features, mu, pi);
  return jtilde - v.vhat.at(0, f.mdp.init_state);
}

}  // namespace

TEST_SUITE("pgap") {

TEST_CASE("offline fit: empty dataset gives theta=0 and Lambda=lambda I") {
  const PgapFixture f(300);
  const auto [theta, gram] = fit_transition_offline(f.mdp, AdditionalSet{}, 0, 2.5);
  CHECK(theta.norm() == 0.0);
  CHECK((gram - 2.5 * Eigen::MatrixXd::Identity(f.mdp.dim_p, f.mdp.dim_p)).norm() == 0.0);
}

TEST_CASE("offline fit on tabular data: counting Gram and count-ratio rows") {
  const PgapFixture f(310);
  const auto [theta, gram] = fit_transition_offline(f.mdp, f.data, 0, 1.0);
  const int s_n = f.mdp.num_states, a_n = f.mdp.num_actions;

  std::vector<int> pair_counts(s_n * a_n, 0);
  std::vector<int> triple_counts(s_n * a_n * s_n, 0);
  for (const auto& t : f.data.trajectories) {
    ++pair_counts[t.states[0] * a_n + t.actions[0]];
    ++triple_counts[(t.states[0] * a_n + t.actions[0]) * s_n + t.states[1]];
  }
  // Lambda is diagonal with entries 1 + n(s,a) on each (s,a,.) block.
  CHECK((gram.diagonal().array() >= 1.0).all());
  for (int s = 0; s < s_n; ++s)
    for (int a = 0; a < a_n; ++a)
      for (int sp = 0; sp < s_n; ++sp) {
        const int idx = (s * a_n + a) * s_n + sp;
        CHECK(gram(idx, idx) == doctest::Approx(1.0 + pair_counts[s * a_n + a]));
        // Ridge row = counts shrunk by 1/(1+n), the empirical-frequency oracle.
        CHECK(theta[idx] == doctest::Approx(triple_counts[idx] /
                                            (1.0 + pair_counts[s * a_n + a]))
                                .epsilon(1e-10));
      }
  CHECK((gram - Eigen::MatrixXd(gram.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("offline fit rows approach the true kernel in total variation") {
  const PgapFixture f(320, 3, 2, 3, 50, 10000);
  for (int h = 0; h < f.mdp.horizon; ++h) {
    const auto [theta, gram] = fit_transition_offline(f.mdp, f.data, h, 1.0);
    std::vector<int> pair_counts(f.mdp.num_states * f.mdp.num_actions, 0);
    for (const auto& t : f.data.trajectories)
      ++pair_counts[t.states[h] * f.mdp.num_actions + t.actions[h]];
    for (int s = 0; s < f.mdp.num_states; ++s)
      for (int a = 0; a < f.mdp.num_actions; ++a) {
        if (pair_counts[s * f.mdp.num_actions + a] < 500) continue;  // visited pairs
        double tv = 0.0;
        for (int sp = 0; sp < f.mdp.num_states; ++sp) {
          const double est = f.mdp.phi_vec(s, a, sp).dot(theta);
          tv += std::abs(est - f.mdp.prob(h, s, a, sp));
        }
        CHECK(tv / 2.0 <= 0.02);
      }
  }
}

TEST_CASE("uncertainty quantifier: zero kappa, saturation, counting formula") {
  const PgapFixture f(330);
  const int s_n = f.mdp.num_states;
  const double hd = f.mdp.horizon * std::sqrt(static_cast<double>(f.features.dim_r));

  const Eigen::MatrixXd prior = Eigen::MatrixXd::Identity(f.mdp.dim_p, f.mdp.dim_p);
  const Grid2 zero_kappa =
      uncertainty_quantifier(f.mdp, prior, 0.0, f.mdp.horizon, f.features.dim_r);
  for (double g : zero_kappa.v) CHECK(g == 0.0);

  const Grid2 saturated =
      uncertainty_quantifier(f.mdp, prior, 1e9, f.mdp.horizon, f.features.dim_r);
  for (double g : saturated.v) CHECK(g == doctest::Approx(hd * s_n));

  // Tabular counting identity: Gamma = H sqrt(d) |S| min{kappa/sqrt(1+n), 1}.
  const double kappa = 3.0;
  const auto [theta, gram] = fit_transition_offline(f.mdp, f.data, 1, 1.0);
  const Grid2 gamma =
      uncertainty_quantifier(f.mdp, gram, kappa, f.mdp.horizon, f.features.dim_r);
  std::vector<int> pair_counts(s_n * f.mdp.num_actions, 0);
  for (const auto& t : f.data.trajectories)
    ++pair_counts[t.states[1] * f.mdp.num_actions + t.actions[1]];
  for (int s = 0; s < s_n; ++s)
    for (int a = 0; a < f.mdp.num_actions; ++a) {
      const int n = pair_counts[s * f.mdp.num_actions + a];
      const double expect = hd * s_n * std::min(kappa / std::sqrt(1.0 + n), 1.0);
      CHECK(gamma.at(s, a) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("feasibility projection: exact rows unchanged, bad row fixed") {
  // Two states, one action; theta encodes rows directly in the tabular basis.
  const TabularEmbedding emb = tabular_embedding(2, 1);
  LinearKernelMdp shell;
  shell.num_states = 2;
  shell.num_actions = 1;
  shell.horizon = 1;
  shell.init_state = 0;
  shell.dim_p = emb.dim_p;
  shell.phi = emb.phi;
  shell.theta.push_back(Eigen::VectorXd::Zero(emb.dim_p));  // not used here

  Eigen::VectorXd theta_tilde(4);
  theta_tilde << 1.1, -0.1, 0.3, 0.7;  // row(0): needs projection; row(1): exact
  std::vector<Grid2> gamma(1, Grid2(2, 1, 2.0));  // below the H sqrt(d)|S| cap
  std::vector<Eigen::MatrixXd> gram(1, Eigen::MatrixXd::Identity(4, 4));
  const EstimatedKernel est =
      project_to_feasible(shell, {theta_tilde}, std::move(gram), std::move(gamma), 2);

  CHECK(est.phat[0].at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.phat[0].at(0, 0, 1) == doctest::Approx(0.0));
  CHECK(est.feasibility.displacement[0].at(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(est.phat[0].at(1, 0, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(est.feasibility.displacement[0].at(1, 0) == doctest::Approx(0.0));
  CHECK(est.feasibility.all_ok());
  est.validate(2);
}

TEST_CASE("well-covered data passes the feasibility flags") {
  const PgapFixture f(340, 3, 2, 3, 50, 10000);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 10, 1);
  const EstimatedKernel est = build_estimated_kernel(f.mdp, f.data, c, f.features.dim_r);
  CHECK(est.feasibility.all_ok());
  est.validate(f.features.dim_r);
}

TEST_CASE("pessimistic backup: saturation, exactness, monotonicity in Gamma") {
  Grid2 r(2, 2), pv(2, 2), gamma(2, 2);
  for (int i = 0; i < 4; ++i) {
    r.v[i] = 0.5 + 0.1 * i;
    pv.v[i] = 1.0 - 0.2 * i;
    gamma.v[i] = 10.0;
  }
  const Grid2 smothered = pessimistic_backup(r, pv, gamma);
  for (double q : smothered.v) CHECK(q == 0.0);

  Grid2 zero_gamma(2, 2, 0.0);
  const Grid2 exact = pessimistic_backup(r, pv, zero_gamma);
  for (int i = 0; i < 4; ++i) CHECK(exact.v[i] == doctest::Approx(r.v[i] + pv.v[i]));

  Grid2 bumped = zero_gamma;
  bumped.at(0, 1) = 0.4;
  const Grid2 lower = pessimistic_backup(r, pv, bumped);
  for (int i = 0; i < 4; ++i) CHECK(lower.v[i] <= exact.v[i] + 1e-15);
}

TEST_CASE("value gradient: zero tables and the h=1 base case") {
  const PgapFixture f(350);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 10, 2);
  c.kappa_scale = 1e6;  // saturate Gamma so Qhat == 0 everywhere
  const EstimatedKernel est = build_estimated_kernel(f.mdp, f.data, c, f.features.dim_r);
  const Policy pi = random_policy(f.mdp.horizon, f.mdp.num_states, f.mdp.num_actions, 3);
  std::vector<Eigen::VectorXd> mu(f.mdp.horizon,
                                  Eigen::VectorXd::Zero(f.features.dim_r));
  for (int h = 0; h < f.mdp.horizon; ++h)
    CHECK(pgap_value_gradient(est, pi, f.features, mu, h, f.mdp.init_state).norm() == 0.0);

  // Small kappa: base case collects psi over the first step's surviving gates.
  PgapConfig c2 = PgapConfig::with_defaults(f.mdp, f.features, 10, 2);
  c2.kappa_scale = 0.05;
  const EstimatedKernel est2 = build_estimated_kernel(f.mdp, f.data, c2, f.features.dim_r);
  const RewardModel some = random_reward_model(f.features, f.mdp.horizon, 4, 0.8);
  const PessimisticValues values = evaluate_pessimistic(est2, f.features, some.mu, pi);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(f.features.dim_r);
  const int x = f.mdp.init_state;
  for (int a = 0; a < f.mdp.num_actions; ++a)
    if (values.qhat[0].at(x, a) > 0.0)
      expect += pi.p.at(0, x, a) * f.features.vec(x, a);
  const Eigen::VectorXd got = pgap_value_gradient(est2, pi, f.features, some.mu, 0, x);
  CHECK((got - expect).norm() <= 1e-12);
}

TEST_CASE("value gradient matches central finite differences away from kinks") {
  const PgapFixture f(360, 3, 2, 3, 50, 3000);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 10, 5);
  const EstimatedKernel est = build_estimated_kernel(f.mdp, f.data, c, f.features.dim_r);
  const Policy pi = random_policy(f.mdp.horizon, f.mdp.num_states, f.mdp.num_actions, 6);

  int checked = 0;
  Rng seed_gen(7);
  for (std::uint64_t trial = 0; checked < 25 && trial < 400; ++trial) {
    const RewardModel candidate =
        random_reward_model(f.features, f.mdp.horizon, seed_gen.next_u64(), 0.9);
    const PessimisticValues values =
        evaluate_pessimistic(est, f.features, candidate.mu, pi);
    // Kink margin: every pre-clip value must sit away from zero.
    double margin = std::numeric_limits<double>::infinity();
    for (int h = 0; h < f.mdp.horizon; ++h) {
      Grid2 r_table(f.mdp.num_states, f.mdp.num_actions);
      for (int s = 0; s < f.mdp.num_states; ++s)
        for (int a = 0; a < f.mdp.num_actions; ++a) {
          double pre = f.features.vec(s, a).dot(candidate.mu[h]) - est.gamma[h].at(s, a);
          for (int sp = 0; sp < f.mdp.num_states; ++sp)
            pre += est.phat[h].at(s, a, sp) * values.vhat.at(h + 1, sp);
          margin = std::min(margin, std::abs(pre));
        }
    }
    if (margin <= 1e-3) continue;
    ++checked;
    const auto grads =
        pgap_value_gradients(est, pi, f.features, values, f.mdp.init_state);
    for (int h = 0; h < f.mdp.horizon; ++h) {
      auto mu_copy = candidate.mu;
      const auto fn = [&](const Eigen::VectorXd& x) {
        auto shifted = mu_copy;
        shifted[h] = x;
        return evaluate_pessimistic(est, f.features, shifted, pi)
            .vhat.at(0, f.mdp.init_state);
      };
      CHECK(finite_diff_check(fn, grads[h], candidate.mu[h], 1e-5) <= 1e-5);
    }
  }
  CHECK(checked == 25);
}

TEST_CASE("offline reward gradient: matching terms and saturated Gamma") {
  const PgapFixture f(370);
  const auto mean = demo_mean_features(f.demos, f.features);
  CHECK(reward_grad_offline(mean[0], mean[0]).norm() == 0.0);

  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 10, 8);
  c.kappa_scale = 1e6;  // dead value branch: grad = psibar
  const EstimatedKernel est = build_estimated_kernel(f.mdp, f.data, c, f.features.dim_r);
  const Policy pi = Policy::uniform(f.mdp.horizon, f.mdp.num_states, f.mdp.num_actions);
  std::vector<Eigen::VectorXd> mu(f.mdp.horizon,
                                  Eigen::VectorXd::Zero(f.features.dim_r));
  const Eigen::VectorXd vg = pgap_value_gradient(est, pi, f.features, mu, 1, 0);
  CHECK((reward_grad_offline(mean[1], vg) - mean[1]).norm() == 0.0);
}

TEST_CASE("estimated objective is midpoint-concave in mu") {
  const PgapFixture f(380);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 10, 9);
  const EstimatedKernel est = build_estimated_kernel(f.mdp, f.data, c, f.features.dim_r);
  const auto mean = demo_mean_features(f.demos, f.features);
  const Policy pi = random_policy(f.mdp.horizon, f.mdp.num_states, f.mdp.num_actions, 10);
  Rng seeds(11);
  for (int trial = 0; trial < 100; ++trial) {
    const RewardModel m1 =
        random_reward_model(f.features, f.mdp.horizon, seeds.next_u64());
    const RewardModel m2 =
        random_reward_model(f.features, f.mdp.horizon, seeds.next_u64());
    std::vector<Eigen::VectorXd> mid(f.mdp.horizon);
    for (int h = 0; h < f.mdp.horizon; ++h) mid[h] = 0.5 * (m1.mu[h] + m2.mu[h]);
    const double left = lhat(f, est, mean, pi, m1.mu);
    const double right = lhat(f, est, mean, pi, m2.mu);
    const double center = lhat(f, est, mean, pi, mid);
    CHECK(center >= 0.5 * (left + right) - 1e-9);
  }
}

TEST_CASE("K=1 run outputs the single iterate; reruns are bit-identical") {
  const PgapFixture f(390);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 1, 12);
  const auto [mixed, log] = run_pgap(f.mdp, f.features, f.demos, f.data, c);
  CHECK(mixed.size() == 1);
  const RewardModel probe = random_reward_model(f.features, f.mdp.horizon, 13, 0.7);
  CHECK(evaluate_mixed_policy(f.mdp, probe, mixed) ==
        doctest::Approx(expected_return(f.mdp, probe, mixed.iterates[0])).epsilon(1e-12));

  PgapConfig c30 = PgapConfig::with_defaults(f.mdp, f.features, 30, 12);
  const auto [mixed_a, log_a] = run_pgap(f.mdp, f.features, f.demos, f.data, c30);
  const auto [mixed_b, log_b] = run_pgap(f.mdp, f.features, f.demos, f.data, c30);
  for (int k = 0; k < 30; ++k) {
    CHECK(mixed_a.iterates[k].p.v == mixed_b.iterates[k].p.v);
    for (int h = 0; h < f.mdp.horizon; ++h) {
      CHECK(log_a.mu[k][h] == log_b.mu[k][h]);
      CHECK(log_a.iota[k][h].v == log_b.iota[k][h].v);
    }
  }
}

TEST_CASE("Qhat range and pessimism sandwich on a nonnegative-reward run") {
  const PgapFixture f(400, 3, 2, 3, 200, 4000, true);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 150, 14);
  c.kappa_scale = 2.0;
  c.nonnegative_rewards = true;
  const auto [mixed, log] = run_pgap(f.mdp, f.features, f.demos, f.data, c);
  REQUIRE(log.kernel.feasibility.all_ok());
  const double radius = f.features.radius();
  for (int k = 0; k < c.iterations; ++k)
    for (int h = 0; h < f.mdp.horizon; ++h) {
      const double cap = (f.mdp.horizon - h) * radius;
      for (double q : log.qhat[k][h].v) {
        CHECK(q >= 0.0);
        CHECK(q <= cap + 1e-12);
      }
      for (std::size_t i = 0; i < log.iota[k][h].v.size(); ++i) {
        CHECK(log.iota[k][h].v[i] >= -1e-8);
        CHECK(log.iota[k][h].v[i] <= 2.0 * log.kernel.gamma[h].v[i] + 1e-8);
      }
    }
}

TEST_CASE("Gamma is pointwise antitone under dataset inclusion at fixed kappa") {
  const PgapFixture f(410, 3, 2, 2, 50, 800);
  const double kappa = 4.0;
  AdditionalSet half;
  half.trajectories.assign(f.data.trajectories.begin(), f.data.trajectories.begin() + 400);
  for (int h = 0; h < f.mdp.horizon; ++h) {
    const auto [th_half, gram_half] = fit_transition_offline(f.mdp, half, h, 1.0);
    const auto [th_full, gram_full] = fit_transition_offline(f.mdp, f.data, h, 1.0);
    const Grid2 g_half =
        uncertainty_quantifier(f.mdp, gram_half, kappa, f.mdp.horizon, f.features.dim_r);
    const Grid2 g_full =
        uncertainty_quantifier(f.mdp, gram_full, kappa, f.mdp.horizon, f.features.dim_r);
    for (std::size_t i = 0; i < g_half.v.size(); ++i)
      CHECK(g_full.v[i] <= g_half.v[i] + 1e-10);
  }
  // Intrinsic uncertainty inherits the antitonicity.
  const double kappa2 = 4.0;
  std::vector<Grid2> gh, gf;
  for (int h = 0; h < f.mdp.horizon; ++h) {
    gh.push_back(uncertainty_quantifier(
        f.mdp, fit_transition_offline(f.mdp, half, h, 1.0).second, kappa2,
        f.mdp.horizon, f.features.dim_r));
    gf.push_back(uncertainty_quantifier(
        f.mdp, fit_transition_offline(f.mdp, f.data, h, 1.0).second, kappa2,
        f.mdp.horizon, f.features.dim_r));
  }
  CHECK(intrinsic_uncertainty(f.mdp, f.expert, gf) <=
        intrinsic_uncertainty(f.mdp, f.expert, gh) + 1e-10);
}

TEST_CASE("mixed-policy identity: gap equals the averaged regret supremum") {
  const PgapFixture f(420);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 40, 15);
  const auto [mixed, log] = run_pgap(f.mdp, f.features, f.demos, f.data, c);
  const GapReport gap = optimality_gap(f.mdp, f.expert, mixed, f.features);
  const RegretReport reg =
      worst_case_regret(f.mdp, f.expert, mixed.iterates, f.features);
  CHECK(gap.gap == doctest::Approx(reg.final_regret() / mixed.size()).epsilon(1e-9));
}

TEST_CASE("mixed-policy evaluation matches a sampling oracle") {
  const PgapFixture f(430);
  PgapConfig c = PgapConfig::with_defaults(f.mdp, f.features, 20, 16);
  const auto [mixed, log] = run_pgap(f.mdp, f.features, f.demos, f.data, c);
  const RewardModel probe = random_reward_model(f.features, f.mdp.horizon, 17, 0.8);
  const double exact = evaluate_mixed_policy(f.mdp, probe, mixed);
  const TransitionTables trans = transition_tables(f.mdp);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(18, i));
    const Policy& pi = mixed.iterates[rng.uniform_int(mixed.size())];
    const Trajectory traj = rollout(trans, f.mdp.init_state, pi, rng);
    double ret = 0.0;
    for (int h = 0; h < f.mdp.horizon; ++h)
      ret += probe.reward(h, traj.states[h], traj.actions[h]);
    sum += ret;
    sum_sq += ret * ret;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 4 * se + 1e-9);
}

}  // TEST_SUITE

TEST_SUITE("pgap") {

TEST_CASE("run is equivariant under orthogonal feature rotations") {
  const LinearKernelMdp tab = random_tabular_mdp(3, 2, 3, 710);
  const RewardFeatures tab_feat = tabular_reward_features(3, 2);
  const auto [rot, rot_feat] = rotated_copy(tab, 711);
  const RewardModel truth = random_reward_model(tab_feat, 3, 712);
  const Policy expert = optimal_policy(tab, truth);
  const DemoSet demos = generate_demos(tab, expert, 100, 713);
  const AdditionalSet data =
      generate_additional(tab, Behavior::fixed(expert, "expert"), 800, 714);

  PgapConfig c = PgapConfig::with_defaults(tab, tab_feat, 40, 715);
  c.kappa_scale = 0.1;
  const auto [mixed_a, a] = run_pgap(tab, tab_feat, demos, data, c);
  const auto [mixed_b, b] = run_pgap(rot, rot_feat, demos, data, c);

  // The estimated kernel rows agree, so do values and policies.
  for (int h = 0; h < 3; ++h)
    for (std::size_t i = 0; i < a.kernel.phat[h].v.size(); ++i)
      CHECK(a.kernel.phat[h].v[i] ==
            doctest::Approx(b.kernel.phat[h].v[i]).epsilon(1e-8));
  for (int k = 0; k < 40; ++k) {
    CHECK(a.jhat[k] == doctest::Approx(b.jhat[k]).epsilon(1e-6));
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < 3; ++s)
        for (int act = 0; act < 2; ++act)
          CHECK(mixed_a.iterates[k].p.at(h, s, act) ==
                doctest::Approx(mixed_b.iterates[k].p.at(h, s, act)).epsilon(1e-6));
  }
}

}  // TEST_SUITE

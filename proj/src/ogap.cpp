#include "gaillin/ogap.hpp"

#include <cmath>
#include <stdexcept>

#include "gaillin/kernels.hpp"

namespace gaillin {

OgapConfig OgapConfig::with_defaults(const LinearKernelMdp& mdp,
                                     const RewardFeatures& features, int episodes,
                                     std::uint64_t seed) {
  OgapConfig c;
  c.episodes = episodes;
  c.seed = seed;
  const double h2 = static_cast<double>(mdp.horizon) * mdp.horizon;
  c.alpha = std::sqrt(2.0 * std::log(static_cast<double>(mdp.num_actions)) /
                      (h2 * std::sqrt(static_cast<double>(features.dim_r)) * episodes));
  c.eta = 1.0 / std::sqrt(static_cast<double>(mdp.horizon) * episodes);
  c.lambda = 1.0;
  return c;
}

double OgapConfig::kappa(int dim_p, int horizon) const {
  const double d = static_cast<double>(dim_p);
  return kappa_scale * std::sqrt(d * std::log(horizon * d * episodes / xi));
}

void OgapConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("ogap config: episodes >= 1 required");
  if (!(alpha >= 0.0) || !(eta >= 0.0) || !(lambda > 0.0) || !(kappa_scale >= 0.0) ||
      !(xi > 0.0) || !(xi < 1.0))
    throw std::invalid_argument("ogap config: invalid hyperparameter");
}

std::vector<Eigen::VectorXd> value_features(const LinearKernelMdp& mdp,
                                            std::span<const double> v_next) {
  std::vector<Eigen::VectorXd> feats(
      static_cast<std::size_t>(mdp.num_states) * mdp.num_actions);
  const long work = static_cast<long>(mdp.num_states) * mdp.num_actions *
                    mdp.num_states * mdp.dim_p;
#pragma omp parallel for collapse(2) schedule(static) if (work >= kOmpGrain)
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a)
      feats[static_cast<std::size_t>(s) * mdp.num_actions + a] =
          mdp.phi_dot_value(s, a, v_next);
  return feats;
}

Eigen::VectorXd fit_transition_online(const LinearKernelMdp& mdp,
                                      std::span<const Trajectory> history,
                                      std::span<const Grid2> vhat_history, int h,
                                      double lambda) {
  RidgeAccumulator acc(mdp.dim_p, lambda);
  for (std::size_t tau = 0; tau < history.size(); ++tau) {
    const Trajectory& traj = history[tau];
    const Grid2& vhat = vhat_history[tau];
    const Eigen::VectorXd u =
        mdp.phi_dot_value(traj.states[h], traj.actions[h], vhat.row(h + 1));
    acc.update(u, vhat.at(h + 1, traj.states[h + 1]));
  }
  return acc.solution();
}

Grid2 bonus_online(const RidgeAccumulator& ridge,
                   const std::vector<Eigen::VectorXd>& value_feats, double kappa,
                   int horizon, int dim_r, int num_states, int num_actions) {
  Grid2 gamma(num_states, num_actions);
  const double scale = horizon * std::sqrt(static_cast<double>(dim_r));
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) {
      const auto& u = value_feats[static_cast<std::size_t>(s) * num_actions + a];
      gamma.at(s, a) = scale * std::min(kappa * ridge.mahalanobis(u), 1.0);
    }
  return gamma;
}

Grid2 optimistic_backup(const Grid2& r, const Grid2& phat_v, const Grid2& gamma, int h,
                        int horizon, int dim_r) {
  Grid2 q(r.n0, r.n1);
  const double cap = (horizon - h) * std::sqrt(static_cast<double>(dim_r));
  for (std::size_t i = 0; i < q.v.size(); ++i)
    q.v[i] = std::clamp(r.v[i] + phat_v.v[i] + gamma.v[i], 0.0, cap);
  return q;
}

Eigen::VectorXd reward_grad_online(const Eigen::VectorXd& demo_mean_psi_h,
                                   const Eigen::VectorXd& psi_visited) {
  return demo_mean_psi_h - psi_visited;
}

Eigen::VectorXd reward_update(const Eigen::VectorXd& mu_h, const Eigen::VectorXd& grad_h,
                              double eta, double radius, bool nonnegative) {
  const Eigen::VectorXd stepped = mu_h + eta * grad_h;
  return nonnegative ? project_ball_nonneg(stepped, radius) : project_ball(stepped, radius);
}

OgapRunLog run_ogap(const LinearKernelMdp& mdp, const RewardFeatures& features,
                    const DemoSet& demos, const OgapConfig& config) {
  config.validate();
  if (features.num_states != mdp.num_states || features.num_actions != mdp.num_actions)
    throw std::invalid_argument("run_ogap: reward feature dimensions mismatch");
  if (demos.horizon() != mdp.horizon)
    throw std::invalid_argument("run_ogap: demo horizon mismatch");

  const int horizon = mdp.horizon, s_n = mdp.num_states, a_n = mdp.num_actions;
  const int big_k = config.episodes;
  const double radius = features.radius();
  const double kappa = config.kappa(mdp.dim_p, horizon);
  const TransitionTables trans = transition_tables(mdp);

  OgapRunLog log;
  log.config = config;
  log.horizon = horizon;
  log.num_states = s_n;
  log.num_actions = a_n;
  log.dim_p = mdp.dim_p;
  log.dim_r = features.dim_r;
  log.demo_mean_psi = demo_mean_features(demos, features);
  log.policies.reserve(big_k);
  log.mu.reserve(big_k);
  log.trajectories.reserve(big_k);
  log.qhat.reserve(big_k);
  log.vhat.reserve(big_k);
  log.gamma.reserve(big_k);
  log.iota_visited = Grid2(big_k, horizon);
  log.gamma_visited = Grid2(big_k, horizon);
  log.regressors.assign(horizon, {});
  for (auto& r : log.regressors) r.reserve(big_k);

  Policy policy = Policy::uniform(horizon, s_n, a_n);
  std::vector<Grid2> qhat_prev(horizon, Grid2(s_n, a_n));  // Qhat^0 = 0
  std::vector<Eigen::VectorXd> mu(horizon, Eigen::VectorXd::Zero(features.dim_r));
  std::vector<RidgeAccumulator> ridge(horizon, RidgeAccumulator(mdp.dim_p, config.lambda));
  Rng rng(config.seed);

  for (int k = 0; k < big_k; ++k) {
    // Policy improvement: pi^k from pi^{k-1} and Qhat^{k-1}.
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < s_n; ++s) {
        const auto row = mirror_descent_step(policy.row(h, s), qhat_prev[h].row(s),
                                             config.alpha);
        std::copy(row.begin(), row.end(), policy.row(h, s).begin());
      }

    const Trajectory traj = rollout(trans, mdp.init_state, policy, rng);

    // Backward optimistic evaluation under r^{mu^k}.
    std::vector<Grid2> qhat_k(horizon);
    std::vector<Grid2> gamma_k(horizon);
    Grid2 vhat_k(horizon + 1, s_n);
    std::vector<Eigen::VectorXd> visited_feats(horizon);
    for (int h = horizon - 1; h >= 0; --h) {
      const auto feats = value_features(mdp, vhat_k.row(h + 1));
      const Eigen::VectorXd theta_hat = ridge[h].solution();
      Grid2 r_table(s_n, a_n), pv(s_n, a_n);
      for (int s = 0; s < s_n; ++s)
        for (int a = 0; a < a_n; ++a) {
          r_table.at(s, a) = features.vec(s, a).dot(mu[h]);
          pv.at(s, a) = feats[static_cast<std::size_t>(s) * a_n + a].dot(theta_hat);
        }
      gamma_k[h] = bonus_online(ridge[h], feats, kappa, horizon, features.dim_r, s_n, a_n);
      qhat_k[h] = optimistic_backup(r_table, pv, gamma_k[h], h, horizon, features.dim_r);
      kernels::v_from_q(qhat_k[h], policy.p, h, vhat_k.row(h));
      visited_feats[h] = feats[static_cast<std::size_t>(traj.states[h]) * a_n +
                               traj.actions[h]];

      // Prediction error against the true kernel at the visited pair.
      const int vs = traj.states[h], va = traj.actions[h];
      double pv_true = 0.0;
      for (int sp = 0; sp < s_n; ++sp)
        pv_true += trans.p[h].at(vs, va, sp) * vhat_k.at(h + 1, sp);
      log.iota_visited.at(k, h) = r_table.at(vs, va) + pv_true - qhat_k[h].at(vs, va);
      log.gamma_visited.at(k, h) = gamma_k[h].at(vs, va);
    }

    for (const auto& g : qhat_k)
      for (double x : g.v)
        if (!std::isfinite(x))
          throw std::runtime_error("run_ogap: non-finite value at episode " +
                                   std::to_string(k + 1));

    if (config.record_full_iota) {
      std::vector<Grid2> iota_k(horizon, Grid2(s_n, a_n));
      for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < s_n; ++s)
          for (int a = 0; a < a_n; ++a) {
            double pv_true = 0.0;
            for (int sp = 0; sp < s_n; ++sp)
              pv_true += trans.p[h].at(s, a, sp) * vhat_k.at(h + 1, sp);
            iota_k[h].at(s, a) =
                features.vec(s, a).dot(mu[h]) + pv_true - qhat_k[h].at(s, a);
          }
      log.iota_full.push_back(std::move(iota_k));
    }

    // Append episode k's regressor per step: Lambda_h^{k+1} gains one term.
    for (int h = 0; h < horizon; ++h) {
      log.regressors[h].push_back(visited_feats[h]);
      ridge[h].update(visited_feats[h], vhat_k.at(h + 1, traj.states[h + 1]));
    }

    log.policies.push_back(policy);
    log.mu.push_back(mu);
    log.trajectories.push_back(traj);
    log.qhat.push_back(qhat_k);
    log.gamma.push_back(std::move(gamma_k));
    log.vhat.push_back(std::move(vhat_k));

    // Projected reward ascent.
    for (int h = 0; h < horizon; ++h) {
      const Eigen::VectorXd grad = reward_grad_online(
          log.demo_mean_psi[h],
          Eigen::VectorXd(features.vec(traj.states[h], traj.actions[h])));
      mu[h] = reward_update(mu[h], grad, config.eta, radius, config.nonnegative_rewards);
    }

    qhat_prev = log.qhat.back();
  }
  return log;
}

}  // namespace gaillin

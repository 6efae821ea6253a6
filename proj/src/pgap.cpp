#include "gaillin/pgap.hpp"

#include <cmath>
#include <stdexcept>

#include "gaillin/kernels.hpp"

namespace gaillin {

PgapConfig PgapConfig::with_defaults(const LinearKernelMdp& mdp,
                                     const RewardFeatures& features, int iterations,
                                     std::uint64_t seed) {
  PgapConfig c;
  c.iterations = iterations;
  c.seed = seed;
  const double h2 = static_cast<double>(mdp.horizon) * mdp.horizon;
  c.alpha = std::sqrt(2.0 * std::log(static_cast<double>(mdp.num_actions)) /
                      (h2 * std::sqrt(static_cast<double>(features.dim_r)) * iterations));
  c.eta = 1.0 / std::sqrt(static_cast<double>(mdp.horizon) * iterations);
  c.lambda = 1.0;
  return c;
}

double PgapConfig::kappa(int dim_p, int horizon, int n2, double regularity_r) const {
  const double d = static_cast<double>(dim_p);
  const double n = std::max(n2, 2);
  return kappa_scale * regularity_r * std::sqrt(d * std::log(horizon * d * n / xi));
}

void PgapConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("pgap config: iterations >= 1 required");
  if (!(alpha >= 0.0) || !(eta >= 0.0) || !(lambda > 0.0) || !(kappa_scale >= 0.0) ||
      !(xi > 0.0) || !(xi < 1.0))
    throw std::invalid_argument("pgap config: invalid hyperparameter");
}

void EstimatedKernel::validate(int dim_r) const {
  const double cap =
      horizon * std::sqrt(static_cast<double>(dim_r)) * num_states + kSimplexTol;
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (int sp = 0; sp < num_states; ++sp) {
          const double p = phat[h].at(s, a, sp);
          if (p < 0.0) throw std::invalid_argument("estimated kernel: negative row entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kSimplexTol)
          throw std::invalid_argument("estimated kernel: row does not sum to 1");
        const double g = gamma[h].at(s, a);
        if (g < 0.0 || g > cap)
          throw std::invalid_argument("estimated kernel: gamma out of range");
      }
  }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_transition_offline(
    const LinearKernelMdp& mdp, const AdditionalSet& data, int h, double lambda) {
  const int d = mdp.dim_p;
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);

  // Per-pair feature second moments, accumulated once per distinct pair.
  std::vector<int> counts(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions, 0);
  for (const auto& traj : data.trajectories) {
    const int s = traj.states[h], a = traj.actions[h];
    ++counts[static_cast<std::size_t>(s) * mdp.num_actions + a];
    rhs += mdp.phi_vec(s, a, traj.states[h + 1]);
  }
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) {
      const int c = counts[static_cast<std::size_t>(s) * mdp.num_actions + a];
      if (c == 0) continue;
      Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(d, d);
      for (int sp = 0; sp < mdp.num_states; ++sp) {
        const auto f = mdp.phi_vec(s, a, sp);
        moment.noalias() += f * f.transpose();
      }
      gram.noalias() += static_cast<double>(c) * moment;
    }
  const Eigen::VectorXd theta = gram.ldlt().solve(rhs);
  return {theta, gram};
}

Grid2 uncertainty_quantifier(const LinearKernelMdp& mdp, const Eigen::MatrixXd& gram_h,
                             double kappa, int horizon, int dim_r) {
  const Eigen::MatrixXd inv =
      gram_h.ldlt().solve(Eigen::MatrixXd::Identity(mdp.dim_p, mdp.dim_p));
  Grid2 gamma(mdp.num_states, mdp.num_actions);
  const double scale = horizon * std::sqrt(static_cast<double>(dim_r));
  for (int s = 0; s < mdp.num_states; ++s)
    for (int a = 0; a < mdp.num_actions; ++a) {
      double total = 0.0;
      for (int sp = 0; sp < mdp.num_states; ++sp) {
        const auto f = mdp.phi_vec(s, a, sp);
        const double quad = std::max(0.0, f.dot(inv * f));
        total += std::min(kappa * std::sqrt(quad), 1.0);
      }
      gamma.at(s, a) = scale * total;
    }
  return gamma;
}

EstimatedKernel project_to_feasible(const LinearKernelMdp& mdp,
                                    std::vector<Eigen::VectorXd> theta_tilde,
                                    std::vector<Eigen::MatrixXd> gram,
                                    std::vector<Grid2> gamma, int dim_r) {
  EstimatedKernel est;
  est.horizon = mdp.horizon;
  est.num_states = mdp.num_states;
  est.num_actions = mdp.num_actions;
  est.dim_p = mdp.dim_p;
  est.theta_tilde = std::move(theta_tilde);
  est.gram = std::move(gram);
  est.gamma = std::move(gamma);
  est.phat.assign(mdp.horizon, Grid3(mdp.num_states, mdp.num_actions, mdp.num_states));
  est.feasibility.displacement.assign(mdp.horizon, Grid2(mdp.num_states, mdp.num_actions));
  est.feasibility.flag_ok.assign(mdp.horizon,
                                 Grid2(mdp.num_states, mdp.num_actions, 1.0));

  const double hd = mdp.horizon * std::sqrt(static_cast<double>(dim_r));
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        Eigen::VectorXd row(mdp.num_states);
        for (int sp = 0; sp < mdp.num_states; ++sp)
          row[sp] = mdp.phi_vec(s, a, sp).dot(est.theta_tilde[h]);
        const Eigen::VectorXd projected = project_simplex(row);
        double delta = 0.0;
        for (int sp = 0; sp < mdp.num_states; ++sp) {
          est.phat[h].at(s, a, sp) = projected[sp];
          delta += std::abs(projected[sp] - row[sp]);
        }
        est.feasibility.displacement[h].at(s, a) = delta;
        // |PhatV - PtildeV| <= H sqrt(d_R) ||Phat - Ptilde||_1 / 2 for
        // V in [0, H sqrt(d_R)] after centering.
        if (hd * delta > 2.0 * est.gamma[h].at(s, a) + kSimplexTol) {
          est.feasibility.flag_ok[h].at(s, a) = 0.0;
          ++est.feasibility.violations;
        }
      }

    // Representation of the projected rows inside the feature span.
    const int rows = mdp.num_states * mdp.num_actions * mdp.num_states;
    Eigen::MatrixXd features(rows, mdp.dim_p);
    Eigen::VectorXd target(rows);
    int r = 0;
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a)
        for (int sp = 0; sp < mdp.num_states; ++sp, ++r) {
          features.row(r) = mdp.phi_vec(s, a, sp);
          target[r] = est.phat[h].at(s, a, sp);
        }
    est.theta_hat.push_back(features.colPivHouseholderQr().solve(target));
  }
  return est;
}

EstimatedKernel build_estimated_kernel(const LinearKernelMdp& mdp, const AdditionalSet& data,
                                       const PgapConfig& config, int dim_r) {
  const double kappa = config.kappa(mdp.dim_p, mdp.horizon, data.size(), mdp.regularity_r);
  std::vector<Eigen::VectorXd> theta(mdp.horizon);
  std::vector<Eigen::MatrixXd> gram(mdp.horizon);
  std::vector<Grid2> gamma(mdp.horizon);
#pragma omp parallel for schedule(dynamic, 1)
  for (int h = 0; h < mdp.horizon; ++h) {
    auto [th, gm] = fit_transition_offline(mdp, data, h, config.lambda);
    gamma[h] = uncertainty_quantifier(mdp, gm, kappa, mdp.horizon, dim_r);
    theta[h] = std::move(th);
    gram[h] = std::move(gm);
  }
  return project_to_feasible(mdp, std::move(theta), std::move(gram), std::move(gamma),
                             dim_r);
}

Grid2 pessimistic_backup(const Grid2& r, const Grid2& phat_v, const Grid2& gamma) {
  Grid2 q(r.n0, r.n1);
  for (std::size_t i = 0; i < q.v.size(); ++i)
    q.v[i] = std::max(r.v[i] + phat_v.v[i] - gamma.v[i], 0.0);
  return q;
}

PessimisticValues evaluate_pessimistic(const EstimatedKernel& est,
                                       const RewardFeatures& features,
                                       const std::vector<Eigen::VectorXd>& mu,
                                       const Policy& policy) {
  const int horizon = est.horizon, s_n = est.num_states, a_n = est.num_actions;
  PessimisticValues out;
  out.qhat.assign(horizon, Grid2(s_n, a_n));
  out.vhat = Grid2(horizon + 1, s_n);
  Grid2 r_table(s_n, a_n), pv(s_n, a_n);
  for (int h = horizon - 1; h >= 0; --h) {
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a) r_table.at(s, a) = features.vec(s, a).dot(mu[h]);
    kernels::backup_q(est.phat[h], r_table, out.vhat.row(h + 1), pv);
    for (std::size_t i = 0; i < pv.v.size(); ++i) pv.v[i] -= r_table.v[i];
    out.qhat[h] = pessimistic_backup(r_table, pv, est.gamma[h]);
    kernels::v_from_q(out.qhat[h], policy.p, h, out.vhat.row(h));
  }
  return out;
}

std::vector<Eigen::VectorXd> pgap_value_gradients(const EstimatedKernel& est,
                                                  const Policy& policy,
                                                  const RewardFeatures& features,
                                                  const PessimisticValues& values,
                                                  int init_state) {
  const int horizon = est.horizon, s_n = est.num_states, a_n = est.num_actions;
  std::vector<Eigen::VectorXd> grads(horizon, Eigen::VectorXd::Zero(features.dim_r));
  std::vector<double> mass(s_n, 0.0), next(s_n, 0.0);
  mass[init_state] = 1.0;
  for (int t = 0; t < horizon; ++t) {
    // Collect the gradient of mu_t through the reward gate at step t.
    for (int s = 0; s < s_n; ++s) {
      if (mass[s] == 0.0) continue;
      for (int a = 0; a < a_n; ++a) {
        if (values.qhat[t].at(s, a) > 0.0) {
          const double w = mass[s] * policy.p.at(t, s, a);
          if (w != 0.0) grads[t] += w * features.vec(s, a);
        }
      }
    }
    if (t + 1 == horizon) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < s_n; ++s) {
      if (mass[s] == 0.0) continue;
      for (int a = 0; a < a_n; ++a) {
        if (values.qhat[t].at(s, a) <= 0.0) continue;
        const double w = mass[s] * policy.p.at(t, s, a);
        if (w == 0.0) continue;
        for (int sp = 0; sp < s_n; ++sp) next[sp] += w * est.phat[t].at(s, a, sp);
      }
    }
    mass.swap(next);
  }
  return grads;
}

Eigen::VectorXd pgap_value_gradient(const EstimatedKernel& est, const Policy& policy,
                                    const RewardFeatures& features,
                                    const std::vector<Eigen::VectorXd>& mu, int h,
                                    int init_state) {
  const PessimisticValues values = evaluate_pessimistic(est, features, mu, policy);
  return pgap_value_gradients(est, policy, features, values, init_state)[h];
}

Eigen::VectorXd reward_grad_offline(const Eigen::VectorXd& demo_mean_psi_h,
                                    const Eigen::VectorXd& value_grad_h) {
  return demo_mean_psi_h - value_grad_h;
}

std::pair<MixedPolicy, PgapRunLog> run_pgap(const LinearKernelMdp& mdp,
                                            const RewardFeatures& features,
                                            const DemoSet& demos,
                                            const AdditionalSet& additional,
                                            const PgapConfig& config) {
  config.validate();
  if (features.num_states != mdp.num_states || features.num_actions != mdp.num_actions)
    throw std::invalid_argument("run_pgap: reward feature dimensions mismatch");
  if (demos.horizon() != mdp.horizon)
    throw std::invalid_argument("run_pgap: demo horizon mismatch");
  if (additional.size() > 0 && additional.horizon() != mdp.horizon)
    throw std::invalid_argument("run_pgap: additional dataset horizon mismatch");
  additional.validate(mdp.num_states, mdp.num_actions);

  const int horizon = mdp.horizon, s_n = mdp.num_states, a_n = mdp.num_actions;
  const int big_k = config.iterations;
  const double radius = features.radius();
  const TransitionTables trans = transition_tables(mdp);

  PgapRunLog log;
  log.config = config;
  log.horizon = horizon;
  log.num_states = s_n;
  log.num_actions = a_n;
  log.dim_p = mdp.dim_p;
  log.dim_r = features.dim_r;
  log.demo_mean_psi = demo_mean_features(demos, features);
  log.kernel = build_estimated_kernel(mdp, additional, config, features.dim_r);
  log.policies.reserve(big_k);
  log.mu.reserve(big_k);
  log.jhat.reserve(big_k);
  log.qhat.reserve(big_k);
  log.iota.reserve(big_k);

  Policy policy = Policy::uniform(horizon, s_n, a_n);
  std::vector<Grid2> qhat_prev(horizon, Grid2(s_n, a_n));
  std::vector<Eigen::VectorXd> mu(horizon, Eigen::VectorXd::Zero(features.dim_r));

  MixedPolicy mixed;
  mixed.iterates.reserve(big_k);

  for (int k = 0; k < big_k; ++k) {
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < s_n; ++s) {
        const auto row =
            mirror_descent_step(policy.row(h, s), qhat_prev[h].row(s), config.alpha);
        std::copy(row.begin(), row.end(), policy.row(h, s).begin());
      }

    const PessimisticValues values = evaluate_pessimistic(log.kernel, features, mu, policy);
    for (const auto& g : values.qhat)
      for (double x : g.v)
        if (!std::isfinite(x))
          throw std::runtime_error("run_pgap: non-finite value at iteration " +
                                   std::to_string(k + 1));

    // Prediction error against the true kernel.
    std::vector<Grid2> iota_k(horizon, Grid2(s_n, a_n));
    for (int h = 0; h < horizon; ++h)
      for (int s = 0; s < s_n; ++s)
        for (int a = 0; a < a_n; ++a) {
          double pv_true = 0.0;
          for (int sp = 0; sp < s_n; ++sp)
            pv_true += trans.p[h].at(s, a, sp) * values.vhat.at(h + 1, sp);
          iota_k[h].at(s, a) =
              features.vec(s, a).dot(mu[h]) + pv_true - values.qhat[h].at(s, a);
        }

    const std::vector<Eigen::VectorXd> value_grads =
        pgap_value_gradients(log.kernel, policy, features, values, mdp.init_state);

    log.policies.push_back(policy);
    log.mu.push_back(mu);
    log.jhat.push_back(values.vhat.at(0, mdp.init_state));
    log.qhat.push_back(values.qhat);
    log.iota.push_back(std::move(iota_k));
    mixed.iterates.push_back(policy);

    for (int h = 0; h < horizon; ++h) {
      const Eigen::VectorXd grad = reward_grad_offline(log.demo_mean_psi[h], value_grads[h]);
      const Eigen::VectorXd stepped = mu[h] + config.eta * grad;
      mu[h] = config.nonnegative_rewards ? project_ball_nonneg(stepped, radius)
                                         : project_ball(stepped, radius);
    }
    qhat_prev = values.qhat;
  }
  return {std::move(mixed), std::move(log)};
}

double evaluate_mixed_policy(const LinearKernelMdp& mdp, const RewardModel& reward,
                             const MixedPolicy& mixed) {
  if (mixed.size() < 1)
    throw std::invalid_argument("evaluate_mixed_policy: empty mixture");
  const TransitionTables trans = transition_tables(mdp);
  const int k = mixed.size();
  std::vector<double> values(k, 0.0);
#pragma omp parallel for schedule(static) if (k >= 64)
  for (int i = 0; i < k; ++i) {
    const ValueTables vt = policy_evaluation(trans, reward, mixed.iterates[i]);
    values[i] = vt.v.at(0, mdp.init_state);
  }
  double total = 0.0;
  for (double v : values) total += v;
  return total / k;
}

}  // namespace gaillin

#include "gaillin/eval.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "gaillin/datasets.hpp"

namespace gaillin {

namespace {

// E_{rho_h}[psi] for each h.
std::vector<Eigen::VectorXd> occupancy_features(const TransitionTables& trans,
                                                int init_state, const Policy& policy,
                                                const RewardFeatures& features) {
  const auto rho = occupancy_measures(trans, init_state, policy);
  std::vector<Eigen::VectorXd> out(trans.horizon, Eigen::VectorXd::Zero(features.dim_r));
  for (int h = 0; h < trans.horizon; ++h)
    for (int s = 0; s < trans.num_states; ++s)
      for (int a = 0; a < trans.num_actions; ++a) {
        const double w = rho[h].at(s, a);
        if (w != 0.0) out[h] += w * features.vec(s, a);
      }
  return out;
}

std::vector<Eigen::VectorXd> ball_argmax(const std::vector<Eigen::VectorXd>& delta,
                                         double radius) {
  std::vector<Eigen::VectorXd> mu_star;
  mu_star.reserve(delta.size());
  for (const auto& d : delta) {
    const double norm = d.norm();
    if (norm > 0.0)
      mu_star.push_back(d * (radius / norm));
    else
      mu_star.push_back(Eigen::VectorXd::Zero(d.size()));
  }
  return mu_star;
}

}  // namespace

RegretReport worst_case_regret(const LinearKernelMdp& mdp, const Policy& expert,
                               std::span<const Policy> iterates,
                               const RewardFeatures& features) {
  if (iterates.empty()) throw std::invalid_argument("worst_case_regret: no iterates");
  const TransitionTables trans = transition_tables(mdp);
  const auto expert_feat = occupancy_features(trans, mdp.init_state, expert, features);

  const int k_n = static_cast<int>(iterates.size());
  std::vector<std::vector<Eigen::VectorXd>> iter_feats(k_n);
#pragma omp parallel for schedule(static) if (k_n >= 64)
  for (int k = 0; k < k_n; ++k)
    iter_feats[k] = occupancy_features(trans, mdp.init_state, iterates[k], features);

  RegretReport report;
  report.cumulative.reserve(k_n);
  std::vector<Eigen::VectorXd> delta(mdp.horizon, Eigen::VectorXd::Zero(features.dim_r));
  const double radius = features.radius();
  for (int k = 0; k < k_n; ++k) {
    double total = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      delta[h] += expert_feat[h] - iter_feats[k][h];
      total += radius * delta[h].norm();
    }
    report.cumulative.push_back(total);
  }
  report.delta = delta;
  report.mu_star = ball_argmax(delta, radius);
  return report;
}

GapReport optimality_gap(const LinearKernelMdp& mdp, const Policy& expert,
                         const MixedPolicy& mixed, const RewardFeatures& features) {
  if (mixed.size() < 1) throw std::invalid_argument("optimality_gap: empty mixture");
  const TransitionTables trans = transition_tables(mdp);
  const auto expert_feat = occupancy_features(trans, mdp.init_state, expert, features);

  const int k_n = mixed.size();
  std::vector<std::vector<Eigen::VectorXd>> iter_feats(k_n);
#pragma omp parallel for schedule(static) if (k_n >= 64)
  for (int k = 0; k < k_n; ++k)
    iter_feats[k] =
        occupancy_features(trans, mdp.init_state, mixed.iterates[k], features);

  GapReport report;
  report.k = k_n;
  report.dim = features.dim_r;
  report.horizon = mdp.horizon;
  report.delta.assign(mdp.horizon, Eigen::VectorXd::Zero(features.dim_r));
  const double radius = features.radius();
  for (int h = 0; h < mdp.horizon; ++h) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(features.dim_r);
    for (int k = 0; k < k_n; ++k) mean += iter_feats[k][h];
    mean /= static_cast<double>(k_n);
    report.delta[h] = expert_feat[h] - mean;
    report.gap += radius * report.delta[h].norm();
  }
  report.mu_star = ball_argmax(report.delta, radius);
  return report;
}

double intrinsic_uncertainty(const LinearKernelMdp& mdp, const Policy& expert,
                             std::span<const Grid2> gamma) {
  const auto rho = occupancy_measures(mdp, expert);
  double total = 0.0;
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a)
        total += rho[h].at(s, a) * gamma[h].at(s, a);
  return 2.0 * total;
}

double mc_bound_check(const LinearKernelMdp& mdp, const Policy& expert,
                      const RewardFeatures& features, int dim_for_bound, int n1,
                      int trials, double xi, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("mc_bound_check: trials >= 1 required");
  const TransitionTables trans = transition_tables(mdp);
  const auto expert_feat = occupancy_features(trans, mdp.init_state, expert, features);
  const double h3 = std::pow(static_cast<double>(mdp.horizon), 3);
  const double d2 = std::pow(static_cast<double>(dim_for_bound), 2);
  const double bound = 4.0 * std::sqrt(h3 * d2 / n1) * std::log(6.0 * n1 / xi);
  const double radius = features.radius();

  std::vector<int> violated(trials, 0);
#pragma omp parallel for schedule(dynamic) if (trials >= 8)
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    std::vector<Eigen::VectorXd> mean(mdp.horizon, Eigen::VectorXd::Zero(features.dim_r));
    for (int tau = 0; tau < n1; ++tau) {
      Rng rng(derive_seed(trial_seed, static_cast<std::uint64_t>(tau)));
      const Trajectory traj = rollout(trans, mdp.init_state, expert, rng);
      for (int h = 0; h < mdp.horizon; ++h)
        mean[h] += features.vec(traj.states[h], traj.actions[h]);
    }
    double deviation = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      mean[h] /= static_cast<double>(n1);
      deviation += radius * (mean[h] - expert_feat[h]).norm();
    }
    violated[t] = deviation > bound ? 1 : 0;
  }
  int count = 0;
  for (int v : violated) count += v;
  return static_cast<double>(count) / trials;
}

SlopeFit slope_fit(std::span<const double> ks, std::span<const double> values) {
  if (ks.size() != values.size() || ks.size() < 4)
    throw std::invalid_argument("slope_fit: need at least 4 grid points");
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (values[i] > 0.0 && ks[i] > 0.0) {
      xs.push_back(std::log(ks[i]));
      ys.push_back(std::log(values[i]));
    } else {
      ++fit.excluded;
    }
  }
  if (fit.excluded > 0)
    std::cerr << "warning: slope_fit excluded " << fit.excluded
              << " nonpositive value(s)\n";
  fit.used = static_cast<int>(xs.size());
  if (fit.used < 2) throw std::invalid_argument("slope_fit: fewer than 2 usable points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.used; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= fit.used;
  my /= fit.used;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.used; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  return fit;
}

double finite_diff_check(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& analytic_grad, const Eigen::VectorXd& point,
                         double step) {
  double worst = 0.0;
  for (int i = 0; i < point.size(); ++i) {
    Eigen::VectorXd hi = point, lo = point;
    hi[i] += step;
    lo[i] -= step;
    const double fd = (f(hi) - f(lo)) / (2.0 * step);
    const double err = std::abs(fd - analytic_grad[i]) /
                       std::max(1.0, std::abs(analytic_grad[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

double extended_value_difference_gap(const LinearKernelMdp& mdp, const RewardModel& reward,
                                     std::span<const Grid2> qhat, const Policy& pi,
                                     const Policy& pi_prime) {
  const TransitionTables trans = transition_tables(mdp);
  const int horizon = mdp.horizon, s_n = mdp.num_states, a_n = mdp.num_actions;

  // Vhat_h(s) = <Qhat_h(s,.), pi_h(.|s)>, terminal row zero.
  Grid2 vhat(horizon + 1, s_n);
  for (int h = horizon - 1; h >= 0; --h)
    for (int s = 0; s < s_n; ++s) {
      double acc = 0.0;
      for (int a = 0; a < a_n; ++a) acc += qhat[h].at(s, a) * pi.p.at(h, s, a);
      vhat.at(h, s) = acc;
    }

  const ValueTables truth = policy_evaluation(trans, reward, pi_prime);
  const double lhs = vhat.at(0, mdp.init_state) - truth.v.at(0, mdp.init_state);

  const auto rho = occupancy_measures(trans, mdp.init_state, pi_prime);
  double advantage = 0.0, residual = 0.0;
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < s_n; ++s) {
      double state_mass = 0.0;
      for (int a = 0; a < a_n; ++a) state_mass += rho[h].at(s, a);
      if (state_mass != 0.0) {
        double adv = 0.0;
        for (int a = 0; a < a_n; ++a)
          adv += qhat[h].at(s, a) * (pi.p.at(h, s, a) - pi_prime.p.at(h, s, a));
        advantage += state_mass * adv;
      }
      for (int a = 0; a < a_n; ++a) {
        const double w = rho[h].at(s, a);
        if (w == 0.0) continue;
        double pv = 0.0;
        for (int sp = 0; sp < s_n; ++sp)
          pv += trans.p[h].at(s, a, sp) * vhat.at(h + 1, sp);
        residual += w * (qhat[h].at(s, a) - reward.reward(h, s, a) - pv);
      }
    }
  }
  return std::abs(lhs - (advantage + residual));
}

}  // namespace gaillin

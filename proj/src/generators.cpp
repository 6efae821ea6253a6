#include "gaillin/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace gaillin {

Grid3 random_kernel(int num_states, int num_actions, Rng& rng) {
  Grid3 p(num_states, num_actions, num_states);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double sum = 0.0;
      for (int sp = 0; sp < num_states; ++sp) {
        const double w = -std::log(1.0 - rng.uniform());
        p.at(s, a, sp) = w;
        sum += w;
      }
      for (int sp = 0; sp < num_states; ++sp) p.at(s, a, sp) /= sum;
    }
  }
  return p;
}

std::optional<Eigen::VectorXd> fit_theta_least_squares(const LinearKernelMdp& shell,
                                                       const Grid3& kernel) {
  const int rows = shell.num_states * shell.num_actions * shell.num_states;
  Eigen::MatrixXd features(rows, shell.dim_p);
  Eigen::VectorXd target(rows);
  int r = 0;
  for (int s = 0; s < shell.num_states; ++s)
    for (int a = 0; a < shell.num_actions; ++a)
      for (int sp = 0; sp < shell.num_states; ++sp, ++r) {
        features.row(r) = shell.phi_vec(s, a, sp);
        target[r] = kernel.at(s, a, sp);
      }
  Eigen::VectorXd theta = features.colPivHouseholderQr().solve(target);
  if ((features * theta - target).cwiseAbs().maxCoeff() > 1e-8) return std::nullopt;
  return theta;
}

LinearKernelMdp random_tabular_mdp(int num_states, int num_actions, int horizon,
                                   std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Grid3> kernels;
  kernels.reserve(horizon);
  for (int h = 0; h < horizon; ++h) kernels.push_back(random_kernel(num_states, num_actions, rng));
  return make_tabular_mdp(num_states, num_actions, horizon, 0, kernels);
}

namespace {

Eigen::MatrixXd random_orthogonal(int dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Fix signs so the factorization is unique given the draw.
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

LinearKernelMdp random_rotated_mdp(int num_states, int num_actions, int horizon,
                                   std::uint64_t seed) {
  Rng rng(seed);
  LinearKernelMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.horizon = horizon;
  mdp.init_state = 0;
  mdp.dim_p = num_states * num_states * num_actions;
  mdp.regularity_r = 1.0;

  const Eigen::MatrixXd q = random_orthogonal(mdp.dim_p, rng);
  mdp.phi.resize(static_cast<std::size_t>(mdp.dim_p) * mdp.dim_p);
  for (int t = 0; t < mdp.dim_p; ++t)
    for (int i = 0; i < mdp.dim_p; ++i)
      mdp.phi[static_cast<std::size_t>(t) * mdp.dim_p + i] = q(i, t);

  mdp.theta.reserve(horizon);
  for (int h = 0; h < horizon; ++h) {
    for (;;) {
      const Grid3 kernel = random_kernel(num_states, num_actions, rng);
      if (auto theta = fit_theta_least_squares(mdp, kernel)) {
        mdp.theta.push_back(std::move(*theta));
        break;
      }
    }
  }
  mdp.validate();
  return mdp;
}

RewardFeatures rotated_reward_features(int num_states, int num_actions, Rng& rng) {
  RewardFeatures f;
  f.num_states = num_states;
  f.num_actions = num_actions;
  f.dim_r = num_states * num_actions;
  const Eigen::MatrixXd q = random_orthogonal(f.dim_r, rng);
  f.psi.resize(static_cast<std::size_t>(f.dim_r) * f.dim_r);
  for (int t = 0; t < f.dim_r; ++t)
    for (int i = 0; i < f.dim_r; ++i)
      f.psi[static_cast<std::size_t>(t) * f.dim_r + i] = q(i, t);
  return f;
}

std::pair<LinearKernelMdp, RewardFeatures> rotated_copy(const LinearKernelMdp& tabular_mdp,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  const int s_n = tabular_mdp.num_states, a_n = tabular_mdp.num_actions;
  if (tabular_mdp.dim_p != s_n * s_n * a_n)
    throw std::invalid_argument("rotated_copy: expects the tabular embedding");

  LinearKernelMdp mdp;
  mdp.num_states = s_n;
  mdp.num_actions = a_n;
  mdp.horizon = tabular_mdp.horizon;
  mdp.init_state = tabular_mdp.init_state;
  mdp.dim_p = tabular_mdp.dim_p;
  mdp.regularity_r = 1.0;
  const Eigen::MatrixXd q = random_orthogonal(mdp.dim_p, rng);
  mdp.phi.resize(static_cast<std::size_t>(mdp.dim_p) * mdp.dim_p);
  for (int t = 0; t < mdp.dim_p; ++t)
    for (int i = 0; i < mdp.dim_p; ++i)
      mdp.phi[static_cast<std::size_t>(t) * mdp.dim_p + i] = q(i, t);
  for (const auto& th : tabular_mdp.theta) mdp.theta.push_back(q * th);
  mdp.validate();

  RewardFeatures features = rotated_reward_features(s_n, a_n, rng);
  return {std::move(mdp), std::move(features)};
}

RewardModel random_reward_model(const RewardFeatures& features, int horizon,
                                std::uint64_t seed, double scale, bool nonnegative) {
  Rng rng(seed);
  RewardModel model;
  model.psi = features;
  model.mu.reserve(horizon);
  const double radius = scale * features.radius();
  for (int h = 0; h < horizon; ++h) {
    Eigen::VectorXd dir(features.dim_r);
    for (int i = 0; i < features.dim_r; ++i) dir[i] = rng.gaussian();
    if (nonnegative) dir = dir.cwiseAbs();
    dir.normalize();
    const double u = rng.uniform();
    model.mu.push_back(dir * radius * std::pow(u, 1.0 / features.dim_r));
  }
  return model;
}

Policy random_policy(int horizon, int num_states, int num_actions, std::uint64_t seed) {
  Rng rng(seed);
  Policy pi;
  pi.horizon = horizon;
  pi.num_states = num_states;
  pi.num_actions = num_actions;
  pi.p = Grid3(horizon, num_states, num_actions);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a < num_actions; ++a) {
        const double w = -std::log(1.0 - rng.uniform());
        pi.p.at(h, s, a) = w;
        sum += w;
      }
      for (int a = 0; a < num_actions; ++a) pi.p.at(h, s, a) /= sum;
    }
  }
  return pi;
}

}  // namespace gaillin

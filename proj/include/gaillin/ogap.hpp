#pragma once

#include <cstdint>
#include <vector>

#include "gaillin/datasets.hpp"
#include "gaillin/mdp.hpp"
#include "gaillin/numerics.hpp"

namespace gaillin {

// Hyperparameters of the online run. Call with_defaults() to fill the step
// sizes and the bonus scale from the instance dimensions: alpha =
// sqrt(2 log|A| / (H^2 sqrt(d_R) K)), eta = 1/sqrt(HK), lambda = 1, kappa =
// kappa_scale * sqrt(d_P log(H d_P K / xi)). The value-range factors use the
// reward dimension d_R; the regression concentration uses d_P.
struct OgapConfig {
  int episodes = 0;  // K
  double alpha = 0.0;
  double eta = 0.0;
  double lambda = 1.0;
  double kappa_scale = 1.0;
  double xi = 0.1;
  std::uint64_t seed = 0;
  bool nonnegative_rewards = false;  // restrict mu to the ball's positive orthant
  bool record_full_iota = false;     // full prediction-error tensors (diagnostics)

  static OgapConfig with_defaults(const LinearKernelMdp& mdp, const RewardFeatures& features,
                                  int episodes, std::uint64_t seed);
  double kappa(int dim_p, int horizon) const;
  void validate() const;
};

// Everything recorded while the run executes; the substrate of the
// acceptance tests. Indexing is [episode][h] unless noted.
struct OgapRunLog {
  OgapConfig config;
  int horizon = 0, num_states = 0, num_actions = 0, dim_p = 0, dim_r = 0;

  std::vector<Eigen::VectorXd> demo_mean_psi;  // psibar_h

  std::vector<Policy> policies;                     // pi^k
  std::vector<std::vector<Eigen::VectorXd>> mu;     // mu^k (used in episode k)
  std::vector<Trajectory> trajectories;             // rollout of pi^k
  std::vector<std::vector<Grid2>> qhat;             // Qhat^k_h(s,a)
  std::vector<Grid2> vhat;                          // Vhat^k, (H+1) x S
  std::vector<std::vector<Grid2>> gamma;            // bonus tables
  Grid2 iota_visited;                               // K x H, at (s^k_h, a^k_h), true kernel
  Grid2 gamma_visited;                              // K x H
  std::vector<std::vector<Grid2>> iota_full;        // only with record_full_iota
  std::vector<std::vector<Eigen::VectorXd>> regressors;  // [h][k], audit material
};

// phibar(s,a) = sum_{s'} phi(s,a,s') v_next(s') for every pair.
std::vector<Eigen::VectorXd> value_features(const LinearKernelMdp& mdp,
                                            std::span<const double> v_next);

// Ridge fit of the value-targeted regression over a prefix of episodes:
// regressors phibar_h^tau at the visited pair of episode tau, targets
// Vhat^tau_{h+1}(s^tau_{h+1}). Rebuilds from scratch; the run itself keeps
// incremental accumulators that tests compare against this.
Eigen::VectorXd fit_transition_online(const LinearKernelMdp& mdp,
                                      std::span<const Trajectory> history,
                                      std::span<const Grid2> vhat_history, int h,
                                      double lambda);

// Gamma(s,a) = H sqrt(d_R) min{kappa ||phibar(s,a)||_{Lambda^{-1}}, 1}.
Grid2 bonus_online(const RidgeAccumulator& ridge,
                   const std::vector<Eigen::VectorXd>& value_feats, double kappa,
                   int horizon, int dim_r, int num_states, int num_actions);

// Qhat = clip(r + PhatV + Gamma, 0, (H-h+1) sqrt(d_R)).
Grid2 optimistic_backup(const Grid2& r, const Grid2& phat_v, const Grid2& gamma, int h,
                        int horizon, int dim_r);

// psibar_h - psi(s^k_h, a^k_h); norm is at most 2.
Eigen::VectorXd reward_grad_online(const Eigen::VectorXd& demo_mean_psi_h,
                                   const Eigen::VectorXd& psi_visited);

// Projected gradient ascent step on one mu_h.
Eigen::VectorXd reward_update(const Eigen::VectorXd& mu_h, const Eigen::VectorXd& grad_h,
                              double eta, double radius, bool nonnegative);

OgapRunLog run_ogap(const LinearKernelMdp& mdp, const RewardFeatures& features,
                    const DemoSet& demos, const OgapConfig& config);

}  // namespace gaillin

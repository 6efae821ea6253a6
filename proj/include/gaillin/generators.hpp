#pragma once

#include <cstdint>
#include <optional>

#include "gaillin/mdp.hpp"

namespace gaillin {

// Random row-stochastic kernel: each row is a normalized vector of
// exponential draws (flat Dirichlet).
Grid3 random_kernel(int num_states, int num_actions, Rng& rng);

// Least-squares fit of theta onto the span of phi for a target kernel;
// returns nullopt when the max residual exceeds 1e-8.
std::optional<Eigen::VectorXd> fit_theta_least_squares(const LinearKernelMdp& shell,
                                                       const Grid3& kernel);

// Tabular instance with random kernels (canonical one-hot features).
LinearKernelMdp random_tabular_mdp(int num_states, int num_actions, int horizon,
                                   std::uint64_t seed);

// Dense-feature instance: the canonical basis rotated by a random orthogonal
// map, with theta_h fitted by least squares onto the feature span (draws are
// rejected when the fit residual exceeds 1e-8). Exercises the non-one-hot
// code paths while keeping R = 1.
LinearKernelMdp random_rotated_mdp(int num_states, int num_actions, int horizon,
                                   std::uint64_t seed);

RewardFeatures rotated_reward_features(int num_states, int num_actions, Rng& rng);

// Orthogonally rotated copy of a tabular instance: identical kernels and
// rewards expressed in a dense feature basis. Every algorithmic quantity is
// invariant under the rotation, which makes this the reference workload for
// the non-one-hot code paths.
std::pair<LinearKernelMdp, RewardFeatures> rotated_copy(const LinearKernelMdp& tabular_mdp,
                                                        std::uint64_t seed);

// mu_h drawn uniformly from the ball of radius scale*sqrt(d_R); with
// nonnegative set, entries are reflected into the positive orthant first
// (the restricted reward convention).
RewardModel random_reward_model(const RewardFeatures& features, int horizon,
                                std::uint64_t seed, double scale = 1.0,
                                bool nonnegative = false);

Policy random_policy(int horizon, int num_states, int num_actions, std::uint64_t seed);

}  // namespace gaillin

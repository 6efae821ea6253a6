#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gaillin/datasets.hpp"
#include "gaillin/mdp.hpp"
#include "gaillin/numerics.hpp"

namespace gaillin {

// Offline hyperparameters. kappa = kappa_scale * R * sqrt(d_P log(H d_P N2 / xi)).
struct PgapConfig {
  int iterations = 0;  // K
  double alpha = 0.0;
  double eta = 0.0;
  double lambda = 1.0;
  double kappa_scale = 1.0;
  double xi = 0.1;
  std::uint64_t seed = 0;
  bool nonnegative_rewards = false;

  static PgapConfig with_defaults(const LinearKernelMdp& mdp, const RewardFeatures& features,
                                  int iterations, std::uint64_t seed);
  double kappa(int dim_p, int horizon, int n2, double regularity_r) const;
  void validate() const;
};

// Per-row outcome of the feasibility projection: the ell-1 displacement of
// each kernel row and whether the sufficient condition
// H sqrt(d_R) * delta(s,a) <= 2 Gamma_h(s,a) held. Violations are reported,
// never fatal.
struct FeasibilityReport {
  std::vector<Grid2> displacement;  // per h
  std::vector<Grid2> flag_ok;       // per h, 1.0 pass / 0.0 fail
  int violations = 0;
  bool all_ok() const { return violations == 0; }
};

// The one-shot offline construction: ridge estimate, uncertainty
// quantifiers, and the simplex-projected kernel rows (the rows are the
// authoritative kernel; theta_hat is their least-squares representation in
// the feature span).
struct EstimatedKernel {
  int horizon = 0, num_states = 0, num_actions = 0, dim_p = 0;
  std::vector<Eigen::VectorXd> theta_tilde;  // pre-projection ridge solutions
  std::vector<Eigen::VectorXd> theta_hat;
  std::vector<Grid3> phat;    // projected rows, per h
  std::vector<Grid2> gamma;   // uncertainty quantifiers, per h
  std::vector<Eigen::MatrixXd> gram;  // Lambda_h
  FeasibilityReport feasibility;

  void validate(int dim_r) const;
};

// theta_tilde_h and Lambda_h of the offline ridge regression on D^A.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> fit_transition_offline(
    const LinearKernelMdp& mdp, const AdditionalSet& data, int h, double lambda);

// Gamma_h(s,a) = H sqrt(d_R) sum_{s'} min{kappa ||phi(s,a,s')||_{Lambda^{-1}}, 1}.
Grid2 uncertainty_quantifier(const LinearKernelMdp& mdp, const Eigen::MatrixXd& gram_h,
                             double kappa, int horizon, int dim_r);

// Row-wise Euclidean simplex projection plus the feasibility report.
EstimatedKernel project_to_feasible(const LinearKernelMdp& mdp,
                                    std::vector<Eigen::VectorXd> theta_tilde,
                                    std::vector<Eigen::MatrixXd> gram,
                                    std::vector<Grid2> gamma, int dim_r);

// Full initial construction (parallel across h).
EstimatedKernel build_estimated_kernel(const LinearKernelMdp& mdp, const AdditionalSet& data,
                                       const PgapConfig& config, int dim_r);

// Qhat = max{r + PhatV - Gamma, 0}.
Grid2 pessimistic_backup(const Grid2& r, const Grid2& phat_v, const Grid2& gamma);

// Pessimistic evaluation of one policy under reward parameter mu.
struct PessimisticValues {
  std::vector<Grid2> qhat;  // per h
  Grid2 vhat;               // (H+1) x S
};
PessimisticValues evaluate_pessimistic(const EstimatedKernel& est,
                                       const RewardFeatures& features,
                                       const std::vector<Eigen::VectorXd>& mu,
                                       const Policy& policy);

// Gradient of Vhat_1^{k,r^mu}(x) with respect to mu_h via the gated forward
// recursion; subgradient 1{Qhat > 0} at the kinks.
Eigen::VectorXd pgap_value_gradient(const EstimatedKernel& est, const Policy& policy,
                                    const RewardFeatures& features,
                                    const std::vector<Eigen::VectorXd>& mu, int h,
                                    int init_state);

// All H gradients from one forward pass over precomputed tables.
std::vector<Eigen::VectorXd> pgap_value_gradients(const EstimatedKernel& est,
                                                  const Policy& policy,
                                                  const RewardFeatures& features,
                                                  const PessimisticValues& values,
                                                  int init_state);

// grad_h Lhat = psibar_h - grad_h Jhat.
Eigen::VectorXd reward_grad_offline(const Eigen::VectorXd& demo_mean_psi_h,
                                    const Eigen::VectorXd& value_grad_h);

struct MixedPolicy {
  std::vector<Policy> iterates;
  int size() const { return static_cast<int>(iterates.size()); }
};

struct PgapRunLog {
  PgapConfig config;
  int horizon = 0, num_states = 0, num_actions = 0, dim_p = 0, dim_r = 0;
  std::vector<Eigen::VectorXd> demo_mean_psi;
  EstimatedKernel kernel;

  std::vector<Policy> policies;                  // pi^k
  std::vector<std::vector<Eigen::VectorXd>> mu;  // mu^k
  std::vector<double> jhat;                      // Vhat_1^k(x)
  std::vector<std::vector<Grid2>> qhat;          // per k per h
  std::vector<std::vector<Grid2>> iota;          // vs the true kernel, per k per h
};

std::pair<MixedPolicy, PgapRunLog> run_pgap(const LinearKernelMdp& mdp,
                                            const RewardFeatures& features,
                                            const DemoSet& demos,
                                            const AdditionalSet& additional,
                                            const PgapConfig& config);

// K^{-1} sum_k J(pi^k, r) by exact evaluation.
double evaluate_mixed_policy(const LinearKernelMdp& mdp, const RewardModel& reward,
                             const MixedPolicy& mixed);

}  // namespace gaillin

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gaillin/mdp.hpp"
#include "gaillin/pgap.hpp"

namespace gaillin {

// The supremum over the product-of-balls reward set factorizes per step:
// sup_mu sum_h <Delta_h, mu_h> = sqrt(d_R) sum_h ||Delta_h||_2, attained at
// mu*_h = sqrt(d_R) Delta_h / ||Delta_h||. docs/ball_maximizer.md derives it.

struct RegretReport {
  std::vector<double> cumulative;          // Regret(k) for k = 1..K
  std::vector<Eigen::VectorXd> delta;      // final accumulated feature gaps, per h
  std::vector<Eigen::VectorXd> mu_star;    // achieving reward parameter
  double final_regret() const { return cumulative.back(); }
};

struct GapReport {
  double gap = 0.0;
  std::vector<Eigen::VectorXd> delta;
  std::vector<Eigen::VectorXd> mu_star;
  double intrinsic_uncertainty = 0.0;  // filled by callers that computed it
  int k = 0, n1 = 0, n2 = 0, dim = 0, horizon = 0;
};

// Exact worst-case regret of a sequence of iterates over the reward ball.
RegretReport worst_case_regret(const LinearKernelMdp& mdp, const Policy& expert,
                               std::span<const Policy> iterates,
                               const RewardFeatures& features);

// Same ball maximization applied to the uniform mixture of the iterates.
GapReport optimality_gap(const LinearKernelMdp& mdp, const Policy& expert,
                         const MixedPolicy& mixed, const RewardFeatures& features);

// 2 sum_h E_{pi^E}[Gamma_h(s_h, a_h)], exact under the expert occupancy.
double intrinsic_uncertainty(const LinearKernelMdp& mdp, const Policy& expert,
                             std::span<const Grid2> gamma);

// Repeatedly resamples a demo set and compares the closed-form supremum of
// |Jtilde - J| over the ball against 4 sqrt(H^3 d^2 / N1) log(6 N1 / xi).
// Returns the fraction of violating trials.
double mc_bound_check(const LinearKernelMdp& mdp, const Policy& expert,
                      const RewardFeatures& features, int dim_for_bound, int n1,
                      int trials, double xi, std::uint64_t seed);

struct SlopeFit {
  double slope = 0.0;
  int used = 0;
  int excluded = 0;  // nonpositive values dropped with a warning
};

// Least-squares slope of log(value) against log(k).
SlopeFit slope_fit(std::span<const double> ks, std::span<const double> values);

// Central finite differences of f against an analytic gradient; returns the
// max per-coordinate error relative to max(1, |grad_i|).
double finite_diff_check(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Eigen::VectorXd& analytic_grad, const Eigen::VectorXd& point,
                         double step);

// |lhs - rhs| of the extended value difference identity for arbitrary Qhat
// tables: Vhat_1(x) - V_1^{pi'}(x) against the occupancy-weighted advantage
// and Bellman-residual sums.
double extended_value_difference_gap(const LinearKernelMdp& mdp, const RewardModel& reward,
                                     std::span<const Grid2> qhat, const Policy& pi,
                                     const Policy& pi_prime);

}  // namespace gaillin

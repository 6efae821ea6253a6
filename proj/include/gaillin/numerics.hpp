#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace gaillin {

// Incremental ridge regression with a maintained inverse. The Gram matrix is
// Lambda = lambda*I + sum u u^T; the inverse is kept current by rank-one
// updates with symmetrization and re-solved from scratch whenever the
// identity residual ||Lambda * inv - I||_max drifts past 1e-8 (checked every
// check_interval updates).
class RidgeAccumulator {
 public:
  RidgeAccumulator(int dim, double lambda);

  void update(const Eigen::VectorXd& u, double y);

  Eigen::VectorXd solution() const { return gram_inv_ * rhs_; }

  // sqrt(v^T Lambda^{-1} v)
  double mahalanobis(const Eigen::VectorXd& v) const;

  // Quadratic form v^T Lambda^{-1} v (clamped at 0).
  double quad_form(const Eigen::VectorXd& v) const;

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  int count() const { return count_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& gram_inv() const { return gram_inv_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }

  double identity_residual() const;
  void refactor();

  int check_interval = 64;

 private:
  int dim_;
  double lambda_;
  int count_ = 0;
  Eigen::MatrixXd gram_, gram_inv_;
  Eigen::VectorXd rhs_;
};

// Euclidean projection onto the centered ball of the given radius.
Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius);

// Euclidean projection onto ball-of-radius intersected with the nonnegative
// orthant (positive part, then radial scaling; exact for this intersection).
Eigen::VectorXd project_ball_nonneg(const Eigen::VectorXd& v, double radius);

// Euclidean projection onto the probability simplex (sorted-threshold rule).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Multiplicative-weights step: row'(a) proportional to row(a)*exp(alpha*q(a)),
// computed in log space with max subtraction. Zero-probability actions stay
// zero. Throws if the input row has no mass.
std::vector<double> mirror_descent_step(std::span<const double> policy_row,
                                        std::span<const double> q_row, double alpha);

struct EllipticalAudit {
  double lhs = 0.0;  // sum_t min{1, u_t^T Lambda_t^{-1} u_t}
  double rhs = 0.0;  // 2 log(det Lambda_{T+1} / det Lambda_1)
  bool holds() const { return lhs <= rhs; }
};

// Replays the Gram recurrence Lambda_1 = lambda*I, Lambda_{t+1} = Lambda_t +
// u_t u_t^T over the regressor sequence and evaluates both sides of the
// potential inequality. rhs uses a fresh Cholesky log-determinant of the
// final Gram.
EllipticalAudit elliptical_potential_audit(const std::vector<Eigen::VectorXd>& us,
                                           int dim, double lambda);

}  // namespace gaillin

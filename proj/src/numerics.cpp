#include "gaillin/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gaillin {

RidgeAccumulator::RidgeAccumulator(int dim, double lambda) : dim_(dim), lambda_(lambda) {
  if (dim < 1 || !(lambda > 0.0))
    throw std::invalid_argument("ridge: dim >= 1 and lambda > 0 required");
  gram_ = lambda * Eigen::MatrixXd::Identity(dim, dim);
  gram_inv_ = (1.0 / lambda) * Eigen::MatrixXd::Identity(dim, dim);
  rhs_ = Eigen::VectorXd::Zero(dim);
}

void RidgeAccumulator::update(const Eigen::VectorXd& u, double y) {
  if (u.size() != dim_) throw std::invalid_argument("ridge: dimension mismatch");
  if (!u.allFinite() || !std::isfinite(y))
    throw std::invalid_argument("ridge: non-finite update");
  const Eigen::VectorXd iv = gram_inv_ * u;
  const double denom = 1.0 + u.dot(iv);
  gram_inv_.noalias() -= (iv * iv.transpose()) / denom;
  gram_inv_ = 0.5 * (gram_inv_ + gram_inv_.transpose()).eval();
  gram_.noalias() += u * u.transpose();
  rhs_.noalias() += y * u;
  ++count_;
  if (count_ % check_interval == 0 && identity_residual() > 1e-8) refactor();
}

double RidgeAccumulator::quad_form(const Eigen::VectorXd& v) const {
  if (v.size() != dim_) throw std::invalid_argument("ridge: dimension mismatch");
  return std::max(0.0, v.dot(gram_inv_ * v));
}

double RidgeAccumulator::mahalanobis(const Eigen::VectorXd& v) const {
  return std::sqrt(quad_form(v));
}

double RidgeAccumulator::identity_residual() const {
  return (gram_ * gram_inv_ - Eigen::MatrixXd::Identity(dim_, dim_))
      .cwiseAbs()
      .maxCoeff();
}

void RidgeAccumulator::refactor() {
  gram_inv_ = gram_.ldlt().solve(Eigen::MatrixXd::Identity(dim_, dim_));
  gram_inv_ = 0.5 * (gram_inv_ + gram_inv_.transpose()).eval();
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
  const double norm = v.norm();
  if (norm <= radius) return v;
  return v * (radius / norm);
}

Eigen::VectorXd project_ball_nonneg(const Eigen::VectorXd& v, double radius) {
  return project_ball(v.cwiseMax(0.0), radius);
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw std::invalid_argument("project_simplex: non-finite input");
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0.0, tau = 0.0;
  for (int j = 0; j < n; ++j) {
    running += u[j];
    const double candidate = (running - 1.0) / (j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  return (v.array() - tau).cwiseMax(0.0);
}

std::vector<double> mirror_descent_step(std::span<const double> policy_row,
                                        std::span<const double> q_row, double alpha) {
  const std::size_t n = policy_row.size();
  std::vector<double> out(n, 0.0);
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(n, -std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < n; ++a) {
    if (policy_row[a] > 0.0) {
      logs[a] = std::log(policy_row[a]) + alpha * q_row[a];
      max_log = std::max(max_log, logs[a]);
    }
  }
  if (!std::isfinite(max_log))
    throw std::invalid_argument("mirror_descent_step: input row has no mass");
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (policy_row[a] > 0.0) {
      double w = std::exp(logs[a] - max_log);
      if (w < 1e-300) w = 0.0;
      out[a] = w;
      total += w;
    }
  }
  for (std::size_t a = 0; a < n; ++a) out[a] /= total;
  return out;
}

EllipticalAudit elliptical_potential_audit(const std::vector<Eigen::VectorXd>& us,
                                           int dim, double lambda) {
  EllipticalAudit audit;
  if (us.empty()) return audit;
  RidgeAccumulator acc(dim, lambda);
  for (const auto& u : us) {
    audit.lhs += std::min(1.0, acc.quad_form(u));
    acc.update(u, 0.0);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(acc.gram());
  double logdet = 0.0;
  for (int i = 0; i < dim; ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  audit.rhs = 2.0 * (logdet - dim * std::log(lambda));
  return audit;
}

}  // namespace gaillin

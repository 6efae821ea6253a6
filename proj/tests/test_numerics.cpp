#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gaillin/numerics.hpp"
#include "gaillin/rng.hpp"

using namespace gaillin;

namespace {

Eigen::VectorXd random_vec(int dim, Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = scale * rng.gaussian();
  return v;
}

// Dense oracle: theta = (lambda I + sum u u^T)^{-1} sum u y.
Eigen::VectorXd dense_ridge(const std::vector<Eigen::VectorXd>& us,
                            const std::vector<double>& ys, int dim, double lambda) {
  Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < us.size(); ++i) {
    gram += us[i] * us[i].transpose();
    rhs += ys[i] * us[i];
  }
  return gram.ldlt().solve(rhs);
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("ridge with no updates: identity Gram and zero solution") {
  RidgeAccumulator acc(4, 1.0);
  CHECK(acc.solution().norm() == 0.0);
  CHECK((acc.gram() - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("ridge single update matches the rank-one closed form") {
  // Hand derivation for u=(1,2), y=3, lambda=1: theta = u*y/(1+|u|^2) = (0.5, 1).
  RidgeAccumulator acc(2, 1.0);
  Eigen::VectorXd u(2);
  u << 1.0, 2.0;
  acc.update(u, 3.0);
  const Eigen::VectorXd theta = acc.solution();
  CHECK(theta[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(theta[1] == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::VectorXd oracle = dense_ridge({u}, {3.0}, 2, 1.0);
  CHECK((theta - oracle).norm() <= 1e-12);
}

TEST_CASE("ridge tracks a dense solve over 500 random updates") {
  const int dim = 12;
  RidgeAccumulator acc(dim, 0.7);
  std::vector<Eigen::VectorXd> us;
  std::vector<double> ys;
  Rng rng(1234);
  for (int i = 0; i < 500; ++i) {
    us.push_back(random_vec(dim, rng, 2.0));
    ys.push_back(rng.gaussian());
    acc.update(us.back(), ys.back());
  }
  const Eigen::VectorXd oracle = dense_ridge(us, ys, dim, 0.7);
  const Eigen::VectorXd got = acc.solution();
  CHECK((got - oracle).norm() / std::max(1.0, oracle.norm()) <= 1e-8);
  CHECK(acc.identity_residual() <= 1e-8);
  // Lambda - lambda0*I stays positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      acc.gram() - 0.7 * Eigen::MatrixXd::Identity(dim, dim));
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("ridge rejects non-finite updates") {
  RidgeAccumulator acc(2, 1.0);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(acc.update(bad, 0.0), std::invalid_argument);
  Eigen::VectorXd ok(2);
  ok << 1.0, 0.0;
  CHECK_THROWS_AS(acc.update(ok, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("mahalanobis basics and the tabular counting identity") {
  RidgeAccumulator acc(3, 1.0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 0);
  CHECK(acc.mahalanobis(e1) == doctest::Approx(1.0));
  CHECK(acc.mahalanobis(Eigen::VectorXd::Zero(3)) == 0.0);
  // One-hot features visited n times: ||e||_{Lambda^{-1}} = 1/sqrt(1+n).
  const int n = 7;
  for (int i = 0; i < n; ++i) acc.update(e1, 0.0);
  CHECK(acc.mahalanobis(e1) == doctest::Approx(1.0 / std::sqrt(1.0 + n)).epsilon(1e-10));
}

TEST_CASE("project_ball: inside stays, outside lands on the boundary") {
  Eigen::VectorXd v(2);
  v << 0.3, -0.1;
  CHECK((project_ball(v, 1.0) - v).norm() == 0.0);
  v << 3.0, 4.0;
  const Eigen::VectorXd p = project_ball(v, 1.0);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("project_ball: norm bound, idempotence, non-expansiveness") {
  Rng rng(99);
  const double radius = 1.7;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd u = random_vec(5, rng, 3.0);
    const Eigen::VectorXd v = random_vec(5, rng, 3.0);
    const Eigen::VectorXd pu = project_ball(u, radius);
    const Eigen::VectorXd pv = project_ball(v, radius);
    CHECK(pu.norm() <= radius + 1e-12);
    CHECK((project_ball(pu, radius) - pu).norm() <= 1e-12);
    CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);
  }
}

TEST_CASE("project_ball_nonneg clamps then scales") {
  Eigen::VectorXd v(3);
  v << -1.0, 3.0, 4.0;
  const Eigen::VectorXd p = project_ball_nonneg(v, 1.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(0.6));
  CHECK(p[2] == doctest::Approx(0.8));
}

TEST_CASE("project_simplex: fixed points and the worked 2-dim case") {
  Eigen::VectorXd on(3);
  on << 0.2, 0.5, 0.3;
  CHECK((project_simplex(on) - on).norm() <= 1e-12);
  Eigen::VectorXd v(2);
  v << 1.2, -0.2;
  const Eigen::VectorXd p = project_simplex(v);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.0));
}

TEST_CASE("project_simplex matches a brute-force grid search") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd v = random_vec(3, rng, 1.5);
    const Eigen::VectorXd p = project_simplex(v);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_q(3);
    const int grid = 400;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; i + j <= grid; ++j) {
        Eigen::VectorXd q(3);
        q << static_cast<double>(i) / grid, static_cast<double>(j) / grid,
            static_cast<double>(grid - i - j) / grid;
        const double dist = (q - v).norm();
        if (dist < best) {
          best = dist;
          best_q = q;
        }
      }
    }
    CHECK((p - v).norm() <= best + 1e-12);  // projection is at least as close
    CHECK(best - (p - v).norm() <= 1e-4);   // and the grid oracle confirms within 1e-4
  }
}

TEST_CASE("mirror descent step: identity cases") {
  std::vector<double> row = {0.1, 0.6, 0.3};
  std::vector<double> zeros = {0.0, 0.0, 0.0};
  auto out = mirror_descent_step(row, zeros, 2.5);
  for (int a = 0; a < 3; ++a) CHECK(out[a] == doctest::Approx(row[a]).epsilon(1e-12));
  std::vector<double> q = {5.0, -1.0, 2.0};
  out = mirror_descent_step(row, q, 0.0);
  for (int a = 0; a < 3; ++a) CHECK(out[a] == doctest::Approx(row[a]).epsilon(1e-12));
}

TEST_CASE("mirror descent step: frozen closed-form value") {
  // uniform over 2 actions, q = (ln 2, 0), alpha = 1 -> (2/3, 1/3).
  std::vector<double> row = {0.5, 0.5};
  std::vector<double> q = {std::log(2.0), 0.0};
  const auto out = mirror_descent_step(row, q, 1.0);
  CHECK(out[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("mirror descent step: preserves support and rejects empty rows") {
  std::vector<double> row = {0.0, 0.7, 0.3};
  std::vector<double> q = {100.0, 0.0, 1.0};
  const auto out = mirror_descent_step(row, q, 2.0);
  CHECK(out[0] == 0.0);
  CHECK(out[1] + out[2] == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> empty = {0.0, 0.0};
  CHECK_THROWS_AS(mirror_descent_step(empty, q, 1.0), std::invalid_argument);
}

TEST_CASE("mirror descent step survives huge exponents") {
  std::vector<double> row = {0.5, 0.5};
  std::vector<double> q = {1000.0, -1000.0};
  const auto out = mirror_descent_step(row, q, 10.0);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(0.0));
}

TEST_CASE("elliptical potential audit: empty and single-vector cases") {
  const EllipticalAudit empty = elliptical_potential_audit({}, 3, 1.0);
  CHECK(empty.lhs == 0.0);
  CHECK(empty.rhs == 0.0);

  Rng rng(3);
  Eigen::VectorXd u = random_vec(3, rng);
  u *= 0.5 / u.norm();  // |u| = 0.5 <= 1
  const EllipticalAudit one = elliptical_potential_audit({u}, 3, 1.0);
  const double n2 = u.squaredNorm();
  CHECK(one.lhs == doctest::Approx(n2).epsilon(1e-12));
  // det(I + uu^T) = 1 + |u|^2 by the matrix determinant lemma.
  CHECK(one.rhs == doctest::Approx(2.0 * std::log1p(n2)).epsilon(1e-10));
  CHECK(one.holds());
}

TEST_CASE("elliptical potential inequality holds over 1000 random steps") {
  Rng rng(17);
  std::vector<Eigen::VectorXd> us;
  for (int i = 0; i < 1000; ++i) us.push_back(random_vec(6, rng, 1.4));
  const EllipticalAudit audit = elliptical_potential_audit(us, 6, 1.0);
  CHECK(audit.holds());
  CHECK(audit.lhs > 0.0);
}

}  // TEST_SUITE

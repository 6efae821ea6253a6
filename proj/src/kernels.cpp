#include "gaillin/kernels.hpp"

namespace gaillin {
namespace kernels {

void backup_q(const Grid3& p, const Grid2& r, std::span<const double> v_next, Grid2& q) {
  const int s_n = p.n0, a_n = p.n1, sp_n = p.n2;
  const long work = static_cast<long>(s_n) * a_n * sp_n;
#pragma omp parallel for collapse(2) schedule(static) if (work >= kOmpGrain)
  for (int s = 0; s < s_n; ++s) {
    for (int a = 0; a < a_n; ++a) {
      const double* row = p.row(s, a).data();
      double acc = 0.0;
      for (int sp = 0; sp < sp_n; ++sp) acc += row[sp] * v_next[sp];
      q.at(s, a) = r.at(s, a) + acc;
    }
  }
}

void v_from_q(const Grid2& q, const Grid3& policy, int h, std::span<double> v) {
  const int s_n = q.n0, a_n = q.n1;
  const long work = static_cast<long>(s_n) * a_n;
#pragma omp parallel for schedule(static) if (work >= kOmpGrain)
  for (int s = 0; s < s_n; ++s) {
    const double* qrow = q.row(s).data();
    const double* prow = policy.row(h, s).data();
    double acc = 0.0;
    for (int a = 0; a < a_n; ++a) acc += qrow[a] * prow[a];
    v[s] = acc;
  }
}

void occupancy_step(const Grid3& p, const Grid3& policy, int h_next, const Grid2& rho,
                    Grid2& rho_next) {
  const int s_n = p.n0, a_n = p.n1, sp_n = p.n2;
  std::vector<double> marginal(sp_n, 0.0);
  const long work = static_cast<long>(s_n) * a_n * sp_n;
#pragma omp parallel for schedule(static) if (work >= kOmpGrain)
  for (int sp = 0; sp < sp_n; ++sp) {
    double acc = 0.0;
    for (int s = 0; s < s_n; ++s)
      for (int a = 0; a < a_n; ++a) acc += rho.at(s, a) * p.at(s, a, sp);
    marginal[sp] = acc;
  }
#pragma omp parallel for schedule(static) if (static_cast<long>(sp_n) * a_n >= kOmpGrain)
  for (int sp = 0; sp < sp_n; ++sp)
    for (int a = 0; a < a_n; ++a)
      rho_next.at(sp, a) = marginal[sp] * policy.at(h_next, sp, a);
}

}  // namespace kernels

namespace serial {

void backup_q(const Grid3& p, const Grid2& r, std::span<const double> v_next, Grid2& q) {
  for (int s = 0; s < p.n0; ++s) {
    for (int a = 0; a < p.n1; ++a) {
      double acc = 0.0;
      for (int sp = 0; sp < p.n2; ++sp) acc += p.at(s, a, sp) * v_next[sp];
      q.at(s, a) = r.at(s, a) + acc;
    }
  }
}

void v_from_q(const Grid2& q, const Grid3& policy, int h, std::span<double> v) {
  for (int s = 0; s < q.n0; ++s) {
    double acc = 0.0;
    for (int a = 0; a < q.n1; ++a) acc += q.at(s, a) * policy.at(h, s, a);
    v[s] = acc;
  }
}

void occupancy_step(const Grid3& p, const Grid3& policy, int h_next, const Grid2& rho,
                    Grid2& rho_next) {
  std::vector<double> marginal(p.n2, 0.0);
  for (int sp = 0; sp < p.n2; ++sp) {
    double acc = 0.0;
    for (int s = 0; s < p.n0; ++s)
      for (int a = 0; a < p.n1; ++a) acc += rho.at(s, a) * p.at(s, a, sp);
    marginal[sp] = acc;
  }
  for (int sp = 0; sp < p.n2; ++sp)
    for (int a = 0; a < p.n1; ++a)
      rho_next.at(sp, a) = marginal[sp] * policy.at(h_next, sp, a);
}

}  // namespace serial
}  // namespace gaillin

// Compares the OpenMP DP kernels against the serial reference
// implementations on scaled-up synthetic instances and reports throughput.
//
//   ./bench_kernels [states] [actions] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "gaillin/kernels.hpp"
#include "gaillin/rng.hpp"

using namespace gaillin;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / repeats;
}

Grid3 random_stochastic(int s_n, int a_n, Rng& rng) {
  Grid3 p(s_n, a_n, s_n);
  for (int s = 0; s < s_n; ++s)
    for (int a = 0; a < a_n; ++a) {
      double total = 0.0;
      for (int sp = 0; sp < s_n; ++sp) {
        p.at(s, a, sp) = rng.uniform();
        total += p.at(s, a, sp);
      }
      for (int sp = 0; sp < s_n; ++sp) p.at(s, a, sp) /= total;
    }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  const int s_n = argc > 1 ? std::atoi(argv[1]) : 512;
  const int a_n = argc > 2 ? std::atoi(argv[2]) : 32;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 10;

  Rng rng(1);
  const Grid3 p = random_stochastic(s_n, a_n, rng);
  Grid3 policy(2, s_n, a_n);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < s_n; ++s) {
      double total = 0.0;
      for (int a = 0; a < a_n; ++a) {
        policy.at(h, s, a) = rng.uniform();
        total += policy.at(h, s, a);
      }
      for (int a = 0; a < a_n; ++a) policy.at(h, s, a) /= total;
    }
  Grid2 r(s_n, a_n), rho(s_n, a_n);
  for (double& x : r.v) x = rng.gaussian();
  double mass = 0.0;
  for (double& x : rho.v) {
    x = rng.uniform();
    mass += x;
  }
  for (double& x : rho.v) x /= mass;
  std::vector<double> v(s_n), v_out(s_n);
  for (double& x : v) x = rng.gaussian();
  Grid2 q(s_n, a_n), rho_next(s_n, a_n);

  std::printf("kernel benchmark: |S|=%d |A|=%d, %d repeats, %d thread(s)\n", s_n, a_n,
              repeats, omp_get_max_threads());
  std::printf("%-16s %12s %12s %8s\n", "kernel", "serial ms", "openmp ms", "speedup");

  const double bq_s = time_ms([&] { serial::backup_q(p, r, v, q); }, repeats);
  const double bq_p = time_ms([&] { kernels::backup_q(p, r, v, q); }, repeats);
  std::printf("%-16s %12.3f %12.3f %7.2fx\n", "backup_q", bq_s, bq_p, bq_s / bq_p);

  const double vq_s = time_ms([&] { serial::v_from_q(q, policy, 0, v_out); }, repeats);
  const double vq_p = time_ms([&] { kernels::v_from_q(q, policy, 0, v_out); }, repeats);
  std::printf("%-16s %12.3f %12.3f %7.2fx\n", "v_from_q", vq_s, vq_p, vq_s / vq_p);

  const double oc_s =
      time_ms([&] { serial::occupancy_step(p, policy, 1, rho, rho_next); }, repeats);
  const double oc_p =
      time_ms([&] { kernels::occupancy_step(p, policy, 1, rho, rho_next); }, repeats);
  std::printf("%-16s %12.3f %12.3f %7.2fx\n", "occupancy_step", oc_s, oc_p, oc_s / oc_p);

  // Agreement check on this instance before reporting success.
  Grid2 q_ref(s_n, a_n);
  serial::backup_q(p, r, v, q_ref);
  kernels::backup_q(p, r, v, q);
  if (q.v != q_ref.v) {
    std::printf("MISMATCH between serial and openmp backup_q\n");
    return 1;
  }
  return 0;
}

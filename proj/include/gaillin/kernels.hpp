#pragma once

#include <span>

#include "gaillin/rng.hpp"
#include "gaillin/tables.hpp"

namespace gaillin {

// OpenMP inner loops shared by the DP routines. Every kernel writes each
// output slot from exactly one iteration and keeps the inner reductions in
// a fixed serial order, so results are bit-identical for any thread count.
// Below kOmpGrain elements the loops run single-threaded.
inline constexpr long kOmpGrain = 1 << 14;

namespace kernels {

// q(s,a) = r(s,a) + sum_{s'} p(s,a,s') * v_next(s')
void backup_q(const Grid3& p, const Grid2& r, std::span<const double> v_next, Grid2& q);

// v(s) = <q(s,.), pi(.|s)>
void v_from_q(const Grid2& q, const Grid3& policy, int h, std::span<double> v);

// rho_next(s',a') = pi_next(a'|s') * sum_{s,a} rho(s,a) p(s,a,s')
void occupancy_step(const Grid3& p, const Grid3& policy, int h_next, const Grid2& rho,
                    Grid2& rho_next);

}  // namespace kernels

// Plain single-threaded reference implementations of the same kernels; the
// test suite checks the OpenMP versions against these.
namespace serial {

void backup_q(const Grid3& p, const Grid2& r, std::span<const double> v_next, Grid2& q);
void v_from_q(const Grid2& q, const Grid3& policy, int h, std::span<double> v);
void occupancy_step(const Grid3& p, const Grid3& policy, int h_next, const Grid2& rho,
                    Grid2& rho_next);

}  // namespace serial

}  // namespace gaillin

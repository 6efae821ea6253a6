#pragma once

#include <span>
#include <vector>

namespace gaillin {

// Dense row-major grids used for the small per-step tables (Q, occupancy,
// bonuses, transition rows). Indices are 0-based throughout.

struct Grid2 {
  int n0 = 0, n1 = 0;
  std::vector<double> v;

  Grid2() = default;
  Grid2(int a, int b, double init = 0.0)
      : n0(a), n1(b), v(static_cast<std::size_t>(a) * b, init) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * n1 + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * n1 + j]; }
  std::span<double> row(int i) { return {v.data() + static_cast<std::size_t>(i) * n1, static_cast<std::size_t>(n1)}; }
  std::span<const double> row(int i) const {
    return {v.data() + static_cast<std::size_t>(i) * n1, static_cast<std::size_t>(n1)};
  }
};

struct Grid3 {
  int n0 = 0, n1 = 0, n2 = 0;
  std::vector<double> v;

  Grid3() = default;
  Grid3(int a, int b, int c, double init = 0.0)
      : n0(a), n1(b), n2(c), v(static_cast<std::size_t>(a) * b * c, init) {}

  double& at(int i, int j, int k) {
    return v[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
  }
  double at(int i, int j, int k) const {
    return v[(static_cast<std::size_t>(i) * n1 + j) * n2 + k];
  }
  std::span<double> row(int i, int j) {
    return {v.data() + (static_cast<std::size_t>(i) * n1 + j) * n2, static_cast<std::size_t>(n2)};
  }
  std::span<const double> row(int i, int j) const {
    return {v.data() + (static_cast<std::size_t>(i) * n1 + j) * n2, static_cast<std::size_t>(n2)};
  }
};

}  // namespace gaillin

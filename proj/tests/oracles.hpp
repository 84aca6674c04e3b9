#pragma once

// Slow reference implementations used only by the tests. None of them call
// into the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

// Solves the square system A x = b (row-major, n x n) by Gaussian elimination
// with partial pivoting. Returns nothing if A is singular.
inline std::optional<std::vector<double>> solve(std::vector<double> a, std::vector<double> b,
                                                std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-12) return std::nullopt;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i * n + i];
  return x;
}

// Constraints g . x <= h.
struct Halfspace {
  std::vector<double> g;
  double h = 0.0;
};

// Minimizes c . x over the polyhedron by visiting every basic feasible
// solution: each choice of n tight constraints with a unique intersection.
// Assumes the optimum is attained at a vertex.
inline std::optional<double> min_over_vertices(const std::vector<double>& c,
                                               const std::vector<Halfspace>& cons) {
  const std::size_t n = c.size();
  const std::size_t m = cons.size();
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (n > m) return best;
  while (true) {
    std::vector<double> a(n * n);
    std::vector<double> b(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) a[r * n + k] = cons[pick[r]].g[k];
      b[r] = cons[pick[r]].h;
    }
    if (auto x = solve(a, b, n)) {
      bool feasible = true;
      for (const auto& hs : cons) {
        double lhs = 0.0;
        for (std::size_t k = 0; k < n; ++k) lhs += hs.g[k] * (*x)[k];
        if (lhs > hs.h + 1e-9) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double v = 0.0;
        for (std::size_t k = 0; k < n; ++k) v += c[k] * (*x)[k];
        if (!best || v < *best) best = v;
      }
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

// Restricted master in primal form:
//   min sum_i xi_i + sum_k cost_k w_k
//   s.t. xi_i + sum_k cover[k][i] w_k >= 1 for each positive i; w, xi >= 0.
inline double master_optimum(const std::vector<std::vector<int>>& cover,
                             const std::vector<double>& cost, std::size_t n_pos) {
  const std::size_t K = cover.size();
  const std::size_t n = K + n_pos;
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < K; ++k) c[k] = cost[k];
  for (std::size_t i = 0; i < n_pos; ++i) c[K + i] = 1.0;
  std::vector<Halfspace> cons;
  for (std::size_t i = 0; i < n_pos; ++i) {
    Halfspace hs{std::vector<double>(n, 0.0), -1.0};
    for (std::size_t k = 0; k < K; ++k) hs.g[k] = -static_cast<double>(cover[k][i]);
    hs.g[K + i] = -1.0;
    cons.push_back(hs);
  }
  for (std::size_t v = 0; v < n; ++v) {
    Halfspace hs{std::vector<double>(n, 0.0), 0.0};
    hs.g[v] = -1.0;
    cons.push_back(hs);
  }
  return *min_over_vertices(c, cons);
}

// Every subset of {0..n-1} of size 1..max_size, in increasing size and then
// lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t max_size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t size = 1; size <= std::min(n, max_size); ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      out.push_back(pick);
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == n - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

}  // namespace oracle

#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "gridpilot/grid.hpp"

namespace oracles {

// Dijkstra with a priority queue over unit edge weights; deliberately a
// different algorithm and code path than the library's BFS field.
inline std::vector<int> dijkstra_grid(const gridpilot::Scene& scene,
                                      const std::vector<gridpilot::Cell>& sources) {
  const int inf = std::numeric_limits<int>::max();
  std::vector<int> dist(static_cast<size_t>(scene.width) * scene.height, inf);
  using Item = std::pair<int, int>;  // (distance, index)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const auto& s : sources) {
    const int idx = s.y * scene.width + s.x;
    dist[static_cast<size_t>(idx)] = 0;
    heap.push({0, idx});
  }
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};
  while (!heap.empty()) {
    const auto [d, idx] = heap.top();
    heap.pop();
    if (d > dist[static_cast<size_t>(idx)]) continue;
    const int x = idx % scene.width;
    const int y = idx / scene.width;
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (!scene.in_bounds(nx, ny) || !scene.walkable(nx, ny)) continue;
      const int nidx = ny * scene.width + nx;
      if (dist[static_cast<size_t>(nidx)] > d + 1) {
        dist[static_cast<size_t>(nidx)] = d + 1;
        heap.push({d + 1, nidx});
      }
    }
  }
  return dist;
}

// Exhaustive DTW: minimum total cost over all monotone alignments, explored
// recursively. Exponential, only for tiny paths.
inline double dtw_exhaustive(const std::vector<gridpilot::Cell>& r,
                             const std::vector<gridpilot::Cell>& q) {
  auto cost = [&](size_t i, size_t j) {
    const double dx = r[i].x - q[j].x;
    const double dy = r[i].y - q[j].y;
    return std::sqrt(dx * dx + dy * dy);
  };
  struct Rec {
    const std::vector<gridpilot::Cell>& r;
    const std::vector<gridpilot::Cell>& q;
    std::function<double(size_t, size_t)> cost;
    double best = std::numeric_limits<double>::infinity();
    void walk(size_t i, size_t j, double acc) {
      acc += cost(i, j);
      if (acc >= best) return;
      if (i + 1 == r.size() && j + 1 == q.size()) {
        best = acc;
        return;
      }
      if (i + 1 < r.size()) walk(i + 1, j, acc);
      if (j + 1 < q.size()) walk(i, j + 1, acc);
      if (i + 1 < r.size() && j + 1 < q.size()) walk(i + 1, j + 1, acc);
    }
  };
  Rec rec{r, q, cost};
  rec.walk(0, 0, 0.0);
  return rec.best;
}

// Leading eigenpairs of a symmetric matrix by power iteration with
// deflation; independent of the library's Jacobi solver.
inline void power_iteration_eigen(std::vector<std::vector<double>> m, int k,
                                  std::vector<double>& values,
                                  std::vector<std::vector<double>>& vectors) {
  const size_t n = m.size();
  values.clear();
  vectors.clear();
  for (int comp = 0; comp < k; ++comp) {
    std::vector<double> v(n, 0.0);
    v[static_cast<size_t>(comp) % n] = 1.0;
    v[0] += 0.5;
    double lambda = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
      std::vector<double> next(n, 0.0);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) next[i] += m[i][j] * v[j];
      double norm = 0.0;
      for (double x : next) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-300) break;  // deflated to zero: eigenvalue ~ 0
      for (double& x : next) x /= norm;
      double new_lambda = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double mv = 0.0;
        for (size_t j = 0; j < n; ++j) mv += m[i][j] * next[j];
        new_lambda += next[i] * mv;
      }
      const bool converged = std::abs(new_lambda - lambda) < 1e-14 && iter > 50;
      v = next;
      lambda = new_lambda;
      if (converged) break;
    }
    values.push_back(lambda);
    vectors.push_back(v);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) m[i][j] -= lambda * v[i] * v[j];
  }
}

}  // namespace oracles

#pragma once

// Reference computations used by the tests. Each is written from the
// definitions, independent of the library's stencils, scans and tables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "vertiplan/grid.hpp"
#include "vertiplan/matching.hpp"

namespace oracle {

using vertiplan::Cell;
using vertiplan::CountMatrix;
using vertiplan::GridSpec;
using vertiplan::RealMatrix;

inline double center_distance(const GridSpec& spec, Cell a, Cell b) {
  const double dx = (a.col - b.col) * spec.cell_size;
  const double dy = (a.row - b.row) * spec.cell_size;
  return std::sqrt(dx * dx + dy * dy);
}

inline bool in_range(const GridSpec& spec, Cell a, Cell b, double radius) {
  return center_distance(spec, a, b) <= radius;
}

// Every in-bounds cell within `radius` of `center`, by scanning the whole grid.
inline std::vector<Cell> cells_within(const GridSpec& spec, Cell center, double radius) {
  std::vector<Cell> out;
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      if (in_range(spec, center, {i, j}, radius)) out.push_back({i, j});
    }
  }
  return out;
}

// Maximum number of demand units that can be served when any unit may use any
// in-range capacity: max-flow source -> demand cells -> supply cells -> sink.
inline std::int64_t max_served(const GridSpec& spec, const CountMatrix& demand, const CountMatrix& supply,
                               double radius) {
  const int cells = spec.rows * spec.cols;
  const int n = 2 * cells + 2;
  const int source = 2 * cells;
  const int sink = source + 1;
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::vector<std::int64_t>> cap(n, std::vector<std::int64_t>(n, 0));
  for (int a = 0; a < cells; ++a) {
    const Cell ca{a / spec.cols, a % spec.cols};
    cap[source][a] = demand(ca.row, ca.col);
    cap[cells + a][sink] = supply(ca.row, ca.col);
    for (int b = 0; b < cells; ++b) {
      const Cell cb{b / spec.cols, b % spec.cols};
      if (in_range(spec, ca, cb, radius)) cap[a][cells + b] = inf;
    }
  }
  std::int64_t flow = 0;
  for (;;) {
    std::vector<int> parent(n, -1);
    parent[source] = source;
    std::queue<int> q;
    q.push(source);
    while (!q.empty() && parent[sink] < 0) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        if (parent[v] < 0 && cap[u][v] > 0) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (parent[sink] < 0) return flow;
    std::int64_t push = inf;
    for (int v = sink; v != source; v = parent[v]) push = std::min(push, cap[parent[v]][v]);
    for (int v = sink; v != source; v = parent[v]) {
      cap[parent[v]][v] -= push;
      cap[v][parent[v]] += push;
    }
    flow += push;
  }
}

// Direct (2k+1)x(2k+1) all-ones convolution with zero padding.
inline RealMatrix box_filter(const CountMatrix& field, int k) {
  RealMatrix out(field.rows(), field.cols(), 0.0);
  for (int i = 0; i < field.rows(); ++i) {
    for (int j = 0; j < field.cols(); ++j) {
      double acc = 0.0;
      for (int di = -k; di <= k; ++di) {
        for (int dj = -k; dj <= k; ++dj) {
          const int r = i + di, c = j + dj;
          if (r >= 0 && r < field.rows() && c >= 0 && c < field.cols()) acc += static_cast<double>(field(r, c));
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

// Σ_a min_b T(a, b) over the set `sites`, T = distance / speed.
inline double station_travel_sum(const GridSpec& spec, const std::vector<Cell>& sites,
                                 const std::vector<Cell>& stations, double speed) {
  double total = 0.0;
  for (const auto& a : sites) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : stations) best = std::min(best, center_distance(spec, a, b) / speed);
    total += best;
  }
  return total;
}

}  // namespace oracle

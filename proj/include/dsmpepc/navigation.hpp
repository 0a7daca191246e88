#pragma once

/// \file
/// Wall-aware navigation function: shortest-path distance to the goal over the
/// free cells of an occupancy grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <queue>
#include <utility>
#include <vector>

#include "dsmpepc/geometry.hpp"
#include "dsmpepc/world.hpp"

namespace dsmpepc {

class NavigationFunction {
 public:
  /// Cells whose clearance is below `inflation` cost `penalty` times more to traverse.
  NavigationFunction(std::shared_ptr<const OccupancyGrid> grid, Vec2 goal, double inflation,
                     double penalty = 10.0)
      : grid_(std::move(grid)), goal_(goal) {
    if (grid_ && grid_->has_obstacles()) build(inflation, penalty);
  }

  Vec2 goal() const { return goal_; }

  /// Shortest-path distance from p to the goal; Euclidean when the map has no obstacles.
  double operator()(Vec2 p) const {
    const double euclid = distance(p, goal_);
    if (values_.empty()) return euclid;
    const OccupancyGrid& g = *grid_;
    if (euclid <= 1.5 * g.resolution()) return euclid;

    // clamp into the grid; points outside pay their distance to the border
    const Vec2 lo = g.extent_min(), hi = g.extent_max();
    const double eps = 1e-9 * g.resolution();
    const Vec2 q{std::clamp(p.x, lo.x + eps, hi.x - eps), std::clamp(p.y, lo.y + eps, hi.y - eps)};
    const double outside = distance(p, q);
    const auto [ci, cj] = g.cell_of(q);
    for (int reach = 1; reach <= 3; ++reach) {
      double best = kInfinity;
      for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di) {
          const int i = ci + di, j = cj + dj;
          if (!g.in_bounds(i, j)) continue;
          const double v = values_[g.index(i, j)];
          if (v == kInfinity) continue;
          best = std::min(best, v + distance(q, g.cell_center(i, j)));
        }
      if (best < kInfinity) return best + outside;
    }
    return max_value_ + euclid;
  }

 private:
  void build(double inflation, double penalty) {
    const OccupancyGrid& g = *grid_;
    const double res = g.resolution();
    values_.assign(static_cast<std::size_t>(g.width()) * g.height(), kInfinity);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

    const auto [gi, gj] = g.cell_of(goal_);
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di) {
        const int i = gi + di, j = gj + dj;
        if (!g.in_bounds(i, j) || g.occupied(i, j)) continue;
        const double d = distance(g.cell_center(i, j), goal_);
        const std::size_t k = g.index(i, j);
        if (d < values_[k]) {
          values_[k] = d;
          open.push({d, k});
        }
      }

    // 16-connected moves; knight moves need both intermediate cells free
    static constexpr std::array<std::array<int, 2>, 16> kMoves{{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                                               {1, 1}, {1, -1}, {-1, 1}, {-1, -1},
                                                               {2, 1}, {2, -1}, {-2, 1}, {-2, -1},
                                                               {1, 2}, {1, -2}, {-1, 2}, {-1, -2}}};
    auto weight = [&](int i, int j) { return g.cell_distance(i, j) < inflation ? penalty : 1.0; };
    while (!open.empty()) {
      const auto [d, k] = open.top();
      open.pop();
      if (d > values_[k]) continue;
      const int i = static_cast<int>(k % g.width());
      const int j = static_cast<int>(k / g.width());
      for (const auto& m : kMoves) {
        const int ni = i + m[0], nj = j + m[1];
        if (!g.in_bounds(ni, nj) || g.occupied(ni, nj)) continue;
        if (std::abs(m[0]) + std::abs(m[1]) == 3) {
          const int si = std::abs(m[0]) == 2 ? m[0] / 2 : 0;
          const int sj = std::abs(m[1]) == 2 ? m[1] / 2 : 0;
          if (g.occupied(i + si, j + sj) || g.occupied(i + m[0] - si, j + m[1] - sj)) continue;
        } else if (m[0] != 0 && m[1] != 0) {
          if (g.occupied(i + m[0], j) || g.occupied(i, j + m[1])) continue;
        }
        const double step = res * std::hypot(m[0], m[1]) * 0.5 * (weight(i, j) + weight(ni, nj));
        const std::size_t nk = g.index(ni, nj);
        if (d + step < values_[nk]) {
          values_[nk] = d + step;
          open.push({values_[nk], nk});
        }
      }
    }
    max_value_ = 0.0;
    for (double v : values_)
      if (v < kInfinity) max_value_ = std::max(max_value_, v);
  }

  std::shared_ptr<const OccupancyGrid> grid_;
  Vec2 goal_;
  std::vector<double> values_;
  double max_value_ = 0.0;
};

}  // namespace dsmpepc

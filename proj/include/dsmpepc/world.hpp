#pragma once

/// \file
/// Static occupancy grid with an exact Euclidean distance field, dynamic disk
/// obstacles, clearance queries and time-to-collision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsmpepc/geometry.hpp"

namespace dsmpepc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// 1/t with the conventions 1/inf = 0 and 1/0 = inf.
inline double inverse_time(double t) {
  if (t == kInfinity) return 0.0;
  if (t <= 0.0) return kInfinity;
  return 1.0 / t;
}

/// Time-to-collision beyond this is reported as infinity.
inline constexpr double kTtcHorizon = 100.0;

namespace detail {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher); f is overwritten
// with its 1D squared distance transform.
inline void squared_edt_1d(std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  out.resize(n);
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInfinity) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInfinity;
      z[1] = kInfinity;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      if (s <= z[k]) {
        // k == 0 and the new parabola dominates everywhere
        k = -1;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInfinity : s;
    z[k + 1] = kInfinity;
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInfinity);
  } else {
    int j = 0;
    for (int q = 0; q < n; ++q) {
      while (z[j + 1] < q) ++j;
      const double d = q - v[j];
      out[q] = d * d + f[v[j]];
    }
  }
  f.swap(out);
}

}  // namespace detail

/// Binary occupancy grid. Cell (i, j) spans [origin + i*res, origin + (i+1)*res)
/// in x and likewise in y; j = 0 is the bottom row.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;

  OccupancyGrid(int width, int height, double resolution, Vec2 origin = {})
      : width_(width), height_(height), resolution_(resolution), origin_(origin) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid: zero-area grid");
    if (!(resolution > 0.0)) throw std::invalid_argument("grid: resolution must be positive");
    cells_.assign(static_cast<std::size_t>(width) * height, 0);
    build_distance_field();
  }

  /// Parses ASCII rows ('#' occupied, anything else free); rows[0] is the top row.
  static OccupancyGrid from_rows(const std::vector<std::string>& rows, double resolution,
                                 Vec2 origin = {}) {
    if (rows.empty() || rows.front().empty()) throw std::invalid_argument("grid: zero-area grid");
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.front().size());
    for (const auto& row : rows)
      if (static_cast<int>(row.size()) != w) throw std::invalid_argument("grid: rows are not rectangular");
    OccupancyGrid g;
    g.width_ = w;
    g.height_ = h;
    if (!(resolution > 0.0)) throw std::invalid_argument("grid: resolution must be positive");
    g.resolution_ = resolution;
    g.origin_ = origin;
    g.cells_.assign(static_cast<std::size_t>(w) * h, 0);
    for (int r = 0; r < h; ++r)
      for (int i = 0; i < w; ++i) g.cells_[g.index(i, h - 1 - r)] = rows[r][i] == '#' ? 1 : 0;
    g.build_distance_field();
    return g;
  }

  std::vector<std::string> to_rows() const {
    std::vector<std::string> rows;
    for (int j = height_ - 1; j >= 0; --j) {
      std::string row(static_cast<std::size_t>(width_), '.');
      for (int i = 0; i < width_; ++i)
        if (occupied(i, j)) row[i] = '#';
      rows.push_back(std::move(row));
    }
    return rows;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  bool has_obstacles() const { return has_obstacles_; }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width_ + i; }
  bool in_bounds(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  bool occupied(int i, int j) const { return cells_[index(i, j)] != 0; }

  void set_occupied(int i, int j, bool occ) {
    cells_[index(i, j)] = occ ? 1 : 0;
    dirty_ = true;
  }

  /// Distance (meters) from the centre of cell (i, j) to the nearest occupied cell centre.
  double cell_distance(int i, int j) const { return distance_field_[index(i, j)]; }

  Vec2 cell_center(int i, int j) const {
    return {origin_.x + (i + 0.5) * resolution_, origin_.y + (j + 0.5) * resolution_};
  }

  std::pair<int, int> cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
            static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
  }

  Vec2 extent_min() const { return origin_; }
  Vec2 extent_max() const { return {origin_.x + width_ * resolution_, origin_.y + height_ * resolution_}; }

  bool contains(Vec2 p) const {
    return p.x >= origin_.x && p.y >= origin_.y && p.x <= extent_max().x && p.y <= extent_max().y;
  }

  /// Exact Euclidean distance transform over cell centres (two separable passes).
  void build_distance_field() {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    if (n == 0) throw std::invalid_argument("grid: zero-area grid");
    distance_field_.assign(n, kInfinity);
    has_obstacles_ = std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t c) { return c != 0; });
    dirty_ = false;
    if (!has_obstacles_) return;

    std::vector<double> sq(n);
    for (std::size_t k = 0; k < n; ++k) sq[k] = cells_[k] ? 0.0 : kInfinity;

    std::vector<double> f, out, z;
    std::vector<int> v;
    f.resize(height_);
    for (int i = 0; i < width_; ++i) {
      f.resize(height_);
      for (int j = 0; j < height_; ++j) f[j] = sq[index(i, j)];
      detail::squared_edt_1d(f, out, v, z);
      for (int j = 0; j < height_; ++j) sq[index(i, j)] = f[j];
    }
    for (int j = 0; j < height_; ++j) {
      f.resize(width_);
      for (int i = 0; i < width_; ++i) f[i] = sq[index(i, j)];
      detail::squared_edt_1d(f, out, v, z);
      for (int i = 0; i < width_; ++i) sq[index(i, j)] = f[i];
    }
    for (std::size_t k = 0; k < n; ++k)
      distance_field_[k] = sq[k] == kInfinity ? kInfinity : std::sqrt(sq[k]) * resolution_;
  }

  /// Bilinear interpolation of the distance field between cell centres.
  /// Points outside the grid see the boundary value plus their distance to the grid.
  double distance_at(Vec2 p) const {
    if (dirty_) throw std::logic_error("grid: distance field is stale; call build_distance_field()");
    if (!has_obstacles_) return kInfinity;
    const double gx = (p.x - origin_.x) / resolution_ - 0.5;
    const double gy = (p.y - origin_.y) / resolution_ - 0.5;
    const double cx = std::clamp(gx, 0.0, double(width_ - 1));
    const double cy = std::clamp(gy, 0.0, double(height_ - 1));
    const double outside = resolution_ * std::hypot(gx - cx, gy - cy);
    const int i0 = std::min(static_cast<int>(cx), width_ - 1);
    const int j0 = std::min(static_cast<int>(cy), height_ - 1);
    const int i1 = std::min(i0 + 1, width_ - 1);
    const int j1 = std::min(j0 + 1, height_ - 1);
    const double fx = cx - i0;
    const double fy = cy - j0;
    const double d00 = cell_distance(i0, j0), d10 = cell_distance(i1, j0);
    const double d01 = cell_distance(i0, j1), d11 = cell_distance(i1, j1);
    const double d = (1 - fy) * ((1 - fx) * d00 + fx * d10) + fy * ((1 - fx) * d01 + fx * d11);
    return d + outside;
  }

  const std::vector<double>& distance_field() const { return distance_field_; }

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  Vec2 origin_{};
  std::vector<std::uint8_t> cells_;
  std::vector<double> distance_field_;
  bool has_obstacles_ = false;
  bool dirty_ = false;
};

struct Waypoint {
  double t = 0.0;
  Vec2 position;
};

/// Disk obstacle moving either at constant velocity (from `position` at time
/// `t_ref`) or along a piecewise-linear waypoint script.
struct DynamicObstacle {
  std::string id;
  Vec2 position;
  Vec2 velocity;
  double t_ref = 0.0;
  double radius = 0.3;
  std::vector<Waypoint> script;

  bool scripted() const { return !script.empty(); }

  void validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("obstacle '" + id + "': radius must be positive");
    for (std::size_t k = 1; k < script.size(); ++k)
      if (!(script[k].t > script[k - 1].t))
        throw std::invalid_argument("obstacle '" + id + "': waypoints must be strictly time-ordered");
  }
};

inline Vec2 predict_obstacle(const DynamicObstacle& o, double t) {
  if (!o.scripted()) return o.position + (t - o.t_ref) * o.velocity;
  const auto& s = o.script;
  if (t <= s.front().t) return s.front().position;
  if (t >= s.back().t) return s.back().position;
  auto it = std::upper_bound(s.begin(), s.end(), t, [](double tt, const Waypoint& w) { return tt < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  return a.position + u * (b.position - a.position);
}

/// Instantaneous velocity (zero before the script starts and after it ends).
inline Vec2 obstacle_velocity(const DynamicObstacle& o, double t) {
  if (!o.scripted()) return o.velocity;
  const auto& s = o.script;
  if (t < s.front().t || t >= s.back().t) return {};
  auto it = std::upper_bound(s.begin(), s.end(), t, [](double tt, const Waypoint& w) { return tt < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  return (1.0 / (b.t - a.t)) * (b.position - a.position);
}

/// Constant-velocity snapshot of an obstacle as seen at time t.
inline DynamicObstacle freeze_obstacle(const DynamicObstacle& o, double t) {
  return {o.id, predict_obstacle(o, t), obstacle_velocity(o, t), t, o.radius, {}};
}

/// Planning snapshot: shared static map plus dynamic obstacles.
struct World {
  std::shared_ptr<const OccupancyGrid> grid;
  std::vector<DynamicObstacle> obstacles;
  double robot_radius = 0.35;
};

inline double static_distance(const World& w, Vec2 p) { return w.grid ? w.grid->distance_at(p) : kInfinity; }

/// Clearance of a disk of `radius` at `p` against the world at time t; 0 means contact.
inline double clearance(const World& w, Vec2 p, double t, double radius) {
  double d = static_distance(w, p);
  for (const auto& o : w.obstacles) d = std::min(d, distance(p, predict_obstacle(o, t)) - o.radius);
  return std::max(0.0, d - radius);
}

inline double distance_to_nearest(const World& w, Vec2 p, double t) { return clearance(w, p, t, w.robot_radius); }

/// Smallest positive s with |rel_pos + rel_vel s| = contact_radius, or infinity.
inline double disk_time_to_contact(Vec2 rel_pos, Vec2 rel_vel, double contact_radius) {
  const double c = rel_pos.squared_norm() - contact_radius * contact_radius;
  if (c <= 0.0) return 0.0;
  const double a = rel_vel.squared_norm();
  const double b = 2.0 * rel_pos.dot(rel_vel);
  if (a < 1e-18 || b >= 0.0) return kInfinity;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInfinity;
  const double q = -0.5 * (b - std::sqrt(disc));  // > 0
  const double s = c / q;                          // smaller root
  return s > kTtcHorizon ? kInfinity : s;
}

/// Ray-march along the direction of motion until the static clearance vanishes.
inline double static_time_to_collision(const OccupancyGrid& g, Vec2 p, Vec2 vel, double radius) {
  const double speed = vel.norm();
  if (speed < 1e-9 || !g.has_obstacles()) return kInfinity;
  const Vec2 dir = (1.0 / speed) * vel;
  const double max_len = speed * kTtcHorizon;
  const double min_step = 0.5 * g.resolution();
  const Vec2 lo = g.extent_min(), hi = g.extent_max();
  auto gap = [&](double s) { return g.distance_at(p + s * dir) - radius; };

  double s_prev = 0.0;
  double d = gap(0.0);
  if (d <= 0.0) return 0.0;
  double s = 0.0;
  while (true) {
    // The interpolated field is at most sqrt(2)-Lipschitz.
    s_prev = s;
    s += std::max(min_step, d / std::numbers::sqrt2);
    if (s > max_len) return kInfinity;
    const Vec2 q = p + s * dir;
    if ((q.x < lo.x && dir.x <= 0) || (q.x > hi.x && dir.x >= 0) || (q.y < lo.y && dir.y <= 0) ||
        (q.y > hi.y && dir.y >= 0))
      return kInfinity;
    d = gap(s);
    if (d <= 0.0) break;
  }
  // bisect the crossing between s_prev (free) and s (hit)
  for (int k = 0; k < 40 && s - s_prev > 1e-9; ++k) {
    const double m = 0.5 * (s_prev + s);
    (gap(m) <= 0.0 ? s : s_prev) = m;
  }
  return s / speed;
}

/// Time until a disk of `radius` at `p` moving with `vel` first touches any hazard,
/// with obstacles predicted from time t0. Zero when already in contact.
inline double time_to_collision(const World& w, Vec2 p, Vec2 vel, double t0, double radius) {
  if (clearance(w, p, t0, radius) <= 0.0) return 0.0;
  double ttc = w.grid ? static_time_to_collision(*w.grid, p, vel, radius) : kInfinity;
  for (const auto& o : w.obstacles) {
    const Vec2 rel_pos = predict_obstacle(o, t0) - p;
    const Vec2 rel_vel = obstacle_velocity(o, t0) - vel;
    ttc = std::min(ttc, disk_time_to_contact(rel_pos, rel_vel, radius + o.radius));
  }
  return ttc;
}

inline double time_to_collision(const World& w, Vec2 p, Vec2 vel, double t0) {
  return time_to_collision(w, p, vel, t0, w.robot_radius);
}

}  // namespace dsmpepc

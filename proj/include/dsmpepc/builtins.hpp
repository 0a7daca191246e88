#pragma once

/// \file
/// Built-in benchmark scenarios: T-shaped corridor with a stationary blocker,
/// two-way narrow corridor, antipodal circle swaps, an open field and a
/// pedestrian hall with scripted walkers.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dsmpepc/scenarios.hpp"

namespace dsmpepc {

using BuiltinParams = std::map<std::string, double>;

/// Rasterises axis-aligned rectangles into ASCII map rows.
class MapBuilder {
 public:
  MapBuilder(double width_m, double height_m, double resolution)
      : res_(resolution),
        w_(static_cast<int>(std::lround(width_m / resolution))),
        h_(static_cast<int>(std::lround(height_m / resolution))),
        cells_(static_cast<std::size_t>(w_) * h_, '.') {}

  /// Marks every cell whose centre lies inside [x0, x1] x [y0, y1].
  MapBuilder& fill(double x0, double y0, double x1, double y1) {
    for (int j = 0; j < h_; ++j)
      for (int i = 0; i < w_; ++i) {
        const double cx = (i + 0.5) * res_, cy = (j + 0.5) * res_;
        if (cx >= x0 && cx <= x1 && cy >= y0 && cy <= y1) cells_[static_cast<std::size_t>(j) * w_ + i] = '#';
      }
    return *this;
  }

  MapBuilder& border(double thickness) {
    const double W = w_ * res_, H = h_ * res_;
    fill(0, 0, W, thickness).fill(0, H - thickness, W, H).fill(0, 0, thickness, H).fill(W - thickness, 0, W, H);
    return *this;
  }

  MapSpec build() const {
    MapSpec m;
    m.resolution = res_;
    for (int j = h_ - 1; j >= 0; --j) m.rows.emplace_back(cells_.begin() + static_cast<std::ptrdiff_t>(j) * w_,
                                                         cells_.begin() + static_cast<std::ptrdiff_t>(j + 1) * w_);
    return m;
  }

 private:
  double res_;
  int w_, h_;
  std::string cells_;
};

namespace detail {

inline double param(const BuiltinParams& p, const char* key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void check_params(const BuiltinParams& p, const std::string& name, std::initializer_list<const char*> allowed) {
  for (const auto& [k, _] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ScenarioError("builtin '" + name + "': unknown parameter '" + k + "'");
  }
}

inline AgentSpec make_agent(const ScenarioConfig& sc, std::string id, Pose start, Pose goal, const Footprint& fp) {
  AgentSpec a;
  a.id = std::move(id);
  a.start = start;
  a.goal = goal;
  a.footprint = fp;
  a.planner = sc.defaults.planner;
  a.cost = sc.defaults.cost;
  a.optimizer = sc.defaults.optimizer;
  return a;
}

inline Footprint footprint_for(const BuiltinParams& p, double radius) {
  if (param(p, "oblong", 0.0) != 0.0) return Footprint::oblong(0.8 * radius, 0.8 * radius);
  return Footprint::disk(radius);
}

}  // namespace detail

/// Single robot crossing an empty square world.
inline ScenarioConfig builtin_open_field(const BuiltinParams& p = {}) {
  detail::check_params(p, "open_field", {"size", "goal_distance", "radius", "duration", "seed"});
  const double size = detail::param(p, "size", 20.0);
  const double gd = detail::param(p, "goal_distance", 5.0);
  const double radius = detail::param(p, "radius", 0.35);
  if (gd <= 0.0 || gd + 2.0 * radius > size) throw ScenarioError("builtin 'open_field': infeasible geometry");
  ScenarioConfig sc;
  sc.name = "open_field";
  sc.map = MapBuilder(size, size, 0.1).build();
  sc.duration = detail::param(p, "duration", 60.0);
  sc.seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1.0));
  const double y = 0.5 * size;
  sc.agents.push_back(detail::make_agent(sc, "robot", make_pose(0.5 * (size - gd), y, 0.0),
                                         make_pose(0.5 * (size + gd), y, 0.0), Footprint::disk(radius)));
  validate(sc);
  return sc;
}

/// A vertical corridor joining a horizontal one; the moving robot turns right at
/// the junction while a stationary robot stands at the entrance of the right arm.
inline ScenarioConfig builtin_t_corridor(const BuiltinParams& p = {}) {
  detail::check_params(p, "t_corridor", {"corridor_width", "radius", "blocker_offset", "sigma_d", "duration", "seed"});
  const double w = detail::param(p, "corridor_width", 2.0);
  const double radius = detail::param(p, "radius", 0.35);
  const double blocker_offset = detail::param(p, "blocker_offset", 0.15);
  if (w < 2.0 * radius + 0.2) throw ScenarioError("builtin 't_corridor': corridor narrower than the robot");

  const double wall = 0.5;
  const double stem_x0 = 6.0, stem_x1 = stem_x0 + w;  // vertical corridor
  const double arm_y0 = 9.0, arm_y1 = arm_y0 + w;     // horizontal corridor
  const double W = 16.0, H = arm_y1 + wall + 0.5;
  ScenarioConfig sc;
  sc.name = "t_corridor";
  MapBuilder carve(W, H, 0.1);
  carve.fill(0, 0, stem_x0, arm_y0)             // left of the stem
      .fill(stem_x1, 0, W, arm_y0)              // right of the stem
      .fill(0, arm_y1, W, H)                    // above the arm
      .fill(0, 0, W, wall)                      // bottom cap
      .fill(0, 0, wall, H)
      .fill(W - wall, 0, W, H);
  sc.map = carve.build();
  sc.duration = detail::param(p, "duration", 60.0);
  sc.seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1.0));
  sc.defaults.cost.sigma_d = detail::param(p, "sigma_d", 0.14);
  const double cx = 0.5 * (stem_x0 + stem_x1);
  sc.agents.push_back(detail::make_agent(sc, "mover", make_pose(cx, 2.0, kPi / 2), make_pose(W - 2.0, 0.5 * (arm_y0 + arm_y1), 0.0),
                                         Footprint::disk(radius)));
  const Pose blocker = make_pose(stem_x1 + blocker_offset, arm_y0 + radius + 0.15, kPi);
  sc.agents.push_back(detail::make_agent(sc, "blocker", blocker, blocker, Footprint::disk(radius)));
  validate(sc);
  return sc;
}

/// Two robots swapping ends of a corridor of the given width.
inline ScenarioConfig builtin_narrow_corridor(const BuiltinParams& p = {}) {
  detail::check_params(p, "narrow_corridor", {"width", "length", "radius", "duration", "seed", "oblong"});
  const double radius = detail::param(p, "radius", 0.35);
  const double width = detail::param(p, "width", 6.0 * radius);
  const double length = detail::param(p, "length", 12.0);
  if (width <= 2.0 * radius) throw ScenarioError("builtin 'narrow_corridor': corridor narrower than the robot");
  const double wall = 0.5;
  const double H = width + 2.0 * wall;
  const double W = length + 2.0 * wall;
  ScenarioConfig sc;
  sc.name = "narrow_corridor";
  sc.map = MapBuilder(W, H, 0.1).fill(0, 0, W, wall).fill(0, H - wall, W, H).fill(0, 0, wall, H).fill(W - wall, 0, W, H).build();
  sc.duration = detail::param(p, "duration", 60.0);
  sc.seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1.0));
  const double y = 0.5 * H;
  const double x0 = wall + 1.0, x1 = W - wall - 1.0;
  const Footprint fp = detail::footprint_for(p, radius);
  sc.agents.push_back(detail::make_agent(sc, "east", make_pose(x0, y, 0.0), make_pose(x1, y, 0.0), fp));
  sc.agents.push_back(detail::make_agent(sc, "west", make_pose(x1, y, kPi), make_pose(x0, y, kPi), fp));
  validate(sc);
  return sc;
}

/// n robots evenly spaced on a circle of radius R, each heading for the antipodal point.
inline ScenarioConfig builtin_circle(const BuiltinParams& p = {}) {
  detail::check_params(p, "circle", {"n", "R", "radius", "duration", "seed", "oblong"});
  const int n = static_cast<int>(detail::param(p, "n", 4.0));
  const double R = detail::param(p, "R", 4.0);
  const double radius = detail::param(p, "radius", 0.35);
  if (n < 1) throw ScenarioError("builtin 'circle': n must be positive");
  const Footprint fp = detail::footprint_for(p, radius);
  if (n > 1 && 2.0 * R * std::sin(kPi / n) < 2.0 * fp.bounding_radius())
    throw ScenarioError("builtin 'circle': agents overlap on the circle");
  const double size = 2.0 * R + 4.0;
  ScenarioConfig sc;
  sc.name = "circle";
  sc.map = MapBuilder(size, size, 0.1).build();
  sc.duration = detail::param(p, "duration", 60.0);
  sc.seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1.0));
  const double c = 0.5 * size;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    const Pose start = make_pose(c + R * std::cos(phi), c + R * std::sin(phi), phi + kPi);
    const Pose goal = make_pose(c - R * std::cos(phi), c - R * std::sin(phi), phi + kPi);
    sc.agents.push_back(detail::make_agent(sc, "agent" + std::to_string(k), start, goal, fp));
  }
  validate(sc);
  return sc;
}

/// Hall with pillars and scripted pedestrians crossing the robot's path.
inline ScenarioConfig builtin_pedestrian_hall(const BuiltinParams& p = {}) {
  detail::check_params(p, "pedestrian_hall", {"pedestrians", "duration", "seed", "radius"});
  const int peds = static_cast<int>(detail::param(p, "pedestrians", 4.0));
  const double radius = detail::param(p, "radius", 0.35);
  const double W = 18.0, H = 10.0;
  ScenarioConfig sc;
  sc.name = "pedestrian_hall";
  MapBuilder mb(W, H, 0.1);
  mb.border(0.4).fill(5.0, 2.0, 5.8, 2.8).fill(5.0, 7.2, 5.8, 8.0).fill(11.0, 4.6, 11.8, 5.4).fill(14.5, 0.4, 15.0, 3.0);
  sc.map = mb.build();
  sc.duration = detail::param(p, "duration", 60.0);
  sc.seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1.0));
  sc.agents.push_back(
      detail::make_agent(sc, "robot", make_pose(1.5, 5.0, 0.0), make_pose(16.5, 5.0, 0.0), Footprint::disk(radius)));
  // walkers at ~1 m/s; extra walkers are copies shifted across the hall
  const std::vector<std::vector<Waypoint>> tracks{
      {{0.0, {8.0, 9.0}}, {8.0, {8.5, 1.0}}, {16.0, {8.0, 9.0}}},
      {{0.0, {16.0, 8.5}}, {14.0, {2.0, 8.0}}},
      {{2.0, {13.0, 1.0}}, {9.0, {13.5, 9.0}}, {16.0, {13.0, 1.0}}},
      {{0.0, {3.5, 1.0}}, {8.0, {3.0, 9.0}}},
  };
  for (int k = 0; k < peds; ++k) {
    DynamicObstacle o;
    o.id = "ped" + std::to_string(k);
    o.radius = 0.3;
    const auto& base = tracks[static_cast<std::size_t>(k) % tracks.size()];
    const double shift = 1.5 * static_cast<double>(k / static_cast<int>(tracks.size()));
    for (const auto& w : base) o.script.push_back({w.t, {std::min(W - 1.0, w.position.x + shift), w.position.y}});
    o.position = o.script.front().position;
    sc.scripted_obstacles.push_back(std::move(o));
  }
  validate(sc);
  return sc;
}

struct BuiltinInfo {
  std::string name;
  std::string description;
  std::function<ScenarioConfig(const BuiltinParams&)> make;
};

inline const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog{
      {"t_corridor", "turn into a side corridor past a stationary robot (corridor_width, blocker_offset, sigma_d, radius)",
       builtin_t_corridor},
      {"narrow_corridor", "two robots swap ends of a corridor (width, length, radius, oblong)", builtin_narrow_corridor},
      {"circle", "n robots swap antipodal positions on a circle (n, R, radius, oblong)", builtin_circle},
      {"open_field", "single robot, empty world (size, goal_distance, radius)", builtin_open_field},
      {"pedestrian_hall", "hall with scripted pedestrians (pedestrians, radius)", builtin_pedestrian_hall},
  };
  return catalog;
}

inline ScenarioConfig builtin(const std::string& name, const BuiltinParams& params = {}) {
  for (const auto& b : builtin_catalog())
    if (b.name == name) return b.make(params);
  throw ScenarioError("unknown builtin scenario '" + name + "'");
}

}  // namespace dsmpepc

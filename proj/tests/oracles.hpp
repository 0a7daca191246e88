#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call the library routine they are compared against.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dsmpepc/dsmpepc.hpp"

namespace oracle {

using namespace dsmpepc;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline OccupancyGrid random_grid(int w, int h, double density, std::mt19937_64& rng, double res = 0.1) {
  std::bernoulli_distribution occ(density);
  std::vector<std::string> rows(h, std::string(w, '.'));
  for (auto& row : rows)
    for (auto& c : row) c = occ(rng) ? '#' : '.';
  return OccupancyGrid::from_rows(rows, res);
}

struct RandomCase {
  std::shared_ptr<const OccupancyGrid> grid;
  std::shared_ptr<World> world = std::make_shared<World>();
  std::shared_ptr<NavigationFunction> nav;
  CostContext ctx;
  Trajectory traj;
};

/// Random sparse world, goal and closed-loop trajectory.
inline RandomCase random_case(std::mt19937_64& rng, const PlannerConfig& cfg) {
  std::uniform_real_distribution<double> u(0, 1);
  RandomCase c;
  c.grid = std::make_shared<const OccupancyGrid>(random_grid(80, 80, 0.01 + 0.04 * u(rng), rng, 0.1));
  c.world->grid = c.grid;
  c.world->robot_radius = 0.25;
  for (int o = 0; o < 2; ++o)
    c.world->obstacles.push_back({"o", {8 * u(rng), 8 * u(rng)}, {u(rng) - 0.5, u(rng) - 0.5}, 0, 0.3, {}});
  const Vec2 goal{1 + 6 * u(rng), 1 + 6 * u(rng)};
  c.nav = std::make_shared<NavigationFunction>(c.grid, goal, 0.3);
  c.ctx = CostContext{c.world.get(), c.nav.get(), Footprint::disk(0.25), goal, cfg.v_limit};
  const RobotState s{make_pose(1 + 6 * u(rng), 1 + 6 * u(rng), (2 * u(rng) - 1) * kPi), u(rng), 0, 0};
  const TrajectoryParam z{u(rng) * cfg.r_max(), (2 * u(rng) - 1) * kPi, (2 * u(rng) - 1) * kPi, u(rng)};
  c.traj = rollout(s, z, cfg);
  return c;
}

/// Distance from every cell centre to the nearest occupied cell centre, by exhaustive search.
inline std::vector<double> brute_force_distance_field(const OccupancyGrid& g) {
  std::vector<std::pair<int, int>> occupied;
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i)
      if (g.occupied(i, j)) occupied.emplace_back(i, j);
  std::vector<double> out(static_cast<std::size_t>(g.width()) * g.height(), kInf);
  for (int j = 0; j < g.height(); ++j)
    for (int i = 0; i < g.width(); ++i) {
      long best = std::numeric_limits<long>::max();
      for (auto [oi, oj] : occupied) best = std::min<long>(best, long(oi - i) * (oi - i) + long(oj - j) * (oj - j));
      if (!occupied.empty()) out[static_cast<std::size_t>(j) * g.width() + i] = std::sqrt(double(best)) * g.resolution();
    }
  return out;
}

/// First time a moving point enters the disk of `contact_radius` about the origin,
/// by marching in steps of dt; returns infinity if it never does before `horizon`.
inline double fine_step_ttc(Vec2 rel_pos, Vec2 rel_vel, double contact_radius, double dt = 2e-4, double horizon = 100.0) {
  if (rel_pos.norm() <= contact_radius) return 0.0;
  const long steps = static_cast<long>(horizon / dt) + 1;
  for (long k = 1; k <= steps; ++k) {
    const double t = k * dt;
    const Vec2 p{rel_pos.x + rel_vel.x * t, rel_pos.y + rel_vel.y * t};
    if (std::hypot(p.x, p.y) <= contact_radius) return t;
  }
  return kInf;
}

/// Closed-loop rollout written directly from the control-law equations, with the
/// control held over each planning step and the pose integrated by explicit Euler
/// at h / substeps.
inline std::vector<Pose> fine_rollout(const RobotState& start, const TrajectoryParam& z, const PlannerConfig& cfg,
                                      int substeps = 100) {
  const double pi = std::acos(-1.0);
  auto wrap = [&](double a) {
    while (a > pi) a -= 2 * pi;
    while (a <= -pi) a += 2 * pi;
    return a;
  };
  const double los0 = start.pose.heading - z.delta;
  const double tx = start.pose.x + z.r * std::cos(los0), ty = start.pose.y + z.r * std::sin(los0);
  const double th = los0 + z.theta;

  double x = start.pose.x, y = start.pose.y, hd = start.pose.heading, v = start.v, w = start.omega;
  std::vector<Pose> out{start.pose};
  const int n = static_cast<int>(std::lround(cfg.horizon_T / cfg.step_h));
  const auto& g = cfg.gains;
  for (int i = 0; i < n; ++i) {
    const double dx = tx - x, dy = ty - y;
    const double r = std::hypot(dx, dy);
    const double los = r < 1e-6 ? hd : std::atan2(dy, dx);
    const double theta = wrap(th - los), delta = wrap(hd - los);
    const double bracket =
        g.k2 * (delta - std::atan(-g.k1 * theta)) + (1 + g.k1 / (1 + g.k1 * theta * g.k1 * theta)) * std::sin(delta);
    double kappa = r < 1e-6 ? std::max(-20.0, std::min(20.0, -bracket / 1e-6)) : -bracket / r;
    double vc = z.v_max <= 0 ? 0.0 : z.v_max / (1 + g.curvature_beta * std::pow(std::abs(kappa), g.curvature_lambda));
    if (r < g.r_slowdown) vc *= r / g.r_slowdown;
    const double vhi = std::min(cfg.v_limit, v + cfg.accel_limit * cfg.step_h);
    const double vlo = std::min(std::max(0.0, v - cfg.accel_limit * cfg.step_h), vhi);
    vc = std::max(vlo, std::min(vhi, vc));
    double wc = std::max(-cfg.omega_limit, std::min(cfg.omega_limit, kappa * vc));
    const double wlo = std::max(-cfg.omega_limit, w - cfg.alpha_limit * cfg.step_h);
    const double whi = std::min(cfg.omega_limit, w + cfg.alpha_limit * cfg.step_h);
    if (wlo <= whi) wc = std::max(wlo, std::min(whi, wc));
    v = vc;
    w = wc;
    const double dt = cfg.step_h / substeps;
    for (int k = 0; k < substeps; ++k) {
      x += v * std::cos(hd) * dt;
      y += v * std::sin(hd) * dt;
      hd += w * dt;
    }
    hd = wrap(hd);
    out.push_back({x, y, hd});
  }
  return out;
}

struct GridSearchResult {
  double best_cost = kInf;
  TrajectoryParam best;
};

/// Exhaustive search over an evenly spaced grid spanning the parameter bounds.
inline GridSearchResult dense_grid_search(const PlanRequest& req, int nr = 41, int nt = 21, int nd = 21, int nv = 11) {
  const ParamBounds b = req.optimizer.resolved_bounds(req.planner);
  auto at = [](const Interval& iv, int k, int n) { return n == 1 ? iv.lo : iv.lo + k * (iv.hi - iv.lo) / (n - 1); };
  GridSearchResult out;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < nd; ++k)
        for (int l = 0; l < nv; ++l) {
          const TrajectoryParam z{at(b[0], i, nr), at(b[1], j, nt), at(b[2], k, nd), at(b[3], l, nv)};
          const Trajectory traj = rollout(req.current, z, req.planner);
          const double c = trajectory_cost(traj, req.cost_context(), req.cost).total;
          if (c < out.best_cost) {
            out.best_cost = c;
            out.best = z;
          }
        }
  return out;
}

/// Small fixed planning problems shared by the optimizer tests.
struct Scene {
  std::string name;
  std::shared_ptr<const OccupancyGrid> grid;
  std::vector<DynamicObstacle> obstacles;
  RobotState start;
  Pose goal;
  CostMode mode = CostMode::ds_mpepc;

  World world() const {
    World w;
    w.grid = grid;
    w.obstacles = obstacles;
    return w;
  }
};

inline std::vector<Scene> fixed_scenes() {
  auto empty = std::make_shared<const OccupancyGrid>(OccupancyGrid::from_rows(MapBuilder(10, 10, 0.1).build().rows, 0.1));
  auto walled = std::make_shared<const OccupancyGrid>(
      OccupancyGrid::from_rows(MapBuilder(10, 10, 0.1).border(0.3).fill(5.0, 3.0, 5.4, 7.0).build().rows, 0.1));
  auto corridor = std::make_shared<const OccupancyGrid>(
      OccupancyGrid::from_rows(MapBuilder(10, 10, 0.1).fill(0, 0, 10, 4.0).fill(0, 6.0, 10, 10).build().rows, 0.1));
  return {
      {"open", empty, {}, {make_pose(2, 5, 0), 0, 0, 0}, make_pose(5, 5, 0), CostMode::ds_mpepc},
      {"wall", walled, {}, {make_pose(3, 5, 0), 0.5, 0, 0}, make_pose(8, 5, 0), CostMode::ds_mpepc},
      {"corridor", corridor, {}, {make_pose(1, 5, 0.3), 0.3, 0, 0}, make_pose(8, 5, 0), CostMode::baseline_mpepc},
      {"crossing", empty, {{"o", {5, 2}, {0, 1}, 0, 0.35, {}}}, {make_pose(2, 5, 0), 0.8, 0, 0}, make_pose(8, 5, 0),
       CostMode::ds_mpepc},
      {"contact", walled, {}, {make_pose(4.75, 5, 0), 0, 0, 0}, make_pose(8, 5, 0), CostMode::ds_mpepc},
  };
}

}  // namespace oracle

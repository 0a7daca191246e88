#pragma once

/// \file
/// Per-cycle selection of the trajectory parameter z* minimising the expected
/// trajectory cost: fixed candidates + scrambled Sobol samples, then budgeted
/// Nelder-Mead refinement from the best few.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "dsmpepc/cost.hpp"
#include "dsmpepc/kinematics.hpp"
#include "dsmpepc/nelder_mead.hpp"
#include "dsmpepc/sobol.hpp"

namespace dsmpepc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-dimension bounds for (r, theta, delta, v_max).
using ParamBounds = std::array<Interval, 4>;

inline ParamBounds default_bounds(const PlannerConfig& cfg) {
  return {Interval{0.0, cfg.r_max()}, Interval{-kPi, kPi}, Interval{-kPi, kPi}, Interval{0.0, cfg.v_limit}};
}

struct OptimizerConfig {
  std::size_t n_global_samples = 400;
  std::size_t n_refine_seeds = 3;
  std::size_t refine_max_evals = 60;
  std::uint64_t seed = 1;
  std::optional<ParamBounds> bounds;  // defaults derived from the planner config

  ParamBounds resolved_bounds(const PlannerConfig& cfg) const { return bounds ? *bounds : default_bounds(cfg); }

  void validate() const {
    if (n_global_samples == 0) throw std::invalid_argument("optimizer: n_global_samples must be positive");
    if (n_refine_seeds > n_global_samples)
      throw std::invalid_argument("optimizer: n_refine_seeds must not exceed n_global_samples");
    if (bounds)
      for (const auto& b : *bounds)
        if (!(b.lo <= b.hi)) throw std::invalid_argument("optimizer: bounds must be well-ordered");
  }
};

/// Previous cycle's optimum, kept as a world-frame target.
struct WarmStart {
  Pose target;
  double v_max = 0.0;
};

struct PlanRequest {
  RobotState current;
  Pose goal;
  const World* world = nullptr;
  const NavigationFunction* nav = nullptr;
  Footprint footprint;
  PlannerConfig planner;
  CostParams cost;
  OptimizerConfig optimizer;
  std::optional<WarmStart> warm_start;

  CostContext cost_context() const { return {world, nav, footprint, goal.position(), planner.v_limit}; }
};

struct EvaluatedCandidate {
  TrajectoryParam param;
  double cost = 0.0;
};

struct PlanResult {
  TrajectoryParam best_param;
  double best_cost = kInfinity;
  Trajectory best_trajectory;
  CostBreakdown best_breakdown;
  std::vector<EvaluatedCandidate> evaluated;
};

/// Lexicographic order on (cost, r, theta, delta, v_max).
inline bool candidate_less(const EvaluatedCandidate& a, const EvaluatedCandidate& b) {
  return std::tie(a.cost, a.param.r, a.param.theta, a.param.delta, a.param.v_max) <
         std::tie(b.cost, b.param.r, b.param.theta, b.param.delta, b.param.v_max);
}

/// Projects r and v_max into their bounds and wraps the angles.
inline TrajectoryParam normalize_param(TrajectoryParam z, const ParamBounds& b) {
  z.r = std::clamp(z.r, b[0].lo, b[0].hi);
  z.theta = wrap_angle(z.theta);
  z.delta = wrap_angle(z.delta);
  z.v_max = std::clamp(z.v_max, b[3].lo, b[3].hi);
  return z;
}

/// Rollout followed by cost evaluation.
inline std::pair<Trajectory, CostBreakdown> evaluate_candidate(const TrajectoryParam& z, const PlanRequest& req) {
  Trajectory traj = rollout(req.current, z, req.planner);
  CostBreakdown cost = trajectory_cost(traj, req.cost_context(), req.cost);
  return {std::move(traj), std::move(cost)};
}

inline double candidate_cost(const TrajectoryParam& z, const PlanRequest& req) {
  const Trajectory traj = rollout(req.current, z, req.planner);
  return trajectory_cost(traj, req.cost_context(), req.cost).total;
}

/// The fixed candidates evaluated every cycle: null, warm start, direct-to-goal.
inline std::vector<TrajectoryParam> anchor_candidates(const PlanRequest& req, const ParamBounds& b) {
  std::vector<TrajectoryParam> out;
  out.push_back(TrajectoryParam{0.0, 0.0, 0.0, 0.0});
  if (req.warm_start) {
    const auto c = egocentric_coords(req.current.pose, req.warm_start->target);
    out.push_back(normalize_param({c.r, c.theta, c.delta, req.warm_start->v_max}, b));
  }
  const auto g = egocentric_coords(req.current.pose, req.goal);
  out.push_back(normalize_param({g.r, g.theta, g.delta, req.planner.v_limit}, b));
  return out;
}

inline PlanResult plan(const PlanRequest& req) {
  if (!req.world) throw std::invalid_argument("plan: missing world");
  if (!req.current.finite()) throw std::invalid_argument("plan: non-finite current state");
  const ParamBounds b = req.optimizer.resolved_bounds(req.planner);

  PlanResult result;
  auto& evaluated = result.evaluated;
  evaluated.reserve(req.optimizer.n_global_samples + req.optimizer.n_refine_seeds * req.optimizer.refine_max_evals);
  auto evaluate = [&](const TrajectoryParam& raw) {
    const TrajectoryParam z = normalize_param(raw, b);
    const double c = candidate_cost(z, req);
    evaluated.push_back({z, c});
    return c;
  };

  // global phase
  for (const auto& z : anchor_candidates(req, b)) {
    if (evaluated.size() >= req.optimizer.n_global_samples) break;
    evaluate(z);
  }
  Sobol4 sobol(req.optimizer.seed);
  while (evaluated.size() < req.optimizer.n_global_samples) {
    const auto u = sobol.next();
    evaluate({b[0].lo + u[0] * (b[0].hi - b[0].lo), b[1].lo + u[1] * (b[1].hi - b[1].lo),
              b[2].lo + u[2] * (b[2].hi - b[2].lo), b[3].lo + u[3] * (b[3].hi - b[3].lo)});
  }

  // local phase: angles are left unwrapped inside the simplex and wrapped on evaluation
  std::vector<EvaluatedCandidate> seeds(evaluated.begin(), evaluated.end());
  const std::size_t n_seeds = std::min(req.optimizer.n_refine_seeds, seeds.size());
  std::partial_sort(seeds.begin(), seeds.begin() + n_seeds, seeds.end(), candidate_less);
  const std::array<double, 4> steps{0.1 * (b[0].hi - b[0].lo) + 1e-3, 0.15 * (b[1].hi - b[1].lo),
                                    0.15 * (b[2].hi - b[2].lo), 0.25 * (b[3].hi - b[3].lo) + 1e-3};
  for (std::size_t k = 0; k < n_seeds; ++k) {
    const auto& s = seeds[k].param;
    std::array<double, 4> dir = steps;
    // step inward from an upper bound so the simplex does not collapse under projection
    if (s.r + dir[0] > b[0].hi) dir[0] = -dir[0];
    if (s.v_max + dir[3] > b[3].hi) dir[3] = -dir[3];
    nelder_mead<4>(
        [&](const std::array<double, 4>& x) { return evaluate({x[0], x[1], x[2], x[3]}); },
        std::array<double, 4>{s.r, s.theta, s.delta, s.v_max}, seeds[k].cost, dir, req.optimizer.refine_max_evals);
  }

  const auto best = std::min_element(evaluated.begin(), evaluated.end(), candidate_less);
  result.best_param = best->param;
  auto [traj, breakdown] = evaluate_candidate(best->param, req);
  result.best_cost = breakdown.total;
  result.best_trajectory = std::move(traj);
  result.best_breakdown = std::move(breakdown);
  return result;
}

}  // namespace dsmpepc

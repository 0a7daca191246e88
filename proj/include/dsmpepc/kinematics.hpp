#pragma once

/// \file
/// Closed-loop unicycle rollout of the pose-following control law over a
/// receding horizon.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dsmpepc/geometry.hpp"

namespace dsmpepc {

struct RobotState {
  Pose pose;
  double v = 0.0;      // linear velocity applied over the segment ending at this state
  double omega = 0.0;  // angular velocity applied over the segment ending at this state
  double t = 0.0;

  Vec2 velocity() const { return v * Vec2::unit(pose.heading); }
  bool finite() const {
    return std::isfinite(pose.x) && std::isfinite(pose.y) && std::isfinite(pose.heading) &&
           std::isfinite(v) && std::isfinite(omega) && std::isfinite(t);
  }
};

/// The planner's decision variable z* = (r, theta, delta, v_max).
struct TrajectoryParam {
  double r = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  double v_max = 0.0;

  EgocentricCoords coords() const { return {r, theta, delta}; }
  bool is_null() const { return r == 0.0; }
  friend bool operator==(const TrajectoryParam&, const TrajectoryParam&) = default;
};

struct PlannerConfig {
  double horizon_T = 5.0;
  double step_h = 0.2;
  double v_limit = 1.0;
  double omega_limit = 1.5;
  double accel_limit = 1.0;
  double alpha_limit = 2.0 * kPi;
  ControlGains gains;

  /// Number of segments N = T / h.
  std::size_t steps() const { return static_cast<std::size_t>(std::lround(horizon_T / step_h)); }

  void validate() const {
    if (!(step_h > 0.0) || !(horizon_T > 0.0))
      throw std::invalid_argument("planner: horizon_T and step_h must be positive");
    const double n = horizon_T / step_h;
    if (std::abs(n - std::round(n)) > 1e-9 || std::round(n) < 1.0)
      throw std::invalid_argument("planner: horizon_T / step_h must be a positive integer");
    if (!(v_limit > 0.0) || !(omega_limit > 0.0) || !(accel_limit > 0.0) || !(alpha_limit > 0.0))
      throw std::invalid_argument("planner: velocity and acceleration limits must be positive");
    if (!(gains.k1 > 0.0) || !(gains.k2 > 0.0) || gains.curvature_beta < 0.0 ||
        gains.curvature_lambda < 1.0 || !(gains.r_slowdown > 0.0))
      throw std::invalid_argument("planner: invalid control gains");
  }

  /// Default upper bound on z.r: v_limit * T + 5 m.
  double r_max() const { return v_limit * horizon_T + 5.0; }
};

struct Trajectory {
  std::vector<RobotState> states;  // N + 1 states at t0, t0 + h, ..., t0 + N h
  TrajectoryParam param;
  Pose target;
};

/// Exact unicycle step for constant (v, omega) over duration h.
inline Pose arc_step(const Pose& p, double v, double omega, double h) {
  const double half = 0.5 * omega * h;
  // chord length v h sinc(omega h / 2), taken along the mean heading
  const double chord = std::abs(omega) < 1e-9 ? v * h : v * h * std::sin(half) / half;
  const double mid = p.heading + half;
  return {p.x + chord * std::cos(mid), p.y + chord * std::sin(mid), wrap_angle(p.heading + omega * h)};
}

struct Control {
  double v = 0.0;
  double omega = 0.0;
};

/// Control law output toward a fixed target, clamped to the velocity limits
/// and rate limited relative to the previous control.
inline Control control_step(const RobotState& s, const Pose& target, double v_max,
                            const PlannerConfig& cfg) {
  const EgocentricCoords c = egocentric_coords(s.pose, target);
  const double kappa = control_law_curvature(c, cfg.gains);
  const double dv = cfg.accel_limit * cfg.step_h;
  const double dw = cfg.alpha_limit * cfg.step_h;

  const double v_hi = std::min(cfg.v_limit, s.v + dv);
  const double v_lo = std::min(std::max(0.0, s.v - dv), v_hi);
  const double v = std::clamp(velocity_modulation(kappa, v_max, c.r, cfg.gains), v_lo, v_hi);

  double w = std::clamp(kappa * v, -cfg.omega_limit, cfg.omega_limit);
  const double w_lo = std::max(-cfg.omega_limit, s.omega - dw);
  const double w_hi = std::min(cfg.omega_limit, s.omega + dw);
  w = w_lo <= w_hi ? std::clamp(w, w_lo, w_hi) : std::clamp(w, -cfg.omega_limit, cfg.omega_limit);
  return {v, w};
}

inline RobotState advance(const RobotState& s, const Control& u, double h) {
  return {arc_step(s.pose, u.v, u.omega, h), u.v, u.omega, s.t + h};
}

/// Simulates the closed-loop trajectory defined by z from `start`.
inline Trajectory rollout(const RobotState& start, const TrajectoryParam& z, const PlannerConfig& cfg) {
  if (!start.finite()) throw std::invalid_argument("rollout: non-finite start state");
  const std::size_t n = cfg.steps();
  Trajectory traj;
  traj.param = z;
  traj.target = target_from_coords(start.pose, z.coords());
  traj.states.reserve(n + 1);
  traj.states.push_back(start);
  for (std::size_t i = 1; i <= n; ++i) {
    const RobotState& prev = traj.states.back();
    RobotState next = advance(prev, control_step(prev, traj.target, z.v_max, cfg), cfg.step_h);
    next.t = start.t + static_cast<double>(i) * cfg.step_h;
    traj.states.push_back(next);
  }
  return traj;
}

}  // namespace dsmpepc

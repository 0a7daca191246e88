#pragma once

/// \file
/// Egocentric (r, theta, delta) coordinates relative to a target pose and the
/// smooth pose-following control law that drives a unicycle onto that target.

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dsmpepc {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  constexpr double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }

  static Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Planar pose. Heading is kept in (-pi, pi] by every function in this library.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

inline Pose make_pose(double x, double y, double heading) { return {x, y, wrap_angle(heading)}; }

struct EgocentricCoords {
  double r = 0.0;
  double theta = 0.0;  // target heading relative to the line of sight
  double delta = 0.0;  // robot heading relative to the line of sight
};

struct ControlGains {
  double k1 = 1.2;
  double k2 = 3.0;
  double curvature_beta = 0.4;
  double curvature_lambda = 2.0;
  double r_slowdown = 1.0;  // meters; linear ramp-down of speed inside this radius
};

/// Below this separation the line of sight is undefined.
inline constexpr double kREpsilon = 1e-6;
/// Curvature bound applied at the equilibrium-point singularity.
inline constexpr double kKappaMax = 20.0;

inline EgocentricCoords egocentric_coords(const Pose& robot, const Pose& target) {
  const double dx = target.x - robot.x;
  const double dy = target.y - robot.y;
  const double r = std::hypot(dx, dy);
  const double los = r < kREpsilon ? robot.heading : std::atan2(dy, dx);
  return {r, wrap_angle(target.heading - los), wrap_angle(robot.heading - los)};
}

/// Inverse of egocentric_coords: the world-frame target described by (r, theta, delta).
inline Pose target_from_coords(const Pose& robot, const EgocentricCoords& c) {
  const double los = wrap_angle(robot.heading - c.delta);
  return {robot.x + c.r * std::cos(los), robot.y + c.r * std::sin(los), wrap_angle(los + c.theta)};
}

/// Curvature kappa = omega / v of the pose-following law
///   omega = -(v/r) [k2 (delta - atan(-k1 theta)) + (1 + k1 / (1 + (k1 theta)^2)) sin(delta)].
inline double control_law_curvature(const EgocentricCoords& c, const ControlGains& g) {
  const double k1t = g.k1 * c.theta;
  const double bracket =
      g.k2 * (c.delta - std::atan(-k1t)) + (1.0 + g.k1 / (1.0 + k1t * k1t)) * std::sin(c.delta);
  if (c.r < kREpsilon) return std::clamp(-bracket / kREpsilon, -kKappaMax, kKappaMax);
  return -bracket / c.r;
}

/// Linear speed along a path of curvature kappa: v_max / (1 + beta |kappa|^lambda),
/// ramped to zero as the robot closes on the target.
inline double velocity_modulation(double kappa, double v_max, double r, const ControlGains& g) {
  if (v_max <= 0.0) return 0.0;
  double v = v_max / (1.0 + g.curvature_beta * std::pow(std::abs(kappa), g.curvature_lambda));
  if (r < g.r_slowdown) v *= std::max(0.0, r) / g.r_slowdown;
  return std::clamp(v, 0.0, v_max);
}

}  // namespace dsmpepc

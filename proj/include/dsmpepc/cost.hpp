#pragma once

/// \file
/// Expected trajectory cost. Two modes share one evaluator:
///
///   baseline_mpepc:  J  = sum_i p_s_i J_progress_i + J_action_i + (1 - p_s_i) J_collision_i
///                    with p_c = exp(-d_o^2 / sigma_d^2)
///   ds_mpepc:        J~ = same sum with the anticipatory collision probability
///                    p~_c = p_c (1 - a exp(-(1/TTC)^2 / sigma_{1/TTC}^2)),
///                    plus the bounded terminal bonus
///                    J_terminal = -p_s_N exp(-(1/TTG)^2 / sigma_{1/TTG}^2) exp(-(1/TTC_N)^2 / sigma_{1/TTC}^2).
///
/// Segment i runs from state i-1 to state i. Its obstacle distance is the
/// smaller clearance of its two endpoints, so segment 1 always sees the start
/// state and a start in contact zeroes every survivability.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsmpepc/kinematics.hpp"
#include "dsmpepc/navigation.hpp"
#include "dsmpepc/world.hpp"

namespace dsmpepc {

enum class CostMode { baseline_mpepc, ds_mpepc };

inline std::string_view to_string(CostMode m) { return m == CostMode::ds_mpepc ? "ds" : "mpepc"; }

inline CostMode parse_cost_mode(std::string_view s) {
  if (s == "ds" || s == "ds_mpepc") return CostMode::ds_mpepc;
  if (s == "mpepc" || s == "baseline" || s == "baseline_mpepc") return CostMode::baseline_mpepc;
  throw std::invalid_argument("unknown cost mode '" + std::string(s) + "'");
}

struct CostParams {
  double sigma_d = 0.1;
  double a = 0.7;
  double sigma_inv_ttc = 0.5;
  double sigma_inv_ttg = 1e-3;
  double w_progress = 1.0;
  double w_action_v = 0.02;
  double w_action_w = 0.02;
  double c_collision = 1.0;
  double goal_tolerance = 0.3;
  double v_epsilon = 1e-3;
  bool use_terminal = true;  // ds mode only
  CostMode mode = CostMode::ds_mpepc;

  void validate() const {
    if (!(sigma_d > 0.0)) throw std::invalid_argument("cost: sigma_d must be positive");
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("cost: a must lie in [0, 1)");
    if (!(sigma_inv_ttc > 0.0) || !(sigma_inv_ttg > 0.0))
      throw std::invalid_argument("cost: sigma_inv_ttc and sigma_inv_ttg must be positive");
    if (w_progress < 0.0 || w_action_v < 0.0 || w_action_w < 0.0 || c_collision < 0.0)
      throw std::invalid_argument("cost: weights must be non-negative");
    if (goal_tolerance < 0.0 || v_epsilon < 0.0)
      throw std::invalid_argument("cost: tolerances must be non-negative");
  }
};

/// Robot footprint as a union of disks in the body frame.
struct Footprint {
  struct Disk {
    Vec2 offset;
    double radius = 0.35;
  };
  std::vector<Disk> disks{Disk{}};

  static Footprint disk(double radius) { return Footprint{{Disk{{0.0, 0.0}, radius}}}; }

  /// Two disks of `radius` spaced `spacing` apart along the heading.
  static Footprint oblong(double radius, double spacing) {
    return Footprint{{Disk{{0.5 * spacing, 0.0}, radius}, Disk{{-0.5 * spacing, 0.0}, radius}}};
  }

  double bounding_radius() const {
    double r = 0.0;
    for (const auto& d : disks) r = std::max(r, d.offset.norm() + d.radius);
    return r;
  }

  Vec2 disk_center(const Pose& p, const Disk& d) const {
    const double c = std::cos(p.heading), s = std::sin(p.heading);
    return {p.x + c * d.offset.x - s * d.offset.y, p.y + s * d.offset.x + c * d.offset.y};
  }
};

inline double footprint_clearance(const World& w, const Footprint& fp, const Pose& p, double t) {
  double d = kInfinity;
  for (const auto& disk : fp.disks) d = std::min(d, clearance(w, fp.disk_center(p, disk), t, disk.radius));
  return d;
}

inline double footprint_ttc(const World& w, const Footprint& fp, const Pose& p, Vec2 vel, double t) {
  double ttc = kInfinity;
  for (const auto& disk : fp.disks)
    ttc = std::min(ttc, time_to_collision(w, fp.disk_center(p, disk), vel, t, disk.radius));
  return ttc;
}

inline double collision_probability(double d_o, const CostParams& p) {
  return std::exp(-(d_o * d_o) / (p.sigma_d * p.sigma_d));
}

/// exp(-(1/t)^2 / sigma^2) with 1/inf = 0 and 1/0 = inf.
inline double inverse_time_kernel(double t, double sigma) {
  const double inv = inverse_time(t);
  return std::exp(-(inv * inv) / (sigma * sigma));
}

inline double modified_collision_probability(double d_o, double ttc, const CostParams& p) {
  return collision_probability(d_o, p) * (1.0 - p.a * inverse_time_kernel(ttc, p.sigma_inv_ttc));
}

/// Running product p_s_i = prod_{k<=i} (1 - p_c_k).
inline std::vector<double> survivability(const std::vector<double>& p_c) {
  std::vector<double> p_s(p_c.size());
  double acc = 1.0;
  for (std::size_t i = 0; i < p_c.size(); ++i) {
    acc *= 1.0 - p_c[i];
    p_s[i] = acc;
  }
  return p_s;
}

/// Distance to goal over the velocity component toward it; infinity when not approaching.
inline double expected_time_to_goal(const RobotState& terminal, Vec2 goal, const CostParams& p) {
  const Vec2 to_goal = goal - terminal.pose.position();
  const double d = to_goal.norm();
  if (d <= p.goal_tolerance) return 0.0;
  const double v_g = terminal.velocity().dot((1.0 / d) * to_goal);
  return v_g > p.v_epsilon ? d / v_g : kInfinity;
}

/// TTC from the terminal pose, travelling along its heading at v_limit.
inline double terminal_ttc(const RobotState& terminal, const World& w, const Footprint& fp, double v_limit) {
  return footprint_ttc(w, fp, terminal.pose, v_limit * Vec2::unit(terminal.pose.heading), terminal.t);
}

inline double terminal_ttc(const RobotState& terminal, const World& w, double v_limit) {
  return terminal_ttc(terminal, w, Footprint::disk(w.robot_radius), v_limit);
}

struct TerminalEvaluation {
  double ttg = kInfinity;
  double ttc_terminal = kInfinity;
  double c_ttg = 1.0;
  double c_ttc = 1.0;
  double p_s_N = 1.0;
  double j_terminal = 0.0;
};

/// C_TTG is 1 for a terminal state inside the goal tolerance (TTG = 0).
inline TerminalEvaluation terminal_cost(double ttg, double ttc, double p_s_N, const CostParams& p) {
  TerminalEvaluation e;
  e.ttg = ttg;
  e.ttc_terminal = ttc;
  e.c_ttg = ttg == 0.0 ? 1.0 : inverse_time_kernel(ttg, p.sigma_inv_ttg);
  e.c_ttc = inverse_time_kernel(ttc, p.sigma_inv_ttc);
  e.p_s_N = p_s_N;
  e.j_terminal = -p_s_N * (e.c_ttg * e.c_ttc);
  return e;
}

inline TerminalEvaluation terminal_cost(const RobotState& terminal, double p_s_N, Vec2 goal, const World& w,
                                        const Footprint& fp, double v_limit, const CostParams& p) {
  return terminal_cost(expected_time_to_goal(terminal, goal, p), terminal_ttc(terminal, w, fp, v_limit), p_s_N, p);
}

struct SegmentEvaluation {
  std::size_t index = 0;
  double d_o = 0.0;
  double d_g = 0.0;  // navigation-function distance at the segment end
  double ttc = kInfinity;
  double p_c_distance = 0.0;  // distance-only collision probability
  double p_c = 0.0;           // probability used by the active mode
  double p_s = 1.0;
  double j_progress = 0.0;
  double j_action = 0.0;
  double j_collision = 0.0;
};

struct CostBreakdown {
  std::vector<SegmentEvaluation> segments;
  std::optional<TerminalEvaluation> terminal;
  double total = 0.0;
};

/// Sums the stored per-segment terms in segment order, then adds the terminal term.
inline double sum_cost_terms(const CostBreakdown& c) {
  double total = 0.0;
  for (const auto& s : c.segments) total += s.p_s * s.j_progress + s.j_action + (1.0 - s.p_s) * s.j_collision;
  if (c.terminal) total += c.terminal->j_terminal;
  return total;
}

/// Everything the evaluator needs besides the trajectory itself.
struct CostContext {
  const World* world = nullptr;
  const NavigationFunction* nav = nullptr;
  Footprint footprint;
  Vec2 goal;
  double v_limit = 1.0;
};

inline CostBreakdown trajectory_cost(const Trajectory& traj, const CostContext& ctx, const CostParams& p) {
  const auto& st = traj.states;
  if (st.size() < 2) throw std::invalid_argument("trajectory_cost: trajectory needs at least one segment");
  for (const auto& s : st)
    if (!s.finite()) throw std::invalid_argument("trajectory_cost: non-finite trajectory state");
  const World& w = *ctx.world;
  const bool ds = p.mode == CostMode::ds_mpepc;
  const std::size_t n = st.size() - 1;

  std::vector<double> clear(n + 1), nf(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    clear[i] = footprint_clearance(w, ctx.footprint, st[i].pose, st[i].t);
    nf[i] = ctx.nav ? (*ctx.nav)(st[i].pose.position()) : distance(st[i].pose.position(), ctx.goal);
  }

  CostBreakdown out;
  out.segments.resize(n);
  double p_s = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    SegmentEvaluation& seg = out.segments[i - 1];
    seg.index = i;
    const std::size_t at = clear[i - 1] <= clear[i] ? i - 1 : i;
    seg.d_o = clear[at];
    seg.d_g = nf[i];
    seg.p_c_distance = collision_probability(seg.d_o, p);
    if (ds) {
      const Vec2 vel = st[i].v * Vec2::unit(st[at].pose.heading);
      seg.ttc = seg.d_o <= 0.0 ? 0.0 : footprint_ttc(w, ctx.footprint, st[at].pose, vel, st[at].t);
      seg.p_c = seg.p_c_distance * (1.0 - p.a * inverse_time_kernel(seg.ttc, p.sigma_inv_ttc));
    } else {
      seg.p_c = seg.p_c_distance;
    }
    p_s *= 1.0 - seg.p_c;
    seg.p_s = p_s;
    seg.j_progress = p.w_progress * (nf[i] - nf[i - 1]);
    seg.j_action = (st[i].t - st[i - 1].t) * (p.w_action_v * st[i].v * st[i].v + p.w_action_w * st[i].omega * st[i].omega);
    seg.j_collision = p.c_collision;
  }
  if (ds && p.use_terminal)
    out.terminal = terminal_cost(st.back(), p_s, ctx.goal, w, ctx.footprint, ctx.v_limit, p);
  out.total = sum_cost_terms(out);
  return out;
}

}  // namespace dsmpepc

#pragma once

/// \file
/// Run artifacts: metrics JSON, per-agent trace CSV and SVG renderings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dsmpepc/scenarios.hpp"
#include "dsmpepc/simulator.hpp"

namespace dsmpepc {

inline constexpr int kMetricsSchemaVersion = 1;

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6f") {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json agent_summary_json(const AgentResult& a) {
  Json j;
  j["id"] = a.id;
  j["outcome"] = std::string(to_string(a.outcome));
  j["time_to_goal"] = detail::finite_or_null(a.time_to_goal);
  j["end_time"] = a.end_time;
  j["path_length"] = a.path_length;
  j["min_clearance"] = detail::finite_or_null(a.min_clearance);
  j["smoothness_v"] = a.smoothness_v;
  j["smoothness_w"] = a.smoothness_w;
  j["replans"] = a.replan_log.size();
  return j;
}

/// Metrics document for one simulation run. `extra` is merged in at the top level.
inline Json metrics_json(const ScenarioConfig& sc, const SimResult& r, const std::string& mode, const Json& extra = Json::object()) {
  Json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["scenario"] = r.scenario;
  j["mode"] = mode;
  j["seed"] = sc.seed;
  j["step_h"] = r.step_h;
  j["end_time"] = r.end_time;
  j["all_reached"] = r.all_reached();
  j["agents"] = Json::array();
  for (const auto& a : r.agents) j["agents"].push_back(agent_summary_json(a));
  j["contacts"] = Json::array();
  for (const auto& c : r.contacts) j["contacts"].push_back({{"t", c.t}, {"agent", c.agent}, {"other", c.other}});
  j["parameters"] = to_json(sc);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

inline const char* kTraceCsvHeader = "t,x,y,heading,v,omega,d_o,nf_distance";

inline std::string trace_csv(const AgentResult& a) {
  std::ostringstream out;
  out << kTraceCsvHeader << "\n";
  for (const auto& row : a.trace) {
    out << detail::fmt(row.t, "%.3f") << ',' << detail::fmt(row.pose.x) << ',' << detail::fmt(row.pose.y) << ','
        << detail::fmt(row.pose.heading) << ',' << detail::fmt(row.v) << ',' << detail::fmt(row.omega) << ','
        << detail::fmt(row.d_o) << ',' << detail::fmt(row.nf_distance) << "\n";
  }
  return out.str();
}

/// Minimal deterministic SVG writer in world coordinates (y up).
class SvgCanvas {
 public:
  SvgCanvas(Vec2 lo, Vec2 hi, double px_per_m = 40.0) : lo_(lo), hi_(hi), scale_(px_per_m) {}

  void rect(double x0, double y0, double x1, double y1, const std::string& fill) {
    body_ << "<rect x=\"" << X(x0) << "\" y=\"" << Y(y1) << "\" width=\"" << L(x1 - x0) << "\" height=\"" << L(y1 - y0)
          << "\" fill=\"" << fill << "\"/>\n";
  }

  void circle(Vec2 c, double r, const std::string& stroke, const std::string& fill = "none") {
    body_ << "<circle cx=\"" << X(c.x) << "\" cy=\"" << Y(c.y) << "\" r=\"" << L(r) << "\" stroke=\"" << stroke
          << "\" fill=\"" << fill << "\" stroke-width=\"1\"/>\n";
  }

  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 1.5, double opacity = 1.0) {
    if (pts.empty()) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << detail::fmt(width, "%.2f") << "\"";
    if (opacity < 1.0) body_ << " stroke-opacity=\"" << detail::fmt(opacity, "%.2f") << "\"";
    body_ << " points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) body_ << (k ? " " : "") << X(pts[k].x) << ',' << Y(pts[k].y);
    body_ << "\"/>\n";
  }

  void text(Vec2 at, const std::string& s, const std::string& color = "black") {
    body_ << "<text x=\"" << X(at.x) << "\" y=\"" << Y(at.y) << "\" font-size=\"10\" fill=\"" << color << "\">" << s
          << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << L(hi_.x - lo_.x) << "\" height=\"" << L(hi_.y - lo_.y)
        << "\" viewBox=\"0 0 " << L(hi_.x - lo_.x) << ' ' << L(hi_.y - lo_.y) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  std::string X(double x) const { return detail::fmt((x - lo_.x) * scale_, "%.2f"); }
  std::string Y(double y) const { return detail::fmt((hi_.y - y) * scale_, "%.2f"); }
  std::string L(double l) const { return detail::fmt(l * scale_, "%.2f"); }

  Vec2 lo_, hi_;
  double scale_;
  std::ostringstream body_;
};

/// Occupied cells in black, merged into horizontal runs.
inline void draw_map(SvgCanvas& svg, const MapSpec& map) {
  const int h = static_cast<int>(map.rows.size());
  for (int r = 0; r < h; ++r) {
    const std::string& row = map.rows[r];
    const double y0 = map.origin.y + (h - 1 - r) * map.resolution;
    for (std::size_t i = 0; i < row.size();) {
      if (row[i] != '#') {
        ++i;
        continue;
      }
      std::size_t e = i;
      while (e < row.size() && row[e] == '#') ++e;
      svg.rect(map.origin.x + i * map.resolution, y0, map.origin.x + e * map.resolution, y0 + map.resolution, "black");
      i = e;
    }
  }
}

inline SvgCanvas canvas_for(const MapSpec& map) {
  const double w = map.rows.empty() ? 1.0 : map.rows.front().size() * map.resolution;
  const double h = map.rows.size() * map.resolution;
  return SvgCanvas(map.origin, {map.origin.x + w, map.origin.y + h});
}

struct RenderOptions {
  bool candidate_fans = false;
  std::size_t fan_every = 5;      // cycles between rendered fans
  std::size_t fan_size = 30;      // lowest-cost candidates per fan
};

/// Map in black, agent paths in blue, scripted obstacle traces in red and, when
/// requested, fans of evaluated candidates in gray.
inline std::string render_run_svg(const ScenarioConfig& sc, const SimResult& r, const RenderOptions& opt = {}) {
  SvgCanvas svg = canvas_for(sc.map);
  draw_map(svg, sc.map);
  if (opt.candidate_fans) {
    for (std::size_t k = 0; k < r.agents.size() && k < sc.agents.size(); ++k) {
      const auto& log = r.agents[k].replan_log;
      for (std::size_t c = 0; c < log.size(); c += std::max<std::size_t>(1, opt.fan_every)) {
        std::vector<EvaluatedCandidate> cands = log[c].candidates;
        const std::size_t m = std::min(opt.fan_size, cands.size());
        std::partial_sort(cands.begin(), cands.begin() + m, cands.end(), candidate_less);
        for (std::size_t q = 0; q < m; ++q) {
          const Trajectory traj = rollout(log[c].state, cands[q].param, sc.agents[k].planner);
          std::vector<Vec2> pts;
          for (const auto& s : traj.states) pts.push_back(s.pose.position());
          svg.polyline(pts, "gray", 0.6, 0.5);
        }
      }
    }
  }
  for (const auto& o : r.obstacles) {
    std::vector<Vec2> pts;
    for (const auto& [t, p] : o.positions) pts.push_back(p);
    svg.polyline(pts, "red", 1.5);
    if (!pts.empty()) svg.circle(pts.back(), o.radius, "red");
  }
  for (std::size_t k = 0; k < r.agents.size(); ++k) {
    const auto& a = r.agents[k];
    std::vector<Vec2> pts;
    for (const auto& row : a.trace) pts.push_back(row.pose.position());
    svg.polyline(pts, "blue", 2.0);
    if (k < sc.agents.size()) {
      const AgentSpec& spec = sc.agents[k];
      if (!a.trace.empty())
        for (const auto& d : spec.footprint.disks) svg.circle(spec.footprint.disk_center(a.trace.back().pose, d), d.radius, "blue");
      svg.circle(spec.goal.position(), 0.08, "green", "green");
      svg.text(spec.start.position() + Vec2{0.2, 0.2}, a.id, "blue");
    }
  }
  return svg.str();
}

}  // namespace dsmpepc

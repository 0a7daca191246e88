#pragma once

/// \file
/// Scenario documents (JSON), load-time validation and the built-in benchmark suite.
///
/// Document layout (angles in radians, lengths in meters, times in seconds):
///
///   { "name": "...",
///     "map": { "rows": ["####", "#..#", ...], "resolution": 0.1, "origin": [0, 0] },
///     "defaults": { "planner": {...}, "cost": {...}, "optimizer": {...} },
///     "agents": [ { "id": "a", "start": [x, y, heading], "goal": [x, y, heading],
///                   "radius": 0.35, "mode": "ds", "planner": {...}, ... } ],
///     "scripted_obstacles": [ { "id": "p", "radius": 0.3, "waypoints": [[t, x, y], ...] } ],
///     "duration": 60, "seed": 1 }
///
/// rows[0] is the top of the map; '#' marks an occupied cell.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dsmpepc/scenario_config.hpp"

namespace dsmpepc {

using Json = nlohmann::ordered_json;

inline constexpr int kScenarioSchemaVersion = 1;

/// Load or validation failure; `what()` names the offending line or field.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(path + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(path + "." + key + ": unknown field");
  }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ScenarioError(path + "." + key + ": wrong type");
  }
}

inline Json vec(Vec2 v) { return Json::array({v.x, v.y}); }
inline Json pose(const Pose& p) { return Json::array({p.x, p.y, p.heading}); }

inline Vec2 read_vec(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ScenarioError(path + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Pose read_pose(const Json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw ScenarioError(path + ": expected [x, y, heading]");
  for (const auto& e : j)
    if (!e.is_number()) throw ScenarioError(path + ": expected numbers");
  return make_pose(j[0].get<double>(), j[1].get<double>(), j.size() == 3 ? j[2].get<double>() : 0.0);
}

}  // namespace detail

// --- parameter blocks -------------------------------------------------------

inline Json to_json(const PlannerConfig& c) {
  return Json{{"horizon_T", c.horizon_T},
              {"step_h", c.step_h},
              {"v_limit", c.v_limit},
              {"omega_limit", c.omega_limit},
              {"accel_limit", c.accel_limit},
              {"alpha_limit", c.alpha_limit},
              {"gains",
               {{"k1", c.gains.k1},
                {"k2", c.gains.k2},
                {"curvature_beta", c.gains.curvature_beta},
                {"curvature_lambda", c.gains.curvature_lambda},
                {"r_slowdown", c.gains.r_slowdown}}}};
}

inline void from_json(const Json& j, PlannerConfig& c, const std::string& path) {
  detail::check_keys(j, path, {"horizon_T", "step_h", "v_limit", "omega_limit", "accel_limit", "alpha_limit", "gains"});
  detail::read(j, "horizon_T", c.horizon_T, path);
  detail::read(j, "step_h", c.step_h, path);
  detail::read(j, "v_limit", c.v_limit, path);
  detail::read(j, "omega_limit", c.omega_limit, path);
  detail::read(j, "accel_limit", c.accel_limit, path);
  detail::read(j, "alpha_limit", c.alpha_limit, path);
  if (j.contains("gains")) {
    const Json& g = j.at("gains");
    const std::string gp = path + ".gains";
    detail::check_keys(g, gp, {"k1", "k2", "curvature_beta", "curvature_lambda", "r_slowdown"});
    detail::read(g, "k1", c.gains.k1, gp);
    detail::read(g, "k2", c.gains.k2, gp);
    detail::read(g, "curvature_beta", c.gains.curvature_beta, gp);
    detail::read(g, "curvature_lambda", c.gains.curvature_lambda, gp);
    detail::read(g, "r_slowdown", c.gains.r_slowdown, gp);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

inline Json to_json(const CostParams& c) {
  return Json{{"mode", std::string(to_string(c.mode))},
              {"sigma_d", c.sigma_d},
              {"a", c.a},
              {"sigma_inv_ttc", c.sigma_inv_ttc},
              {"sigma_inv_ttg", c.sigma_inv_ttg},
              {"w_progress", c.w_progress},
              {"w_action_v", c.w_action_v},
              {"w_action_w", c.w_action_w},
              {"c_collision", c.c_collision},
              {"goal_tolerance", c.goal_tolerance},
              {"v_epsilon", c.v_epsilon},
              {"use_terminal", c.use_terminal}};
}

inline void from_json(const Json& j, CostParams& c, const std::string& path) {
  detail::check_keys(j, path, {"mode", "sigma_d", "a", "sigma_inv_ttc", "sigma_inv_ttg", "w_progress", "w_action_v",
                               "w_action_w", "c_collision", "goal_tolerance", "v_epsilon", "use_terminal"});
  if (j.contains("mode")) {
    std::string m;
    detail::read(j, "mode", m, path);
    try {
      c.mode = parse_cost_mode(m);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path + ".mode: " + e.what());
    }
  }
  detail::read(j, "sigma_d", c.sigma_d, path);
  detail::read(j, "a", c.a, path);
  detail::read(j, "sigma_inv_ttc", c.sigma_inv_ttc, path);
  detail::read(j, "sigma_inv_ttg", c.sigma_inv_ttg, path);
  detail::read(j, "w_progress", c.w_progress, path);
  detail::read(j, "w_action_v", c.w_action_v, path);
  detail::read(j, "w_action_w", c.w_action_w, path);
  detail::read(j, "c_collision", c.c_collision, path);
  detail::read(j, "goal_tolerance", c.goal_tolerance, path);
  detail::read(j, "v_epsilon", c.v_epsilon, path);
  detail::read(j, "use_terminal", c.use_terminal, path);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

inline Json to_json(const OptimizerConfig& c) {
  Json j{{"n_global_samples", c.n_global_samples},
         {"n_refine_seeds", c.n_refine_seeds},
         {"refine_max_evals", c.refine_max_evals}};
  if (c.bounds) {
    const auto& b = *c.bounds;
    j["bounds"] = Json{{"r", {b[0].lo, b[0].hi}},
                       {"theta", {b[1].lo, b[1].hi}},
                       {"delta", {b[2].lo, b[2].hi}},
                       {"v_max", {b[3].lo, b[3].hi}}};
  }
  return j;
}

inline void from_json(const Json& j, OptimizerConfig& c, const PlannerConfig& planner, const std::string& path) {
  detail::check_keys(j, path, {"n_global_samples", "n_refine_seeds", "refine_max_evals", "bounds"});
  detail::read(j, "n_global_samples", c.n_global_samples, path);
  detail::read(j, "n_refine_seeds", c.n_refine_seeds, path);
  detail::read(j, "refine_max_evals", c.refine_max_evals, path);
  if (j.contains("bounds")) {
    const Json& b = j.at("bounds");
    const std::string bp = path + ".bounds";
    detail::check_keys(b, bp, {"r", "theta", "delta", "v_max"});
    ParamBounds out = c.bounds ? *c.bounds : default_bounds(planner);
    const char* names[] = {"r", "theta", "delta", "v_max"};
    for (int d = 0; d < 4; ++d) {
      if (!b.contains(names[d])) continue;
      const Vec2 lohi = detail::read_vec(b.at(names[d]), bp + "." + names[d]);
      out[d] = {lohi.x, lohi.y};
    }
    c.bounds = out;
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

// --- whole document ---------------------------------------------------------

inline Json to_json(const DynamicObstacle& o) {
  Json j{{"id", o.id}, {"radius", o.radius}};
  if (o.scripted()) {
    Json w = Json::array();
    for (const auto& p : o.script) w.push_back(Json::array({p.t, p.position.x, p.position.y}));
    j["waypoints"] = w;
  } else {
    j["position"] = detail::vec(o.position);
    j["velocity"] = detail::vec(o.velocity);
  }
  return j;
}

inline Json footprint_json(const Footprint& fp) {
  Json j = Json::array();
  for (const auto& d : fp.disks) j.push_back(Json{{"offset", detail::vec(d.offset)}, {"radius", d.radius}});
  return j;
}

/// Fully expanded document: every agent carries its complete parameter blocks.
inline Json to_json(const ScenarioConfig& sc) {
  Json agents = Json::array();
  for (const auto& a : sc.agents) {
    agents.push_back(Json{{"id", a.id},
                          {"start", detail::pose(a.start)},
                          {"goal", detail::pose(a.goal)},
                          {"footprint", footprint_json(a.footprint)},
                          {"mode", std::string(to_string(a.cost.mode))},
                          {"planner", to_json(a.planner)},
                          {"cost", to_json(a.cost)},
                          {"optimizer", to_json(a.optimizer)}});
  }
  Json obstacles = Json::array();
  for (const auto& o : sc.scripted_obstacles) obstacles.push_back(to_json(o));
  return Json{{"schema_version", kScenarioSchemaVersion},
              {"name", sc.name},
              {"map", {{"rows", sc.map.rows}, {"resolution", sc.map.resolution}, {"origin", detail::vec(sc.map.origin)}}},
              {"defaults",
               {{"planner", to_json(sc.defaults.planner)},
                {"cost", to_json(sc.defaults.cost)},
                {"optimizer", to_json(sc.defaults.optimizer)}}},
              {"agents", agents},
              {"scripted_obstacles", obstacles},
              {"duration", sc.duration},
              {"seed", sc.seed}};
}

inline std::string serialize(const ScenarioConfig& sc) { return to_json(sc).dump(2) + "\n"; }

/// Checks map shape, agent placement and obstacle scripts.
inline void validate(const ScenarioConfig& sc) {
  if (sc.map.rows.empty() || sc.map.rows.front().empty()) throw ScenarioError("map.rows: empty map");
  for (std::size_t r = 0; r < sc.map.rows.size(); ++r)
    if (sc.map.rows[r].size() != sc.map.rows.front().size())
      throw ScenarioError("map.rows[" + std::to_string(r) + "]: map is not rectangular");
  if (!(sc.map.resolution > 0.0)) throw ScenarioError("map.resolution: must be positive");
  if (!(sc.duration > 0.0)) throw ScenarioError("duration: must be positive");
  if (sc.agents.empty()) throw ScenarioError("agents: at least one agent is required");
  const OccupancyGrid grid = OccupancyGrid::from_rows(sc.map.rows, sc.map.resolution, sc.map.origin);

  std::map<std::string, int> ids;
  for (std::size_t k = 0; k < sc.agents.size(); ++k) {
    const AgentSpec& a = sc.agents[k];
    const std::string path = "agents[" + std::to_string(k) + "] (id '" + a.id + "')";
    if (a.id.empty()) throw ScenarioError("agents[" + std::to_string(k) + "].id: must be non-empty");
    if (ids[a.id]++) throw ScenarioError(path + ": duplicate agent id");
    if (a.footprint.disks.empty()) throw ScenarioError(path + ".footprint: no disks");
    for (const auto& d : a.footprint.disks)
      if (!(d.radius > 0.0)) throw ScenarioError(path + ".footprint: radius must be positive");
    if (std::abs(a.planner.step_h - sc.defaults.planner.step_h) > 1e-12)
      throw ScenarioError(path + ".planner.step_h: must match the scenario step");
    for (const auto& [label, pose] : {std::pair<const char*, Pose>{"start", a.start}, {"goal", a.goal}}) {
      if (!grid.contains(pose.position())) throw ScenarioError(path + "." + label + ": outside the map");
      const auto [ci, cj] = grid.cell_of(pose.position());
      if (grid.in_bounds(ci, cj) && grid.occupied(ci, cj))
        throw ScenarioError(path + "." + label + ": lies in an occupied cell");
      for (const auto& d : a.footprint.disks) {
        const Vec2 c = a.footprint.disk_center(pose, d);
        if (grid.distance_at(c) < d.radius)
          throw ScenarioError(path + "." + label + ": clearance to the map is below the agent radius");
      }
    }
    for (std::size_t m = 0; m < k; ++m) {
      const AgentSpec& b = sc.agents[m];
      for (const auto& da : a.footprint.disks)
        for (const auto& db : b.footprint.disks)
          if (distance(a.footprint.disk_center(a.start, da), b.footprint.disk_center(b.start, db)) <
              da.radius + db.radius)
            throw ScenarioError(path + ".start: overlaps agent '" + b.id + "'");
    }
  }
  for (std::size_t k = 0; k < sc.scripted_obstacles.size(); ++k) {
    const auto& o = sc.scripted_obstacles[k];
    const std::string path = "scripted_obstacles[" + std::to_string(k) + "]";
    try {
      o.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path + ": " + e.what());
    }
    for (const auto& w : o.script)
      if (w.t < 0.0 || w.t > sc.duration) throw ScenarioError(path + ".waypoints: time outside [0, duration]");
  }
}

inline ScenarioConfig scenario_from_json(const Json& doc) {
  detail::check_keys(doc, "document",
                     {"schema_version", "name", "map", "defaults", "agents", "scripted_obstacles", "duration", "seed"});
  if (doc.contains("schema_version") && doc.at("schema_version") != kScenarioSchemaVersion)
    throw ScenarioError("schema_version: unsupported version");
  ScenarioConfig sc;
  detail::read(doc, "name", sc.name, "document");
  detail::read(doc, "duration", sc.duration, "document");
  detail::read(doc, "seed", sc.seed, "document");

  if (!doc.contains("map")) throw ScenarioError("map: missing");
  const Json& m = doc.at("map");
  detail::check_keys(m, "map", {"rows", "resolution", "origin"});
  if (!m.contains("rows")) throw ScenarioError("map.rows: missing");
  detail::read(m, "rows", sc.map.rows, "map");
  detail::read(m, "resolution", sc.map.resolution, "map");
  if (m.contains("origin")) sc.map.origin = detail::read_vec(m.at("origin"), "map.origin");

  Json planner_j = to_json(PlannerConfig{}), cost_j = to_json(CostParams{}), opt_j = Json::object();
  if (doc.contains("defaults")) {
    const Json& d = doc.at("defaults");
    detail::check_keys(d, "defaults", {"planner", "cost", "optimizer"});
    if (d.contains("planner")) planner_j.merge_patch(d.at("planner"));
    if (d.contains("cost")) cost_j.merge_patch(d.at("cost"));
    if (d.contains("optimizer")) opt_j.merge_patch(d.at("optimizer"));
  }
  from_json(planner_j, sc.defaults.planner, "defaults.planner");
  from_json(cost_j, sc.defaults.cost, "defaults.cost");
  from_json(opt_j, sc.defaults.optimizer, sc.defaults.planner, "defaults.optimizer");

  if (!doc.contains("agents") || !doc.at("agents").is_array()) throw ScenarioError("agents: expected an array");
  const Json& agents = doc.at("agents");
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const Json& a = agents[k];
    const std::string path = "agents[" + std::to_string(k) + "]";
    detail::check_keys(a, path, {"id", "start", "goal", "radius", "footprint", "mode", "planner", "cost", "optimizer"});
    AgentSpec spec;
    detail::read(a, "id", spec.id, path);
    if (!a.contains("start") || !a.contains("goal")) throw ScenarioError(path + ": start and goal are required");
    spec.start = detail::read_pose(a.at("start"), path + ".start");
    spec.goal = detail::read_pose(a.at("goal"), path + ".goal");
    double radius = 0.35;
    detail::read(a, "radius", radius, path);
    spec.footprint = Footprint::disk(radius);
    if (a.contains("footprint")) {
      const Json& f = a.at("footprint");
      if (!f.is_array() || f.empty()) throw ScenarioError(path + ".footprint: expected a non-empty array");
      spec.footprint.disks.clear();
      for (std::size_t d = 0; d < f.size(); ++d) {
        const std::string fp = path + ".footprint[" + std::to_string(d) + "]";
        detail::check_keys(f[d], fp, {"offset", "radius"});
        Footprint::Disk disk;
        if (f[d].contains("offset")) disk.offset = detail::read_vec(f[d].at("offset"), fp + ".offset");
        detail::read(f[d], "radius", disk.radius, fp);
        spec.footprint.disks.push_back(disk);
      }
    }
    Json pj = planner_j, cj = cost_j, oj = opt_j;
    if (a.contains("planner")) pj.merge_patch(a.at("planner"));
    if (a.contains("cost")) cj.merge_patch(a.at("cost"));
    if (a.contains("optimizer")) oj.merge_patch(a.at("optimizer"));
    if (a.contains("mode")) cj["mode"] = a.at("mode");
    from_json(pj, spec.planner, path + ".planner");
    from_json(cj, spec.cost, path + ".cost");
    from_json(oj, spec.optimizer, spec.planner, path + ".optimizer");
    sc.agents.push_back(std::move(spec));
  }

  if (doc.contains("scripted_obstacles")) {
    const Json& obs = doc.at("scripted_obstacles");
    if (!obs.is_array()) throw ScenarioError("scripted_obstacles: expected an array");
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const Json& o = obs[k];
      const std::string path = "scripted_obstacles[" + std::to_string(k) + "]";
      detail::check_keys(o, path, {"id", "radius", "waypoints", "position", "velocity"});
      DynamicObstacle d;
      detail::read(o, "id", d.id, path);
      detail::read(o, "radius", d.radius, path);
      if (o.contains("waypoints")) {
        const Json& w = o.at("waypoints");
        if (!w.is_array() || w.empty()) throw ScenarioError(path + ".waypoints: expected a non-empty array");
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (!w[i].is_array() || w[i].size() != 3)
            throw ScenarioError(path + ".waypoints[" + std::to_string(i) + "]: expected [t, x, y]");
          d.script.push_back({w[i][0].get<double>(), {w[i][1].get<double>(), w[i][2].get<double>()}});
        }
        d.position = d.script.front().position;
      } else {
        if (o.contains("position")) d.position = detail::read_vec(o.at("position"), path + ".position");
        if (o.contains("velocity")) d.velocity = detail::read_vec(o.at("velocity"), path + ".velocity");
      }
      sc.scripted_obstacles.push_back(std::move(d));
    }
  }
  validate(sc);
  return sc;
}

/// Parses and validates a scenario document.
inline ScenarioConfig load_scenario_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ScenarioError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                        e.what());
  }
  return scenario_from_json(doc);
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario_text(ss.str());
}

}  // namespace dsmpepc

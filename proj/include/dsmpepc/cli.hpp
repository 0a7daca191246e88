#pragma once

/// \file
/// Command implementations behind the dsmpepc tool: run, compare, landscape and
/// list-builtins. Argument parsing lives in the tool itself.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dsmpepc/builtins.hpp"
#include "dsmpepc/report.hpp"
#include "dsmpepc/simulator.hpp"

namespace dsmpepc::cli {

enum ExitCode : int { kExitOk = 0, kExitNotReached = 1, kExitLoadError = 2, kExitWriteError = 3 };

inline constexpr const char* kOutDirEnv = "DSMPEPC_OUT";

/// Output directory: explicit flag, then $DSMPEPC_OUT, then "dsmpepc_out".
inline std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "dsmpepc_out";
}

class WriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "key=value" builtin parameters.
inline BuiltinParams parse_params(const std::vector<std::string>& kv) {
  BuiltinParams p;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError("builtin parameter '" + s + "' is not key=value");
    try {
      std::size_t used = 0;
      const double v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument(s);
      p[s.substr(0, eq)] = v;
    } catch (const std::logic_error&) {
      throw ScenarioError("builtin parameter '" + s + "' has a non-numeric value");
    }
  }
  return p;
}

/// A scenario argument names either a JSON file or a builtin.
inline ScenarioConfig resolve_scenario(const std::string& arg, const BuiltinParams& params) {
  namespace fs = std::filesystem;
  const bool is_builtin = std::any_of(builtin_catalog().begin(), builtin_catalog().end(),
                                      [&](const BuiltinInfo& b) { return b.name == arg; });
  if (is_builtin && !fs::exists(arg)) return builtin(arg, params);
  if (!params.empty()) throw ScenarioError("builtin parameters given for a scenario file");
  return load_scenario_file(arg);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw WriteError("cannot open '" + path.string() + "' for writing");
  f << content;
  f.close();
  if (!f) throw WriteError("failed writing '" + path.string() + "'");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw WriteError("cannot create output directory '" + dir.string() + "'");
}

inline std::string mode_label(const ScenarioConfig& sc, const std::optional<CostMode>& override_mode) {
  if (override_mode) return std::string(to_string(*override_mode));
  const CostMode m = sc.agents.front().mode();
  for (const auto& a : sc.agents)
    if (a.mode() != m) return "mixed";
  return std::string(to_string(m));
}

struct RunOptions {
  std::string scenario;
  std::vector<std::string> params;
  std::optional<CostMode> mode;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool svg = false;
  bool csv = false;
  bool diag = false;
};

inline int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig sc;
  try {
    sc = resolve_scenario(o.scenario, parse_params(o.params));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoadError;
  }
  if (o.seed) sc.seed = *o.seed;
  SimOptions sim;
  sim.mode_override = o.mode;
  sim.record_candidates = o.diag;
  const std::string mode = mode_label(sc, o.mode);

  const auto t0 = std::chrono::steady_clock::now();
  const SimResult r = run(sc, sim);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    namespace fs = std::filesystem;
    const fs::path dir = resolve_out_dir(o.out_dir);
    ensure_dir(dir);
    const std::string stem = sc.name + "_" + mode;
    Json artifacts = Json::array();
    if (o.csv)
      for (const auto& a : r.agents) {
        const fs::path p = dir / (stem + "_" + a.id + ".csv");
        write_file(p, trace_csv(a));
        artifacts.push_back(p.string());
      }
    if (o.svg || o.diag) {
      RenderOptions ro;
      ro.candidate_fans = o.diag;
      const fs::path p = dir / (stem + ".svg");
      write_file(p, render_run_svg(sc, r, ro));
      artifacts.push_back(p.string());
    }
    const fs::path metrics = dir / (stem + "_metrics.json");
    artifacts.push_back(metrics.string());
    write_file(metrics, metrics_json(sc, r, mode, {{"wall_time_s", wall}, {"artifacts", artifacts}}).dump(2) + "\n");
    out << sc.name << " [" << mode << "] seed=" << sc.seed << " wall=" << detail::fmt(wall, "%.2f") << "s\n";
    for (const auto& a : r.agents)
      out << "  " << a.id << ": " << to_string(a.outcome) << " t=" << detail::fmt(a.end_time, "%.1f")
          << " path=" << detail::fmt(a.path_length, "%.2f") << " min_clearance=" << detail::fmt(a.min_clearance, "%.3f")
          << "\n";
    out << "  metrics: " << metrics.string() << "\n";
  } catch (const WriteError& e) {
    err << "error: " << e.what() << "\n";
    return kExitWriteError;
  }
  return r.all_reached() ? kExitOk : kExitNotReached;
}

struct CompareOptions {
  std::string scenario;
  std::vector<std::string> params;
  std::size_t seeds = 5;
  std::uint64_t base_seed = 1;
  std::string out_dir;
  bool parallel = true;
};

struct CompareRow {
  std::string mode;
  std::size_t runs = 0;
  double success_rate = 0.0;
  double deadlock_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  double mean_time_to_goal = 0.0;  // over agents that had to move; NaN when none reached
  double mean_min_clearance = 0.0;
};

inline const char* kCompareCsvHeader =
    "mode,runs,success_rate,deadlock_rate,collision_rate,timeout_rate,mean_time_to_goal,mean_min_clearance";

inline CompareRow summarize(const std::string& mode, const std::vector<SimResult>& runs) {
  CompareRow row;
  row.mode = mode;
  row.runs = runs.size();
  double ttg = 0.0, clr = 0.0;
  std::size_t n_ttg = 0, n_clr = 0;
  for (const auto& r : runs) {
    auto any = [&](Outcome o) {
      return std::any_of(r.agents.begin(), r.agents.end(), [&](const AgentResult& a) { return a.outcome == o; });
    };
    row.success_rate += r.all_reached() ? 1.0 : 0.0;
    row.deadlock_rate += any(Outcome::deadlocked) ? 1.0 : 0.0;
    row.collision_rate += any(Outcome::collided) ? 1.0 : 0.0;
    row.timeout_rate += any(Outcome::timeout) ? 1.0 : 0.0;
    for (const auto& a : r.agents) {
      if (a.outcome == Outcome::reached && a.time_to_goal > 0.0) {
        ttg += a.time_to_goal;
        ++n_ttg;
      }
      if (std::isfinite(a.min_clearance)) {
        clr += a.min_clearance;
        ++n_clr;
      }
    }
  }
  const double n = runs.empty() ? 1.0 : static_cast<double>(runs.size());
  row.success_rate /= n;
  row.deadlock_rate /= n;
  row.collision_rate /= n;
  row.timeout_rate /= n;
  row.mean_time_to_goal = n_ttg ? ttg / n_ttg : std::nan("");
  row.mean_min_clearance = n_clr ? clr / n_clr : std::nan("");
  return row;
}

inline std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << kCompareCsvHeader << "\n";
  for (const auto& r : rows)
    out << r.mode << ',' << r.runs << ',' << detail::fmt(r.success_rate, "%.4f") << ',' << detail::fmt(r.deadlock_rate, "%.4f")
        << ',' << detail::fmt(r.collision_rate, "%.4f") << ',' << detail::fmt(r.timeout_rate, "%.4f") << ','
        << detail::fmt(r.mean_time_to_goal, "%.4f") << ',' << detail::fmt(r.mean_min_clearance, "%.4f") << "\n";
  return out.str();
}

inline int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig sc;
  try {
    sc = resolve_scenario(o.scenario, parse_params(o.params));
    if (o.seeds == 0) throw ScenarioError("--seeds must be positive");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoadError;
  }
  const std::vector<CostMode> modes{CostMode::ds_mpepc, CostMode::baseline_mpepc};
  auto cell = [&](CostMode m, std::uint64_t seed) {
    ScenarioConfig c = sc;
    c.seed = seed;
    SimOptions sim;
    sim.mode_override = m;
    sim.parallel = !o.parallel;
    return run(c, sim);
  };
  std::vector<CompareRow> rows;
  bool all = true;
  for (CostMode m : modes) {
    std::vector<std::future<SimResult>> futures;
    std::vector<SimResult> results;
    for (std::size_t k = 0; k < o.seeds; ++k) {
      const std::uint64_t seed = o.base_seed + k;
      if (o.parallel)
        futures.push_back(std::async(std::launch::async, cell, m, seed));
      else
        results.push_back(cell(m, seed));
    }
    for (auto& f : futures) results.push_back(f.get());
    for (const auto& r : results) all = all && r.all_reached();
    rows.push_back(summarize(std::string(to_string(m)), results));
  }
  const std::string table = compare_csv(rows);
  try {
    const std::filesystem::path dir = resolve_out_dir(o.out_dir);
    ensure_dir(dir);
    const auto path = dir / (sc.name + "_compare.csv");
    write_file(path, table);
    out << table << "table: " << path.string() << "\n";
  } catch (const WriteError& e) {
    err << "error: " << e.what() << "\n";
    return kExitWriteError;
  }
  return all ? kExitOk : kExitNotReached;
}

enum class LandscapeRank { cost, ttg, ttc };

inline LandscapeRank parse_rank(const std::string& s) {
  if (s == "cost") return LandscapeRank::cost;
  if (s == "ttg") return LandscapeRank::ttg;
  if (s == "ttc") return LandscapeRank::ttc;
  throw std::invalid_argument("unknown rank '" + s + "' (expected cost, ttg or ttc)");
}

struct LandscapeCandidate {
  TrajectoryParam param;
  double cost = 0.0;
  double ttg = kInfinity;
  double ttc = kInfinity;
  bool collision_free = true;
  Trajectory trajectory;
};

struct Landscape {
  std::string agent;
  double t = 0.0;
  RobotState state;
  World world;
  std::vector<LandscapeCandidate> ranked;  // best first under the requested ranking
};

/// Simulates up to t, freezes the world and ranks one planning cycle's candidates.
inline Landscape compute_landscape(const ScenarioConfig& sc, const std::optional<CostMode>& mode, const std::string& agent_id,
                                   double t, LandscapeRank rank) {
  if (!(t >= 0.0) || t > sc.duration) throw std::invalid_argument("snapshot time outside the scenario duration");
  std::vector<AgentSpec> specs = sc.agents;
  for (auto& s : specs)
    if (mode) s.cost.mode = *mode;
  std::size_t self = 0;
  if (!agent_id.empty()) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const AgentSpec& a) { return a.id == agent_id; });
    if (it == specs.end()) throw std::invalid_argument("no agent '" + agent_id + "' in scenario");
    self = static_cast<std::size_t>(it - specs.begin());
  }

  ScenarioConfig prefix = sc;
  prefix.duration = t;
  SimOptions sim;
  sim.mode_override = mode;
  const SimResult r = run(prefix, sim);
  const std::size_t cycle = static_cast<std::size_t>(std::lround(t / sc.defaults.planner.step_h));

  std::vector<RobotState> states;
  std::vector<bool> active;
  for (const auto& a : r.agents) {
    const TraceRow& last = a.trace.back();
    states.push_back({last.pose, last.v, last.omega, last.t});
    active.push_back(a.outcome == Outcome::timeout);
  }
  auto grid = std::make_shared<const OccupancyGrid>(OccupancyGrid::from_rows(sc.map.rows, sc.map.resolution, sc.map.origin));
  Landscape out;
  out.agent = specs[self].id;
  out.t = t;
  out.state = states[self];
  out.state.t = t;
  out.world = agent_world(self, specs, states, active, sc.scripted_obstacles, grid, t);
  const NavigationFunction nav(grid, specs[self].goal.position(), specs[self].radius());

  PlanRequest req;
  req.current = out.state;
  req.goal = specs[self].goal;
  req.world = &out.world;
  req.nav = &nav;
  req.footprint = specs[self].footprint;
  req.planner = specs[self].planner;
  req.cost = specs[self].cost;
  req.optimizer = specs[self].optimizer;
  req.optimizer.seed = mix_seed(sc.seed, self, cycle);
  const PlanResult plan_result = plan(req);

  for (const auto& c : plan_result.evaluated) {
    LandscapeCandidate lc;
    lc.param = c.param;
    lc.cost = c.cost;
    lc.trajectory = rollout(req.current, c.param, req.planner);
    const RobotState& end = lc.trajectory.states.back();
    lc.ttg = expected_time_to_goal(end, req.goal.position(), req.cost);
    lc.ttc = terminal_ttc(end, out.world, req.footprint, req.planner.v_limit);
    for (const auto& st : lc.trajectory.states)
      lc.collision_free = lc.collision_free && footprint_clearance(out.world, req.footprint, st.pose, st.t) > 0.0;
    out.ranked.push_back(std::move(lc));
  }
  auto by_cost = [](const LandscapeCandidate& a, const LandscapeCandidate& b) {
    return candidate_less({a.param, a.cost}, {b.param, b.cost});
  };
  // collision-free candidates rank ahead of colliding ones under every ranking
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [&](const LandscapeCandidate& a, const LandscapeCandidate& b) {
    if (a.collision_free != b.collision_free) return a.collision_free;
    switch (rank) {
      case LandscapeRank::ttg:
        if (a.ttg != b.ttg) return a.ttg < b.ttg;
        break;
      case LandscapeRank::ttc:
        if (a.ttc != b.ttc) return a.ttc > b.ttc;
        break;
      case LandscapeRank::cost: break;
    }
    return by_cost(a, b);
  });
  return out;
}

inline const char* kLandscapeCsvHeader = "rank,r,theta,delta,v_max,cost,ttg,ttc,collision_free,end_x,end_y,end_heading";

inline std::string landscape_csv(const Landscape& l, std::size_t top) {
  std::ostringstream out;
  out << kLandscapeCsvHeader << "\n";
  for (std::size_t k = 0; k < std::min(top, l.ranked.size()); ++k) {
    const auto& c = l.ranked[k];
    const Pose& e = c.trajectory.states.back().pose;
    out << k + 1 << ',' << detail::fmt(c.param.r) << ',' << detail::fmt(c.param.theta) << ',' << detail::fmt(c.param.delta)
        << ',' << detail::fmt(c.param.v_max) << ',' << detail::fmt(c.cost) << ',' << detail::fmt(c.ttg) << ','
        << detail::fmt(c.ttc) << ',' << (c.collision_free ? 1 : 0) << ',' << detail::fmt(e.x) << ',' << detail::fmt(e.y) << ',' << detail::fmt(e.heading) << "\n";
  }
  return out.str();
}

inline std::string landscape_svg(const ScenarioConfig& sc, const Landscape& l, std::size_t top) {
  SvgCanvas svg = canvas_for(sc.map);
  draw_map(svg, sc.map);
  for (const auto& o : l.world.obstacles) svg.circle(predict_obstacle(o, l.t), o.radius, "red");
  for (std::size_t k = 0; k < std::min(top, l.ranked.size()); ++k) {
    std::vector<Vec2> pts;
    for (const auto& s : l.ranked[k].trajectory.states) pts.push_back(s.pose.position());
    svg.polyline(pts, "gray", 0.8, 0.7);
  }
  svg.circle(l.state.pose.position(), l.world.robot_radius, "blue");
  return svg.str();
}

struct LandscapeOptions {
  std::string scenario;
  std::vector<std::string> params;
  std::optional<CostMode> mode;
  std::optional<std::uint64_t> seed;
  std::string agent;
  double t = 0.0;
  std::string rank = "cost";
  std::size_t top = 50;
  std::string out_dir;
};

inline int cmd_landscape(const LandscapeOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioConfig sc;
  Landscape l;
  try {
    sc = resolve_scenario(o.scenario, parse_params(o.params));
    if (o.seed) sc.seed = *o.seed;
    l = compute_landscape(sc, o.mode, o.agent, o.t, parse_rank(o.rank));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoadError;
  }
  try {
    const std::filesystem::path dir = resolve_out_dir(o.out_dir);
    ensure_dir(dir);
    const std::string stem = sc.name + "_landscape_" + o.rank;
    write_file(dir / (stem + ".svg"), landscape_svg(sc, l, o.top));
    write_file(dir / (stem + ".csv"), landscape_csv(l, o.top));
    out << "agent " << l.agent << " at t=" << detail::fmt(o.t, "%.1f") << ": " << l.ranked.size() << " candidates, top "
        << std::min(o.top, l.ranked.size()) << " by " << o.rank << " -> " << (dir / stem).string() << ".{svg,csv}\n";
  } catch (const WriteError& e) {
    err << "error: " << e.what() << "\n";
    return kExitWriteError;
  }
  return kExitOk;
}

inline int cmd_list_builtins(std::ostream& out) {
  for (const auto& b : builtin_catalog()) out << b.name << "\t" << b.description << "\n";
  return kExitOk;
}

}  // namespace dsmpepc::cli

#pragma once

/// \file
/// Closed-loop multi-agent simulation. Every cycle each active agent plans
/// against a frozen snapshot in which all other agents appear as
/// constant-velocity disks; then all agents execute the first control of their
/// plan simultaneously.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsmpepc/navigation.hpp"
#include "dsmpepc/optimizer.hpp"
#include "dsmpepc/scenario_config.hpp"

namespace dsmpepc {

enum class Outcome { reached, deadlocked, collided, timeout };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::reached: return "reached";
    case Outcome::deadlocked: return "deadlocked";
    case Outcome::collided: return "collided";
    case Outcome::timeout: return "timeout";
  }
  return "unknown";
}

struct TraceRow {
  double t = 0.0;
  Pose pose;
  double v = 0.0;
  double omega = 0.0;
  double d_o = 0.0;
  double nf_distance = 0.0;
};

struct DeadlockCriteria {
  double speed_threshold = 0.05;  // m/s
  double window = 5.0;            // s
  double goal_tolerance = 0.3;    // m
};

/// True iff the trace holds a contiguous stretch of at least `window` seconds
/// with speed below the threshold while the robot is away from its goal.
inline bool detect_deadlock(const std::vector<TraceRow>& trace, const DeadlockCriteria& c = {}) {
  std::optional<double> run_start;
  for (const auto& row : trace) {
    const bool stalled = std::abs(row.v) < c.speed_threshold && row.nf_distance > c.goal_tolerance;
    if (!stalled) {
      run_start.reset();
      continue;
    }
    if (!run_start) run_start = row.t;
    if (row.t - *run_start >= c.window - 1e-9) return true;
  }
  return false;
}

struct ContactEvent {
  double t = 0.0;
  std::string agent;
  std::string other;  // agent id, obstacle id, or "map"
};

/// Body placed in the world for contact checks: one disk of an agent or obstacle.
struct Body {
  std::string owner;
  Vec2 center;
  double radius = 0.0;
};

/// All contacts (clearance <= 0) among agent disks, the map and obstacle disks.
/// Agent pairs are reported once, with the lower index first.
inline std::vector<ContactEvent> detect_collisions(const std::vector<std::vector<Body>>& agents,
                                                   const std::vector<Body>& obstacles, const OccupancyGrid* grid,
                                                   double t) {
  std::vector<ContactEvent> events;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (agents[a].empty()) continue;
    const std::string& id = agents[a].front().owner;
    if (grid) {
      for (const auto& d : agents[a])
        if (grid->distance_at(d.center) - d.radius <= 0.0) {
          events.push_back({t, id, "map"});
          break;
        }
    }
    for (std::size_t b = a + 1; b < agents.size(); ++b) {
      bool hit = false;
      for (const auto& da : agents[a])
        for (const auto& db : agents[b]) hit = hit || distance(da.center, db.center) - da.radius - db.radius <= 0.0;
      if (hit) events.push_back({t, id, agents[b].front().owner});
    }
    for (const auto& o : obstacles) {
      bool hit = false;
      for (const auto& da : agents[a]) hit = hit || distance(da.center, o.center) - da.radius - o.radius <= 0.0;
      if (hit) events.push_back({t, id, o.owner});
    }
  }
  return events;
}

struct ReplanSummary {
  double t = 0.0;
  TrajectoryParam best_param;
  double best_cost = 0.0;
  std::size_t n_evaluated = 0;
  std::vector<EvaluatedCandidate> candidates;  // filled when recording diagnostics
  RobotState state;
};

struct AgentResult {
  std::string id;
  Outcome outcome = Outcome::timeout;
  double time_to_goal = kInfinity;
  double end_time = 0.0;
  double path_length = 0.0;
  double min_clearance = kInfinity;
  double smoothness_v = 0.0;  // mean |dv| / h
  double smoothness_w = 0.0;  // mean |domega| / h
  std::vector<TraceRow> trace;
  std::vector<ReplanSummary> replan_log;
};

struct ObstacleTrace {
  std::string id;
  double radius = 0.0;
  std::vector<std::pair<double, Vec2>> positions;
};

struct SimResult {
  std::string scenario;
  double step_h = 0.2;
  double end_time = 0.0;
  std::vector<AgentResult> agents;
  std::vector<ObstacleTrace> obstacles;
  std::vector<ContactEvent> contacts;

  bool all_reached() const {
    return std::all_of(agents.begin(), agents.end(), [](const AgentResult& a) { return a.outcome == Outcome::reached; });
  }
  const AgentResult* agent(std::string_view id) const {
    for (const auto& a : agents)
      if (a.id == id) return &a;
    return nullptr;
  }
};

struct SimOptions {
  bool record_candidates = false;
  bool parallel = true;
  std::size_t replan_every = 1;
  DeadlockCriteria deadlock;
  std::optional<CostMode> mode_override;
};

/// Deterministic per-(scenario, agent, cycle) optimizer seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t agent, std::uint64_t cycle) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + agent * 0xBF58476D1CE4E5B9ull + cycle * 0x94D049BB133111EBull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return (z ^ (z >> 31)) | 1u;
}

inline std::vector<Body> agent_bodies(const AgentSpec& spec, const Pose& p) {
  std::vector<Body> out;
  for (const auto& d : spec.footprint.disks) out.push_back({spec.id, spec.footprint.disk_center(p, d), d.radius});
  return out;
}

/// Snapshot for one agent's planning cycle at time t.
inline World agent_world(std::size_t self, const std::vector<AgentSpec>& specs, const std::vector<RobotState>& states,
                         const std::vector<bool>& active, const std::vector<DynamicObstacle>& scripted,
                         const std::shared_ptr<const OccupancyGrid>& grid, double t) {
  World w;
  w.grid = grid;
  w.robot_radius = specs[self].radius();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (k == self) continue;
    const Vec2 vel = active[k] ? states[k].velocity() : Vec2{};
    for (const auto& d : specs[k].footprint.disks)
      w.obstacles.push_back({specs[k].id, specs[k].footprint.disk_center(states[k].pose, d), vel, t, d.radius, {}});
  }
  for (const auto& o : scripted) w.obstacles.push_back(freeze_obstacle(o, t));
  return w;
}

inline SimResult run(const ScenarioConfig& sc, const SimOptions& opt = {}) {
  if (sc.agents.empty()) throw std::invalid_argument("simulator: scenario has no agents");
  const double h = sc.defaults.planner.step_h;
  if (!(h > 0.0)) throw std::invalid_argument("simulator: step_h must be positive");
  const std::size_t n_agents = sc.agents.size();
  const auto n_steps = static_cast<std::size_t>(std::lround(sc.duration / h));

  std::vector<AgentSpec> specs = sc.agents;
  for (auto& s : specs) {
    if (opt.mode_override) s.cost.mode = *opt.mode_override;
    s.planner.step_h = h;
  }

  auto grid = std::make_shared<const OccupancyGrid>(OccupancyGrid::from_rows(sc.map.rows, sc.map.resolution, sc.map.origin));
  std::vector<std::unique_ptr<NavigationFunction>> nav;
  for (const auto& s : specs)
    nav.push_back(std::make_unique<NavigationFunction>(grid, s.goal.position(), s.radius()));

  SimResult res;
  res.scenario = sc.name;
  res.step_h = h;
  std::vector<RobotState> states(n_agents);
  std::vector<bool> active(n_agents, true);
  std::vector<std::optional<WarmStart>> warm(n_agents);
  std::vector<Trajectory> last_plan(n_agents);
  res.agents.resize(n_agents);
  for (const auto& o : sc.scripted_obstacles) res.obstacles.push_back({o.id, o.radius, {}});

  auto bodies_at = [&](double t) {
    std::vector<std::vector<Body>> agents(n_agents);
    for (std::size_t k = 0; k < n_agents; ++k) agents[k] = agent_bodies(specs[k], states[k].pose);
    std::vector<Body> obstacles;
    for (const auto& o : sc.scripted_obstacles) obstacles.push_back({o.id, predict_obstacle(o, t), o.radius});
    return std::make_pair(agents, obstacles);
  };
  // true clearance of agent k against the map, other agents and obstacles
  auto true_clearance = [&](std::size_t k, double t) {
    World w = agent_world(k, specs, states, active, sc.scripted_obstacles, grid, t);
    return footprint_clearance(w, specs[k].footprint, states[k].pose, t);
  };
  auto record = [&](std::size_t k, double t) {
    res.agents[k].trace.push_back({t, states[k].pose, states[k].v, states[k].omega, true_clearance(k, t),
                                   (*nav[k])(states[k].pose.position())});
    res.agents[k].min_clearance = std::min(res.agents[k].min_clearance, res.agents[k].trace.back().d_o);
  };
  auto record_obstacles = [&](double t) {
    for (std::size_t k = 0; k < sc.scripted_obstacles.size(); ++k)
      res.obstacles[k].positions.push_back({t, predict_obstacle(sc.scripted_obstacles[k], t)});
  };
  auto finish = [&](std::size_t k, Outcome o, double t) {
    active[k] = false;
    states[k].v = 0.0;
    states[k].omega = 0.0;
    res.agents[k].outcome = o;
    res.agents[k].end_time = t;
    if (o == Outcome::reached) res.agents[k].time_to_goal = t;
  };

  for (std::size_t k = 0; k < n_agents; ++k) {
    res.agents[k].id = specs[k].id;
    states[k] = RobotState{specs[k].start, 0.0, 0.0, 0.0};
  }
  auto contact_key = [&](const ContactEvent& e, std::size_t& a, std::string& other) {
    for (std::size_t k = 0; k < n_agents; ++k)
      if (specs[k].id == e.agent) a = k;
    other = e.other;
  };
  std::vector<std::vector<std::string>> prev_contacts(n_agents);
  {
    auto [ab, ob] = bodies_at(0.0);
    for (const auto& e : detect_collisions(ab, ob, grid.get(), 0.0)) {
      res.contacts.push_back(e);
      std::size_t a = 0;
      std::string other;
      contact_key(e, a, other);
      prev_contacts[a].push_back(other);
      for (std::size_t k = 0; k < n_agents; ++k)
        if (specs[k].id == other) prev_contacts[k].push_back(e.agent);
    }
  }
  record_obstacles(0.0);
  for (std::size_t k = 0; k < n_agents; ++k) {
    record(k, 0.0);
    if (res.agents[k].trace.back().nf_distance <= specs[k].cost.goal_tolerance) finish(k, Outcome::reached, 0.0);
  }

  double t = 0.0;
  for (std::size_t step = 0; step < n_steps; ++step) {
    if (std::none_of(active.begin(), active.end(), [](bool b) { return b; })) break;
    t = static_cast<double>(step) * h;

    // plan all, against the same frozen state
    std::vector<std::optional<PlanResult>> plans(n_agents);
    const bool replan = step % std::max<std::size_t>(1, opt.replan_every) == 0;
    auto plan_agent = [&](std::size_t k) {
      const AgentSpec& s = specs[k];
      World w = agent_world(k, specs, states, active, sc.scripted_obstacles, grid, t);
      PlanRequest req;
      req.current = states[k];
      req.goal = s.goal;
      req.world = &w;
      req.nav = nav[k].get();
      req.footprint = s.footprint;
      req.planner = s.planner;
      req.cost = s.cost;
      req.optimizer = s.optimizer;
      req.optimizer.seed = mix_seed(sc.seed, k, step);
      req.warm_start = warm[k];
      return plan(req);
    };
    if (replan) {
      if (opt.parallel) {
        std::vector<std::future<PlanResult>> futures(n_agents);
        for (std::size_t k = 0; k < n_agents; ++k)
          if (active[k]) futures[k] = std::async(std::launch::async, plan_agent, k);
        for (std::size_t k = 0; k < n_agents; ++k)
          if (active[k]) plans[k] = futures[k].get();
      } else {
        for (std::size_t k = 0; k < n_agents; ++k)
          if (active[k]) plans[k] = plan_agent(k);
      }
    }

    // step all
    for (std::size_t k = 0; k < n_agents; ++k) {
      if (!active[k]) continue;
      if (plans[k]) {
        PlanResult& p = *plans[k];
        warm[k] = WarmStart{p.best_trajectory.target, p.best_param.v_max};
        last_plan[k] = p.best_trajectory;
        ReplanSummary summary{t, p.best_param, p.best_cost, p.evaluated.size(), {}, states[k]};
        if (opt.record_candidates) summary.candidates = std::move(p.evaluated);
        res.agents[k].replan_log.push_back(std::move(summary));
        last_plan[k].states.erase(last_plan[k].states.begin());
      }
      RobotState next;
      if (!last_plan[k].states.empty()) {
        next = last_plan[k].states.front();
        last_plan[k].states.erase(last_plan[k].states.begin());
      } else {
        next = advance(states[k], Control{0.0, 0.0}, h);
      }
      next.t = static_cast<double>(step + 1) * h;
      res.agents[k].path_length += distance(next.pose.position(), states[k].pose.position());
      states[k] = next;
    }
    const double t_next = static_cast<double>(step + 1) * h;
    record_obstacles(t_next);

    // contacts; only contacts that were not already present count as collisions
    auto [ab, ob] = bodies_at(t_next);
    std::vector<std::vector<std::string>> now(n_agents);
    std::vector<bool> collided(n_agents, false);
    for (const auto& e : detect_collisions(ab, ob, grid.get(), t_next)) {
      res.contacts.push_back(e);
      std::size_t a = 0;
      std::string other;
      contact_key(e, a, other);
      now[a].push_back(other);
      const bool fresh = std::find(prev_contacts[a].begin(), prev_contacts[a].end(), other) == prev_contacts[a].end();
      if (fresh) collided[a] = true;
      for (std::size_t k = 0; k < n_agents; ++k)
        if (specs[k].id == other) {
          now[k].push_back(e.agent);
          if (fresh) collided[k] = true;
        }
    }
    prev_contacts = std::move(now);

    for (std::size_t k = 0; k < n_agents; ++k) {
      if (!active[k]) continue;
      record(k, t_next);
      if (collided[k]) {
        finish(k, Outcome::collided, t_next);
      } else if (res.agents[k].trace.back().nf_distance <= specs[k].cost.goal_tolerance) {
        finish(k, Outcome::reached, t_next);
      } else {
        DeadlockCriteria c = opt.deadlock;
        c.goal_tolerance = specs[k].cost.goal_tolerance;
        if (detect_deadlock(res.agents[k].trace, c)) finish(k, Outcome::deadlocked, t_next);
      }
    }
    t = t_next;
  }
  res.end_time = t;
  for (std::size_t k = 0; k < n_agents; ++k) {
    if (active[k]) finish(k, Outcome::timeout, t);
    auto& a = res.agents[k];
    double dv = 0.0, dw = 0.0;
    for (std::size_t i = 1; i < a.trace.size(); ++i) {
      dv += std::abs(a.trace[i].v - a.trace[i - 1].v);
      dw += std::abs(a.trace[i].omega - a.trace[i - 1].omega);
    }
    if (a.trace.size() > 1) {
      const double n = static_cast<double>(a.trace.size() - 1);
      a.smoothness_v = dv / n / h;
      a.smoothness_w = dw / n / h;
    }
  }
  return res;
}

}  // namespace dsmpepc

// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace dsmpepc;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

CostParams with_mode(CostParams p, CostMode m) {
  p.mode = m;
  return p;
}

bool le_rel(double a, double b) { return a <= b + 1e-12 * std::abs(b); }

TrajectoryParam random_param(std::mt19937_64& rng, const PlannerConfig& cfg) {
  std::uniform_real_distribution<double> u(0, 1);
  return {u(rng) * cfg.r_max(), (2 * u(rng) - 1) * kPi, (2 * u(rng) - 1) * kPi, u(rng) * cfg.v_limit};
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Contact starts: a random pose whose footprint touches a wall or obstacle.
oracle::RandomCase contact_case(std::mt19937_64& rng, const PlannerConfig& cfg) {
  std::uniform_real_distribution<double> u(0, 1);
  while (true) {
    oracle::RandomCase c = oracle::random_case(rng, cfg);
    const RobotState s = c.traj.states.front();
    if (footprint_clearance(*c.world, c.ctx.footprint, s.pose, s.t) > 0.0) continue;
    c.traj = rollout(s, random_param(rng, cfg), cfg);
    return c;
  }
}

Verdict lemma1() {
  const CostParams p;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> d(0, 1), t(0, 30);
  std::size_t pairs = 0, segments = 0, bad = 0;
  for (int k = 0; k < 10000; ++k, ++pairs) {
    const double dd = d(rng) * (k % 3 == 0 ? 0.2 : 1.0);
    const double tt = k % 10 == 0 ? kInfinity : (k % 10 == 1 ? 0.0 : t(rng));
    const double pc = collision_probability(dd, p), mod = modified_collision_probability(dd, tt, p);
    if (!le_rel(mod, pc) || !le_rel((1 - p.a) * pc, mod)) ++bad;
  }
  const PlannerConfig cfg;
  for (int k = 0; k < 600; ++k) {
    const auto c = oracle::random_case(rng, cfg);
    const auto ds = trajectory_cost(c.traj, c.ctx, with_mode(p, CostMode::ds_mpepc));
    const auto base = trajectory_cost(c.traj, c.ctx, with_mode(p, CostMode::baseline_mpepc));
    for (std::size_t i = 0; i < ds.segments.size(); ++i, ++segments) {
      const auto& s = ds.segments[i];
      if (!le_rel(s.p_c, s.p_c_distance) || !le_rel((1 - p.a) * s.p_c_distance, s.p_c)) ++bad;
      if (!le_rel(base.segments[i].p_s, s.p_s)) ++bad;
    }
  }
  return {bad == 0, fmt("%.0f random pairs, %.0f segments of 600 trajectories, %.0f violations", pairs, segments, bad)};
}

Verdict lemma2() {
  const PlannerConfig cfg;
  std::mt19937_64 rng(202);
  std::size_t trajectories = 0, bad = 0;
  for (int k = 0; k < 300; ++k) {
    const auto c = contact_case(rng, cfg);
    for (CostMode m : {CostMode::ds_mpepc, CostMode::baseline_mpepc}) {
      const auto b = trajectory_cost(c.traj, c.ctx, with_mode(CostParams{}, m));
      if (b.segments.front().d_o != 0.0) {
        ++bad;
        continue;
      }
      ++trajectories;
      for (const auto& s : b.segments)
        if (s.p_s != 0.0) ++bad;
    }
  }
  return {bad == 0, fmt("%.0f in-contact trajectories over both modes, %.0f nonzero survivabilities", trajectories, bad)};
}

Verdict lemma3() {
  const auto scene = oracle::fixed_scenes()[4];
  const World w = scene.world();
  const PlannerConfig cfg;
  const NavigationFunction nav(scene.grid, scene.goal.position(), w.robot_radius);
  const CostContext ctx{&w, &nav, Footprint::disk(w.robot_radius), scene.goal.position(), cfg.v_limit};
  std::mt19937_64 rng(303);
  std::size_t bad = 0;
  const int candidates = 2000;
  for (int k = 0; k < candidates; ++k) {
    const Trajectory t = rollout(scene.start, random_param(rng, cfg), cfg);
    const auto ds = trajectory_cost(t, ctx, with_mode(CostParams{}, CostMode::ds_mpepc));
    const auto base = trajectory_cost(t, ctx, with_mode(CostParams{}, CostMode::baseline_mpepc));
    if (ds.total != base.total || !ds.terminal || ds.terminal->j_terminal != 0.0) ++bad;
  }

  PlanRequest req;
  req.current = scene.start;
  req.goal = scene.goal;
  req.world = &w;
  req.nav = &nav;
  req.footprint = ctx.footprint;
  const auto r = plan(req);
  const bool null_choice = r.best_param.r == 0.0;

  ScenarioConfig sc;
  sc.name = "contact_start";
  sc.map = MapBuilder(10, 10, 0.1).border(0.3).fill(5.0, 3.0, 5.4, 7.0).build();
  sc.duration = 10.0;
  AgentSpec a;
  a.id = "robot";
  a.start = scene.start.pose;
  a.goal = scene.goal;
  sc.agents.push_back(a);
  SimOptions opt;
  opt.deadlock.window = 1e9;  // keep the agent active for the whole 10 s
  const auto res = run(sc, opt);
  double disp = 0.0;
  for (const auto& row : res.agents[0].trace) disp = std::max(disp, distance(row.pose.position(), a.start.position()));
  const bool full = res.agents[0].trace.back().t >= 10.0 - 1e-9;
  return {bad == 0 && null_choice && disp < 1e-9 && full,
          fmt("%.0f candidates with unequal totals or nonzero terminal term; argmin r = %g; max displacement over 10 s = %g m",
              bad, r.best_param.r, disp)};
}

Verdict supplementary(const std::vector<SimResult>& executed) {
  const PlannerConfig cfg;
  std::mt19937_64 rng(404);
  std::size_t checked = 0, bad = 0;
  auto check_traj = [&](const Trajectory& t, const CostBreakdown& b) {
    ++checked;
    for (std::size_t i = 1; i < b.segments.size(); ++i)
      if (b.segments[i].p_s > b.segments[i - 1].p_s) ++bad;
    for (std::size_t i = 1; i < t.states.size(); ++i)
      if (distance(t.states[i].pose.position(), t.states[i - 1].pose.position()) > cfg.v_limit * cfg.step_h + 1e-12) ++bad;
  };
  for (int k = 0; k < 500; ++k) {
    const auto c = oracle::random_case(rng, cfg);
    for (CostMode m : {CostMode::ds_mpepc, CostMode::baseline_mpepc})
      check_traj(c.traj, trajectory_cost(c.traj, c.ctx, with_mode(CostParams{}, m)));
  }
  // every candidate the optimizer evaluated in each fixed scene
  for (const auto& scene : oracle::fixed_scenes()) {
    const World w = scene.world();
    const NavigationFunction nav(scene.grid, scene.goal.position(), w.robot_radius);
    PlanRequest req;
    req.current = scene.start;
    req.goal = scene.goal;
    req.world = &w;
    req.nav = &nav;
    req.footprint = Footprint::disk(w.robot_radius);
    req.cost.mode = scene.mode;
    for (const auto& e : plan(req).evaluated) {
      auto [t, b] = evaluate_candidate(e.param, req);
      check_traj(t, b);
    }
  }
  std::size_t steps = 0;
  for (const auto& r : executed)
    for (const auto& a : r.agents)
      for (std::size_t i = 1; i < a.trace.size(); ++i, ++steps)
        if (distance(a.trace[i].pose.position(), a.trace[i - 1].pose.position()) > cfg.v_limit * r.step_h + 1e-12) ++bad;
  return {bad == 0, fmt("%.0f candidate trajectories and %.0f executed steps, %.0f violations", checked, steps, bad)};
}

Verdict terminal_bounds() {
  const CostParams p;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0, 1), t(0, 20);
  std::size_t bad = 0;
  for (int k = 0; k < 1000000; ++k) {
    const double ttg = k % 17 == 0 ? kInfinity : (k % 19 == 0 ? 0.0 : t(rng));
    const double ttc = k % 13 == 0 ? kInfinity : (k % 23 == 0 ? 0.0 : t(rng));
    const double j = terminal_cost(ttg, ttc, u(rng), p).j_terminal;
    if (!(j >= -1.0 && j <= 0.0)) ++bad;
  }
  const double lo = terminal_cost(kInfinity, kInfinity, 1.0, p).j_terminal;
  const double e = terminal_cost(kInfinity, 2.0, 1.0, p).j_terminal;
  const bool pass = bad == 0 && lo == -1.0 && std::abs(e + std::exp(-1.0)) <= 1e-9;
  return {pass, fmt("1e6 samples with %.0f out of [-1, 0]; bound value %.17g; value at TTC = 2 s %.12f", bad, lo, e)};
}

Verdict oracles() {
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(606);

  int edt_bad = 0;
  for (int k = 0; k < 20; ++k) {
    const auto g = oracle::random_grid(64, 64, 0.01 + 0.3 * (k % 5) / 4.0, rng, 0.1);
    if (g.distance_field() != oracle::brute_force_distance_field(g)) ++edt_bad;
  }
  pass = pass && edt_bad == 0;
  detail += fmt("EDT: %.0f/20 grids differ", edt_bad);

  std::uniform_real_distribution<double> pos(-8, 8), vel(-1.5, 1.5), rad(0.2, 0.8);
  double worst = 0.0;
  int ttc_bad = 0, finite = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 rp{pos(rng), pos(rng)};
    Vec2 rv{vel(rng), vel(rng)};
    if (k % 2 == 0) rv = (0.2 + std::abs(vel(rng))) * Vec2::unit(std::atan2(-rp.y, -rp.x) + 0.3 * vel(rng));
    const double R = rad(rng) + rad(rng);
    const double a = disk_time_to_contact(rp, rv, R);
    const double s = oracle::fine_step_ttc(Vec2{} - rp, Vec2{} - rv, R);
    if (a == kInfinity || s == oracle::kInf) {
      if ((a == kInfinity) != (s == oracle::kInf || s > kTtcHorizon)) ++ttc_bad;
      continue;
    }
    ++finite;
    worst = std::max(worst, std::abs(a - s));
    if (std::abs(a - s) > 2e-3) ++ttc_bad;
  }
  pass = pass && ttc_bad == 0;
  detail += fmt("; TTC: %.0f mismatches, max |diff| %.2e s over %.0f finite pairs", ttc_bad, worst, finite);

  const PlannerConfig cfg;
  double roll_worst = 0.0;
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 50; ++k) {
    const RobotState s{make_pose(u(rng) * 10, u(rng) * 10, (2 * u(rng) - 1) * kPi), u(rng) * cfg.v_limit,
                       (2 * u(rng) - 1) * cfg.omega_limit, 0.0};
    const TrajectoryParam z = random_param(rng, cfg);
    const auto t = rollout(s, z, cfg);
    const auto f = oracle::fine_rollout(s, z, cfg, 100);
    roll_worst = std::max(roll_worst, distance(t.states.back().pose.position(), f.back().position()));
  }
  pass = pass && roll_worst < 0.05;
  detail += fmt("; rollout: max terminal gap %.4f m", roll_worst);

  std::string opt_detail;
  for (const auto& scene : oracle::fixed_scenes()) {
    const World w = scene.world();
    const NavigationFunction nav(scene.grid, scene.goal.position(), w.robot_radius);
    PlanRequest req;
    req.current = scene.start;
    req.goal = scene.goal;
    req.world = &w;
    req.nav = &nav;
    req.footprint = Footprint::disk(w.robot_radius);
    req.cost.mode = scene.mode;
    const double got = plan(req).best_cost;
    const double grid = oracle::dense_grid_search(req).best_cost;
    const bool ok = got <= grid + 1e-6;
    pass = pass && ok;
    opt_detail += "; " + scene.name + fmt(" %.4f vs grid %.4f", got, grid) + (ok ? "" : " (worse)");
  }
  detail += "; optimizer" + opt_detail;
  return {pass, detail};
}

struct ScenarioRuns {
  std::vector<SimResult> all;
  Verdict verdict;
};

SimResult run_mode(const ScenarioConfig& sc, CostMode m) {
  SimOptions o;
  o.mode_override = m;
  return run(sc, o);
}

std::string outcomes(const SimResult& r) {
  std::string s;
  for (const auto& a : r.agents) s += (s.empty() ? "" : " ") + a.id + "=" + std::string(to_string(a.outcome));
  return s;
}

bool clean_success(const SimResult& r) {
  if (!r.all_reached() || !r.contacts.empty()) return false;
  for (const auto& a : r.agents)
    if (!(a.min_clearance > 0.0)) return false;
  return true;
}

ScenarioRuns scenarios() {
  ScenarioRuns out;
  bool pass = true;
  std::string d;

  const auto tc = builtin("t_corridor");
  const auto tc_ds = run_mode(tc, CostMode::ds_mpepc);
  const auto tc_base = run_mode(tc, CostMode::baseline_mpepc);
  const auto& mover_ds = *tc_ds.agent("mover");
  const bool a_ok = mover_ds.outcome == Outcome::reached && mover_ds.time_to_goal <= 60.0 && tc_ds.contacts.empty() &&
                    tc_base.agent("mover")->outcome == Outcome::deadlocked;
  pass = pass && a_ok;
  d += std::string("(a) t_corridor ds: ") + outcomes(tc_ds) + fmt(" at %.1f s, %.0f contacts", mover_ds.end_time, tc_ds.contacts.size()) +
       "; mpepc: " + outcomes(tc_base);

  const auto nc = builtin("narrow_corridor");
  const auto nc_ds = run_mode(nc, CostMode::ds_mpepc);
  const auto nc_base = run_mode(nc, CostMode::baseline_mpepc);
  const bool b_ok = clean_success(nc_ds);
  pass = pass && b_ok;
  d += "; (b) narrow_corridor ds: " + outcomes(nc_ds) + fmt(", %.0f contacts", nc_ds.contacts.size()) +
       "; mpepc (reported): " + outcomes(nc_base);

  const auto c4 = run_mode(builtin("circle", {{"n", 4}, {"R", 4}}), CostMode::ds_mpepc);
  const auto c10 = run_mode(builtin("circle", {{"n", 10}, {"R", 5}}), CostMode::ds_mpepc);
  auto min_clear = [](const SimResult& r) {
    double m = kInfinity;
    for (const auto& a : r.agents) m = std::min(m, a.min_clearance);
    return m;
  };
  const bool c_ok = clean_success(c4) && clean_success(c10);
  pass = pass && c_ok;
  d += fmt("; (c) circle4 reached %.0f/4 min clearance %.3f m, ", std::count_if(c4.agents.begin(), c4.agents.end(), [](const AgentResult& a) { return a.outcome == Outcome::reached; }), min_clear(c4)) +
       fmt("circle10 reached %.0f/10 min clearance %.3f m, contacts %.0f",
           std::count_if(c10.agents.begin(), c10.agents.end(), [](const AgentResult& a) { return a.outcome == Outcome::reached; }),
           min_clear(c10), c4.contacts.size() + c10.contacts.size());

  ScenarioConfig ablated = tc;
  for (auto& a : ablated.agents) {
    a.cost.a = 0.0;
    a.cost.use_terminal = false;
  }
  const auto abl = run_mode(ablated, CostMode::ds_mpepc);
  const bool d_ok = abl.agent("mover")->outcome == Outcome::deadlocked;
  pass = pass && d_ok;
  d += "; (d) ablation (a = 0, no terminal term): " + outcomes(abl);

  out.all = {tc_ds, tc_base, nc_ds, nc_base, c4, c10, abl};
  out.verdict = {pass, d};
  return out;
}

Verdict attractor() {
  const ControlGains g;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0, 1);
  const double dt = 0.01;
  int converged = 0;
  double worst_time = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Pose target = make_pose(0, 0, (2 * u(rng) - 1) * kPi);
    const double r0 = 0.5 + 9.5 * u(rng), phi = (2 * u(rng) - 1) * kPi;
    Pose p = make_pose(r0 * std::cos(phi), r0 * std::sin(phi), (2 * u(rng) - 1) * kPi);
    double t = 0.0;
    for (; t < 60.0; t += dt) {
      const auto c = egocentric_coords(p, target);
      if (c.r < 0.05) break;
      const double kappa = control_law_curvature(c, g);
      const double v = velocity_modulation(kappa, 1.0, c.r, g);
      p = arc_step(p, v, kappa * v, dt);
    }
    if (egocentric_coords(p, target).r < 0.05) {
      ++converged;
      worst_time = std::max(worst_time, t);
    }
  }
  return {converged == 200, fmt("%.0f/200 start poses reached r < 0.05 m; slowest took %.1f s", converged, worst_time)};
}

Verdict performance() {
  const auto sc = builtin("t_corridor");
  auto grid = std::make_shared<const OccupancyGrid>(OccupancyGrid::from_rows(sc.map.rows, sc.map.resolution));
  const auto& mover = sc.agents[0];
  const NavigationFunction nav(grid, mover.goal.position(), mover.radius());
  std::vector<double> ms;
  std::size_t evals = 0;
  for (int k = 0; k < 60; ++k) {
    World w = agent_world(0, sc.agents, {RobotState{mover.start, 0, 0, 0}, RobotState{sc.agents[1].start, 0, 0, 0}},
                          {true, true}, {}, grid, 0.0);
    PlanRequest req;
    req.current = RobotState{make_pose(mover.start.x, mover.start.y + 0.1 * k, mover.start.heading), 0.5, 0, 0};
    req.goal = mover.goal;
    req.world = &w;
    req.nav = &nav;
    req.footprint = mover.footprint;
    req.planner = mover.planner;
    req.cost = mover.cost;
    req.optimizer = mover.optimizer;
    req.optimizer.seed = static_cast<std::uint64_t>(k + 1);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = plan(req);
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    evals = std::max(evals, r.evaluated.size());
  }
  std::sort(ms.begin(), ms.end());
  const double median = 0.5 * (ms[29] + ms[30]);
  return {median < 200.0, fmt("median %.1f ms, max %.1f ms per cycle, up to %.0f evaluations", median, ms.back(), evals)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::printf("criterion %d %s: %s | %s\n", n, v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  };
  report(1, "anticipatory bound", lemma1());
  report(2, "contact annihilates survivability", lemma2());
  report(3, "no motion from contact", lemma3());
  const auto runs = scenarios();
  report(4, "survivability monotone and displacement bound", supplementary(runs.all));
  report(5, "terminal cost bounds", terminal_bounds());
  report(6, "oracle equivalences", oracles());
  report(7, "scenario reproduction", runs.verdict);
  report(8, "control-law attractor", attractor());
  report(9, "planning cycle time", performance());
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

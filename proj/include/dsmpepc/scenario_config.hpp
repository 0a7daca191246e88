#pragma once

/// \file
/// Declarative description of a navigation scenario.

#include <cstdint>
#include <string>
#include <vector>

#include "dsmpepc/cost.hpp"
#include "dsmpepc/kinematics.hpp"
#include "dsmpepc/optimizer.hpp"
#include "dsmpepc/world.hpp"

namespace dsmpepc {

struct AgentSpec {
  std::string id;
  Pose start;
  Pose goal;
  Footprint footprint = Footprint::disk(0.35);
  PlannerConfig planner;
  CostParams cost;
  OptimizerConfig optimizer;

  CostMode mode() const { return cost.mode; }
  double radius() const { return footprint.bounding_radius(); }
};

struct MapSpec {
  std::vector<std::string> rows;
  double resolution = 0.1;
  Vec2 origin;
};

struct ScenarioDefaults {
  PlannerConfig planner;
  CostParams cost;
  OptimizerConfig optimizer;
};

struct ScenarioConfig {
  std::string name = "scenario";
  MapSpec map;
  ScenarioDefaults defaults;
  std::vector<AgentSpec> agents;
  std::vector<DynamicObstacle> scripted_obstacles;
  double duration = 60.0;
  std::uint64_t seed = 1;
};

}  // namespace dsmpepc

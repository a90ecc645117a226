#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/plan/trajectory.hpp"
#include "camarm/sim/scene.hpp"

namespace camarm {

struct PlannerParams {
  double step_size = 0.2;            // rad, joint-space extension length
  double goal_bias = 0.1;
  int max_iterations = 60000;
  double rewire_radius_scale = 1.5;  // gamma; k-nearest count is gamma * e * (1 + 1/6) * ln(n)
  double safety_margin = 0.075;      // m
  double resolution = 0.01;          // rad, dense edge-check spacing
  // Stop this many iterations after the first solution. 0 runs to max_iterations.
  int refine_iterations = 2000;
  int shortcut_rounds = 200;
  double speed_scale = 0.25;         // fraction of the joint velocity limits when timing the path
  std::uint64_t seed = 0;

  void validate() const;
};

PlannerParams planner_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlannerParams& p);

enum class PlanStatus { Ok, StartInCollision, GoalInCollision, NoSolution };
std::string to_string(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::NoSolution;
  Path path;
  int iterations = 0;
  int nodes = 0;
  // (iteration, cost) each time the best solution improved.
  std::vector<std::pair<int, double>> improvements;

  bool ok() const { return status == PlanStatus::Ok; }
};

// True iff the straight joint-space segment a-b is clear at `margin` at every
// sample spaced at most `resolution` rad apart (endpoints included).
bool segment_free(const RobotModel& model, const Scene& scene, const JointConfig& a, const JointConfig& b,
                  double margin, double resolution);

// Joint-space RRT* with k-nearest choose-parent and rewiring. Returns the raw
// tree path (not shortcut). Endpoint collisions and exhausted budgets are
// reported through status, never thrown.
PlanResult plan_rrt_star(const RobotModel& model, const Scene& scene, const JointConfig& q_start,
                         const JointConfig& q_goal, const PlannerParams& params);

// Greedy farthest-reachable pass followed by `rounds` random shortcut attempts
// (seeded from params.seed). Output cost never exceeds input cost.
Path shortcut_path(const Path& path, const RobotModel& model, const Scene& scene, const PlannerParams& params,
                   int rounds);

}  // namespace camarm

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/eval/metrics.hpp"
#include "camarm/eval/rollout.hpp"
#include "camarm/plan/rrt_star.hpp"
#include "camarm/plan/scripted_expert.hpp"
#include "camarm/plan/task_sampler.hpp"

namespace camarm {

enum class Task { PushInFree, PushInObstacle };
std::string to_string(Task t);
Task task_from_string(const std::string& s);

enum class MethodKind { Expert, Planner, Policy };

struct MethodSpec {
  std::string id;
  MethodKind kind = MethodKind::Expert;
  double noise_sigma = 0.0;         // Expert
  const Policy* policy = nullptr;   // Policy
};

struct TrialMetrics {
  bool success = false;
  bool collided = false;
  double s_vis = 0.0;
  double jerk = 0.0;         // m/s^3
  double frame_error = 0.0;  // px
  double srr = 0.0;          // fraction
  double latency_ms = 0.0;   // mean policy forward time, 0 for open-loop methods
  double duration = 0.0;     // s
  std::string failure;
};

// Pure function of the record.
TrialMetrics compute_metrics(const TrialRecord& r, const FeatureStats& stats, const RobotModel& model,
                             const CameraIntrinsics& intr, double threshold = 0.85);

struct Aggregate {
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double s_vis = 0.0, jerk = 0.0, frame_error = 0.0, srr = 0.0, latency_ms = 0.0;
};
Aggregate aggregate(const std::vector<TrialMetrics>& trials);

struct BenchmarkRow {
  std::string method;
  Task task = Task::PushInFree;
  std::vector<TrialMetrics> trials;
  Aggregate agg;
};

struct BenchmarkConfig {
  int n_trials = 10;
  std::uint64_t seed = 0;
  double svis_threshold = 0.85;
  int svis_samples = 2000;
  double task_margin = 0.075;  // start/goal clearance when drawing trials
  RolloutConfig rollout;
  PlannerParams planner;
  DeployConfig deploy;

  void validate() const;
};

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& c);

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  std::vector<TrialRecord> records;
  std::map<std::string, FeatureStats> svis_stats;  // per task
};

// Scripted style used per task: DIRECT without the obstacle, ARC_LEFT with it.
Style task_style(Task t);

// Runs every method on every task with the same n_trials start/goal draws
// (seeded per task). A method that throws is recorded as a failed trial.
BenchmarkResult run_benchmark(const RobotModel& model, const std::vector<std::pair<Task, Scene>>& tasks,
                              const std::vector<MethodSpec>& methods, const BenchmarkConfig& cfg);

// Single trial of one method; exposed for the service and the CLI.
TrialRecord run_trial(const RobotModel& model, const Scene& scene, Task task, const MethodSpec& method,
                      const TaskInstance& inst, int index, const BenchmarkConfig& cfg);

// Low-level suites.
struct RepeatabilitySuite {
  int runs = 10;
  double noise_sigma = 0.0;  // rad, actuation noise
  std::vector<JointConfig> waypoints;  // empty: four built-in waypoints
  double move_time = 2.0;    // s per min-jerk segment
  double dwell = 1.0;        // s held at each waypoint before sampling
  std::uint64_t seed = 0;
};
std::vector<JointConfig> default_waypoints();
RepeatabilityResult run_repeatability(const RobotModel& model, const Scene& scene, const RolloutConfig& rollout,
                                      const RepeatabilitySuite& suite);

struct CircleSuite {
  Vec3 center = Vec3(0.45, 0.0, 0.40);
  Vec3 normal = Vec3(0.3, 0.0, 1.0);  // plane normal (normalized internally)
  double radius = 0.10;
  double period = 6.0;  // s per cycle
  int cycles = 2;
  Vec3 look_target = Vec3(0.9, 0.0, 0.0);  // camera keeps looking here
};
struct CircleTrackingResult {
  TrackingResult tracking;
  std::vector<double> time;
  std::vector<Vec3> reference, executed;
  bool ik_ok = true;
};
CircleTrackingResult run_circle_tracking(const RobotModel& model, const Scene& scene, const RolloutConfig& rollout,
                                         const CircleSuite& suite);

}  // namespace camarm

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/control/command_filter.hpp"
#include "camarm/learn/deploy.hpp"
#include "camarm/plan/trajectory.hpp"
#include "camarm/sim/simulator.hpp"

namespace camarm {

struct TrialRecord {
  std::string method;
  std::string task;
  int index = 0;
  double rate = 200.0;
  std::vector<JointConfig> joints;  // measured, one per tick including t = 0
  double feature_rate = 30.0;
  std::vector<double> feature_time;
  std::vector<VisualFeature> features;
  VisualFeature goal;
  bool collided = false;
  bool passive = false;  // watchdog tripped at some point
  int holds = 0;         // deploy hold conditions raised
  std::vector<double> latency_ms;
  std::vector<JointConfig> commands;  // conditioned command per tick (not serialized)
  std::string failure;  // non-empty when the method could not run

  double duration() const { return joints.empty() ? 0.0 : static_cast<double>(joints.size() - 1) / rate; }
};

nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_from_json(const nlohmann::json& j);

struct RolloutConfig {
  CommandFilterConfig filter;
  ServoModel servo;
  double feature_rate = 30.0;
  double settle = 0.5;         // s appended after a reference trajectory ends
  double max_duration = 15.0;  // s, policy rollouts
  // Policy commands between decisions: "linear" ramps from the previous
  // command to the new one over one control period, "hold" steps.
  std::string interpolation = "linear";
  // Policy rollouts stop once consecutive commands differ by less than
  // settle_tolerance rad for settle_steps decisions.
  double settle_tolerance = 2e-3;
  int settle_steps = 10;

  void validate() const;
};

RolloutConfig rollout_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RolloutConfig& c);

// Per-tick raw command source for a deployed policy: a controller decision
// every servo_rate / deploy.rate ticks, linear or held commands in between.
// Decision ticks are fresh commands for the watchdog (while the buffer
// fills the start pose is re-sent). Done once settled or at max_duration.
class PolicyStream {
 public:
  PolicyStream(const Policy& policy, const DeployConfig& deploy, const JointConfig& q0, const VisualFeature& goal,
               const RolloutConfig& cfg, double servo_rate);

  struct Tick {
    JointConfig raw;
    bool fresh = false;
    bool done = false;
  };
  // Call once per servo tick, in order, with the latest rendered frame.
  Tick next(double now, const VisualFeature& latest, const JointConfig& q);

  const std::vector<double>& latency_ms() const { return latency_ms_; }
  int holds() const { return ctl_.holds(); }
  const VisualFeature& goal() const { return goal_; }

 private:
  DeployController ctl_;
  VisualFeature goal_;
  long period_ = 1, max_ticks_ = 0, n_ = 0, seg_start_ = 0;
  bool linear_ = true;
  double tolerance_ = 0.0;
  int settle_steps_ = 1, still_ = 0;
  JointConfig from_, to_, raw_;
  std::vector<double> latency_ms_;
};

// Shared tick loop over a borrowed simulator: the watchdog is polled, the
// filter conditions the raw command (passive holds the measured q), the servo
// steps, and frames are rendered at feature_rate counted from construction.
// The filter starts at the simulator's current q and time.
class ExecutionLoop {
 public:
  ExecutionLoop(Simulator& sim, const RolloutConfig& cfg, const VisualFeature& goal);

  void tick(const JointConfig& raw, bool fresh);
  double now() const { return sim_.state().time; }
  const VisualFeature& latest_feature() const { return rec.features.back(); }

  TrialRecord rec;

 private:
  void render();
  Simulator& sim_;
  CommandFilter filter_;
  double t0_ = 0.0;
  long next_frame_ = 0;
};

// Closed-loop execution on the servo simulation. Every tick: the command
// source updates the raw command, the watchdog is polled, the filter
// conditions the command, the servo steps. Features are rendered at
// feature_rate.
class RolloutRunner {
 public:
  RolloutRunner(RobotModel model, Scene scene, RolloutConfig config, std::uint64_t seed = 0);

  // Open-loop stream of a 200 Hz reference (fresh command every tick).
  TrialRecord run_reference(const TimedTrajectory& reference, const VisualFeature& goal);

  // Deploys the controller from q0 until settled or max_duration.
  TrialRecord run_policy(const Policy& policy, const DeployConfig& deploy, const JointConfig& q0,
                         const VisualFeature& goal);

  const RobotModel& model() const { return sim_.model(); }
  const Scene& scene() const { return sim_.scene(); }
  const RolloutConfig& config() const { return config_; }

 private:
  RolloutConfig config_;
  Simulator sim_;
};

}  // namespace camarm

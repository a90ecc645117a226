#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/control/ik.hpp"
#include "camarm/eval/rollout.hpp"
#include "camarm/learn/checkpoint.hpp"
#include "camarm/plan/rrt_star.hpp"

namespace camarm {

inline constexpr const char* kProtocolVersion = "camarm.ws/1";
inline constexpr const char* kDataDirEnv = "CAMARM_DATA_DIR";

enum class SessionMode { Idle, Teleop, Recording, RolloutPolicy, RolloutPlanner, Passive };
std::string to_string(SessionMode m);
SessionMode session_mode_from_string(const std::string& s);

struct SessionConfig {
  RolloutConfig rollout;        // filter, servo (tick rate), feature rate, policy rollout limits
  DeployConfig deploy;
  PlannerParams planner;
  double broadcast_rate = 30.0;  // Hz, state frames
  double min_recording = 1.0;    // s
  int drag_iterations = 20;      // IK iterations per tick toward the drag target
  std::filesystem::path data_dir = ".";
  std::uint64_t seed = 0;
  bool virtual_time = false;

  void validate() const;
};

// $CAMARM_DATA_DIR, else `fallback`.
std::filesystem::path data_dir_from_env(const std::filesystem::path& fallback = ".");

// Transport-free service core. The owner calls tick() once per servo period
// and handle() for each client message between ticks; the session is the only
// writer of the simulator. Replies go to the sender, state frames to everyone.
class Session {
 public:
  Session(RobotModel model, Scene scene, SessionConfig config);
  ~Session();

  // One parsed client message -> replies (usually exactly one). Never throws
  // for bad input: malformed or unknown messages produce an error reply
  // carrying the offending seq.
  std::vector<nlohmann::json> handle(const nlohmann::json& msg);
  std::vector<nlohmann::json> handle_text(const std::string& text);

  // Advances the simulation one tick. True when a state frame is due.
  bool tick();
  nlohmann::json state_frame();

  SessionMode mode() const { return mode_; }
  double time() const;
  const Simulator& sim() const { return *sim_; }
  const SessionConfig& config() const { return config_; }
  void set_clients(int n) { clients_ = n; }
  // Commands applied to the servo, one per tick since construction.
  const std::vector<JointConfig>& applied_commands() const { return applied_; }
  // Finished rollout records, in order.
  const std::vector<TrialRecord>& trials() const { return trials_; }
  const std::optional<VisualFeature>& goal() const { return goal_; }

 private:
  struct Rollout;

  nlohmann::json reply(const nlohmann::json& msg, const std::string& type, nlohmann::json body = {}) const;
  nlohmann::json error(const nlohmann::json& msg, const std::string& code, const std::string& text) const;

  nlohmann::json on_hello(const nlohmann::json& m);
  nlohmann::json on_jog(const nlohmann::json& m);
  nlohmann::json on_drag(const nlohmann::json& m);
  nlohmann::json on_mode(const nlohmann::json& m);
  nlohmann::json on_record_start(const nlohmann::json& m);
  nlohmann::json on_record_stop(const nlohmann::json& m);
  nlohmann::json on_capture_goal(const nlohmann::json& m);
  nlohmann::json on_rollout_policy(const nlohmann::json& m);
  nlohmann::json on_rollout_planner(const nlohmann::json& m);
  nlohmann::json on_abort(const nlohmann::json& m);

  void enter_hold(SessionMode m);
  void enter_teleop();
  void finish_rollout(const std::string& reason);
  void tick_teleop();
  void record_sample();

  RobotModel model_;
  SessionConfig config_;
  std::unique_ptr<Simulator> sim_;
  std::string model_hash_;
  SessionMode mode_ = SessionMode::Idle;
  CommandFilter filter_;
  JointConfig q_cmd_;  // raw teleop / hold command
  Vec6 jog_velocity_ = Vec6::Zero();
  std::optional<Pose> drag_target_;
  bool drag_converged_ = true;
  int clients_ = 0;
  long frame_seq_ = 0;
  long next_broadcast_ = 0;
  std::vector<JointConfig> applied_;

  // recording
  std::optional<Episode> recording_;
  long record_start_tick_ = 0;
  int recorded_episodes_ = 0;

  std::optional<VisualFeature> goal_;
  std::optional<JointConfig> goal_q_;

  std::unique_ptr<Rollout> rollout_;
  std::vector<TrialRecord> trials_;
  std::string last_trial_;
  std::string last_event_;
};

}  // namespace camarm

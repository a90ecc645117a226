#pragma once

#include <deque>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/learn/policy.hpp"

namespace camarm {

struct DeployConfig {
  int history = 8;         // S
  int lookahead = 1;       // k
  double delta_max = 0.2;  // rad per joint around the current q
  double ema_alpha = 0.3;
  double rate = 10.0;      // Hz

  void validate() const;
  double period() const { return 1.0 / rate; }
};

DeployConfig deploy_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DeployConfig& c);

enum class DeployAction { NoOp, Command, Hold };

struct DeployOutput {
  DeployAction action = DeployAction::NoOp;
  JointConfig command;         // emitted command (Command), or the held position (Hold)
  JointConfig raw_target;      // q_hat_{t+k}
  JointConfig clamped_target;  // raw target clamped to q +- delta_max
  double policy_ms = 0.0;      // wall-clock of the forward pass
};

// Receding-horizon controller: buffer S observations, run the policy
// with z = 0, take q_hat_{t+k}, clamp to within delta_max of the current q,
// then EMA against the previous command. A gap of more than 2 / rate between
// observations flushes the buffer and returns Hold.
class DeployController {
 public:
  DeployController(const Policy& policy, DeployConfig config, const VisualFeature& goal);

  DeployOutput step(double time, const VisualFeature& feature, const JointConfig& q);
  void reset();

  const DeployConfig& config() const { return config_; }
  int holds() const { return holds_; }
  const std::optional<JointConfig>& last_command() const { return prev_; }

 private:
  const Policy* policy_;
  DeployConfig config_;
  VisualFeature goal_;
  std::deque<VisualFeature> features_;
  std::deque<JointConfig> joints_;
  std::optional<double> last_time_;
  std::optional<JointConfig> prev_;
  int holds_ = 0;
};

}  // namespace camarm

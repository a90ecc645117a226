#include "camarm/learn/deploy.hpp"

#include <algorithm>
#include <chrono>

namespace camarm {

void DeployConfig::validate() const {
  if (history < 1 || lookahead < 1) throw ValidationError("deploy: history and lookahead must be >= 1");
  if (!(delta_max > 0.0)) throw ValidationError("deploy: delta_max must be > 0");
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) throw ValidationError("deploy: ema_alpha must be in (0, 1]");
  if (!(rate > 0.0)) throw ValidationError("deploy: rate must be > 0");
}

DeployConfig deploy_config_from_json(const nlohmann::json& j) {
  DeployConfig c;
  c.history = j.value("history", c.history);
  c.lookahead = j.value("lookahead", c.lookahead);
  c.delta_max = j.value("delta_max", c.delta_max);
  c.ema_alpha = j.value("ema_alpha", c.ema_alpha);
  c.rate = j.value("rate", c.rate);
  c.validate();
  return c;
}

nlohmann::json to_json(const DeployConfig& c) {
  return {{"history", c.history}, {"lookahead", c.lookahead}, {"delta_max", c.delta_max},
          {"ema_alpha", c.ema_alpha}, {"rate", c.rate}};
}

DeployController::DeployController(const Policy& policy, DeployConfig config, const VisualFeature& goal)
    : policy_(&policy), config_(config), goal_(goal) {
  config_.validate();
  if (config_.history != policy.config.history) throw ValidationError("deploy: history differs from the policy's S");
  if (config_.lookahead > policy.config.horizon) throw ValidationError("deploy: lookahead exceeds the policy horizon");
}

void DeployController::reset() {
  features_.clear();
  joints_.clear();
  last_time_.reset();
  prev_.reset();
}

DeployOutput DeployController::step(double time, const VisualFeature& feature, const JointConfig& q) {
  DeployOutput out;
  if (last_time_ && time - *last_time_ > 2.0 * config_.period()) {
    features_.clear();
    joints_.clear();
    last_time_ = time;
    ++holds_;
    out.action = DeployAction::Hold;
    out.command = prev_.value_or(q);
    return out;
  }
  last_time_ = time;
  features_.push_back(feature);
  joints_.push_back(q);
  while (static_cast<int>(features_.size()) > config_.history) {
    features_.pop_front();
    joints_.pop_front();
  }
  if (static_cast<int>(features_.size()) < config_.history) return out;

  const std::vector<VisualFeature> f(features_.begin(), features_.end());
  const std::vector<JointConfig> j(joints_.begin(), joints_.end());
  const std::vector<double> z(static_cast<std::size_t>(policy_->config.d_z), 0.0);
  const auto t0 = std::chrono::steady_clock::now();
  const Mat qhat = policy_->forward(f, j, goal_, z);
  out.policy_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const int k = config_.lookahead - 1;
  const JointConfig& prev = prev_ ? *prev_ : q;
  for (int i = 0; i < kNumJoints; ++i) {
    out.raw_target[i] = qhat(k, i);
    out.clamped_target[i] = std::clamp(out.raw_target[i], q[i] - config_.delta_max, q[i] + config_.delta_max);
    out.command[i] = config_.ema_alpha * out.clamped_target[i] + (1.0 - config_.ema_alpha) * prev[i];
  }
  out.action = DeployAction::Command;
  prev_ = out.command;
  return out;
}

}  // namespace camarm

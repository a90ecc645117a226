#include "camarm/control/command_filter.hpp"

namespace camarm {

void CommandFilterConfig::validate() const {
  if (!(lp_alpha > 0.0 && lp_alpha <= 1.0)) throw ValidationError("command filter: lp_alpha must lie in (0, 1]");
  if (!(ramp_limit > 0.0)) throw ValidationError("command filter: ramp_limit must be > 0");
  if (!(timeout > 0.0)) throw ValidationError("command filter: timeout must be > 0");
}

CommandFilterConfig command_filter_from_json(const nlohmann::json& j) {
  CommandFilterConfig c;
  c.lp_alpha = j.value("lp_alpha", c.lp_alpha);
  c.ramp_limit = j.value("ramp_limit", c.ramp_limit);
  c.timeout = j.value("timeout", c.timeout);
  c.validate();
  return c;
}

nlohmann::json to_json(const CommandFilterConfig& c) {
  return {{"lp_alpha", c.lp_alpha}, {"ramp_limit", c.ramp_limit}, {"timeout", c.timeout}};
}

CommandFilter::CommandFilter(CommandFilterConfig config, const JointConfig& initial, double now)
    : config_(config), lowpass_(initial), output_(initial), last_command_(now) {
  config_.validate();
}

JointConfig CommandFilter::condition(const JointConfig& q_raw, double dt) {
  if (!(dt > 0.0)) throw ValidationError("condition_command: dt must be > 0");
  if (!q_raw.finite()) throw ValidationError("condition_command: command must be finite");
  lowpass_.q += config_.lp_alpha * (q_raw.q - lowpass_.q);
  const double max_step = config_.ramp_limit * dt;
  for (int i = 0; i < kNumJoints; ++i) {
    const double d = lowpass_[i] - output_[i];
    if (d > max_step) {
      output_[i] += max_step;
    } else if (d < -max_step) {
      output_[i] -= max_step;
    } else {
      output_[i] = lowpass_[i];
    }
  }
  return output_;
}

void CommandFilter::note_command(double now) {
  last_command_ = now;
  passive_ = false;
}

DriveMode CommandFilter::watchdog(double now) {
  if (now - last_command_ > config_.timeout) passive_ = true;
  return passive_ ? DriveMode::Passive : DriveMode::Active;
}

void CommandFilter::reset(const JointConfig& q, double now) {
  lowpass_ = q;
  output_ = q;
  last_command_ = now;
  passive_ = false;
}

}  // namespace camarm

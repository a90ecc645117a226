#pragma once

#include <nlohmann/json.hpp>

#include "camarm/arm/types.hpp"

namespace camarm {

struct CommandFilterConfig {
  double lp_alpha = 0.08;  // first-order low-pass coefficient per tick
  double ramp_limit = 0.8; // rad/s
  double timeout = 0.250;  // s without a fresh command before going passive

  void validate() const;
};

CommandFilterConfig command_filter_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CommandFilterConfig& c);

enum class DriveMode { Active, Passive };

// Low-pass + velocity-ramp conditioning of joint commands, with a command
// watchdog. Single writer; one instance per controller.
class CommandFilter {
 public:
  explicit CommandFilter(CommandFilterConfig config = {}, const JointConfig& initial = JointConfig::zero(),
                         double now = 0.0);

  // out = prev + clamp(lp(q_raw) - prev, +-ramp_limit * dt). Throws
  // ValidationError for dt <= 0.
  JointConfig condition(const JointConfig& q_raw, double dt);

  // A fresh command arrived at `now`; re-arms the watchdog.
  void note_command(double now);

  // Passive iff now - last command > timeout; latches until note_command().
  DriveMode watchdog(double now);

  // Re-seeds both filter stages at q (used when entering a controlled mode).
  void reset(const JointConfig& q, double now);

  const JointConfig& output() const { return output_; }
  const JointConfig& lowpass_state() const { return lowpass_; }
  double last_command_time() const { return last_command_; }
  const CommandFilterConfig& config() const { return config_; }

 private:
  CommandFilterConfig config_;
  JointConfig lowpass_;
  JointConfig output_;
  double last_command_;
  bool passive_ = false;
};

}  // namespace camarm

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "camarm/control/ik.hpp"
#include "camarm/plan/trajectory.hpp"
#include "camarm/sim/scene.hpp"

namespace camarm {

enum class Style { Direct, ArcLeft, ArcRight };
std::string to_string(Style s);
Style style_from_string(std::string_view s);

struct ExpertParams {
  double noise_sigma = 0.0;  // rad, RMS of the band-limited joint jitter
  double noise_low_hz = 0.5;
  double noise_high_hz = 3.0;
  int noise_components = 8;
  double rate = 200.0;
  double max_joint_speed = 0.6;  // rad/s; durations stretch until the reference respects it
  std::uint64_t seed = 0;
  IkParams ik;

  void validate() const;
};

ExpertParams expert_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExpertParams& p);

struct ExpertTrajectory {
  bool ok = false;
  std::string failure;
  Style style = Style::Direct;
  TimedTrajectory reference;  // joint commands at `rate`, including the final dwell
  JointConfig q_goal;         // noise-free final configuration
  Pose goal_camera;
  double motion_duration = 0.0;  // s, excluding the dwell
  // Nominal camera position at mid-motion (s = 0.5), and the unit lateral
  // direction (up x chord) that ARC_LEFT offsets toward.
  Vec3 mid_camera = Vec3::Zero();
  Vec3 lateral = Vec3::Zero();
};

// Push-in from q_start to a camera at goal_eye looking at the target. The
// camera follows p(s) = p0 + m (p1 - p0) + a sin(pi m) l with m the min-jerk
// blend, a = 0 / +A / -A for DIRECT / ARC_LEFT / ARC_RIGHT, and keeps the
// target on the optical axis (the start orientation offset is blended out).
// Every 1/rate sample is solved with solve_ik warm-started from the previous
// one. Failures (IK, joint limits, contact at zero margin) are reported, not thrown.
ExpertTrajectory scripted_push_in(const RobotModel& model, const Scene& scene, const JointConfig& q_start,
                                  const Vec3& goal_eye, Style style, const ExpertParams& params);

// Same, with the goal placement drawn from the scene's goal region using `seed`.
ExpertTrajectory scripted_push_in(const RobotModel& model, const Scene& scene, const JointConfig& q_start, Style style,
                                  double noise_sigma, std::uint64_t seed);

}  // namespace camarm

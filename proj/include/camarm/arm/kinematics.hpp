#pragma once

#include <vector>

#include "camarm/arm/model.hpp"

namespace camarm {

struct FkResult {
  Pose ee;                      // camera optical frame
  std::vector<Pose> link_poses;  // one per link, base (identity) first
};

// Throws ValidationError on non-finite q.
FkResult forward_kinematics(const RobotModel& model, const JointConfig& q);

// Camera optical frame only.
Pose camera_pose(const RobotModel& model, const JointConfig& q);

// Geometric Jacobian of the camera frame in world coordinates; rows 0-2 are
// linear velocity, rows 3-5 angular velocity.
Mat6 jacobian(const RobotModel& model, const JointConfig& q);

// World-frame rotation axis of each joint at q.
std::array<Vec3, kNumJoints> joint_axes_world(const RobotModel& model, const JointConfig& q);

struct LimitViolation {
  int joint;
  double excess;  // signed radians beyond the violated bound

  bool operator==(const LimitViolation&) const = default;
};

// Empty iff q lies within [lower, upper] for every joint. Uses the active SIMD kernel.
std::vector<LimitViolation> check_joint_limits(const RobotModel& model, const JointConfig& q);

}  // namespace camarm

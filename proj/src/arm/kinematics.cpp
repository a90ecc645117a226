#include "camarm/arm/kinematics.hpp"

#include "camarm/kernels/kernels.hpp"

namespace camarm {

namespace {

void require_finite(const JointConfig& q) {
  if (!q.finite()) throw ValidationError("joint configuration contains non-finite entries");
}

// Joint frames before rotation (origin + world axis) and link frames after.
struct Chain {
  std::array<Pose, kNumJoints> joint_frames;
  std::array<Pose, kNumJoints> link_frames;
};

Chain compose_chain(const RobotModel& model, const JointConfig& q) {
  Chain c;
  Pose parent = Pose::identity();
  for (int i = 0; i < kNumJoints; ++i) {
    const JointSpec& j = model.joints[i];
    c.joint_frames[i] = parent * j.parent_to_joint;
    const Pose rot{Vec3::Zero(), Quat(Eigen::AngleAxisd(q[i], j.axis))};
    c.link_frames[i] = c.joint_frames[i] * rot;
    parent = c.link_frames[i];
  }
  return c;
}

}  // namespace

FkResult forward_kinematics(const RobotModel& model, const JointConfig& q) {
  require_finite(q);
  const Chain c = compose_chain(model, q);
  FkResult r;
  r.link_poses.reserve(kNumJoints + 1);
  r.link_poses.push_back(Pose::identity());
  for (const auto& p : c.link_frames) r.link_poses.push_back(p);
  r.ee = c.link_frames.back() * model.camera_mount;
  return r;
}

Pose camera_pose(const RobotModel& model, const JointConfig& q) {
  require_finite(q);
  return compose_chain(model, q).link_frames.back() * model.camera_mount;
}

std::array<Vec3, kNumJoints> joint_axes_world(const RobotModel& model, const JointConfig& q) {
  require_finite(q);
  const Chain c = compose_chain(model, q);
  std::array<Vec3, kNumJoints> axes;
  for (int i = 0; i < kNumJoints; ++i) axes[i] = c.joint_frames[i].orientation * model.joints[i].axis;
  return axes;
}

Mat6 jacobian(const RobotModel& model, const JointConfig& q) {
  require_finite(q);
  const Chain c = compose_chain(model, q);
  const Vec3 p_ee = (c.link_frames.back() * model.camera_mount).position;
  Mat6 jac;
  for (int i = 0; i < kNumJoints; ++i) {
    const Vec3 z = c.joint_frames[i].orientation * model.joints[i].axis;
    const Vec3 p = c.joint_frames[i].position;
    jac.block<3, 1>(0, i) = z.cross(p_ee - p);
    jac.block<3, 1>(3, i) = z;
  }
  return jac;
}

std::vector<LimitViolation> check_joint_limits(const RobotModel& model, const JointConfig& q) {
  double excess[kNumJoints];
  kernels::active().bound_excess(q.q.data(), model.lower.data(), model.upper.data(), excess, kNumJoints);
  std::vector<LimitViolation> out;
  for (int i = 0; i < kNumJoints; ++i) {
    if (excess[i] != 0.0) out.push_back({i, excess[i]});
  }
  return out;
}

}  // namespace camarm

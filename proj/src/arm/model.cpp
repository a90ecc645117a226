#include "camarm/arm/model.hpp"

#include <cmath>
#include <cstdlib>

#include "camarm/arm/kinematics.hpp"

namespace camarm {

Pose Pose::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  const Quat q = Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                 Eigen::AngleAxisd(rpy.x(), Vec3::UnitX());
  return Pose{xyz, q.normalized()};
}

Vec3 rotation_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double n = v.norm();
  if (n < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(n, q.w());
  return v * (angle / n);
}

Quat rotation_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) return Quat(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z()).normalized();
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

Quat look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 z = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(z.dot(up)) > 0.999) up = Vec3::UnitX();
  const Vec3 x = z.cross(up).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Quat(r).normalized();
}

void RobotModel::validate() const {
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& j = joints[i];
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError("joint " + std::to_string(i) + ": axis must be a unit vector");
    }
    if (!(lower[i] < upper[i])) throw ValidationError("joint " + std::to_string(i) + ": limits require min < max");
    if (!(velocity_limits[i] > 0.0)) throw ValidationError("joint " + std::to_string(i) + ": velocity limit must be > 0");
  }
  if (links.size() != static_cast<std::size_t>(kNumJoints + 1)) {
    throw ValidationError("model needs exactly " + std::to_string(kNumJoints + 1) + " links (base + one per joint)");
  }
  for (const auto& l : links) {
    for (const auto& c : l.capsules) {
      if (!(c.radius > 0.0)) throw ValidationError("link " + l.name + ": capsule radius must be > 0");
    }
  }
  if (!(reach > 0.0)) throw ValidationError("reach must be > 0");
}

bool RobotModel::within_limits(const JointConfig& q) const {
  return ((q.q - lower).array() >= 0.0).all() && ((upper - q.q).array() >= 0.0).all();
}

JointConfig RobotModel::clamp(const JointConfig& q) const {
  return JointConfig(q.q.cwiseMax(lower).cwiseMin(upper));
}

std::filesystem::path default_config_dir() {
  if (const char* env = std::getenv("CAMARM_CONFIG_DIR")) return env;
  return CAMARM_SOURCE_CONFIG_DIR;
}

RobotModel load_default_model() { return load_model(default_config_dir() / "model.json"); }

double sample_reach(const RobotModel& m, int per_joint) {
  double best = 0.0;
  std::array<int, kNumJoints> idx{};
  const auto value = [&](int joint, int k) {
    if (per_joint == 1) return 0.5 * (m.lower[joint] + m.upper[joint]);
    return m.lower[joint] + (m.upper[joint] - m.lower[joint]) * k / (per_joint - 1);
  };
  while (true) {
    JointConfig q;
    for (int j = 0; j < kNumJoints; ++j) q[j] = value(j, idx[j]);
    best = std::max(best, camera_pose(m, q).position.norm());
    int j = 0;
    while (j < kNumJoints && ++idx[j] == per_joint) idx[j++] = 0;
    if (j == kNumJoints) break;
  }
  return best;
}

}  // namespace camarm

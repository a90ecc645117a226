#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace camarm {

inline constexpr int kNumJoints = 6;

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

// Thrown when an input violates a documented precondition (non-finite values,
// malformed config, shape mismatch).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Joint configuration in radians.
struct JointConfig {
  Vec6 q = Vec6::Zero();

  JointConfig() = default;
  explicit JointConfig(const Vec6& v) : q(v) {}

  static JointConfig zero() { return JointConfig{}; }

  double operator[](int i) const { return q[i]; }
  double& operator[](int i) { return q[i]; }

  bool finite() const { return q.allFinite(); }
  bool operator==(const JointConfig& o) const { return q == o.q; }
};

// Rigid pose; orientation is a unit quaternion (w, x, y, z).
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return Pose{}; }
  static Pose from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);

  Pose operator*(const Pose& rhs) const {
    return Pose{position + orientation * rhs.position, (orientation * rhs.orientation).normalized()};
  }
  Vec3 apply(const Vec3& p) const { return position + orientation * p; }
  Pose inverse() const {
    const Quat inv = orientation.conjugate();
    return Pose{-(inv * position), inv};
  }
  Mat3 rotation() const { return orientation.toRotationMatrix(); }
};

// Rotation vector (axis * angle, angle in [0, pi]) of a unit quaternion.
Vec3 rotation_log(const Quat& q);
// Inverse of rotation_log.
Quat rotation_exp(const Vec3& w);

// Camera orientation whose optical axis (+z) points from `eye` to `target`,
// with the image x axis kept horizontal.
Quat look_at(const Vec3& eye, const Vec3& target);

}  // namespace camarm

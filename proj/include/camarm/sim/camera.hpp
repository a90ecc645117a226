#pragma once

#include <array>

#include "camarm/sim/scene.hpp"

namespace camarm {

inline constexpr int kFeatureDim = 16;

// Synthetic stand-in for a camera frame embedding. Slot layout:
//   0 target u, 1 target v        normalized image coords, +-1 at the frame edge
//   2 target depth / kDepthScale
//   3 target apparent radius      normalized to the half-width
//   4 target visible              {0, 1}
//   5 obstacle corner u, 6 v, 7 depth / kDepthScale (nearest box corner)
//   8 obstacle corner visible     {0, 1}
//   9..14 fiducial (u, v) x 3
//   15 fraction of fiducials visible
// Slots of an invisible element are zero.
struct VisualFeature {
  std::array<double, kFeatureDim> v{};

  double operator[](int i) const { return v[i]; }
  double& operator[](int i) { return v[i]; }
  bool operator==(const VisualFeature&) const = default;

  double target_u() const { return v[0]; }
  double target_v() const { return v[1]; }
  bool target_visible() const { return v[4] > 0.5; }
};

inline constexpr double kDepthScale = 0.5;  // m

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool in_front = false;
};

// Pinhole projection of a world point into the camera at `camera_pose`.
Projection project(const Pose& camera_pose, const CameraIntrinsics& intr, const Vec3& world);

VisualFeature render_features(const Scene& scene, const RobotModel& model, const JointConfig& q,
                              const CameraIntrinsics& intr);
// Same, for a free camera pose.
VisualFeature render_features_at(const Scene& scene, const Pose& camera_pose, const CameraIntrinsics& intr);
inline VisualFeature render_features(const Scene& scene, const RobotModel& model, const JointConfig& q) {
  return render_features(scene, model, q, scene.camera);
}

// Goal framing: the feature rendered at the goal configuration.
inline VisualFeature goal_feature(const Scene& scene, const RobotModel& model, const JointConfig& q_goal,
                                  const CameraIntrinsics& intr) {
  return render_features(scene, model, q_goal, intr);
}

}  // namespace camarm

#include "camarm/sim/camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace camarm {

namespace {

constexpr double kNearPlane = 1e-3;  // m

bool in_frame(const Projection& p, double margin) {
  return p.in_front && std::abs(p.u) <= 1.0 + margin && std::abs(p.v) <= 1.0 + margin;
}

}  // namespace

Projection project(const Pose& camera_pose, const CameraIntrinsics& intr, const Vec3& world) {
  const Vec3 pc = camera_pose.inverse().apply(world);
  Projection p;
  p.depth = pc.z();
  p.in_front = pc.z() > kNearPlane;
  if (!p.in_front) return p;
  p.u = pc.x() / pc.z() / std::tan(0.5 * intr.hfov) + intr.cx;
  p.v = pc.y() / pc.z() / std::tan(0.5 * intr.vfov) + intr.cy;
  return p;
}

VisualFeature render_features(const Scene& scene, const RobotModel& model, const JointConfig& q,
                              const CameraIntrinsics& intr) {
  return render_features_at(scene, camera_pose(model, q), intr);
}

VisualFeature render_features_at(const Scene& scene, const Pose& cam, const CameraIntrinsics& intr) {
  VisualFeature f;

  const Projection t = project(cam, intr, scene.target.position);
  if (t.in_front) {
    const double r = scene.target.radius / t.depth / std::tan(0.5 * intr.hfov);
    // Visible while any part of the disc overlaps the frame; the disc margin
    // is capped so visible centroids stay within +-1.5.
    if (in_frame(t, std::min(r, 0.5))) {
      f[0] = t.u;
      f[1] = t.v;
      f[2] = t.depth / kDepthScale;
      f[3] = r;
      f[4] = 1.0;
    }
  }

  if (scene.obstacle_present) {
    const Vec3 h = scene.obstacle.half();
    double best = std::numeric_limits<double>::infinity();
    Vec3 nearest = scene.obstacle.center;
    for (int k = 0; k < 8; ++k) {
      const Vec3 corner = scene.obstacle.center + Vec3((k & 1) ? h.x() : -h.x(), (k & 2) ? h.y() : -h.y(),
                                                       (k & 4) ? h.z() : -h.z());
      const double d = (corner - cam.position).squaredNorm();
      if (d < best) {
        best = d;
        nearest = corner;
      }
    }
    const Projection o = project(cam, intr, nearest);
    if (in_frame(o, 0.0)) {
      f[5] = o.u;
      f[6] = o.v;
      f[7] = o.depth / kDepthScale;
      f[8] = 1.0;
    }
  }

  int seen = 0;
  for (std::size_t i = 0; i < scene.fiducials.size() && i < 3; ++i) {
    const Projection p = project(cam, intr, scene.fiducials[i]);
    if (in_frame(p, 0.0)) {
      f[9 + 2 * i] = p.u;
      f[10 + 2 * i] = p.v;
      ++seen;
    }
  }
  f[15] = seen / 3.0;
  return f;
}

}  // namespace camarm

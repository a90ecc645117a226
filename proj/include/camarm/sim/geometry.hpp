#pragma once

#include <vector>

#include "camarm/arm/kinematics.hpp"

namespace camarm {

struct WorldCapsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
  int link = -1;
  bool floor_exempt = false;
};

// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 extents = Vec3::Ones();  // full edge lengths

  Vec3 half() const { return 0.5 * extents; }
};

// Signed distance from a point to the box surface (negative inside).
double point_box_signed_distance(const Vec3& p, const Box& box);

// Signed separation between a capsule and a box: minimum over the capsule's
// axis segment of the box signed distance, minus the capsule radius.
// Exact (piecewise-quadratic / piecewise-linear minimization, no sampling).
double capsule_box_distance(const WorldCapsule& c, const Box& box);

// Separation between a capsule and the floor plane z = 0.
double capsule_floor_distance(const WorldCapsule& c);

// Link capsules transformed into the world frame by the link poses at q.
std::vector<WorldCapsule> link_capsules(const RobotModel& model, const JointConfig& q);

}  // namespace camarm

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "camarm/control/ik.hpp"
#include "camarm/sim/scene.hpp"

namespace camarm {

struct ViewPlacement {
  double distance = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
};

ViewPlacement sample_placement(const ViewRegion& region, std::mt19937_64& rng);

// Camera pose at a placement, optical axis on the target, image x horizontal.
Pose view_pose(const Scene& scene, const ViewPlacement& p);

// The other wrist branch reaching the same camera pose:
// (q4 + pi, -q5, q6 + pi), rolls wrapped back into their limits.
JointConfig wrist_flip(const RobotModel& model, const JointConfig& q);

// One push-in instance: a start configuration, the goal camera position, and
// the IK goal configuration on the start's wrist branch.
struct TaskInstance {
  JointConfig q_start;
  Vec3 goal_eye = Vec3::Zero();
  JointConfig q_goal;
  int posture = 0;  // 0 = IK branch from the rest posture, 1 = wrist-flipped
};

// Draws start and goal placements; rejects draws whose IK fails, whose
// endpoints violate `margin`, or that leave the joint limits. posture < 0
// picks a branch at random.
std::optional<TaskInstance> sample_task(const RobotModel& model, const Scene& scene, std::mt19937_64& rng,
                                        double margin, int posture = -1);

// n instances from a single seeded stream (up to 50 draws per instance;
// throws std::runtime_error when a draw budget runs out).
std::vector<TaskInstance> sample_tasks(const RobotModel& model, const Scene& scene, int n, std::uint64_t seed,
                                       double margin);

}  // namespace camarm

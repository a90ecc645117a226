#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/arm/types.hpp"

namespace camarm {

struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();                // unit, in the joint frame
  Pose parent_to_joint = Pose::identity();  // fixed transform from the previous link
};

// Swept sphere: segment a-b with radius, in the owning link's frame.
struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct LinkGeometry {
  std::string name;
  std::vector<Capsule> capsules;
  // Links rigidly bolted to the mounting surface are not checked against the floor.
  bool floor_exempt = false;
};

// Six-joint serial arm. Link 0 is the fixed base; link i (1..6) moves with joint i.
struct RobotModel {
  std::string name;
  std::array<JointSpec, kNumJoints> joints;
  Vec6 lower = Vec6::Constant(-2.4);
  Vec6 upper = Vec6::Constant(2.4);
  Vec6 velocity_limits = Vec6::Constant(3.0);
  std::vector<LinkGeometry> links;  // kNumJoints + 1 entries
  Pose camera_mount = Pose::identity();
  double reach = 0.0;

  // Throws ValidationError on structural problems (axis not unit, limits
  // inverted, non-positive radii, wrong link count).
  void validate() const;

  bool within_limits(const JointConfig& q) const;
  JointConfig clamp(const JointConfig& q) const;
};

// Directory holding the shipped configs: $CAMARM_CONFIG_DIR if set, else the
// source tree's configs/ directory.
std::filesystem::path default_config_dir();

// configs/model.json from default_config_dir().
RobotModel load_default_model();

RobotModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const RobotModel& m);
RobotModel load_model(const std::filesystem::path& path);

// Maximum end-effector distance from the base over a full grid with
// `per_joint` samples per joint spanning the limits.
double sample_reach(const RobotModel& m, int per_joint = 7);

}  // namespace camarm

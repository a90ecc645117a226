#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/sim/geometry.hpp"

namespace camarm {

struct CameraIntrinsics {
  double hfov = 1.2113;  // rad (69.4 deg)
  double vfov = 0.7418;  // rad (42.5 deg)
  double cx = 0.0;       // principal point offset, normalized half-extent units
  double cy = 0.0;
  int width = 640;  // px, only used to express framing error in pixels
  int height = 360;

  void validate() const;
};

struct TargetObject {
  Vec3 position = Vec3(0.7, 0.0, 0.05);
  double radius = 0.04;
};

// Camera placements around the target: distance from the target, azimuth of
// the camera about the target relative to the task heading, and elevation
// above the table. Angles in radians.
struct ViewRegion {
  double min_distance = 0.3;
  double max_distance = 0.4;
  double min_azimuth = -0.3;
  double max_azimuth = 0.3;
  double min_elevation = 0.4;
  double max_elevation = 0.7;
};

// Push-in task geometry: where shots start, where they may end, and how the
// scripted expert shapes its paths.
struct TaskSpec {
  double heading = 1.5707963267948966;  // world yaw of the target-to-camera direction
  ViewRegion start;
  ViewRegion goal;
  double arc_amplitude = 0.25;  // m, lateral offset at mid-path for ARC styles
  double nominal_speed = 0.1;   // m/s of the camera along its path
  double dwell = 1.5;           // s held at the goal at the end of a shot
  double min_duration = 3.5;    // s
  JointConfig rest;             // IK seed posture for sampling start poses
};

struct Scene {
  std::string name = "push_in";
  TargetObject target;
  Box obstacle;
  bool obstacle_present = false;
  Box workspace{Vec3(0.4, 0.0, 0.5), Vec3(2.0, 2.0, 1.0)};
  std::vector<Vec3> fiducials;  // fixed world landmarks, exactly 3
  CameraIntrinsics camera;
  TaskSpec task;
  std::uint64_t seed = 0;

  void validate() const;
};

Scene scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const Scene& s);
Scene load_scene(const std::filesystem::path& path);

// Camera eye position for a placement in `region` coordinates.
Vec3 view_position(const Scene& scene, double distance, double azimuth, double elevation);

// True iff any non-exempt link capsule is within `margin` of the floor, or any
// capsule is within `margin` of the obstacle when present. Self-collision is
// not modeled.
bool in_collision(const RobotModel& model, const JointConfig& q, const Scene& scene, double margin);

// Smallest clearance of the arm to the floor and obstacle (negative = penetration).
double clearance(const RobotModel& model, const JointConfig& q, const Scene& scene);

}  // namespace camarm

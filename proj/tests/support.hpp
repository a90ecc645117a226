#pragma once

#include <random>

#include "camarm/arm/model.hpp"
#include "camarm/sim/scene.hpp"

namespace camarm::test {

inline const RobotModel& model() {
  static const RobotModel m = load_default_model();
  return m;
}
inline const Scene& scene_free() {
  static const Scene s = load_scene(default_config_dir() / "scene_free.json");
  return s;
}
inline const Scene& scene_obstacle() {
  static const Scene s = load_scene(default_config_dir() / "scene_obstacle.json");
  return s;
}

// Uniform inside the limits, shrunk towards the middle by `shrink`.
inline JointConfig random_q(std::mt19937_64& rng, double shrink = 0.8) {
  const RobotModel& m = model();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  JointConfig q;
  for (int i = 0; i < kNumJoints; ++i) {
    const double mid = 0.5 * (m.lower[i] + m.upper[i]), half = 0.5 * (m.upper[i] - m.lower[i]);
    q[i] = mid + shrink * half * u(rng);
  }
  return q;
}

}  // namespace camarm::test

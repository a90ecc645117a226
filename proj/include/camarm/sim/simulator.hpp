#pragma once

#include <cstdint>
#include <random>

#include <nlohmann/json.hpp>

#include "camarm/sim/camera.hpp"

namespace camarm {

// Per-joint second-order position servo standing in for the joint impedance loop:
// qdd = w^2 (q_cmd + noise - q) - 2 zeta w qd.
struct ServoModel {
  double natural_frequency = 25.0;  // rad/s
  double damping_ratio = 1.0;
  double rate = 200.0;  // Hz
  double actuation_noise_sigma = 0.0;  // rad, added to the position reference each tick
  int substeps = 4;  // semi-implicit Euler substeps per tick

  double dt() const { return 1.0 / rate; }
  void validate() const;
};

ServoModel servo_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ServoModel& s);

struct SimState {
  JointConfig q;
  Vec6 qdot = Vec6::Zero();
  std::int64_t tick = 0;
  double time = 0.0;  // tick / rate, exact multiples of the period
  bool collided = false;
};

// One servo tick. Joint position and velocity limits are enforced; `collided`
// latches once any capsule penetrates the floor or obstacle. `rng` is only
// drawn from when actuation noise is enabled.
SimState step(const SimState& state, const JointConfig& q_cmd, const ServoModel& servo, const RobotModel& model,
              const Scene& scene, std::mt19937_64* rng = nullptr);

// Owns one simulation instance: state, noise stream, and the fixed model/scene.
class Simulator {
 public:
  Simulator(RobotModel model, Scene scene, ServoModel servo, std::uint64_t seed = 0);

  void reset(const JointConfig& q);
  const SimState& step(const JointConfig& q_cmd);

  const SimState& state() const { return state_; }
  const RobotModel& model() const { return model_; }
  const Scene& scene() const { return scene_; }
  Scene& mutable_scene() { return scene_; }
  const ServoModel& servo() const { return servo_; }
  VisualFeature features() const { return render_features(scene_, model_, state_.q); }

 private:
  RobotModel model_;
  Scene scene_;
  ServoModel servo_;
  std::mt19937_64 rng_;
  SimState state_;
};

}  // namespace camarm

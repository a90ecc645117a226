#include "camarm/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace camarm {

void ServoModel::validate() const {
  if (!(rate > 0.0)) throw ValidationError("servo: rate must be > 0");
  if (!(natural_frequency > 0.0)) throw ValidationError("servo: natural frequency must be > 0");
  if (!(damping_ratio > 0.0)) throw ValidationError("servo: damping ratio must be > 0");
  if (!(actuation_noise_sigma >= 0.0)) throw ValidationError("servo: noise sigma must be >= 0");
  if (substeps < 1) throw ValidationError("servo: substeps must be >= 1");
}

ServoModel servo_from_json(const nlohmann::json& j) {
  ServoModel s;
  s.natural_frequency = j.value("natural_frequency", s.natural_frequency);
  s.damping_ratio = j.value("damping_ratio", s.damping_ratio);
  s.rate = j.value("rate", s.rate);
  s.actuation_noise_sigma = j.value("actuation_noise_sigma", s.actuation_noise_sigma);
  s.substeps = j.value("substeps", s.substeps);
  s.validate();
  return s;
}

nlohmann::json to_json(const ServoModel& s) {
  return {{"natural_frequency", s.natural_frequency},
          {"damping_ratio", s.damping_ratio},
          {"rate", s.rate},
          {"actuation_noise_sigma", s.actuation_noise_sigma},
          {"substeps", s.substeps}};
}

SimState step(const SimState& state, const JointConfig& q_cmd, const ServoModel& servo, const RobotModel& model,
              const Scene& scene, std::mt19937_64* rng) {
  Vec6 reference = q_cmd.q;
  if (servo.actuation_noise_sigma > 0.0 && rng != nullptr) {
    std::normal_distribution<double> noise(0.0, servo.actuation_noise_sigma);
    for (int i = 0; i < kNumJoints; ++i) reference[i] += noise(*rng);
  }
  const double w = servo.natural_frequency;
  const double w2 = w * w;
  const double c = 2.0 * servo.damping_ratio * w;
  const double h = servo.dt() / servo.substeps;

  SimState next = state;
  for (int s = 0; s < servo.substeps; ++s) {
    const Vec6 qdd = w2 * (reference - next.q.q) - c * next.qdot;
    next.qdot += h * qdd;
    next.qdot = next.qdot.cwiseMax(-model.velocity_limits).cwiseMin(model.velocity_limits);
    next.q.q += h * next.qdot;
    for (int i = 0; i < kNumJoints; ++i) {
      if (next.q[i] > model.upper[i]) {
        next.q[i] = model.upper[i];
        next.qdot[i] = std::min(next.qdot[i], 0.0);
      } else if (next.q[i] < model.lower[i]) {
        next.q[i] = model.lower[i];
        next.qdot[i] = std::max(next.qdot[i], 0.0);
      }
    }
  }
  next.tick = state.tick + 1;
  next.time = static_cast<double>(next.tick) / servo.rate;
  next.collided = state.collided || in_collision(model, next.q, scene, 0.0);
  return next;
}

Simulator::Simulator(RobotModel model, Scene scene, ServoModel servo, std::uint64_t seed)
    : model_(std::move(model)), scene_(std::move(scene)), servo_(servo), rng_(seed) {
  servo_.validate();
}

void Simulator::reset(const JointConfig& q) {
  state_ = SimState{};
  state_.q = q;
  state_.collided = in_collision(model_, q, scene_, 0.0);
}

const SimState& Simulator::step(const JointConfig& q_cmd) {
  state_ = camarm::step(state_, q_cmd, servo_, model_, scene_, &rng_);
  return state_;
}

}  // namespace camarm

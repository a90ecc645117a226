#include "camarm/eval/rollout.hpp"

#include <algorithm>
#include <cmath>

namespace camarm {

namespace {

nlohmann::json joints_json(const std::vector<JointConfig>& qs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& q : qs) a.push_back(std::vector<double>(q.q.data(), q.q.data() + kNumJoints));
  return a;
}

}  // namespace

nlohmann::json to_json(const TrialRecord& r) {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& v : r.features) f.push_back(v.v);
  return {{"method", r.method},   {"task", r.task},           {"index", r.index},
          {"rate", r.rate},       {"joints", joints_json(r.joints)}, {"feature_rate", r.feature_rate},
          {"feature_time", r.feature_time}, {"features", f},  {"goal", r.goal.v},
          {"collided", r.collided}, {"passive", r.passive},   {"holds", r.holds},
          {"latency_ms", r.latency_ms}, {"failure", r.failure}};
}

TrialRecord trial_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.method = j.at("method").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.index = j.at("index").get<int>();
  r.rate = j.at("rate").get<double>();
  for (const auto& q : j.at("joints")) {
    JointConfig c;
    for (int i = 0; i < kNumJoints; ++i) c[i] = q.at(static_cast<std::size_t>(i)).get<double>();
    r.joints.push_back(c);
  }
  r.feature_rate = j.at("feature_rate").get<double>();
  r.feature_time = j.at("feature_time").get<std::vector<double>>();
  for (const auto& f : j.at("features")) {
    VisualFeature v;
    f.get_to(v.v);
    r.features.push_back(v);
  }
  j.at("goal").get_to(r.goal.v);
  r.collided = j.at("collided").get<bool>();
  r.passive = j.value("passive", false);
  r.holds = j.value("holds", 0);
  r.latency_ms = j.value("latency_ms", std::vector<double>{});
  r.failure = j.value("failure", std::string());
  return r;
}

void RolloutConfig::validate() const {
  filter.validate();
  servo.validate();
  if (!(feature_rate > 0.0) || !(settle >= 0.0) || !(max_duration > 0.0)) throw ValidationError("rollout: bad rates/durations");
  if (interpolation != "linear" && interpolation != "hold") throw ValidationError("rollout: interpolation must be linear or hold");
  if (settle_steps < 1 || !(settle_tolerance > 0.0)) throw ValidationError("rollout: bad settle criterion");
}

RolloutConfig rollout_config_from_json(const nlohmann::json& j) {
  RolloutConfig c;
  if (j.contains("filter")) c.filter = command_filter_from_json(j.at("filter"));
  if (j.contains("servo")) c.servo = servo_from_json(j.at("servo"));
  c.feature_rate = j.value("feature_rate", c.feature_rate);
  c.settle = j.value("settle", c.settle);
  c.max_duration = j.value("max_duration", c.max_duration);
  c.interpolation = j.value("interpolation", c.interpolation);
  c.settle_tolerance = j.value("settle_tolerance", c.settle_tolerance);
  c.settle_steps = j.value("settle_steps", c.settle_steps);
  c.validate();
  return c;
}

nlohmann::json to_json(const RolloutConfig& c) {
  return {{"filter", to_json(c.filter)},     {"servo", to_json(c.servo)},
          {"feature_rate", c.feature_rate},   {"settle", c.settle},
          {"max_duration", c.max_duration},   {"interpolation", c.interpolation},
          {"settle_tolerance", c.settle_tolerance}, {"settle_steps", c.settle_steps}};
}

RolloutRunner::RolloutRunner(RobotModel model, Scene scene, RolloutConfig config, std::uint64_t seed)
    : config_(std::move(config)), sim_(std::move(model), std::move(scene), config_.servo, seed) {
  config_.validate();
}

ExecutionLoop::ExecutionLoop(Simulator& sim, const RolloutConfig& cfg, const VisualFeature& goal)
    : sim_(sim), filter_(cfg.filter, sim.state().q, sim.state().time), t0_(sim.state().time) {
  rec.rate = sim_.servo().rate;
  rec.feature_rate = cfg.feature_rate;
  rec.goal = goal;
  rec.joints.push_back(sim_.state().q);
  render();
}

void ExecutionLoop::render() {
  const double t = now() - t0_;
  if (t + 1e-9 < static_cast<double>(next_frame_) / rec.feature_rate) return;
  rec.feature_time.push_back(t);
  rec.features.push_back(sim_.features());
  ++next_frame_;
}

void ExecutionLoop::tick(const JointConfig& raw, bool fresh) {
  const double t = now();
  if (fresh) filter_.note_command(t);
  JointConfig cmd = sim_.state().q;
  if (filter_.watchdog(t) == DriveMode::Passive) rec.passive = true;
  else cmd = filter_.condition(raw, sim_.servo().dt());
  rec.commands.push_back(cmd);
  const SimState& s = sim_.step(cmd);
  rec.joints.push_back(s.q);
  rec.collided = s.collided;
  render();
}

TrialRecord RolloutRunner::run_reference(const TimedTrajectory& reference, const VisualFeature& goal) {
  if (reference.q.empty()) throw ValidationError("run_reference: empty trajectory");
  sim_.reset(reference.q.front());
  ExecutionLoop loop(sim_, config_, goal);
  const double dt = sim_.servo().dt();
  const auto ticks = static_cast<long>(std::llround((reference.duration() + config_.settle) / dt));
  for (long n = 0; n < ticks; ++n) loop.tick(reference.at(static_cast<double>(n + 1) * dt), true);
  return std::move(loop.rec);
}

PolicyStream::PolicyStream(const Policy& policy, const DeployConfig& deploy, const JointConfig& q0,
                           const VisualFeature& goal, const RolloutConfig& cfg, double servo_rate)
    : ctl_(policy, deploy, goal), goal_(goal), from_(q0), to_(q0), raw_(q0) {
  period_ = std::lround(servo_rate / deploy.rate);
  if (period_ < 1 || std::abs(static_cast<double>(period_) - servo_rate / deploy.rate) > 1e-9)
    throw ValidationError("PolicyStream: control rate must divide the servo rate");
  max_ticks_ = std::lround(cfg.max_duration * servo_rate);
  linear_ = cfg.interpolation == "linear";
  tolerance_ = cfg.settle_tolerance;
  settle_steps_ = cfg.settle_steps;
}

PolicyStream::Tick PolicyStream::next(double now, const VisualFeature& latest, const JointConfig& q) {
  Tick t;
  if (n_ >= max_ticks_) {
    t.done = true;
    return t;
  }
  t.fresh = n_ % period_ == 0;
  if (t.fresh) {
    const DeployOutput out = ctl_.step(now, latest, q);
    if (out.action != DeployAction::NoOp) {
      if (out.action == DeployAction::Command) {
        latency_ms_.push_back(out.policy_ms);
        still_ = (out.command.q - to_.q).cwiseAbs().maxCoeff() < tolerance_ ? still_ + 1 : 0;
      }
      from_ = raw_;
      to_ = out.command;
      seg_start_ = n_;
    }
    if (still_ >= settle_steps_) {
      t.done = true;
      return t;
    }
  }
  if (linear_) {
    const double a = std::min(1.0, static_cast<double>(n_ + 1 - seg_start_) / static_cast<double>(period_));
    raw_ = JointConfig((from_.q + a * (to_.q - from_.q)).eval());
  } else {
    raw_ = to_;
  }
  ++n_;
  t.raw = raw_;
  return t;
}

TrialRecord RolloutRunner::run_policy(const Policy& policy, const DeployConfig& deploy, const JointConfig& q0,
                                      const VisualFeature& goal) {
  PolicyStream stream(policy, deploy, q0, goal, config_, sim_.servo().rate);
  sim_.reset(q0);
  ExecutionLoop loop(sim_, config_, goal);
  for (;;) {
    const PolicyStream::Tick t = stream.next(loop.now(), loop.latest_feature(), sim_.state().q);
    if (t.done) break;
    loop.tick(t.raw, t.fresh);
  }
  loop.rec.latency_ms = stream.latency_ms();
  loop.rec.holds = stream.holds();
  return std::move(loop.rec);
}

}  // namespace camarm

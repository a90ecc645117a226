#include "camarm/service/session.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "camarm/learn/episode_io.hpp"
#include "camarm/plan/trajectory.hpp"
#include "camarm/util/hash.hpp"

namespace camarm {

namespace {

nlohmann::json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
nlohmann::json quat(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }
nlohmann::json joints(const JointConfig& q) { return std::vector<double>(q.q.data(), q.q.data() + kNumJoints); }

}  // namespace

std::string to_string(SessionMode m) {
  switch (m) {
    case SessionMode::Idle: return "IDLE";
    case SessionMode::Teleop: return "TELEOP";
    case SessionMode::Recording: return "RECORDING";
    case SessionMode::RolloutPolicy: return "ROLLOUT_POLICY";
    case SessionMode::RolloutPlanner: return "ROLLOUT_PLANNER";
    case SessionMode::Passive: return "PASSIVE";
  }
  return "?";
}

SessionMode session_mode_from_string(const std::string& s) {
  for (SessionMode m : {SessionMode::Idle, SessionMode::Teleop, SessionMode::Recording, SessionMode::RolloutPolicy,
                        SessionMode::RolloutPlanner, SessionMode::Passive})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown mode '" + s + "'");
}

void SessionConfig::validate() const {
  rollout.validate();
  deploy.validate();
  planner.validate();
  if (!(broadcast_rate > 0.0) || broadcast_rate > rollout.servo.rate)
    throw ValidationError("session: broadcast_rate must be in (0, servo rate]");
  if (!(min_recording >= 0.0) || drag_iterations < 1) throw ValidationError("session: bad recording/drag settings");
}

std::filesystem::path data_dir_from_env(const std::filesystem::path& fallback) {
  const char* v = std::getenv(kDataDirEnv);
  return v && *v ? std::filesystem::path(v) : fallback;
}

struct Session::Rollout {
  std::string id;
  std::optional<Checkpoint> checkpoint;
  std::unique_ptr<PolicyStream> stream;
  TimedTrajectory trajectory;
  long n = 0, ticks = 0;
  std::unique_ptr<ExecutionLoop> loop;
};

Session::Session(RobotModel model, Scene scene, SessionConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
  config_.validate();
  scene.validate();
  sim_ = std::make_unique<Simulator>(model_, std::move(scene), config_.rollout.servo, config_.seed);
  sim_->reset(sim_->scene().task.rest);
  model_hash_ = config_hash(model_to_json(model_));
  enter_hold(SessionMode::Idle);
}

Session::~Session() = default;

double Session::time() const { return sim_->state().time; }

nlohmann::json Session::reply(const nlohmann::json& msg, const std::string& type, nlohmann::json body) const {
  nlohmann::json r = body.is_object() ? std::move(body) : nlohmann::json::object();
  r["type"] = type;
  r["seq"] = msg.is_object() && msg.contains("seq") ? msg["seq"] : nlohmann::json();
  r["ok"] = true;
  r["t"] = time();
  r["mode"] = to_string(mode_);
  return r;
}

nlohmann::json Session::error(const nlohmann::json& msg, const std::string& code, const std::string& text) const {
  nlohmann::json r = {{"type", "error"}, {"code", code}, {"message", text}, {"t", time()}, {"mode", to_string(mode_)}};
  r["seq"] = msg.is_object() && msg.contains("seq") ? msg["seq"] : nlohmann::json();
  r["request"] = msg.is_object() && msg.contains("type") && msg["type"].is_string() ? msg["type"] : nlohmann::json();
  return r;
}

std::vector<nlohmann::json> Session::handle_text(const std::string& text) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    return {error(nlohmann::json(), "parse", e.what())};
  }
  return handle(msg);
}

std::vector<nlohmann::json> Session::handle(const nlohmann::json& msg) {
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
    return {error(msg, "bad_message", "message must be an object with a string 'type'")};
  const std::string type = msg["type"];
  try {
    if (type == "hello") return {on_hello(msg)};
    if (type == "state") return {reply(msg, "state", state_frame())};
    if (type == "jog") return {on_jog(msg)};
    if (type == "drag") return {on_drag(msg)};
    if (type == "mode") return {on_mode(msg)};
    if (type == "record_start") return {on_record_start(msg)};
    if (type == "record_stop") return {on_record_stop(msg)};
    if (type == "capture_goal") return {on_capture_goal(msg)};
    if (type == "rollout_policy") return {on_rollout_policy(msg)};
    if (type == "rollout_planner") return {on_rollout_planner(msg)};
    if (type == "abort") return {on_abort(msg)};
  } catch (const nlohmann::json::exception& e) {
    return {error(msg, "bad_field", e.what())};
  } catch (const std::exception& e) {
    return {error(msg, "failed", e.what())};
  }
  return {error(msg, "unknown_type", "unknown message type '" + type + "'")};
}

nlohmann::json Session::on_hello(const nlohmann::json& m) {
  if (m.contains("version") && m["version"] != kProtocolVersion)
    return error(m, "version", std::string("server speaks ") + kProtocolVersion);
  return reply(m, "hello",
               {{"protocol", kProtocolVersion},
                {"model_hash", model_hash_},
                {"scene", sim_->scene().name},
                {"obstacle", sim_->scene().obstacle_present},
                {"tick_rate", sim_->servo().rate},
                {"broadcast_rate", config_.broadcast_rate},
                {"virtual_time", config_.virtual_time},
                {"joints", kNumJoints},
                {"lower", joints(JointConfig(model_.lower))},
                {"upper", joints(JointConfig(model_.upper))}});
}

void Session::enter_hold(SessionMode m) {
  mode_ = m;
  q_cmd_ = sim_->state().q;
  jog_velocity_.setZero();
  drag_target_.reset();
  drag_converged_ = true;
  filter_ = CommandFilter(config_.rollout.filter, q_cmd_, time());
}

void Session::enter_teleop() { enter_hold(SessionMode::Teleop); }

nlohmann::json Session::on_mode(const nlohmann::json& m) {
  const SessionMode target = session_mode_from_string(m.at("mode").get<std::string>());
  if (rollout_) return error(m, "busy", "a rollout is active; send abort");
  if (mode_ == SessionMode::Recording) return error(m, "mode", "stop the recording first");
  switch (target) {
    case SessionMode::Idle: enter_hold(SessionMode::Idle); break;
    case SessionMode::Teleop: enter_teleop(); break;
    case SessionMode::Passive:
      enter_hold(SessionMode::Passive);
      last_event_ = "passive requested";
      break;
    default: return error(m, "mode", "mode " + to_string(target) + " is entered through its own message");
  }
  return reply(m, "mode");
}

nlohmann::json Session::on_jog(const nlohmann::json& m) {
  if (mode_ != SessionMode::Teleop && mode_ != SessionMode::Recording)
    return error(m, "mode", "jog requires TELEOP or RECORDING (mode is " + to_string(mode_) + ")");
  const int j = m.at("joint").get<int>();
  const double v = m.at("velocity").get<double>();
  if (j < 0 || j >= kNumJoints) return error(m, "range", "joint index out of range");
  if (!std::isfinite(v)) return error(m, "range", "velocity must be finite");
  if (drag_target_) {
    drag_target_.reset();
    jog_velocity_.setZero();
  }
  jog_velocity_[j] = v;
  filter_.note_command(time());
  return reply(m, "jog");
}

nlohmann::json Session::on_drag(const nlohmann::json& m) {
  if (mode_ != SessionMode::Teleop && mode_ != SessionMode::Recording)
    return error(m, "mode", "drag requires TELEOP or RECORDING (mode is " + to_string(mode_) + ")");
  const auto p = m.at("position").get<std::vector<double>>();
  if (p.size() != 3) return error(m, "range", "position needs 3 values");
  Pose target;
  target.position = Vec3(p[0], p[1], p[2]);
  if (m.contains("orientation")) {
    const auto o = m["orientation"].get<std::vector<double>>();
    if (o.size() != 4) return error(m, "range", "orientation is [w, x, y, z]");
    target.orientation = Quat(o[0], o[1], o[2], o[3]);
    if (!(target.orientation.norm() > 1e-9)) return error(m, "range", "zero quaternion");
    target.orientation.normalize();
  } else {
    target.orientation = camera_pose(model_, q_cmd_).orientation;
  }
  if (!target.position.allFinite()) return error(m, "range", "position must be finite");
  jog_velocity_.setZero();
  drag_target_ = target;
  filter_.note_command(time());
  return reply(m, "drag");
}

void Session::record_sample() {
  Episode& e = *recording_;
  const double t = static_cast<double>(sim_->state().tick - record_start_tick_) / sim_->servo().rate;
  e.joint_time.push_back(t);
  e.joints.push_back(sim_->state().q);
  if (t + 1e-9 >= static_cast<double>(e.features.size()) / e.feature_rate) {
    e.feature_time.push_back(t);
    e.features.push_back(sim_->features());
  }
}

nlohmann::json Session::on_record_start(const nlohmann::json& m) {
  if (mode_ != SessionMode::Teleop) return error(m, "mode", "record_start requires TELEOP");
  if (m.contains("scene") && m["scene"] != sim_->scene().name)
    return error(m, "scene", "active scene is '" + sim_->scene().name + "'");
  Episode e;
  e.scene = sim_->scene();
  e.provenance = Provenance::Teleop;
  e.obstacle = sim_->scene().obstacle_present;
  e.style = m.value("style", std::string("teleop"));
  e.joint_rate = sim_->servo().rate;
  e.feature_rate = config_.rollout.feature_rate;
  recording_ = std::move(e);
  record_start_tick_ = sim_->state().tick;
  mode_ = SessionMode::Recording;
  record_sample();
  return reply(m, "record_start");
}

nlohmann::json Session::on_record_stop(const nlohmann::json& m) {
  if (mode_ != SessionMode::Recording || !recording_) return error(m, "state", "record_stop without record_start");
  Episode e = std::move(*recording_);
  recording_.reset();
  mode_ = SessionMode::Teleop;
  if (e.duration() < config_.min_recording)
    return error(m, "too_short", "recording shorter than " + std::to_string(config_.min_recording) + " s rejected");
  e.goal = e.features.back();
  char id[64];
  std::snprintf(id, sizeof id, "teleop-%06d-t%08lld", recorded_episodes_++, static_cast<long long>(record_start_tick_));
  e.id = id;
  e.validate();
  const auto dir = config_.data_dir / "episodes";
  std::filesystem::create_directories(dir);
  const auto file = dir / (e.id + ".camepi");
  write_episode(file, e, {{"seed", config_.seed}, {"model_hash", model_hash_}});
  return reply(m, "record_stop",
               {{"id", e.id},
                {"file", file.string()},
                {"duration", e.duration()},
                {"joint_samples", e.joints.size()},
                {"feature_samples", e.features.size()},
                {"goal", e.goal.v}});
}

nlohmann::json Session::on_capture_goal(const nlohmann::json& m) {
  if (mode_ == SessionMode::Passive) return error(m, "mode", "capture_goal is unavailable in PASSIVE");
  const VisualFeature f = sim_->features();
  goal_ = f;
  goal_q_ = sim_->state().q;
  const Scene& sc = sim_->scene();
  const Pose cam = camera_pose(model_, sim_->state().q);
  auto proj = [&](const Vec3& p) {
    const Projection pr = project(cam, sc.camera, p);
    return nlohmann::json{{"u", pr.u}, {"v", pr.v}, {"in_front", pr.in_front}};
  };
  nlohmann::json fid = nlohmann::json::array();
  for (const auto& p : sc.fiducials) fid.push_back(proj(p));
  nlohmann::json corners = nlohmann::json::array();
  if (sc.obstacle_present) {
    const Vec3 h = sc.obstacle.half();
    for (int i = 0; i < 8; ++i)
      corners.push_back(proj(sc.obstacle.center + Vec3((i & 1 ? 1 : -1) * h.x(), (i & 2 ? 1 : -1) * h.y(), (i & 4 ? 1 : -1) * h.z())));
  }
  return reply(m, "capture_goal",
               {{"goal", f.v},
                {"q", joints(*goal_q_)},
                {"preview", {{"target", proj(sc.target.position)}, {"fiducials", fid}, {"obstacle", corners}}}});
}

nlohmann::json Session::on_rollout_policy(const nlohmann::json& m) {
  if (rollout_) return error(m, "busy", "a rollout is already active");
  if (mode_ != SessionMode::Idle && mode_ != SessionMode::Teleop)
    return error(m, "mode", "rollout_policy requires IDLE or TELEOP");
  if (!goal_) return error(m, "no_goal", "capture a goal first");
  std::filesystem::path path = m.at("checkpoint").get<std::string>();
  if (path.is_relative()) path = config_.data_dir / path;
  auto r = std::make_unique<Rollout>();
  try {
    r->checkpoint = read_checkpoint(path);
  } catch (const std::exception& e) {
    return error(m, "checkpoint", e.what());
  }
  const std::string hash = policy_hash(r->checkpoint->policy);
  if (m.contains("policy_hash") && m["policy_hash"] != hash)
    return error(m, "mismatch", "checkpoint hash " + hash + " does not match the requested one");
  if (r->checkpoint->stamp.contains("model_hash") && r->checkpoint->stamp["model_hash"] != model_hash_)
    return error(m, "mismatch", "checkpoint was trained for a different robot model");
  if (r->checkpoint->policy.config.history != config_.deploy.history)
    return error(m, "mismatch", "checkpoint history differs from the deploy buffer length");
  RolloutConfig rc = config_.rollout;
  rc.max_duration = m.value("max_duration", rc.max_duration);
  rc.validate();
  r->stream = std::make_unique<PolicyStream>(r->checkpoint->policy, config_.deploy, sim_->state().q, *goal_, rc,
                                             sim_->servo().rate);
  r->loop = std::make_unique<ExecutionLoop>(*sim_, rc, *goal_);
  r->loop->rec.method = "policy:" + hash;
  char id[48];
  std::snprintf(id, sizeof id, "trial-%04zu", trials_.size());
  r->id = id;
  rollout_ = std::move(r);
  jog_velocity_.setZero();
  drag_target_.reset();
  mode_ = SessionMode::RolloutPolicy;
  return reply(m, "rollout_policy", {{"trial_id", rollout_->id}, {"policy_hash", hash}});
}

nlohmann::json Session::on_rollout_planner(const nlohmann::json& m) {
  if (rollout_) return error(m, "busy", "a rollout is already active");
  if (mode_ != SessionMode::Idle && mode_ != SessionMode::Teleop)
    return error(m, "mode", "rollout_planner requires IDLE or TELEOP");
  if (!goal_q_ || !goal_) return error(m, "no_goal", "capture a goal first");
  nlohmann::json pj = to_json(config_.planner);
  if (m.contains("params")) pj.merge_patch(m["params"]);
  const PlannerParams pp = planner_params_from_json(pj);
  const PlanResult plan = plan_rrt_star(model_, sim_->scene(), sim_->state().q, *goal_q_, pp);
  if (!plan.ok()) return error(m, "plan_failed", to_string(plan.status));
  const Path path = shortcut_path(plan.path, model_, sim_->scene(), pp, pp.shortcut_rounds);
  auto r = std::make_unique<Rollout>();
  r->trajectory = time_parameterize(path, model_, sim_->servo().rate, pp.speed_scale);
  r->ticks = std::lround((r->trajectory.duration() + config_.rollout.settle) * sim_->servo().rate);
  r->loop = std::make_unique<ExecutionLoop>(*sim_, config_.rollout, *goal_);
  r->loop->rec.method = "planner";
  char id[48];
  std::snprintf(id, sizeof id, "trial-%04zu", trials_.size());
  r->id = id;
  rollout_ = std::move(r);
  jog_velocity_.setZero();
  drag_target_.reset();
  mode_ = SessionMode::RolloutPlanner;
  return reply(m, "rollout_planner",
               {{"trial_id", rollout_->id}, {"duration", rollout_->trajectory.duration()}, {"waypoints", path.waypoints.size()}});
}

nlohmann::json Session::on_abort(const nlohmann::json& m) {
  if (rollout_) {
    const std::string id = rollout_->id;
    finish_rollout("aborted");
    return reply(m, "abort", {{"trial_id", id}});
  }
  if (mode_ == SessionMode::Recording) {
    recording_.reset();
    mode_ = SessionMode::Teleop;
  }
  return reply(m, "abort");
}

void Session::finish_rollout(const std::string& reason) {
  TrialRecord rec = std::move(rollout_->loop->rec);
  if (rollout_->stream) {
    rec.latency_ms = rollout_->stream->latency_ms();
    rec.holds = rollout_->stream->holds();
  }
  rec.task = sim_->scene().name;
  rec.index = static_cast<int>(trials_.size());
  if (reason != "done") rec.failure = reason;
  const auto dir = config_.data_dir / "trials";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (rollout_->id + ".json")) << to_json(rec).dump() << "\n";
  last_trial_ = rollout_->id;
  last_event_ = rollout_->id + " " + reason;
  trials_.push_back(std::move(rec));
  rollout_.reset();
  enter_hold(SessionMode::Idle);
}

void Session::tick_teleop() {
  const double dt = sim_->servo().dt();
  if (drag_target_) {
    IkParams ik;
    ik.max_iters = config_.drag_iterations;
    const IkResult r = solve_ik(model_, q_cmd_, *drag_target_, ik);
    q_cmd_ = r.q;
    drag_converged_ = r.converged;
  } else {
    q_cmd_.q = (q_cmd_.q + dt * jog_velocity_).cwiseMax(model_.lower).cwiseMin(model_.upper);
  }
}

bool Session::tick() {
  const double t = time();
  const double dt = sim_->servo().dt();
  JointConfig cmd = sim_->state().q;
  bool stepped = false;
  switch (mode_) {
    case SessionMode::Idle:
      filter_.note_command(t);
      cmd = filter_.condition(q_cmd_, dt);
      break;
    case SessionMode::Teleop:
    case SessionMode::Recording:
      if (filter_.watchdog(t) == DriveMode::Passive) {
        if (recording_) last_event_ = "watchdog: recording discarded";
        else last_event_ = "watchdog";
        recording_.reset();
        enter_hold(SessionMode::Passive);
        break;
      }
      tick_teleop();
      cmd = filter_.condition(q_cmd_, dt);
      break;
    case SessionMode::Passive: break;
    case SessionMode::RolloutPolicy: {
      ExecutionLoop& loop = *rollout_->loop;
      const PolicyStream::Tick pt = rollout_->stream->next(loop.now(), loop.latest_feature(), sim_->state().q);
      if (pt.done) {
        finish_rollout("done");
        filter_.note_command(t);
        cmd = filter_.condition(q_cmd_, dt);
        break;
      }
      loop.tick(pt.raw, pt.fresh);
      applied_.push_back(loop.rec.commands.back());
      stepped = true;
      break;
    }
    case SessionMode::RolloutPlanner: {
      ExecutionLoop& loop = *rollout_->loop;
      if (rollout_->n >= rollout_->ticks) {
        finish_rollout("done");
        filter_.note_command(t);
        cmd = filter_.condition(q_cmd_, dt);
        break;
      }
      ++rollout_->n;
      loop.tick(rollout_->trajectory.at(static_cast<double>(rollout_->n) * dt), true);
      applied_.push_back(loop.rec.commands.back());
      stepped = true;
      break;
    }
  }
  if (!stepped) {
    applied_.push_back(cmd);
    sim_->step(cmd);
  }
  if (recording_) record_sample();
  const double k = static_cast<double>(sim_->state().tick) * config_.broadcast_rate / sim_->servo().rate;
  if (k + 1e-9 >= static_cast<double>(next_broadcast_)) {
    next_broadcast_ = static_cast<long>(std::floor(k + 1e-9)) + 1;
    return true;
  }
  return false;
}

nlohmann::json Session::state_frame() {
  const SimState& s = sim_->state();
  const FkResult fk = forward_kinematics(model_, s.q);
  nlohmann::json links = nlohmann::json::array();
  for (const auto& p : fk.link_poses) links.push_back({{"p", vec(p.position)}, {"q", quat(p.orientation)}});
  nlohmann::json rec = {{"active", recording_.has_value()}};
  if (recording_) {
    rec["joint_samples"] = recording_->joints.size();
    rec["feature_samples"] = recording_->features.size();
    rec["duration"] = recording_->duration();
  }
  return {{"type", "state"},
          {"frame", frame_seq_++},
          {"t", s.time},
          {"tick", s.tick},
          {"mode", to_string(mode_)},
          {"q", joints(s.q)},
          {"qdot", std::vector<double>(s.qdot.data(), s.qdot.data() + kNumJoints)},
          {"q_cmd", joints(q_cmd_)},
          {"links", links},
          {"camera", {{"p", vec(fk.ee.position)}, {"q", quat(fk.ee.orientation)}}},
          {"features", sim_->features().v},
          {"collided", s.collided},
          {"drag_converged", drag_converged_},
          {"recording", rec},
          {"rollout", rollout_ ? nlohmann::json(rollout_->id) : nlohmann::json()},
          {"goal_set", goal_.has_value()},
          {"clients", clients_},
          {"last_trial", last_trial_},
          {"event", last_event_}};
}

}  // namespace camarm

#include "camarm/eval/benchmark.hpp"

#include <cmath>
#include <numeric>

#include "camarm/plan/task_sampler.hpp"

namespace camarm {

std::string to_string(Task t) { return t == Task::PushInFree ? "PUSH_IN_FREE" : "PUSH_IN_OBSTACLE"; }

Task task_from_string(const std::string& s) {
  if (s == "PUSH_IN_FREE" || s == "free") return Task::PushInFree;
  if (s == "PUSH_IN_OBSTACLE" || s == "obstacle") return Task::PushInObstacle;
  throw ValidationError("unknown task '" + s + "'");
}

Style task_style(Task t) { return t == Task::PushInFree ? Style::Direct : Style::ArcLeft; }

TrialMetrics compute_metrics(const TrialRecord& r, const FeatureStats& stats, const RobotModel& model,
                             const CameraIntrinsics& intr, double threshold) {
  TrialMetrics m;
  m.failure = r.failure;
  m.collided = r.collided;
  m.duration = r.duration();
  if (!r.failure.empty() || r.features.empty() || r.joints.size() < 4) {
    m.frame_error = std::hypot(0.5 * intr.width, 0.5 * intr.height);
    m.s_vis = -1.0;
    return m;
  }
  const VisualFeature& last = r.features.back();
  m.s_vis = visual_alignment(last, r.goal, stats);
  m.success = trial_success(m.s_vis, r.collided, threshold);
  m.jerk = cartesian_jerk(r.joints, model, 1.0 / r.rate);
  m.frame_error = framing_error(last, intr);
  m.srr = screen_retention(r.features);
  if (!r.latency_ms.empty())
    m.latency_ms = std::accumulate(r.latency_ms.begin(), r.latency_ms.end(), 0.0) / static_cast<double>(r.latency_ms.size());
  return m;
}

Aggregate aggregate(const std::vector<TrialMetrics>& trials) {
  Aggregate a;
  a.trials = static_cast<int>(trials.size());
  if (trials.empty()) return a;
  for (const auto& t : trials) {
    a.successes += t.success ? 1 : 0;
    a.s_vis += t.s_vis;
    a.jerk += t.jerk;
    a.frame_error += t.frame_error;
    a.srr += t.srr;
    a.latency_ms += t.latency_ms;
  }
  const double n = static_cast<double>(trials.size());
  a.success_rate = a.successes / n;
  a.s_vis /= n;
  a.jerk /= n;
  a.frame_error /= n;
  a.srr /= n;
  a.latency_ms /= n;
  return a;
}

void BenchmarkConfig::validate() const {
  if (n_trials < 1 || svis_samples < 2) throw ValidationError("benchmark: n_trials >= 1 and svis_samples >= 2");
  if (!(task_margin >= 0.0)) throw ValidationError("benchmark: task_margin must be >= 0");
  rollout.validate();
  planner.validate();
  deploy.validate();
}

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  BenchmarkConfig c;
  c.n_trials = j.value("n_trials", c.n_trials);
  c.seed = j.value("seed", c.seed);
  c.svis_threshold = j.value("svis_threshold", c.svis_threshold);
  c.svis_samples = j.value("svis_samples", c.svis_samples);
  c.task_margin = j.value("task_margin", c.task_margin);
  if (j.contains("rollout")) c.rollout = rollout_config_from_json(j.at("rollout"));
  if (j.contains("planner")) c.planner = planner_params_from_json(j.at("planner"));
  if (j.contains("deploy")) c.deploy = deploy_config_from_json(j.at("deploy"));
  c.validate();
  return c;
}

nlohmann::json to_json(const BenchmarkConfig& c) {
  return {{"n_trials", c.n_trials},       {"seed", c.seed},
          {"svis_threshold", c.svis_threshold}, {"svis_samples", c.svis_samples},
          {"task_margin", c.task_margin}, {"rollout", to_json(c.rollout)},
          {"planner", to_json(c.planner)}, {"deploy", to_json(c.deploy)}};
}

TrialRecord run_trial(const RobotModel& model, const Scene& scene, Task task, const MethodSpec& method,
                      const TaskInstance& inst, int index, const BenchmarkConfig& cfg) {
  const VisualFeature goal = render_features(scene, model, inst.q_goal);
  const std::uint64_t trial_seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(index);
  RolloutRunner runner(model, scene, cfg.rollout, trial_seed);
  auto failed = [&](std::string why) {
    TrialRecord r;
    r.goal = goal;
    r.failure = std::move(why);
    return r;
  };
  TrialRecord rec;
  try {
    switch (method.kind) {
      case MethodKind::Expert: {
        ExpertParams p;
        p.noise_sigma = method.noise_sigma;
        p.seed = trial_seed;
        const ExpertTrajectory e = scripted_push_in(model, scene, inst.q_start, inst.goal_eye, task_style(task), p);
        if (!e.ok) return failed("expert: " + e.failure);
        rec = runner.run_reference(e.reference, goal);
        break;
      }
      case MethodKind::Planner: {
        PlannerParams pp = cfg.planner;
        pp.seed = trial_seed;
        const PlanResult plan = plan_rrt_star(model, scene, inst.q_start, inst.q_goal, pp);
        if (!plan.ok()) return failed("planner: " + to_string(plan.status));
        const Path path = shortcut_path(plan.path, model, scene, pp, pp.shortcut_rounds);
        rec = runner.run_reference(time_parameterize(path, model, cfg.rollout.servo.rate, pp.speed_scale), goal);
        break;
      }
      case MethodKind::Policy: {
        if (!method.policy) return failed("policy: no parameters");
        rec = runner.run_policy(*method.policy, cfg.deploy, inst.q_start, goal);
        break;
      }
    }
  } catch (const std::exception& e) {
    return failed(e.what());
  }
  return rec;
}

BenchmarkResult run_benchmark(const RobotModel& model, const std::vector<std::pair<Task, Scene>>& tasks,
                              const std::vector<MethodSpec>& methods, const BenchmarkConfig& cfg) {
  cfg.validate();
  BenchmarkResult out;
  for (const auto& [task, scene] : tasks) {
    const FeatureStats stats = svis_reference_stats(scene, cfg.svis_samples, cfg.seed);
    out.svis_stats[to_string(task)] = stats;
    const std::vector<TaskInstance> insts =
        sample_tasks(model, scene, cfg.n_trials, cfg.seed ^ (task == Task::PushInFree ? 0x1111ULL : 0x2222ULL), cfg.task_margin);
    for (const MethodSpec& m : methods) {
      BenchmarkRow row;
      row.method = m.id;
      row.task = task;
      for (int i = 0; i < cfg.n_trials; ++i) {
        TrialRecord rec = run_trial(model, scene, task, m, insts[static_cast<std::size_t>(i)], i, cfg);
        rec.method = m.id;
        rec.task = to_string(task);
        rec.index = i;
        row.trials.push_back(compute_metrics(rec, stats, model, scene.camera, cfg.svis_threshold));
        out.records.push_back(std::move(rec));
      }
      row.agg = aggregate(row.trials);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::vector<JointConfig> default_waypoints() {
  std::vector<JointConfig> w(4);
  w[0].q << 0.0, 0.6, 1.2, 0.0, 0.9, 0.0;
  w[1].q << 0.5, 0.4, 1.0, 0.3, 0.8, -0.2;
  w[2].q << -0.5, 0.7, 1.3, -0.3, 1.0, 0.2;
  w[3].q << 0.2, 0.3, 0.9, 0.5, 0.6, 0.4;
  return w;
}

RepeatabilityResult run_repeatability(const RobotModel& model, const Scene& scene, const RolloutConfig& rollout,
                                      const RepeatabilitySuite& suite) {
  const std::vector<JointConfig> wps = suite.waypoints.empty() ? default_waypoints() : suite.waypoints;
  RolloutConfig rc = rollout;
  rc.servo.actuation_noise_sigma = suite.noise_sigma;
  rc.settle = 0.0;
  const double rate = rc.servo.rate;

  // One fixed joint-space program: home -> wp1 -> ... -> wpW, dwelling at each.
  const JointConfig home = wps.front();
  TimedTrajectory program;
  program.rate = rate;
  program.q.push_back(home);
  std::vector<std::size_t> sample_at;
  JointConfig from = home;
  for (const JointConfig& w : wps) {
    const TimedTrajectory seg = min_jerk_segment(from, w, suite.move_time, rate);
    program.q.insert(program.q.end(), seg.q.begin() + 1, seg.q.end());
    program.hold(suite.dwell);
    sample_at.push_back(program.q.size() - 1);
    from = w;
  }

  std::vector<std::vector<Vec3>> endpoints;
  for (int k = 0; k < suite.runs; ++k) {
    RolloutRunner runner(model, scene, rc, suite.seed + static_cast<std::uint64_t>(k));
    const TrialRecord r = runner.run_reference(program, VisualFeature{});
    std::vector<Vec3> pts;
    for (std::size_t idx : sample_at) pts.push_back(camera_pose(model, r.joints.at(idx)).position);
    endpoints.push_back(std::move(pts));
  }
  return repeatability(endpoints);
}

CircleTrackingResult run_circle_tracking(const RobotModel& model, const Scene& scene, const RolloutConfig& rollout,
                                         const CircleSuite& s) {
  const Vec3 n = s.normal.normalized();
  const Vec3 a = (std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX()).cross(n).normalized();
  const Vec3 b = n.cross(a);
  const double rate = rollout.servo.rate;
  const double T = s.period * s.cycles;
  const auto N = static_cast<std::size_t>(std::llround(T * rate));

  CircleTrackingResult out;
  IkParams ik;
  ik.pos_tol = 1e-6;
  ik.rot_tol = 1e-6;
  ik.max_iters = 2000;
  auto pose_at = [&](double t) {
    const double th = 2.0 * M_PI * t / s.period;
    const Vec3 p = s.center + s.radius * (std::cos(th) * a + std::sin(th) * b);
    return Pose{p, look_at(p, s.look_target)};
  };

  TimedTrajectory ref;
  ref.rate = rate;
  JointConfig q = scene.task.rest;
  for (std::size_t k = 0; k <= N; ++k) {
    const double t = static_cast<double>(k) / rate;
    const Pose target = pose_at(t);
    const IkResult r = solve_ik(model, q, target, ik);
    if (!r.converged) out.ik_ok = false;
    q = r.q;
    ref.q.push_back(q);
    out.time.push_back(t);
    out.reference.push_back(target.position);
  }
  RolloutConfig rc = rollout;
  rc.settle = 0.0;
  RolloutRunner runner(model, scene, rc, 0);
  const TrialRecord rec = runner.run_reference(ref, VisualFeature{});
  std::vector<double> et;
  for (std::size_t k = 0; k < rec.joints.size(); ++k) {
    et.push_back(static_cast<double>(k) / rate);
    out.executed.push_back(camera_pose(model, rec.joints[k]).position);
  }
  out.tracking = tracking_rmse(out.time, out.reference, et, out.executed);
  return out;
}

}  // namespace camarm

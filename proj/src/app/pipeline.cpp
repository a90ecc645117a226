#include "camarm/app/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

#include "camarm/eval/report.hpp"
#include "camarm/eval/svg.hpp"
#include "camarm/learn/checkpoint.hpp"
#include "camarm/learn/episode_io.hpp"
#include "camarm/util/hash.hpp"

namespace camarm {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

// File reference or inline object.
nlohmann::json resolve(const nlohmann::json& v, const fs::path& base) {
  if (v.is_string()) return read_json(base / v.get<std::string>());
  return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Clip> clips_for(const RunConfig& rc, const std::vector<Episode>& eps) {
  std::vector<Clip> out;
  for (const auto& e : eps) {
    auto c = slice_clips(e, rc.policy.history, rc.policy.horizon, rc.train.stride, rc.benchmark.deploy.rate);
    out.insert(out.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  }
  return out;
}

nlohmann::json write_benchmark(const RunConfig& rc, const BenchmarkResult& r, const fs::path& out,
                               nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json rep = benchmark_report(r, rc.stamp("camarm.benchmark/1"));
  for (auto& [k, v] : extra.items()) rep[k] = v;
  write_text(out / "report.json", rep.dump(2) + "\n");
  write_text(out / "report.txt", format_table(r));
  for (Task t : {Task::PushInFree, Task::PushInObstacle}) {
    std::vector<TrialRecord> recs;
    for (const auto& x : r.records)
      if (x.task == to_string(t)) recs.push_back(x);
    if (!recs.empty())
      write_text(out / ("paths_" + to_string(t) + ".svg"), camera_paths_svg(rc.model, rc.scene(t), recs));
  }
  return rep;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  collect.seed = s;
  train.seed = s;
  benchmark.seed = s;
  raw["seed"] = s;
}

std::string RunConfig::hash() const {
  nlohmann::json j = raw;
  j.erase("seed");
  return config_hash(j);
}

nlohmann::json RunConfig::stamp(const std::string& schema) const {
  return {{"schema", schema}, {"config_hash", hash()}, {"seed", seed}};
}

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base) {
  if (j.value("schema", std::string(kRunSchema)) != kRunSchema) throw ValidationError("run config: unexpected schema");
  RunConfig rc;
  rc.raw = j;
  rc.raw["model"] = resolve(j.at("model"), base);
  rc.raw["scenes"]["free"] = resolve(j.at("scenes").at("free"), base);
  rc.raw["scenes"]["obstacle"] = resolve(j.at("scenes").at("obstacle"), base);
  rc.model = model_from_json(rc.raw["model"]);
  rc.scene_free = scene_from_json(rc.raw["scenes"]["free"]);
  rc.scene_obstacle = scene_from_json(rc.raw["scenes"]["obstacle"]);
  if (rc.scene_free.obstacle_present || !rc.scene_obstacle.obstacle_present)
    throw ValidationError("run config: scenes.free must have no obstacle and scenes.obstacle one");
  if (j.contains("collect")) rc.collect = collect_config_from_json(j["collect"]);
  if (j.contains("split")) {
    rc.split.train = j["split"].value("train", rc.split.train);
    rc.split.val = j["split"].value("val", rc.split.val);
    rc.split.test = j["split"].value("test", rc.split.test);
  }
  if (j.contains("policy")) rc.policy = policy_config_from_json(j["policy"]);
  if (j.contains("train")) rc.train = train_config_from_json(j["train"]);
  if (j.contains("benchmark")) rc.benchmark = benchmark_config_from_json(j["benchmark"]);
  rc.ablations = j.value("ablations", std::vector<std::string>{});
  for (const auto& a : rc.ablations) ablation_from_string(a);
  rc.expert_noise = j.value("expert_noise", rc.expert_noise);
  if (rc.policy.history != rc.benchmark.deploy.history)
    throw ValidationError("run config: policy.history must equal benchmark.deploy.history");
  rc.set_seed(j.value("seed", std::uint64_t{0}));
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  const fs::path p = path.empty() ? default_config_dir() / "run.json" : path;
  RunConfig rc = run_config_from_json(read_json(p), p.parent_path());
  rc.source = p;
  return rc;
}

fs::path cmd_collect(const RunConfig& rc, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Episode> eps = collect_scripted(rc.model, rc.scene_free, rc.scene_obstacle, rc.collect);
  const int n = static_cast<int>(eps.size());
  EpisodeSplit split;
  if (n < 3) {
    for (int i = 0; i < n; ++i) split.train.push_back(i);
  } else {
    split = split_episodes(n, rc.split, rc.seed);
  }
  std::vector<std::string> which(eps.size(), "train");
  for (int i : split.val) which[i] = "val";
  for (int i : split.test) which[i] = "test";
  Manifest m;
  m.stamp = rc.stamp(kManifestSchema);
  fs::create_directories(out / "episodes");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const std::string file = "episodes/" + eps[i].id + ".camepi";
    write_episode(out / file, eps[i], rc.stamp(kEpisodeSchema));
    m.episodes.push_back({file, eps[i].id, which[i], eps[i].obstacle, eps[i].style});
  }
  const fs::path mp = out / "manifest.json";
  write_manifest(mp, m);
  std::fprintf(stderr, "collect: %d episodes (%zu train / %zu val / %zu test) in %.1f s -> %s\n", n, split.train.size(),
               split.val.size(), split.test.size(), seconds_since(t0), mp.string().c_str());
  return mp;
}

TrainOutput cmd_train(const RunConfig& rc, const fs::path& manifest, const fs::path& out, Ablation ablation,
                      const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  const Manifest m = read_manifest(manifest);
  std::vector<Episode> train, val;
  for (const auto& e : m.episodes) {
    if (e.split == "train") train.push_back(read_episode(manifest.parent_path() / e.file));
    else if (e.split == "val") val.push_back(read_episode(manifest.parent_path() / e.file));
  }
  if (train.empty()) throw ValidationError("train: manifest has no train episodes");
  PolicyConfig pc = rc.policy;
  pc.ablation = ablation;
  TrainOutput o{out / (name + ".camckpt"), train_policy(clips_for(rc, train), clips_for(rc, val), pc, rc.train)};
  if (o.result.diverged) std::fprintf(stderr, "train: diverged: %s (keeping last good parameters)\n", o.result.error.c_str());
  nlohmann::json stamp = rc.stamp(kCheckpointSchema);
  stamp["model_hash"] = config_hash(model_to_json(rc.model));
  stamp["manifest"] = m.stamp;
  stamp["best_epoch"] = o.result.best_epoch;
  stamp["diverged"] = o.result.diverged;
  fs::create_directories(out);
  write_checkpoint(o.checkpoint, o.result.policy, stamp);
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : o.result.history)
    hist.push_back({{"epoch", h.epoch},
                    {"train", {{"total", h.train.total}, {"mse", h.train.mse}, {"kl", h.train.kl}, {"smooth", h.train.smooth}}},
                    {"val", {{"total", h.val.total}, {"mse", h.val.mse}, {"kl", h.val.kl}, {"smooth", h.val.smooth}}}});
  nlohmann::json log = rc.stamp("camarm.train_log/1");
  log["ablation"] = to_string(ablation);
  log["best_epoch"] = o.result.best_epoch;
  log["policy_hash"] = policy_hash(o.result.policy);
  log["history"] = hist;
  write_text(out / (name + "_log.json"), log.dump(2) + "\n");
  std::fprintf(stderr, "train[%s]: %zu epochs, best %d, %.1f s -> %s\n", to_string(ablation).c_str(),
               o.result.history.size(), o.result.best_epoch, seconds_since(t0), o.checkpoint.string().c_str());
  return o;
}

nlohmann::json cmd_eval(const RunConfig& rc, const std::string& method, const std::vector<Task>& tasks,
                        const fs::path& out) {
  std::optional<Checkpoint> ckpt;
  MethodSpec spec;
  if (method == "expert") spec = {"expert", MethodKind::Expert, 0.0, nullptr};
  else if (method == "expert_noisy") spec = {"expert_noisy", MethodKind::Expert, rc.expert_noise, nullptr};
  else if (method == "planner") spec = {"planner", MethodKind::Planner, 0.0, nullptr};
  else {
    ckpt = read_checkpoint(method);
    if (ckpt->stamp.contains("model_hash") && ckpt->stamp["model_hash"] != config_hash(model_to_json(rc.model)))
      throw ValidationError("eval: checkpoint was trained for a different robot model");
    spec = {"policy", MethodKind::Policy, 0.0, &ckpt->policy};
  }
  std::vector<std::pair<Task, Scene>> ts;
  for (Task t : tasks) ts.emplace_back(t, rc.scene(t));
  const BenchmarkResult r = run_benchmark(rc.model, ts, {spec}, rc.benchmark);
  std::fputs(format_table(r).c_str(), stdout);
  return write_benchmark(rc, r, out);
}

bool cmd_plan(const RunConfig& rc, Task task, int index, const fs::path& out) {
  const Scene& scene = rc.scene(task);
  const auto insts = sample_tasks(rc.model, scene, index + 1, rc.benchmark.seed ^ (task == Task::PushInFree ? 0x1111ULL : 0x2222ULL),
                                  rc.benchmark.task_margin);
  const TaskInstance& inst = insts.back();
  PlannerParams pp = rc.benchmark.planner;
  pp.seed = rc.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const PlanResult plan = plan_rrt_star(rc.model, scene, inst.q_start, inst.q_goal, pp);
  nlohmann::json j = rc.stamp("camarm.plan/1");
  j["task"] = to_string(task);
  j["index"] = index;
  j["status"] = to_string(plan.status);
  if (plan.ok()) {
    const Path path = shortcut_path(plan.path, rc.model, scene, pp, pp.shortcut_rounds);
    nlohmann::json wps = nlohmann::json::array();
    for (const auto& q : path.waypoints) wps.push_back(std::vector<double>(q.q.data(), q.q.data() + kNumJoints));
    j["raw_cost"] = plan.path.cost;
    j["cost"] = path.cost;
    j["straight_line_cost"] = (inst.q_goal.q - inst.q_start.q).norm();
    j["waypoints"] = wps;
    bool clear = true;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i)
      clear = clear && segment_free(rc.model, scene, path.waypoints[i - 1], path.waypoints[i], pp.safety_margin, pp.resolution);
    j["clearance_ok"] = clear;
  }
  j["timing"] = {{"seconds", seconds_since(t0)}};
  fs::create_directories(out);
  write_text(out / "plan.json", j.dump(2) + "\n");
  std::printf("plan %s #%d: %s\n", to_string(task).c_str(), index, to_string(plan.status).c_str());
  return plan.ok();
}

ReplayResult cmd_replay(const RunConfig& rc, const fs::path& recording, const fs::path& out) {
  TimedTrajectory ref;
  Scene scene;
  std::string id;
  if (recording.extension() == ".json") {
    const TrialRecord r = trial_from_json(read_json(recording));
    ref.rate = r.rate;
    ref.q = r.joints;
    scene = r.task == to_string(Task::PushInObstacle) || r.task == rc.scene_obstacle.name ? rc.scene_obstacle : rc.scene_free;
    id = r.method + "/" + std::to_string(r.index);
  } else {
    const Episode e = read_episode(recording);
    ref.rate = e.joint_rate;
    ref.q = e.joints;
    scene = e.scene;
    id = e.id;
  }
  if (ref.q.size() < 2) throw ValidationError("replay: recording too short");
  RolloutConfig cfg = rc.benchmark.rollout;
  cfg.servo.rate = ref.rate;
  cfg.settle = 0.0;
  RolloutRunner runner(rc.model, scene, cfg, rc.seed);
  const TrialRecord exec = runner.run_reference(ref, VisualFeature{});
  std::vector<double> rt, et;
  std::vector<Vec3> rx, ex;
  for (std::size_t k = 0; k < ref.q.size(); ++k) {
    rt.push_back(static_cast<double>(k) / ref.rate);
    rx.push_back(camera_pose(rc.model, ref.q[k]).position);
  }
  for (std::size_t k = 0; k < exec.joints.size(); ++k) {
    et.push_back(static_cast<double>(k) / exec.rate);
    ex.push_back(camera_pose(rc.model, exec.joints[k]).position);
  }
  const TrackingResult tr = tracking_rmse(rt, rx, et, ex);
  ReplayResult out_r{tr.rmse, tr.max, static_cast<std::size_t>(tr.samples)};
  nlohmann::json j = rc.stamp("camarm.replay/1");
  j["recording"] = id;
  j["rmse"] = tr.rmse;
  j["max"] = tr.max;
  j["samples"] = tr.samples;
  j["collided"] = exec.collided;
  fs::create_directories(out);
  write_text(out / "replay.json", j.dump(2) + "\n");
  std::printf("replay %s: RMSE %.2f mm, max %.2f mm over %d samples\n", id.c_str(), 1e3 * tr.rmse, 1e3 * tr.max, tr.samples);
  return out_r;
}

nlohmann::json cmd_bench(const RunConfig& rc, const fs::path& out, bool lowlevel) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path manifest = cmd_collect(rc, out / "data");
  const double t_collect = seconds_since(t0);
  std::vector<std::pair<std::string, Ablation>> variants{{"policy", Ablation::None}};
  for (const auto& a : rc.ablations) variants.emplace_back("policy_" + a, ablation_from_string(a));
  std::vector<std::unique_ptr<Policy>> policies;
  nlohmann::json train_timing = nlohmann::json::object();
  for (const auto& [name, ab] : variants) {
    const auto t1 = std::chrono::steady_clock::now();
    TrainOutput o = cmd_train(rc, manifest, out / "models", ab, name);
    policies.push_back(std::make_unique<Policy>(std::move(o.result.policy)));
    train_timing[name] = seconds_since(t1);
  }
  std::vector<MethodSpec> methods{{"expert", MethodKind::Expert, 0.0, nullptr},
                                  {"expert_noisy", MethodKind::Expert, rc.expert_noise, nullptr},
                                  {"planner", MethodKind::Planner, 0.0, nullptr}};
  for (std::size_t i = 0; i < variants.size(); ++i)
    methods.push_back({variants[i].first, MethodKind::Policy, 0.0, policies[i].get()});
  const auto t2 = std::chrono::steady_clock::now();
  const BenchmarkResult r = run_benchmark(
      rc.model, {{Task::PushInFree, rc.scene_free}, {Task::PushInObstacle, rc.scene_obstacle}}, methods, rc.benchmark);
  const double t_eval = seconds_since(t2);
  nlohmann::json extra = nlohmann::json::object();
  if (lowlevel) {
    RepeatabilitySuite rs;
    rs.seed = rc.seed;
    const RepeatabilityResult rep0 = run_repeatability(rc.model, rc.scene_free, rc.benchmark.rollout, rs);
    rs.noise_sigma = 1e-3;
    const RepeatabilityResult rep1 = run_repeatability(rc.model, rc.scene_free, rc.benchmark.rollout, rs);
    const CircleTrackingResult circ = run_circle_tracking(rc.model, rc.scene_free, rc.benchmark.rollout, CircleSuite{});
    extra["lowlevel"] = {{"e_rep_noiseless", rep0.e_rep},
                         {"e_rep_sigma_1e-3", rep1.e_rep},
                         {"tracking_rmse", circ.tracking.rmse},
                         {"tracking_max", circ.tracking.max}};
  }
  nlohmann::json rep = write_benchmark(rc, r, out, extra);
  rep["timing"]["collect_s"] = t_collect;
  rep["timing"]["train_s"] = train_timing;
  rep["timing"]["eval_s"] = t_eval;
  rep["timing"]["total_s"] = seconds_since(t0);
  write_text(out / "report.json", rep.dump(2) + "\n");
  std::fputs(format_table(r).c_str(), stdout);
  std::printf("total %.1f s\n", seconds_since(t0));
  return rep;
}

}  // namespace camarm

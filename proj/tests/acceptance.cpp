// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "camarm/app/pipeline.hpp"
#include "camarm/control/command_filter.hpp"
#include "camarm/control/ik.hpp"
#include "camarm/eval/report.hpp"
#include "camarm/learn/checkpoint.hpp"
#include "camarm/learn/deploy.hpp"
#include "camarm/learn/loss.hpp"
#include "camarm/learn/optimizer.hpp"
#include "camarm/learn/train.hpp"
#include "support.hpp"

using namespace camarm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr int kIkTargets = 100, kIkRequired = 99;
constexpr double kIkPos = 1e-3, kIkRotDeg = 0.5, kIkMs = 5.0, kDlsTol = 1e-10;
constexpr double kJacTol = 1e-5, kGradRel = 1e-3, kGradSeconds = 60.0;
constexpr int kFuzzStreams = 100000, kFuzzTicks = 20;
constexpr double kRampSlack = 1e-12, kTimeout = 0.25;
constexpr double kRepMax = 2e-3;
constexpr double kTrackRms = 0.02, kTrackMax = 0.03;
constexpr int kPlans = 10;
constexpr double kPlanMargin = 0.075, kRecheckRes = 0.0025, kFreeCostRatio = 1.05, kPlanSeconds = 30.0;
constexpr double kOverfitMse = 1e-4;
constexpr int kOverfitSteps = 500;
constexpr int kE2eMinSuccess = 8;
constexpr double kE2eSvis = 0.85, kE2eMinutes = 30.0;
constexpr double kDeploySeconds = 60.0;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-22s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void guarded(int id, const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

const RobotModel& model() { return test::model(); }

void ik_suite() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  int ok = 0;
  double worst_ms = 0.0;
  for (int k = 0; k < kIkTargets; ++k) {
    const JointConfig qt = test::random_q(rng, 0.7);
    JointConfig q0 = qt;
    for (int i = 0; i < kNumJoints; ++i) q0[i] += d(rng);
    q0 = model().clamp(q0);
    const Pose target = camera_pose(model(), qt);
    const auto t0 = Clock::now();
    const IkResult r = solve_ik(model(), q0, target, IkParams{});
    worst_ms = std::max(worst_ms, 1e3 * since(t0));
    if (r.pos_error < kIkPos && r.rot_error < kIkRotDeg * M_PI / 180.0) ++ok;
  }
  std::normal_distribution<double> n(0.0, 0.1);
  double dls = 0.0;
  const IkParams p;
  for (int k = 0; k < 100; ++k) {
    const JointConfig q = test::random_q(rng);
    Vec6 e;
    for (int i = 0; i < 6; ++i) e[i] = n(rng);
    const Mat6 J = jacobian(model(), q);
    const Vec6 oracle = (J.transpose() * J + p.lambda * Mat6::Identity()).fullPivLu().solve(J.transpose() * e);
    dls = std::max(dls, (ik_step(model(), q, e, p) - oracle).cwiseAbs().maxCoeff());
  }
  report(1, "ik", ok >= kIkRequired && dls < kDlsTol && worst_ms < kIkMs,
         fmt("%d/%d solved, dls err %.1e, max %.2f ms/solve", ok, kIkTargets, dls, worst_ms));
}

void gradient_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  const double h = 1e-6;
  double jac = 0.0;
  for (int n = 0; n < 100; ++n) {
    const JointConfig q = test::random_q(rng);
    const Mat6 J = jacobian(model(), q);
    for (int i = 0; i < kNumJoints; ++i) {
      JointConfig qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose a = camera_pose(model(), qp), b = camera_pose(model(), qm);
      const Vec3 dv = (a.position - b.position) / (2 * h);
      const Vec3 dw = rotation_log((a.orientation * b.orientation.conjugate()).normalized()) / (2 * h);
      jac = std::max({jac, (J.block<3, 1>(0, i) - dv).cwiseAbs().maxCoeff(), (J.block<3, 1>(3, i) - dw).cwiseAbs().maxCoeff()});
    }
  }

  PolicyConfig pc;
  pc.d_model = 16;
  pc.heads = 2;
  pc.enc_layers = pc.dec_layers = 1;
  pc.d_z = 4;
  pc.ffn_mult = 2;
  pc.history = 3;
  pc.horizon = 4;
  Policy policy(pc, 1003);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Clip clip;
  for (int s = 0; s < pc.history; ++s) {
    VisualFeature f;
    JointConfig q;
    for (int i = 0; i < kFeatureDim; ++i) f[i] = u(rng);
    for (int i = 0; i < kNumJoints; ++i) q[i] = u(rng);
    clip.obs_features.push_back(f);
    clip.obs_joints.push_back(q);
  }
  for (int s = 0; s < pc.horizon; ++s) {
    JointConfig q;
    for (int i = 0; i < kNumJoints; ++i) q[i] = u(rng);
    clip.future.push_back(q);
  }
  for (int i = 0; i < kFeatureDim; ++i) clip.goal[i] = u(rng);
  const std::vector<double> eps{0.4, -0.3, 0.9, -1.2};
  const LossWeights w{0.1, 0.05};
  policy.params.zero_grad();
  accumulate_gradients(policy, clip, eps, w);
  double worst_rel = 0.0, worst_zero = 0.0;
  const double fh = 1e-5;
  for (auto& p : policy.params) {
    double diff = 0.0, ref = 0.0, ana = 0.0;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double keep = p.value.data[k];
      p.value.data[k] = keep + fh;
      const double up = evaluate_loss(policy, clip, eps, w).total;
      p.value.data[k] = keep - fh;
      const double dn = evaluate_loss(policy, clip, eps, w).total;
      p.value.data[k] = keep;
      const double fd = (up - dn) / (2 * fh);
      diff += (fd - p.grad.data[k]) * (fd - p.grad.data[k]);
      ref += fd * fd;
      ana += p.grad.data[k] * p.grad.data[k];
    }
    if (std::max(ref, ana) < 1e-14) worst_zero = std::max(worst_zero, std::sqrt(diff));  // softmax-invariant key biases
    else worst_rel = std::max(worst_rel, std::sqrt(diff) / std::max(std::sqrt(ref), std::sqrt(ana)));
  }
  const double secs = since(t0);
  report(2, "gradients", jac < kJacTol && worst_rel < kGradRel && worst_zero < 1e-7 && secs < kGradSeconds,
         fmt("jacobian %.1e, policy rel %.1e (zero-grad tensors abs %.1e), %.1f s", jac, worst_rel, worst_zero, secs));
}

void conditioning_suite() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(-3.0, 3.0), dtd(0.001, 0.02);
  const CommandFilterConfig cfg;
  double worst_excess = -INFINITY;
  for (int s = 0; s < kFuzzStreams; ++s) {
    JointConfig q0;
    for (int i = 0; i < kNumJoints; ++i) q0[i] = u(rng);
    CommandFilter f(cfg, q0, 0.0);
    JointConfig prev = f.output();
    for (int k = 0; k < kFuzzTicks; ++k) {
      JointConfig raw;
      for (int i = 0; i < kNumJoints; ++i) raw[i] = u(rng);
      const double dt = (s % 2) ? dtd(rng) : 1.0 / 200.0;
      const JointConfig out = f.condition(raw, dt);
      worst_excess = std::max(worst_excess, (out.q - prev.q).cwiseAbs().maxCoeff() - cfg.ramp_limit * dt);
      prev = out;
    }
  }
  // Watchdog trip latency under a 200 Hz poll from arbitrary start times.
  const double tick = 1.0 / 200.0;
  double lo = INFINITY, hi = -INFINITY;
  std::uniform_real_distribution<double> start(0.0, 1000.0);
  for (int s = 0; s < 1000; ++s) {
    const double t0 = start(rng);
    CommandFilter f(cfg, JointConfig{}, t0);
    f.note_command(t0);
    double t = t0;
    for (long k = 1;; ++k) {
      t = t0 + static_cast<double>(k) * tick;
      if (f.watchdog(t) == DriveMode::Passive) break;
    }
    lo = std::min(lo, t - t0);
    hi = std::max(hi, t - t0);
  }
  const bool ok = worst_excess <= kRampSlack && lo > kTimeout && hi <= kTimeout + tick + 1e-9;
  report(3, "command conditioning", ok,
         fmt("%d streams, max step - ramp*dt = %.1e; watchdog trips in [%.4f, %.4f] s", kFuzzStreams, worst_excess, lo, hi));
}

void repeatability_suite() {
  const RolloutConfig rc;
  RepeatabilitySuite s;
  s.runs = 10;
  const RepeatabilityResult quiet = run_repeatability(model(), test::scene_free(), rc, s);
  s.noise_sigma = 1e-3;
  const RepeatabilityResult noisy = run_repeatability(model(), test::scene_free(), rc, s);
  bool ok = quiet.e_rep.size() == 4 && noisy.e_rep.size() == 4;
  double qmax = 0.0, nmin = INFINITY, nmax = 0.0;
  for (double e : quiet.e_rep) qmax = std::max(qmax, e);
  for (double e : noisy.e_rep) {
    nmin = std::min(nmin, e);
    nmax = std::max(nmax, e);
  }
  ok = ok && qmax == 0.0 && nmin > 0.0 && nmax < kRepMax;
  report(4, "repeatability", ok, fmt("noiseless max %.3g m; sigma 1e-3: E_rep in [%.3f, %.3f] mm", qmax, 1e3 * nmin, 1e3 * nmax));
}

void tracking_suite() {
  const CircleTrackingResult r = run_circle_tracking(model(), test::scene_free(), RolloutConfig{}, CircleSuite{});
  report(5, "tracking", r.ik_ok && r.tracking.rmse <= kTrackRms && r.tracking.max <= kTrackMax,
         fmt("two-cycle circle: rms %.2f mm, max %.2f mm", 1e3 * r.tracking.rmse, 1e3 * r.tracking.max));
}

void planner_suite() {
  const BenchmarkConfig bc = load_run_config().benchmark;
  const Scene& obs = test::scene_obstacle();
  const auto tasks = sample_tasks(model(), obs, kPlans, bc.seed ^ 0x2222ULL, bc.task_margin);
  int clear = 0;
  double slowest = 0.0;
  for (int i = 0; i < kPlans; ++i) {
    PlannerParams p = bc.planner;
    p.seed = static_cast<std::uint64_t>(i);
    const auto t0 = Clock::now();
    const PlanResult r = plan_rrt_star(model(), obs, tasks[i].q_start, tasks[i].q_goal, p);
    if (!r.ok()) continue;
    const Path sc = shortcut_path(r.path, model(), obs, p, p.shortcut_rounds);
    slowest = std::max(slowest, since(t0));
    bool ok = true;
    for (std::size_t k = 1; k < sc.waypoints.size(); ++k)
      ok = ok && segment_free(model(), obs, sc.waypoints[k - 1], sc.waypoints[k], kPlanMargin, kRecheckRes);
    clear += ok ? 1 : 0;
  }
  const Scene& fr = test::scene_free();
  const auto ftasks = sample_tasks(model(), fr, kPlans, bc.seed ^ 0x1111ULL, bc.task_margin);
  double worst_ratio = 0.0;
  for (int i = 0; i < kPlans; ++i) {
    PlannerParams p = bc.planner;
    p.seed = static_cast<std::uint64_t>(i);
    const auto t0 = Clock::now();
    const PlanResult r = plan_rrt_star(model(), fr, ftasks[i].q_start, ftasks[i].q_goal, p);
    if (!r.ok()) {
      worst_ratio = INFINITY;
      continue;
    }
    const Path sc = shortcut_path(r.path, model(), fr, p, p.shortcut_rounds);
    slowest = std::max(slowest, since(t0));
    worst_ratio = std::max(worst_ratio, sc.cost / (ftasks[i].q_goal.q - ftasks[i].q_start.q).norm());
  }
  report(6, "planner", clear == kPlans && worst_ratio <= kFreeCostRatio && slowest < kPlanSeconds,
         fmt("%d/%d obstacle plans clear at %.3f m; free cost ratio max %.4f; slowest %.1f s", clear, kPlans, kPlanMargin,
             worst_ratio, slowest));
}

void loss_suite() {
  const double kl0 = kl_standard_normal(std::vector<double>(8, 0.0), std::vector<double>(8, 0.0));
  Tape t;
  const double smooth0 = t.value(row_diff_l1(t, t.constant(Mat(15, 6, 0.42)))).data[0];

  PolicyConfig pc;
  pc.d_model = 16;
  pc.heads = 2;
  pc.enc_layers = pc.dec_layers = 1;
  pc.d_z = 4;
  pc.ffn_mult = 2;
  pc.history = 3;
  pc.horizon = 4;
  Policy policy(pc, 1005);
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Clip clip;
  JointConfig q;
  for (int i = 0; i < kNumJoints; ++i) q[i] = u(rng);
  for (int s = 0; s < pc.history; ++s) {
    VisualFeature f;
    for (int i = 0; i < kFeatureDim; ++i) f[i] = u(rng);
    clip.obs_features.push_back(f);
    clip.obs_joints.push_back(q);
  }
  for (int s = 0; s < pc.horizon; ++s) {
    for (int i = 0; i < kNumJoints; ++i) q[i] += 0.05 * u(rng);
    clip.future.push_back(q);
  }
  for (int i = 0; i < kFeatureDim; ++i) clip.goal[i] = u(rng);
  const LossParts parts = evaluate_loss(policy, clip, {0.3, -0.1, 0.7, 0.0}, LossWeights{});
  const bool exact = parts.total == parts.mse + parts.kl + parts.smooth;

  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.lr = 3e-3;
  cfg.lambda_smooth = 0.0;
  cfg.weight_decay = 0.0;
  AdamWConfig ac;
  ac.weight_decay = 0.0;
  AdamW opt(policy.params, ac);
  std::mt19937_64 eps_rng(1007);
  double mse = evaluate_loss(policy, clip, {}, cfg.weights()).mse;
  int steps = 0;
  for (; steps < kOverfitSteps && mse >= kOverfitMse; ++steps) {
    opt.config().lr = scheduled_lr(cfg, steps, kOverfitSteps);
    train_step(policy, opt, {&clip}, cfg, eps_rng);
    mse = evaluate_loss(policy, clip, {}, cfg.weights()).mse;
  }
  report(7, "losses", kl0 == 0.0 && smooth0 == 0.0 && exact && mse < kOverfitMse,
         fmt("KL(prior) %g, smooth(const) %g, decomposition %s, overfit mse %.2e after %d steps", kl0, smooth0,
             exact ? "exact" : "inexact", mse, steps));
}

const nlohmann::json* find_row(const nlohmann::json& rep, const std::string& method, const std::string& task) {
  for (const auto& r : rep.at("metrics").at("rows"))
    if (r.at("method") == method && r.at("task") == task) return &r;
  return nullptr;
}

void e2e_suite(const fs::path& root) {
  const RunConfig rc = load_run_config();
  const auto t0 = Clock::now();
  const nlohmann::json rep = cmd_bench(rc, root / "bench");
  const double minutes = since(t0) / 60.0;
  auto agg = [&](const std::string& m, const std::string& t) -> const nlohmann::json& {
    const nlohmann::json* r = find_row(rep, m, t);
    if (!r) throw std::runtime_error("missing row " + m + "/" + t);
    return r->at("aggregate");
  };
  const auto& pf = agg("policy", "PUSH_IN_FREE");
  const int succ = pf.at("successes");
  const double svis = pf.at("s_vis");
  bool jerk_ok = true;
  std::string jerks;
  int full = 0, rgb = 0, noprop = 0;
  for (const std::string task : {"PUSH_IN_FREE", "PUSH_IN_OBSTACLE"}) {
    const double jp = agg("policy", task).at("jerk"), je = agg("expert_noisy", task).at("jerk");
    jerk_ok = jerk_ok && jp < je;
    jerks += fmt(" %.2f<%.2f", jp, je);
    full += agg("policy", task).at("successes").get<int>();
    rgb += agg("policy_rgb_only", task).at("successes").get<int>();
    noprop += agg("policy_no_proprio", task).at("successes").get<int>();
  }
  const bool ok = succ >= kE2eMinSuccess && svis > kE2eSvis && jerk_ok && rgb < full && noprop < full && minutes <= kE2eMinutes;
  report(8, "end-to-end", ok,
         fmt("free %d/10 S_vis %.3f; jerk policy<noisy expert:%s; successes full %d, rgb_only %d, no_proprio %d; %.1f min",
             succ, svis, jerks.c_str(), full, rgb, noprop, minutes));
}

void determinism_suite(const fs::path& root) {
  RunConfig rc = load_run_config();
  rc.set_seed(7);
  rc.collect.episodes = 8;
  rc.train.epochs = 3;
  rc.ablations.clear();
  rc.benchmark.n_trials = 3;
  rc.benchmark.svis_samples = 300;
  std::string payload[2], ckpt[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path out = root / ("determinism_" + std::to_string(k));
    fs::remove_all(out);
    const nlohmann::json rep = cmd_bench(rc, out);
    payload[k] = metrics_payload(rep);
    std::ifstream in(out / "models" / "policy.camckpt", std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    ckpt[k] = s.str();
  }
  const bool ok = !payload[0].empty() && payload[0] == payload[1] && !ckpt[0].empty() && ckpt[0] == ckpt[1];
  report(9, "determinism", ok,
         fmt("metrics payload %zu bytes %s, checkpoint %zu bytes %s", payload[0].size(),
             payload[0] == payload[1] ? "identical" : "DIFFERENT", ckpt[0].size(), ckpt[0] == ckpt[1] ? "identical" : "DIFFERENT"));
}

void deploy_suite() {
  const RunConfig rc = load_run_config();
  Policy policy(rc.policy, 1008);
  // Random output offsets so the clamp is exercised on most steps.
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < kNumJoints; ++i) policy.norm.action_mean[i] = u(rng);
  const DeployConfig dc = rc.benchmark.deploy;
  const Scene& scene = test::scene_free();
  Simulator sim(model(), scene, rc.benchmark.rollout.servo, 1010);
  sim.reset(scene.task.rest);
  CommandFilter filter(rc.benchmark.rollout.filter, sim.state().q, 0.0);
  DeployController ctl(policy, dc, render_features(scene, model(), scene.task.rest));
  const long period = std::lround(sim.servo().rate / dc.rate);
  const long ticks = std::lround(kDeploySeconds * sim.servo().rate);
  JointConfig raw = sim.state().q;
  long decisions = 0, clamped = 0, violations = 0;
  std::optional<JointConfig> prev;
  for (long n = 0; n < ticks; ++n) {
    const double t = sim.state().time;
    if (n % period == 0) {
      const JointConfig q = sim.state().q;
      const DeployOutput o = ctl.step(t, sim.features(), q);
      if (o.action == DeployAction::Command) {
        ++decisions;
        const JointConfig& base = prev ? *prev : q;
        for (int i = 0; i < kNumJoints; ++i) {
          if (std::abs(o.clamped_target[i] - q[i]) > dc.delta_max + 1e-12) ++violations;
          if (std::abs(o.raw_target[i] - q[i]) > dc.delta_max) ++clamped;
          const double lo = std::min(o.clamped_target[i], base[i]), hi = std::max(o.clamped_target[i], base[i]);
          if (o.command[i] < lo - 1e-12 || o.command[i] > hi + 1e-12) ++violations;
          if (std::abs(o.command[i] - (dc.ema_alpha * o.clamped_target[i] + (1 - dc.ema_alpha) * base[i])) > 1e-12)
            ++violations;
        }
        prev = o.command;
        raw = o.command;
      }
      filter.note_command(t);
    }
    if (filter.watchdog(t) == DriveMode::Passive) ++violations;
    sim.step(filter.condition(raw, sim.servo().dt()));
  }
  report(10, "deploy safety", violations == 0 && decisions > 0,
         fmt("%ld decisions over %.0f s, %ld clamped joint targets, %ld violations", decisions, kDeploySeconds, clamped,
             violations));
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "camarm_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  guarded(1, "ik", ik_suite);
  guarded(2, "gradients", gradient_suite);
  guarded(3, "command conditioning", conditioning_suite);
  guarded(4, "repeatability", repeatability_suite);
  guarded(5, "tracking", tracking_suite);
  guarded(6, "planner", planner_suite);
  guarded(7, "losses", loss_suite);
  guarded(8, "end-to-end", [&] { e2e_suite(root); });
  guarded(9, "determinism", [&] { determinism_suite(root); });
  guarded(10, "deploy safety", deploy_suite);
  std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

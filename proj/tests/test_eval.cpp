#include <doctest.h>

#include <cmath>
#include <random>

#include "camarm/eval/benchmark.hpp"
#include "camarm/eval/metrics.hpp"
#include "camarm/eval/report.hpp"
#include "camarm/eval/rollout.hpp"
#include "camarm/plan/task_sampler.hpp"
#include "support.hpp"

using namespace camarm;
using camarm::test::model;

TEST_CASE("repeatability: identical runs, the two-point case, and a random cloud") {
  const std::vector<Vec3> pts{Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0.5, 0.6)};
  const auto same = repeatability({pts, pts, pts});
  CHECK(same.e_rep[0] == 0.0);
  CHECK(same.e_rep[1] == 0.0);

  const auto two = repeatability({{Vec3(0, 0, 0)}, {Vec3(0.002, 0, 0)}});
  CHECK(two.e_rep[0] == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(two.max_dev[0] == doctest::Approx(0.001).epsilon(1e-12));

  std::mt19937_64 rng(71);
  std::normal_distribution<double> n(0.0, 1e-3);
  std::vector<std::vector<Vec3>> cloud;
  for (int k = 0; k < 10; ++k) cloud.push_back({Vec3(0.5 + n(rng), n(rng), 0.3 + n(rng))});
  Vec3 c = Vec3::Zero();
  for (const auto& r : cloud) c += r[0];
  c /= 10.0;
  double sum = 0.0;
  for (const auto& r : cloud) sum += (r[0] - c).norm();
  CHECK(std::abs(repeatability(cloud).e_rep[0] - sum / 10.0) < 1e-12);
  CHECK_THROWS_AS(repeatability({pts}), ValidationError);
}

TEST_CASE("tracking error: offset, interpolation, and non-overlap") {
  std::vector<double> t{0.0, 0.5, 1.0};
  std::vector<Vec3> ref{Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(1, 0, 0)};
  std::vector<Vec3> shifted;
  for (const auto& p : ref) shifted.push_back(p + Vec3(0, 0.01, 0));
  const TrackingResult a = tracking_rmse(t, ref, t, shifted);
  CHECK(a.rmse == doctest::Approx(0.01));
  CHECK(a.max == doctest::Approx(0.01));
  CHECK(a.samples == 3);
  // A coarser executed path on the same line interpolates exactly.
  const TrackingResult b = tracking_rmse(t, ref, {0.0, 1.0}, {Vec3(0, 0, 0), Vec3(1, 0, 0)});
  CHECK(b.rmse < 1e-15);
  CHECK_THROWS_AS(tracking_rmse(t, ref, {2.0, 3.0}, {Vec3(0, 0, 0), Vec3(1, 0, 0)}), ValidationError);
}

TEST_CASE("visual alignment is a cosine of standardized features") {
  FeatureStats st;
  st.std.fill(1.0);
  VisualFeature a, b;
  a[0] = 1.0;
  a[3] = 2.0;
  b[0] = -1.0;
  b[3] = -2.0;
  CHECK(visual_alignment(a, a, st) == doctest::Approx(1.0));
  CHECK(visual_alignment(a, b, st) == doctest::Approx(-1.0));
  VisualFeature c;
  c[1] = 5.0;
  CHECK(visual_alignment(a, c, st) == doctest::Approx(0.0));
  CHECK_THROWS_AS(visual_alignment(a, VisualFeature{}, st), ValidationError);
  CHECK(trial_success(0.9, false));
  CHECK_FALSE(trial_success(0.85, false));
  CHECK_FALSE(trial_success(0.99, true));
}

TEST_CASE("cartesian jerk of a cubic is its constant third derivative") {
  const double dt = 0.005;
  std::vector<Vec3> x;
  for (int k = 0; k < 50; ++k) {
    const double t = k * dt;
    x.push_back(Vec3(2.0 * t * t * t, 0.0, -t * t * t));
  }
  // d3/dt3 = (12, 0, -6)
  CHECK(cartesian_jerk(x, dt) == doctest::Approx(std::sqrt(144.0 + 36.0)).epsilon(1e-6));
  std::vector<Vec3> line;
  for (int k = 0; k < 10; ++k) line.push_back(Vec3(0.3 * k, 0, 0));
  CHECK(cartesian_jerk(line, dt) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_THROWS_AS(cartesian_jerk(std::vector<Vec3>(3), dt), ValidationError);
}

TEST_CASE("framing error and screen retention") {
  CameraIntrinsics intr;
  VisualFeature f;
  CHECK(framing_error(f, intr) == doctest::Approx(std::hypot(320.0, 180.0)));
  f[4] = 1.0;
  CHECK(framing_error(f, intr) == 0.0);
  f[0] = 1.0;
  CHECK(framing_error(f, intr) == doctest::Approx(320.0));
  VisualFeature in;
  in[4] = 1.0;
  in[0] = 0.4;
  CHECK(screen_retention({in, f, VisualFeature{}, in}) == doctest::Approx(0.5));
  CHECK(screen_retention({}) == 0.0);
}

TEST_CASE("repeatability suite: zero noise is exactly 0, small noise is small but nonzero") {
  const RolloutConfig rc;
  RepeatabilitySuite s;
  const auto quiet = run_repeatability(model(), test::scene_free(), rc, s);
  REQUIRE(quiet.e_rep.size() == 4);
  for (double e : quiet.e_rep) CHECK(e == 0.0);
  s.noise_sigma = 1e-3;
  const auto noisy = run_repeatability(model(), test::scene_free(), rc, s);
  for (double e : noisy.e_rep) {
    CHECK(e > 0.0);
    CHECK(e < 0.002);
  }
}

TEST_CASE("circle tracking stays within 2 cm RMS and 3 cm max") {
  const CircleTrackingResult r = run_circle_tracking(model(), test::scene_free(), RolloutConfig{}, CircleSuite{});
  CHECK(r.ik_ok);
  CHECK(r.tracking.rmse <= 0.02);
  CHECK(r.tracking.max <= 0.03);
  // The reference is a circle of the requested radius.
  const CircleSuite cs;
  for (std::size_t k = 0; k < r.reference.size(); k += 97) CHECK((r.reference[k] - cs.center).norm() == doctest::Approx(cs.radius));
}

TEST_CASE("expert trials succeed and metrics are a pure function of the record") {
  BenchmarkConfig cfg;
  cfg.n_trials = 2;
  cfg.svis_samples = 200;
  const BenchmarkResult r =
      run_benchmark(model(), {{Task::PushInFree, test::scene_free()}}, {{"expert", MethodKind::Expert, 0.0, nullptr}}, cfg);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].agg.successes == 2);
  CHECK(r.rows[0].agg.s_vis > 0.95);
  const FeatureStats& st = r.svis_stats.at("PUSH_IN_FREE");
  const TrialMetrics again = compute_metrics(r.records[0], st, model(), test::scene_free().camera);
  CHECK(again.s_vis == r.rows[0].trials[0].s_vis);
  CHECK(again.jerk == r.rows[0].trials[0].jerk);

  TrialRecord failed = r.records[0];
  failed.failure = "planner: NO_SOLUTION";
  const TrialMetrics fm = compute_metrics(failed, st, model(), test::scene_free().camera);
  CHECK_FALSE(fm.success);
  CHECK(fm.frame_error == doctest::Approx(std::hypot(320.0, 180.0)));

  // Trial records round-trip through JSON.
  const TrialRecord& rec = r.records[1];
  const TrialRecord back = trial_from_json(to_json(rec));
  CHECK(back.joints == rec.joints);
  CHECK(back.features == rec.features);
  CHECK(back.feature_time == rec.feature_time);
  CHECK(back.goal == rec.goal);
  CHECK(back.method == "expert");
  CHECK(back.index == 1);

  // Reports keep wall-clock latency out of the metrics payload.
  const nlohmann::json rep = benchmark_report(r, {{"schema", "x"}, {"seed", 0}});
  CHECK(rep.at("schema") == "camarm.benchmark/1");
  CHECK(metrics_payload(rep).find("latency") == std::string::npos);
  CHECK(rep.at("timing").dump().find("latency") != std::string::npos);
  CHECK(format_table(r).find("PUSH_IN_FREE") != std::string::npos);
}

TEST_CASE("aggregate averages and task names round-trip") {
  TrialMetrics a, b;
  a.success = true;
  a.s_vis = 0.9;
  b.s_vis = 0.5;
  a.jerk = 1.0;
  b.jerk = 3.0;
  const Aggregate g = aggregate({a, b});
  CHECK(g.successes == 1);
  CHECK(g.success_rate == 0.5);
  CHECK(g.s_vis == doctest::Approx(0.7));
  CHECK(g.jerk == doctest::Approx(2.0));
  CHECK(task_from_string(to_string(Task::PushInObstacle)) == Task::PushInObstacle);
  CHECK(task_from_string("free") == Task::PushInFree);
  CHECK_THROWS_AS(task_from_string("PULL_OUT"), ValidationError);
}

TEST_CASE("execution loop goes passive after 250 ms without fresh commands") {
  Simulator sim(model(), test::scene_free(), ServoModel{}, 0);
  const JointConfig q0 = test::scene_free().task.rest;
  sim.reset(q0);
  ExecutionLoop loop(sim, RolloutConfig{}, VisualFeature{});
  JointConfig target = q0;
  target[0] += 0.3;
  loop.tick(target, true);
  for (int k = 0; k < 50; ++k) loop.tick(target, false);  // 0.25 s: still active
  CHECK_FALSE(loop.rec.passive);
  loop.tick(target, false);
  CHECK(loop.rec.passive);
  CHECK(loop.rec.commands.size() == 52);
  // Passive commands track the measured joints.
  for (int k = 0; k < 20; ++k) loop.tick(target, false);
  CHECK(loop.rec.commands.back() == loop.rec.joints[loop.rec.joints.size() - 2]);
}

TEST_CASE("policy rollout stays active while the history buffer fills") {
  RolloutConfig rc;
  rc.max_duration = 1.0;
  PolicyConfig pc;
  pc.d_model = 16;
  pc.heads = 2;
  pc.enc_layers = pc.dec_layers = 1;
  pc.history = 8;
  Policy p(pc, 1);
  RolloutRunner runner(model(), test::scene_free(), rc, 0);
  const JointConfig q0 = test::scene_free().task.rest;
  const TrialRecord r = runner.run_policy(p, DeployConfig{}, q0, render_features(test::scene_free(), model(), q0));
  CHECK_FALSE(r.passive);
  CHECK(r.duration() <= 1.0 + 1e-9);
  CHECK(r.features.size() >= 30);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "camarm/plan/rrt_star.hpp"
#include "camarm/plan/scripted_expert.hpp"
#include "camarm/plan/task_sampler.hpp"
#include "camarm/plan/trajectory.hpp"
#include "camarm/sim/camera.hpp"
#include "support.hpp"

using namespace camarm;
using camarm::test::model;

TEST_CASE("min-jerk blend: endpoints, midpoint, derivative by finite differences") {
  CHECK(min_jerk(0.0) == 0.0);
  CHECK(min_jerk(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(min_jerk(0.5) == doctest::Approx(0.5));
  CHECK(min_jerk_ds(0.0) == 0.0);
  CHECK(min_jerk_ds(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(min_jerk_ds(0.5) == doctest::Approx(1.875));
  for (double s : {0.1, 0.37, 0.8}) {
    const double h = 1e-6;
    CHECK(min_jerk_ds(s) == doctest::Approx((min_jerk(s + h) - min_jerk(s - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("min-jerk segment sample count and end values") {
  JointConfig a, b;
  b[2] = 1.0;
  const TimedTrajectory t = min_jerk_segment(a, b, 1.0, 200.0);
  CHECK(t.size() == 201);
  CHECK(t.q.front() == a);
  CHECK(t.q.back()[2] == doctest::Approx(1.0));
  CHECK(t.at(0.5)[2] == doctest::Approx(0.5));
  CHECK(t.at(5.0) == t.q.back());
}

TEST_CASE("time parameterization respects the scaled velocity limit") {
  Path p;
  JointConfig a, b, c;
  b[0] = 0.8;
  c[0] = 0.8;
  c[3] = -1.1;
  p.waypoints = {a, b, c};
  p.recompute_cost();
  CHECK(p.cost == doctest::Approx(1.9));
  const double scale = 0.25, rate = 200.0;
  const TimedTrajectory t = time_parameterize(p, model(), rate, scale);
  double worst = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k)
    for (int i = 0; i < 6; ++i)
      worst = std::max(worst, std::abs(t.q[k][i] - t.q[k - 1][i]) * rate / (scale * model().velocity_limits[i]));
  CHECK(worst <= 1.0 + 1e-9);
  CHECK(t.q.front() == a);
  CHECK(t.q.back() == c);
  const double expected = 0.8 / (scale * model().velocity_limits[0]) + 1.1 / (scale * model().velocity_limits[3]);
  CHECK(t.duration() >= expected - 1e-12);
  CHECK(t.duration() < expected + 2.0 / rate);
  CHECK_THROWS_AS(time_parameterize(p, model(), rate, 0.0), ValidationError);
}

TEST_CASE("RRT* reports endpoint collisions as statuses") {
  const Scene& s = test::scene_obstacle();
  std::mt19937_64 rng(31);
  JointConfig bad;
  do bad = test::random_q(rng, 1.0);
  while (!in_collision(model(), bad, s, 0.0));
  PlannerParams p;
  const JointConfig rest = s.task.rest;
  CHECK(plan_rrt_star(model(), s, bad, rest, p).status == PlanStatus::StartInCollision);
  CHECK(plan_rrt_star(model(), s, rest, bad, p).status == PlanStatus::GoalInCollision);
  p.max_iterations = 1;
  p.goal_bias = 0.0;
  const auto tasks = sample_tasks(model(), s, 1, 3, p.safety_margin);
  const PlanResult r = plan_rrt_star(model(), s, tasks[0].q_start, tasks[0].q_goal, p);
  if (!segment_free(model(), s, tasks[0].q_start, tasks[0].q_goal, p.safety_margin, p.resolution))
    CHECK(r.status == PlanStatus::NoSolution);
}

TEST_CASE("RRT* on the obstacle scene: collision-free path, monotone improvements, shortcut never worse") {
  const Scene& s = test::scene_obstacle();
  const auto tasks = sample_tasks(model(), s, 2, 41, 0.075);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    PlannerParams p;
    p.seed = 100 + i;
    const PlanResult r = plan_rrt_star(model(), s, tasks[i].q_start, tasks[i].q_goal, p);
    REQUIRE(r.ok());
    CHECK(r.path.waypoints.front() == tasks[i].q_start);
    CHECK(r.path.waypoints.back() == tasks[i].q_goal);
    CHECK(r.path.cost == doctest::Approx(Path::cost_of(r.path.waypoints)));
    for (std::size_t k = 1; k < r.improvements.size(); ++k) CHECK(r.improvements[k].second < r.improvements[k - 1].second);
    const Path sc = shortcut_path(r.path, model(), s, p, p.shortcut_rounds);
    CHECK(sc.cost <= r.path.cost + 1e-12);
    for (const Path* path : {&r.path, &sc})
      for (std::size_t k = 1; k < path->waypoints.size(); ++k)
        CHECK(segment_free(model(), s, path->waypoints[k - 1], path->waypoints[k], 0.075, 0.005));
  }
}

TEST_CASE("free-space plan shortcuts to within 5% of the straight line") {
  const Scene& s = test::scene_free();
  const auto tasks = sample_tasks(model(), s, 3, 43, 0.075);
  for (const TaskInstance& t : tasks) {
    PlannerParams p;
    const PlanResult r = plan_rrt_star(model(), s, t.q_start, t.q_goal, p);
    REQUIRE(r.ok());
    const Path sc = shortcut_path(r.path, model(), s, p, p.shortcut_rounds);
    CHECK(sc.cost <= 1.05 * (t.q_goal.q - t.q_start.q).norm());
  }
}

TEST_CASE("plans are seed-deterministic") {
  const Scene& s = test::scene_obstacle();
  const auto t = sample_tasks(model(), s, 1, 47, 0.075).front();
  PlannerParams p;
  p.seed = 9;
  const PlanResult a = plan_rrt_star(model(), s, t.q_start, t.q_goal, p);
  const PlanResult b = plan_rrt_star(model(), s, t.q_start, t.q_goal, p);
  REQUIRE(a.ok());
  CHECK(a.path.waypoints == b.path.waypoints);
}

TEST_CASE("task sampler: endpoints clear, goal IK lands at the goal eye") {
  const Scene& s = test::scene_obstacle();
  const auto tasks = sample_tasks(model(), s, 5, 51, 0.075);
  CHECK(tasks.size() == 5);
  for (const TaskInstance& t : tasks) {
    CHECK_FALSE(in_collision(model(), t.q_start, s, 0.075));
    CHECK_FALSE(in_collision(model(), t.q_goal, s, 0.075));
    CHECK((camera_pose(model(), t.q_goal).position - t.goal_eye).norm() < 1e-3);
  }
  const JointConfig q = tasks[0].q_goal;
  const JointConfig f = wrist_flip(model(), q);
  const Pose a = camera_pose(model(), q), b = camera_pose(model(), f);
  CHECK((a.position - b.position).norm() < 1e-9);
  CHECK(a.orientation.angularDistance(b.orientation) < 1e-9);
}

TEST_CASE("scripted expert: starts at q_start, ends framed on the target, arcs bend the right way") {
  const Scene& s = test::scene_free();
  const TaskInstance t = sample_tasks(model(), s, 1, 53, 0.075).front();
  const ExpertParams p;
  const ExpertTrajectory d = scripted_push_in(model(), s, t.q_start, t.goal_eye, Style::Direct, p);
  REQUIRE(d.ok);
  CHECK(d.reference.q.front() == t.q_start);
  const Pose end = camera_pose(model(), d.reference.q.back());
  CHECK((end.position - t.goal_eye).norm() < 1e-3);
  const VisualFeature f = render_features(s, model(), d.reference.q.back());
  CHECK(f.target_visible());
  CHECK(std::hypot(f.target_u(), f.target_v()) < 0.01);
  for (std::size_t k = 1; k < d.reference.size(); ++k)
    CHECK((d.reference.q[k].q - d.reference.q[k - 1].q).cwiseAbs().maxCoeff() <= p.max_joint_speed / p.rate + 1e-9);

  const ExpertTrajectory l = scripted_push_in(model(), s, t.q_start, t.goal_eye, Style::ArcLeft, p);
  REQUIRE(l.ok);
  const Vec3 mid = camera_pose(model(), l.reference.at(0.5 * l.motion_duration)).position;
  const Vec3 chord_mid = 0.5 * (camera_pose(model(), t.q_start).position + t.goal_eye);
  CHECK((mid - l.mid_camera).norm() < 1e-3);
  CHECK((mid - chord_mid).dot(l.lateral) == doctest::Approx(s.task.arc_amplitude).epsilon(0.01));
  const ExpertTrajectory r = scripted_push_in(model(), s, t.q_start, t.goal_eye, Style::ArcRight, p);
  REQUIRE(r.ok);
  const Vec3 rmid = camera_pose(model(), r.reference.at(0.5 * r.motion_duration)).position;
  CHECK((rmid - chord_mid).dot(l.lateral) == doctest::Approx(-s.task.arc_amplitude).epsilon(0.01));

  ExpertParams noisy = p;
  noisy.noise_sigma = 0.01;
  noisy.seed = 4;
  const ExpertTrajectory n1 = scripted_push_in(model(), s, t.q_start, t.goal_eye, Style::Direct, noisy);
  const ExpertTrajectory n2 = scripted_push_in(model(), s, t.q_start, t.goal_eye, Style::Direct, noisy);
  REQUIRE(n1.ok);
  CHECK(n1.reference.q == n2.reference.q);
  CHECK_FALSE(n1.reference.q == d.reference.q);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "camarm/sim/camera.hpp"
#include "camarm/sim/geometry.hpp"
#include "camarm/sim/simulator.hpp"
#include "support.hpp"

using namespace camarm;
using camarm::test::model;

TEST_CASE("point-box signed distance on axes, corners and inside") {
  const Box b{Vec3(1.0, 2.0, 3.0), Vec3(2.0, 4.0, 6.0)};
  CHECK(point_box_signed_distance(b.center, b) == doctest::Approx(-1.0));
  CHECK(point_box_signed_distance(Vec3(2.5, 2.0, 3.0), b) == doctest::Approx(0.5));
  CHECK(point_box_signed_distance(Vec3(2.3, 4.4, 3.0), b) == doctest::Approx(0.5));  // 3-4-5 at the edge
  CHECK(point_box_signed_distance(Vec3(1.0, 2.0, 5.9), b) == doctest::Approx(-0.1));
}

TEST_CASE("capsule-box distance matches a dense sampling oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const Box b{Vec3(0.1, -0.05, 0.2), Vec3(0.3, 0.2, 0.4)};
  for (int k = 0; k < 300; ++k) {
    WorldCapsule c;
    c.a = Vec3(u(rng), u(rng), u(rng));
    c.b = Vec3(u(rng), u(rng), u(rng));
    c.radius = 0.03;
    const int n = 20000;
    double oracle = INFINITY;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      oracle = std::min(oracle, point_box_signed_distance(c.a + t * (c.b - c.a), b));
    }
    oracle -= c.radius;
    const double exact = capsule_box_distance(c, b);
    // Sampling can only overestimate the minimum.
    CHECK(exact <= oracle + 1e-12);
    CHECK(oracle - exact < 1e-4);
  }
}

TEST_CASE("capsule-floor distance is the lower endpoint height minus the radius") {
  WorldCapsule c{Vec3(0, 0, 0.3), Vec3(1, 0, 0.1), 0.05};
  CHECK(capsule_floor_distance(c) == doctest::Approx(0.05));
}

TEST_CASE("collision predicate agrees with clearance") {
  std::mt19937_64 rng(22);
  const Scene& s = test::scene_obstacle();
  for (int k = 0; k < 200; ++k) {
    const JointConfig q = test::random_q(rng, 1.0);
    const double c = clearance(model(), q, s);
    CHECK(in_collision(model(), q, s, 0.02) == (c < 0.02));
  }
  CHECK_THROWS_AS(in_collision(model(), JointConfig{}, s, -0.1), ValidationError);
}

TEST_CASE("projection: optical axis maps to the principal point, behind is not in front") {
  const Vec3 eye(0.2, -0.4, 0.3), tgt(0.7, 0.0, 0.05);
  const Pose cam{eye, look_at(eye, tgt)};
  const CameraIntrinsics intr;
  const Projection p = project(cam, intr, tgt);
  CHECK(p.in_front);
  CHECK(std::abs(p.u) < 1e-12);
  CHECK(std::abs(p.v) < 1e-12);
  CHECK(p.depth == doctest::Approx((tgt - eye).norm()));
  CHECK_FALSE(project(cam, intr, eye - (tgt - eye)).in_front);
  // A point on the horizontal frame edge projects to u = 1.
  const Vec3 x = cam.orientation * Vec3::UnitX(), z = cam.orientation * Vec3::UnitZ();
  const Projection e = project(cam, intr, eye + z + std::tan(0.5 * intr.hfov) * x);
  CHECK(e.u == doctest::Approx(1.0));
}

TEST_CASE("centered target renders at zero with the expected apparent radius") {
  const Scene& s = test::scene_free();
  const Vec3 eye = s.target.position + Vec3(0.0, -0.3, 0.2);
  const Pose cam{eye, look_at(eye, s.target.position)};
  const VisualFeature f = render_features_at(s, cam, s.camera);
  CHECK(f.target_visible());
  CHECK(std::abs(f.target_u()) < 1e-12);
  CHECK(std::abs(f.target_v()) < 1e-12);
  const double depth = (s.target.position - eye).norm();
  CHECK(f[2] == doctest::Approx(depth / kDepthScale));
  CHECK(f[3] == doctest::Approx(s.target.radius / depth / std::tan(0.5 * s.camera.hfov)));
  // Looking away hides it and zeroes its slots.
  const Pose away{eye, look_at(eye, eye - (s.target.position - eye))};
  const VisualFeature g = render_features_at(s, away, s.camera);
  CHECK_FALSE(g.target_visible());
  for (int i = 0; i < 5; ++i) CHECK(g[i] == 0.0);
}

TEST_CASE("servo step response follows the critically damped solution") {
  ServoModel servo;
  servo.substeps = 64;
  const Scene& s = test::scene_free();
  SimState st;
  st.q = s.task.rest;
  JointConfig cmd = st.q;
  const double A = 0.05;
  cmd[0] += A;
  const double w = servo.natural_frequency;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    st = step(st, cmd, servo, model(), s);
    const double t = st.time;
    const double analytic = cmd[0] - A * (1.0 + w * t) * std::exp(-w * t);
    worst = std::max(worst, std::abs(st.q[0] - analytic));
  }
  CHECK(worst < 0.005 * A);
  CHECK(st.time == doctest::Approx(0.5));
  CHECK(st.tick == 100);
}

TEST_CASE("servo tick equals a hand-rolled semi-implicit Euler recurrence") {
  const ServoModel servo;
  const Scene& s = test::scene_free();
  SimState st;
  st.q = s.task.rest;
  JointConfig cmd = st.q;
  cmd[1] += 0.02;
  double q = st.q[1], v = 0.0;
  const double w = servo.natural_frequency, h = servo.dt() / servo.substeps;
  for (int k = 0; k < 40; ++k) {
    st = step(st, cmd, servo, model(), s);
    for (int i = 0; i < servo.substeps; ++i) {
      v += h * (w * w * (cmd[1] - q) - 2.0 * servo.damping_ratio * w * v);
      q += h * v;
    }
  }
  CHECK(st.q[1] == q);
}

TEST_CASE("joint limits hold and actuation noise is seed-deterministic") {
  ServoModel servo;
  servo.actuation_noise_sigma = 1e-3;
  Simulator a(model(), test::scene_free(), servo, 5), b(model(), test::scene_free(), servo, 5),
      c(model(), test::scene_free(), servo, 6);
  const JointConfig q0 = test::scene_free().task.rest;
  a.reset(q0);
  b.reset(q0);
  c.reset(q0);
  JointConfig beyond = q0;
  beyond[0] = model().upper[0] + 1.0;
  for (int k = 0; k < 600; ++k) {
    a.step(beyond);
    b.step(beyond);
    c.step(beyond);
    CHECK(model().within_limits(a.state().q));
  }
  CHECK(a.state().q == b.state().q);
  CHECK_FALSE(a.state().q == c.state().q);
}

TEST_CASE("collision latches once penetrating") {
  const Scene& s = test::scene_free();
  std::mt19937_64 rng(23);
  JointConfig bad;
  for (int k = 0; k < 10000; ++k) {
    bad = test::random_q(rng, 1.0);
    if (clearance(model(), bad, s) < -0.05) break;
  }
  REQUIRE(clearance(model(), bad, s) < -0.05);
  SimState st;
  st.q = bad;
  st = step(st, bad, ServoModel{}, model(), s);
  CHECK(st.collided);
  st.q = s.task.rest;
  st = step(st, s.task.rest, ServoModel{}, model(), s);
  CHECK(st.collided);
}

TEST_CASE("scene JSON round-trips and validates") {
  for (const Scene* s : {&test::scene_free(), &test::scene_obstacle()}) {
    const nlohmann::json j = scene_to_json(*s);
    CHECK(scene_to_json(scene_from_json(j)) == j);
  }
  nlohmann::json j = scene_to_json(test::scene_free());
  j["fiducials"].erase(0);
  CHECK_THROWS_AS(scene_from_json(j), ValidationError);
  ServoModel sm;
  sm.rate = 0.0;
  CHECK_THROWS_AS(sm.validate(), ValidationError);
}

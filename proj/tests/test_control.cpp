#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "camarm/control/command_filter.hpp"
#include "camarm/control/ik.hpp"
#include "support.hpp"

using namespace camarm;
using camarm::test::model;

TEST_CASE("DLS step equals the normal-equation form from a dense solve") {
  // J^T (J J^T + l I)^-1 e == (J^T J + l I)^-1 J^T e
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.1);
  IkParams p;
  for (int k = 0; k < 50; ++k) {
    const JointConfig q = test::random_q(rng);
    Vec6 e;
    for (int i = 0; i < 6; ++i) e[i] = n(rng);
    const Mat6 J = jacobian(model(), q);
    const Vec6 oracle = (J.transpose() * J + p.lambda * Mat6::Identity()).fullPivLu().solve(J.transpose() * e);
    CHECK((ik_step(model(), q, e, p) - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pose error is zero at the target and antisymmetric in position") {
  std::mt19937_64 rng(9);
  const Pose a = camera_pose(model(), test::random_q(rng)), b = camera_pose(model(), test::random_q(rng));
  CHECK(pose_error(a, a).norm() == 0.0);
  CHECK((pose_error(a, b).head<3>() + pose_error(b, a).head<3>()).norm() < 1e-15);
}

TEST_CASE("IK solves FK-generated targets and mostly makes monotone progress") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  int ok = 0;
  std::size_t steps = 0, non_increasing = 0;
  for (int k = 0; k < 100; ++k) {
    const JointConfig qt = test::random_q(rng, 0.7);
    JointConfig q0 = qt;
    for (int i = 0; i < 6; ++i) q0[i] += d(rng);
    std::vector<double> trace;
    const IkResult r = solve_ik(model(), model().clamp(q0), camera_pose(model(), qt), IkParams{}, &trace);
    if (r.pos_error < 1e-3 && r.rot_error < 0.5 * M_PI / 180) ++ok;
    for (std::size_t i = 1; i < trace.size(); ++i, ++steps) non_increasing += trace[i] <= trace[i - 1] ? 1 : 0;
  }
  CHECK(ok >= 99);
  CHECK(static_cast<double>(non_increasing) >= 0.95 * static_cast<double>(steps));
}

TEST_CASE("DLS step is bounded under heavy damping") {
  std::mt19937_64 rng(13);
  IkParams p;
  p.lambda = 1e6;
  const JointConfig q = test::random_q(rng);
  Vec6 e;
  e << 0.3, -0.2, 0.1, 0.5, 0.0, -0.4;
  const Vec6 jte = jacobian(model(), q).transpose() * e;
  CHECK(ik_step(model(), q, e, p).norm() <= jte.norm() / p.lambda * (1 + 1e-6));
  CHECK(ik_step(model(), q, Vec6::Zero(), IkParams{}).norm() == 0.0);
}

TEST_CASE("pose error of a pure z rotation is its log") {
  Pose a{Vec3(0.1, 0.2, 0.3), Quat::Identity()};
  Pose b{Vec3(0.2, 0.2, 0.3), Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()))};
  const Vec6 e = pose_error(a, b);
  CHECK(std::abs(e[0] - 0.1) < 1e-15);
  CHECK(std::abs(e[5] - M_PI / 2) < 1e-12);
  CHECK(e.segment<4>(1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("IK at the target returns immediately; out-of-reach target reports non-convergence") {
  std::mt19937_64 rng(11);
  const JointConfig q = test::random_q(rng);
  const IkResult r0 = solve_ik(model(), q, camera_pose(model(), q), IkParams{});
  CHECK(r0.converged);
  CHECK(r0.iters == 0);
  CHECK(r0.q == q);

  Pose far{Vec3(5.0, 0.0, 0.5), Quat::Identity()};
  IkParams p;
  p.max_iters = 50;
  std::vector<double> trace;
  const IkResult r = solve_ik(model(), q, far, p, &trace);
  CHECK_FALSE(r.converged);
  CHECK(r.iters == 50);
  CHECK(trace.size() == 50);
  CHECK(model().within_limits(r.q));
}

TEST_CASE("IK parameters are validated") {
  IkParams p;
  p.lambda = 0.0;
  CHECK_THROWS_AS(solve_ik(model(), JointConfig{}, Pose{}, p), ValidationError);
}

TEST_CASE("conditioned command never moves faster than the ramp limit") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  CommandFilterConfig cfg;
  const double dt = 1.0 / 200.0;
  double worst = 0.0;
  for (int s = 0; s < 200; ++s) {
    CommandFilter f(cfg, JointConfig{}, 0.0);
    JointConfig prev = f.output();
    for (int k = 0; k < 100; ++k) {
      JointConfig raw;
      for (int i = 0; i < 6; ++i) raw[i] = u(rng);
      const JointConfig out = f.condition(raw, dt);
      worst = std::max(worst, (out.q - prev.q).cwiseAbs().maxCoeff());
      prev = out;
    }
  }
  CHECK(worst <= cfg.ramp_limit * dt + 1e-12);
}

TEST_CASE("low-pass settles on a constant command") {
  CommandFilter f(CommandFilterConfig{}, JointConfig{}, 0.0);
  JointConfig target;
  target[0] = 0.05;
  JointConfig out;
  for (int k = 0; k < 400; ++k) out = f.condition(target, 0.005);
  CHECK(out[0] == doctest::Approx(0.05).epsilon(1e-9));
  // First step is exactly alpha * delta (below the ramp bound).
  CommandFilter g(CommandFilterConfig{}, JointConfig{}, 0.0);
  CHECK(g.condition(target, 0.005)[0] == doctest::Approx(0.08 * 0.05));
}

TEST_CASE("watchdog: 0.249 s active, 0.251 s passive, fresh command re-arms") {
  CommandFilter f(CommandFilterConfig{}, JointConfig{}, 10.0);
  CHECK(f.watchdog(10.249) == DriveMode::Active);
  CHECK(f.watchdog(10.251) == DriveMode::Passive);
  CHECK(f.watchdog(10.1) == DriveMode::Passive);  // latched
  f.note_command(10.3);
  CHECK(f.watchdog(10.3) == DriveMode::Active);
}

TEST_CASE("filter rejects bad input") {
  CommandFilter f;
  CHECK_THROWS_AS(f.condition(JointConfig{}, 0.0), ValidationError);
  JointConfig bad;
  bad[2] = INFINITY;
  CHECK_THROWS_AS(f.condition(bad, 0.005), ValidationError);
  CommandFilterConfig c;
  c.ramp_limit = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

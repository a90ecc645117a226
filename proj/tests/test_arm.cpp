#include <doctest.h>

#include <cmath>
#include <random>

#include "camarm/arm/calibration.hpp"
#include "camarm/arm/kinematics.hpp"
#include "support.hpp"

using namespace camarm;
using camarm::test::model;

namespace {

// Homogeneous-matrix forward kinematics, independent of Pose/Quat composition.
Eigen::Matrix4d fk_matrix(const RobotModel& m, const JointConfig& q) {
  auto hom = [](const Pose& p) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.topLeftCorner<3, 3>() = p.orientation.toRotationMatrix();
    T.topRightCorner<3, 1>() = p.position;
    return T;
  };
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (int i = 0; i < kNumJoints; ++i) {
    Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
    R.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[i], m.joints[i].axis.normalized()).toRotationMatrix();
    T = T * hom(m.joints[i].parent_to_joint) * R;
  }
  return T * hom(m.camera_mount);
}

}  // namespace

TEST_CASE("shipped model validates") { CHECK_NOTHROW(model().validate()); }

TEST_CASE("forward kinematics matches a homogeneous-matrix chain") {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 50; ++n) {
    const JointConfig q = test::random_q(rng);
    const Pose p = camera_pose(model(), q);
    const Eigen::Matrix4d T = fk_matrix(model(), q);
    CHECK((p.position - T.topRightCorner<3, 1>()).norm() < 1e-12);
    CHECK((p.rotation() - T.topLeftCorner<3, 3>()).norm() < 1e-12);
    const FkResult fk = forward_kinematics(model(), q);
    CHECK(fk.link_poses.size() == kNumJoints + 1);
    CHECK((fk.ee.position - p.position).norm() == 0.0);
  }
}

TEST_CASE("geometric Jacobian matches central finite differences") {
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  double worst = 0.0;
  for (int n = 0; n < 30; ++n) {
    const JointConfig q = test::random_q(rng);
    const Mat6 J = jacobian(model(), q);
    for (int i = 0; i < kNumJoints; ++i) {
      JointConfig qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose a = camera_pose(model(), qp), b = camera_pose(model(), qm);
      const Vec3 dv = (a.position - b.position) / (2 * h);
      // Angular velocity from the rotation difference b^-1 a, mapped to world.
      const Vec3 dw = rotation_log((a.orientation * b.orientation.conjugate()).normalized()) / (2 * h);
      worst = std::max({worst, (J.block<3, 1>(0, i) - dv).cwiseAbs().maxCoeff(), (J.block<3, 1>(3, i) - dw).cwiseAbs().maxCoeff()});
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("joint limits are flagged with signed excess") {
  JointConfig q;
  q[0] = model().upper[0] + 0.1;
  q[2] = model().lower[2] - 0.25;
  const auto v = check_joint_limits(model(), q);
  REQUIRE(v.size() == 2);
  CHECK(v[0].joint == 0);
  CHECK(v[0].excess == doctest::Approx(0.1));
  CHECK(v[1].joint == 2);
  CHECK(v[1].excess == doctest::Approx(-0.25));
  CHECK(check_joint_limits(model(), JointConfig{}).empty());
  JointConfig bad;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(camera_pose(model(), bad), ValidationError);
}

TEST_CASE("differential wrist mapping round-trips") {
  for (double p : {-1.0, 0.0, 0.3})
    for (double r : {-2.0, 0.0, 1.1}) {
      const WristMotors m = wrist_joint_to_motor(p, r);
      const WristJoints j = wrist_motor_to_joint(m.m5, m.m6);
      CHECK(j.pitch == doctest::Approx(p));
      CHECK(j.roll == doctest::Approx(r));
    }
  // Equal motor motion is pure pitch, opposite motion pure roll.
  CHECK(wrist_motor_to_joint(0.4, 0.4).roll == 0.0);
  CHECK(wrist_motor_to_joint(0.4, -0.4).pitch == 0.0);
}

TEST_CASE("home offsets: upright raw reading calibrates to zero, out-of-range flagged not clamped") {
  Vec6 raw_up;
  raw_up << 0.1, -0.2, 0.3, 1.0, -0.5, 0.25;
  const HomeOffsets off = HomeOffsets::from_upright(raw_up);
  const CalibratedReading z = apply_home_offsets(model(), raw_up, off);
  CHECK(z.q.q.norm() == 0.0);
  CHECK(z.violations.empty());

  std::mt19937_64 rng(6);
  const JointConfig q = test::random_q(rng);
  const CalibratedReading back = apply_home_offsets(model(), unapply_home_offsets(q, off), off);
  CHECK((back.q.q - q.q).norm() < 1e-12);

  Vec6 far = raw_up;
  far[1] += model().upper[1] + 0.5;
  const CalibratedReading r = apply_home_offsets(model(), far, off);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.q[1] == doctest::Approx(model().upper[1] + 0.5));
}

TEST_CASE("model JSON round-trips") {
  const RobotModel m2 = model_from_json(model_to_json(model()));
  std::mt19937_64 rng(7);
  const JointConfig q = test::random_q(rng);
  CHECK((camera_pose(m2, q).position - camera_pose(model(), q).position).norm() < 1e-15);
  CHECK(model_to_json(m2) == model_to_json(model()));
  nlohmann::json bad = model_to_json(model());
  bad["joints"][0]["axis"] = {0.0, 0.0, 2.0};
  CHECK_THROWS_AS(model_from_json(bad), ValidationError);
}

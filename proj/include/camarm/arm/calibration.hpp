#pragma once

#include <vector>

#include "camarm/arm/kinematics.hpp"

namespace camarm {

// Differential wrist: motors 5 and 6 drive pitch by their common mode and roll
// by their difference.
struct WristJoints {
  double pitch;
  double roll;
};
struct WristMotors {
  double m5;
  double m6;
};

WristJoints wrist_motor_to_joint(double m5, double m6);
WristMotors wrist_joint_to_motor(double pitch, double roll);

// Raw incremental-encoder readings minus these offsets give kinematic zero.
struct HomeOffsets {
  Vec6 offsets = Vec6::Zero();

  // Offsets captured with the arm held in the vertical upright pose.
  static HomeOffsets from_upright(const Vec6& raw_upright);
};

struct CalibratedReading {
  JointConfig q;
  std::vector<LimitViolation> violations;  // flagged, never clamped
};

CalibratedReading apply_home_offsets(const RobotModel& model, const Vec6& raw, const HomeOffsets& offsets);

// Inverse of apply_home_offsets: raw encoder vector for a calibrated q.
Vec6 unapply_home_offsets(const JointConfig& q, const HomeOffsets& offsets);

}  // namespace camarm

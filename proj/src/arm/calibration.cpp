#include "camarm/arm/calibration.hpp"

namespace camarm {

WristJoints wrist_motor_to_joint(double m5, double m6) { return {0.5 * (m5 + m6), 0.5 * (m5 - m6)}; }

WristMotors wrist_joint_to_motor(double pitch, double roll) { return {pitch + roll, pitch - roll}; }

HomeOffsets HomeOffsets::from_upright(const Vec6& raw_upright) { return HomeOffsets{raw_upright}; }

CalibratedReading apply_home_offsets(const RobotModel& model, const Vec6& raw, const HomeOffsets& offsets) {
  if (!raw.allFinite() || !offsets.offsets.allFinite()) throw ValidationError("encoder readings and offsets must be finite");
  const Vec6 motor = raw - offsets.offsets;
  JointConfig q(motor);
  const WristJoints w = wrist_motor_to_joint(motor[4], motor[5]);
  q[4] = w.pitch;
  q[5] = w.roll;
  return CalibratedReading{q, check_joint_limits(model, q)};
}

Vec6 unapply_home_offsets(const JointConfig& q, const HomeOffsets& offsets) {
  Vec6 motor = q.q;
  const WristMotors m = wrist_joint_to_motor(q[4], q[5]);
  motor[4] = m.m5;
  motor[5] = m.m6;
  return motor + offsets.offsets;
}

}  // namespace camarm

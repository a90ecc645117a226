#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/arm/kinematics.hpp"

namespace camarm {

struct IkParams {
  double lambda = 0.01;   // damping
  double eta = 0.5;       // step size
  double alpha = 0.6;     // EMA smoothing of the joint command
  double pos_tol = 1e-4;  // m
  double rot_tol = 1e-3;  // rad
  int max_iters = 500;

  void validate() const;
};

IkParams ik_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IkParams& p);

// [target.position - current.position, log(target.R * current.R^-1)]
Vec6 pose_error(const Pose& current, const Pose& target);

// Damped least squares step J^T (J J^T + lambda I)^-1 e at q.
Vec6 ik_step(const RobotModel& model, const JointConfig& q, const Vec6& e, const IkParams& params);

struct IkResult {
  JointConfig q;
  int iters = 0;
  bool converged = false;
  double pos_error = 0.0;  // m, at the returned q
  double rot_error = 0.0;  // rad, at the returned q
};

// Iterates q_ik = q_cmd + eta * dq, q_cmd = alpha * q_ik + (1 - alpha) * q_cmd_prev,
// clamped to joint limits, starting from q0 with fresh EMA state. Never throws
// on non-convergence; `error_trace`, when given, receives the pose-error norm
// before every iteration.
IkResult solve_ik(const RobotModel& model, const JointConfig& q0, const Pose& target, const IkParams& params,
                  std::vector<double>* error_trace = nullptr);

}  // namespace camarm

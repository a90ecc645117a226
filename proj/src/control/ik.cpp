#include "camarm/control/ik.hpp"

#include <cassert>
#include <cmath>

namespace camarm {

void IkParams::validate() const {
  if (!(lambda > 0.0)) throw ValidationError("ik: lambda must be > 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("ik: eta must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("ik: alpha must lie in (0, 1)");
  if (!(pos_tol > 0.0 && rot_tol > 0.0)) throw ValidationError("ik: tolerances must be > 0");
  if (max_iters < 1) throw ValidationError("ik: max_iters must be >= 1");
}

IkParams ik_params_from_json(const nlohmann::json& j) {
  IkParams p;
  p.lambda = j.value("lambda", p.lambda);
  p.eta = j.value("eta", p.eta);
  p.alpha = j.value("alpha", p.alpha);
  p.pos_tol = j.value("pos_tol", p.pos_tol);
  p.rot_tol = j.value("rot_tol", p.rot_tol);
  p.max_iters = j.value("max_iters", p.max_iters);
  p.validate();
  return p;
}

nlohmann::json to_json(const IkParams& p) {
  return {{"lambda", p.lambda}, {"eta", p.eta},         {"alpha", p.alpha},
          {"pos_tol", p.pos_tol}, {"rot_tol", p.rot_tol}, {"max_iters", p.max_iters}};
}

Vec6 pose_error(const Pose& current, const Pose& target) {
  Vec6 e;
  e.head<3>() = target.position - current.position;
  e.tail<3>() = rotation_log(target.orientation * current.orientation.conjugate());
  return e;
}

Vec6 ik_step(const RobotModel& model, const JointConfig& q, const Vec6& e, const IkParams& params) {
  if (!e.allFinite()) throw ValidationError("ik_step: pose error must be finite");
  const Mat6 jac = jacobian(model, q);
  const Mat6 damped = jac * jac.transpose() + params.lambda * Mat6::Identity();
  // SPD for lambda > 0, so Cholesky cannot fail.
  const Eigen::LLT<Mat6> llt(damped);
  assert(llt.info() == Eigen::Success);
  return jac.transpose() * llt.solve(e);
}

IkResult solve_ik(const RobotModel& model, const JointConfig& q0, const Pose& target, const IkParams& params,
                  std::vector<double>* error_trace) {
  params.validate();
  IkResult r;
  JointConfig q_cmd = model.clamp(q0);
  for (int it = 0;; ++it) {
    const Vec6 e = pose_error(camera_pose(model, q_cmd), target);
    r.pos_error = e.head<3>().norm();
    r.rot_error = e.tail<3>().norm();
    r.q = q_cmd;
    r.iters = it;
    if (r.pos_error < params.pos_tol && r.rot_error < params.rot_tol) {
      r.converged = true;
      return r;
    }
    if (it == params.max_iters) return r;
    if (error_trace) error_trace->push_back(e.norm());
    const Vec6 dq = ik_step(model, q_cmd, e, params);
    const Vec6 q_ik = q_cmd.q + params.eta * dq;
    q_cmd = model.clamp(JointConfig(params.alpha * q_ik + (1.0 - params.alpha) * q_cmd.q));
  }
}

}  // namespace camarm

#include "camarm/plan/task_sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace camarm {

ViewPlacement sample_placement(const ViewRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ViewPlacement p;
  p.distance = r.min_distance + unit(rng) * (r.max_distance - r.min_distance);
  p.azimuth = r.min_azimuth + unit(rng) * (r.max_azimuth - r.min_azimuth);
  p.elevation = r.min_elevation + unit(rng) * (r.max_elevation - r.min_elevation);
  return p;
}

Pose view_pose(const Scene& scene, const ViewPlacement& p) {
  const Vec3 eye = view_position(scene, p.distance, p.azimuth, p.elevation);
  return Pose{eye, look_at(eye, scene.target.position)};
}

namespace {

double wrap_into(double a, double lo, double hi) {
  while (a > hi) a -= 2.0 * M_PI;
  while (a < lo) a += 2.0 * M_PI;
  return a;
}

IkParams tight_ik() {
  IkParams p;
  p.pos_tol = 1e-7;
  p.rot_tol = 1e-7;
  p.max_iters = 3000;
  return p;
}

}  // namespace

JointConfig wrist_flip(const RobotModel& model, const JointConfig& q) {
  JointConfig f = q;
  f[3] = wrap_into(q[3] + M_PI, model.lower[3], model.upper[3]);
  f[4] = -q[4];
  f[5] = wrap_into(q[5] + M_PI, model.lower[5], model.upper[5]);
  return f;
}

std::optional<TaskInstance> sample_task(const RobotModel& model, const Scene& scene, std::mt19937_64& rng,
                                        double margin, int posture) {
  const ViewPlacement ps = sample_placement(scene.task.start, rng);
  const ViewPlacement pg = sample_placement(scene.task.goal, rng);
  std::uniform_int_distribution<int> coin(0, 1);
  const int branch = posture < 0 ? coin(rng) : posture;

  const IkParams ik = tight_ik();
  const IkResult s = solve_ik(model, scene.task.rest, view_pose(scene, ps), ik);
  if (!s.converged) return std::nullopt;
  TaskInstance t;
  t.posture = branch;
  t.q_start = branch == 1 ? wrist_flip(model, s.q) : s.q;
  if (!model.within_limits(t.q_start) || in_collision(model, t.q_start, scene, margin)) return std::nullopt;

  const Pose goal = view_pose(scene, pg);
  t.goal_eye = goal.position;
  const IkResult g = solve_ik(model, t.q_start, goal, ik);
  if (!g.converged) return std::nullopt;
  t.q_goal = g.q;
  // The goal must stay on the start's wrist branch (wrist pitch keeps its sign).
  if (t.q_goal[4] * t.q_start[4] <= 0.0) return std::nullopt;
  if (in_collision(model, t.q_goal, scene, margin)) return std::nullopt;
  return t;
}

std::vector<TaskInstance> sample_tasks(const RobotModel& model, const Scene& scene, int n, std::uint64_t seed,
                                       double margin) {
  std::mt19937_64 rng(seed);
  std::vector<TaskInstance> out;
  for (int i = 0; i < n; ++i) {
    std::optional<TaskInstance> t;
    for (int attempt = 0; attempt < 50 && !t; ++attempt) t = sample_task(model, scene, rng, margin, i % 2);
    if (!t) throw std::runtime_error("sample_tasks: no admissible task after 50 draws");
    out.push_back(*t);
  }
  return out;
}

}  // namespace camarm

#pragma once

#include <vector>

#include "camarm/arm/model.hpp"

namespace camarm {

// Piecewise-linear joint-space path. cost is the summed Euclidean segment length (rad).
struct Path {
  std::vector<JointConfig> waypoints;
  double cost = 0.0;

  static double cost_of(const std::vector<JointConfig>& waypoints);
  void recompute_cost() { cost = cost_of(waypoints); }
  bool empty() const { return waypoints.empty(); }
};

// Joint samples at a fixed rate; sample k is at time k / rate.
struct TimedTrajectory {
  double rate = 200.0;
  std::vector<JointConfig> q;

  std::size_t size() const { return q.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) / rate; }
  double duration() const { return q.empty() ? 0.0 : time(q.size() - 1); }
  // Linear interpolation, clamped to the end samples.
  JointConfig at(double t) const;
  // Appends `seconds` worth of copies of the final sample.
  void hold(double seconds);
};

// Constant-speed traversal of each segment, every segment timed by its
// slowest joint at speed_scale * velocity_limit. Samples at k / rate_hz; the
// final sample sits at or just past the end of motion and holds the last
// waypoint. Throws ValidationError unless speed_scale is in (0, 1].
TimedTrajectory time_parameterize(const Path& path, const RobotModel& model, double rate_hz, double speed_scale);

// Quintic minimum-jerk blend 10 s^3 - 15 s^4 + 6 s^5 and its derivatives in s.
double min_jerk(double s);
double min_jerk_ds(double s);

// q(s) = q0 + (q1 - q0) min_jerk(s), s = t / duration, sampled at k / rate
// for k = 0 .. ceil(duration * rate).
TimedTrajectory min_jerk_segment(const JointConfig& q0, const JointConfig& q1, double duration, double rate);

}  // namespace camarm

#include "camarm/plan/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace camarm {

double Path::cost_of(const std::vector<JointConfig>& waypoints) {
  double c = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) c += (waypoints[i].q - waypoints[i - 1].q).norm();
  return c;
}

JointConfig TimedTrajectory::at(double t) const {
  if (q.empty()) throw ValidationError("trajectory: empty");
  const double x = t * rate;
  if (x <= 0.0) return q.front();
  const auto last = static_cast<double>(q.size() - 1);
  if (x >= last) return q.back();
  const auto k = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(k);
  return JointConfig((1.0 - f) * q[k].q + f * q[k + 1].q);
}

void TimedTrajectory::hold(double seconds) {
  if (q.empty()) return;
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  const JointConfig last = q.back();
  q.insert(q.end(), n, last);
}

namespace {

std::size_t sample_count(double duration, double rate) {
  // Tolerate rounding in duration * rate so exact durations land on a sample.
  return static_cast<std::size_t>(std::ceil(duration * rate - 1e-9)) + 1;
}

}  // namespace

TimedTrajectory time_parameterize(const Path& path, const RobotModel& model, double rate_hz, double speed_scale) {
  if (!(speed_scale > 0.0 && speed_scale <= 1.0)) throw ValidationError("time_parameterize: speed_scale must be in (0, 1]");
  if (!(rate_hz > 0.0)) throw ValidationError("time_parameterize: rate must be > 0");
  if (path.waypoints.empty()) throw ValidationError("time_parameterize: empty path");

  const std::size_t nseg = path.waypoints.size() - 1;
  std::vector<double> seg_end(nseg);
  double total = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec6 d = (path.waypoints[i + 1].q - path.waypoints[i].q).cwiseAbs();
    const Vec6 vmax = speed_scale * model.velocity_limits;
    total += d.cwiseQuotient(vmax).maxCoeff();
    seg_end[i] = total;
  }

  TimedTrajectory out;
  out.rate = rate_hz;
  const std::size_t n = sample_count(total, rate_hz);
  out.q.reserve(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = std::min(static_cast<double>(k) / rate_hz, total);
    while (seg + 1 < nseg && t > seg_end[seg]) ++seg;
    if (nseg == 0) {
      out.q.push_back(path.waypoints.front());
      continue;
    }
    const double t0 = seg == 0 ? 0.0 : seg_end[seg - 1];
    const double len = seg_end[seg] - t0;
    const double f = len > 0.0 ? std::clamp((t - t0) / len, 0.0, 1.0) : 1.0;
    out.q.emplace_back((1.0 - f) * path.waypoints[seg].q + f * path.waypoints[seg + 1].q);
  }
  return out;
}

double min_jerk(double s) {
  const double s3 = s * s * s;
  return s3 * (10.0 - 15.0 * s + 6.0 * s * s);
}

double min_jerk_ds(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

TimedTrajectory min_jerk_segment(const JointConfig& q0, const JointConfig& q1, double duration, double rate) {
  if (!(duration > 0.0)) throw ValidationError("min_jerk_segment: duration must be > 0");
  if (!(rate > 0.0)) throw ValidationError("min_jerk_segment: rate must be > 0");
  TimedTrajectory out;
  out.rate = rate;
  const std::size_t n = sample_count(duration, rate);
  out.q.reserve(n);
  const Vec6 d = q1.q - q0.q;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(static_cast<double>(k) / rate / duration, 1.0);
    out.q.emplace_back(q0.q + min_jerk(s) * d);
  }
  return out;
}

}  // namespace camarm

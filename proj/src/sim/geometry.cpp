#include "camarm/sim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace camarm {

double point_box_signed_distance(const Vec3& p, const Box& box) {
  const Vec3 d = (p - box.center).cwiseAbs() - box.half();
  const double outside = d.cwiseMax(0.0).norm();
  const double inside = std::min(d.maxCoeff(), 0.0);
  return outside + inside;
}

namespace {

// Squared distance from the segment point a + t (b - a) to the box,
// minimized exactly over t in [0, 1]. Between consecutive slab crossings each
// axis is either clamped or free, so the squared distance is a quadratic in t.
double min_outside_sq(const Vec3& a, const Vec3& d, const Box& box, double& t_best) {
  const Vec3 lo = box.center - box.half();
  const Vec3 hi = box.center + box.half();
  std::array<double, 8> cuts{0.0, 1.0};
  std::size_t n_cuts = 2;
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) continue;
    for (double plane : {lo[i], hi[i]}) {
      const double t = (plane - a[i]) / d[i];
      if (t > 0.0 && t < 1.0) cuts[n_cuts++] = t;
    }
  }
  std::sort(cuts.begin(), cuts.begin() + n_cuts);
  double best = std::numeric_limits<double>::infinity();
  const auto eval = [&](double t) {
    const Vec3 p = a + t * d;
    const Vec3 q = p.cwiseMax(lo).cwiseMin(hi);
    const double s = (p - q).squaredNorm();
    if (s < best) {
      best = s;
      t_best = t;
    }
  };
  for (std::size_t k = 0; k + 1 < n_cuts; ++k) {
    const double t0 = cuts[k];
    const double t1 = cuts[k + 1];
    eval(t0);
    eval(t1);
    if (t1 <= t0) continue;
    const double tm = 0.5 * (t0 + t1);
    const Vec3 pm = a + tm * d;
    // Quadratic coefficients of sum over outside axes of (a_i + t d_i - bound_i)^2.
    double qa = 0.0;
    double qb = 0.0;
    for (int i = 0; i < 3; ++i) {
      double bound;
      if (pm[i] < lo[i]) {
        bound = lo[i];
      } else if (pm[i] > hi[i]) {
        bound = hi[i];
      } else {
        continue;
      }
      const double off = a[i] - bound;
      qa += d[i] * d[i];
      qb += 2.0 * off * d[i];
    }
    if (qa > 0.0) {
      const double t = std::clamp(-qb / (2.0 * qa), t0, t1);
      eval(t);
    }
  }
  return best;
}

// Minimum over t in [0, 1] of max_i(|a_i + t d_i - c_i| - h_i): convex and
// piecewise linear, so the minimum sits at an endpoint, a kink, or a crossing
// of two pieces.
double min_inside_depth(const Vec3& a, const Vec3& d, const Box& box) {
  const Vec3 c = box.center;
  const Vec3 h = box.half();
  std::array<double, 20> cand{0.0, 1.0};
  std::size_t n = 2;
  for (int i = 0; i < 3; ++i) {
    if (d[i] != 0.0) cand[n++] = (c[i] - a[i]) / d[i];
  }
  // Piece i with sign s: s (a_i - c_i) + s d_i t - h_i.
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      for (double si : {-1.0, 1.0}) {
        for (double sj : {-1.0, 1.0}) {
          const double slope = si * d[i] - sj * d[j];
          if (slope == 0.0) continue;
          const double off = (sj * (a[j] - c[j]) - h[j]) - (si * (a[i] - c[i]) - h[i]);
          cand[n++] = off / slope;
        }
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = cand[k];
    if (!(t >= 0.0 && t <= 1.0)) continue;
    const Vec3 p = a + t * d;
    best = std::min(best, ((p - c).cwiseAbs() - h).maxCoeff());
  }
  return best;
}

}  // namespace

double capsule_box_distance(const WorldCapsule& c, const Box& box) {
  const Vec3 d = c.b - c.a;
  double t_best = 0.0;
  const double outside_sq = min_outside_sq(c.a, d, box, t_best);
  if (outside_sq > 0.0) return std::sqrt(outside_sq) - c.radius;
  return min_inside_depth(c.a, d, box) - c.radius;
}

double capsule_floor_distance(const WorldCapsule& c) { return std::min(c.a.z(), c.b.z()) - c.radius; }

std::vector<WorldCapsule> link_capsules(const RobotModel& model, const JointConfig& q) {
  const FkResult fk = forward_kinematics(model, q);
  std::vector<WorldCapsule> out;
  for (std::size_t l = 0; l < model.links.size() && l < fk.link_poses.size(); ++l) {
    const Pose& pose = fk.link_poses[l];
    for (const Capsule& cap : model.links[l].capsules) {
      out.push_back(WorldCapsule{pose.apply(cap.a), pose.apply(cap.b), cap.radius, static_cast<int>(l),
                                 model.links[l].floor_exempt});
    }
  }
  return out;
}

}  // namespace camarm

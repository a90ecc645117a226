#include "camarm/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "camarm/plan/task_sampler.hpp"

namespace camarm {

RepeatabilityResult repeatability(const std::vector<std::vector<Vec3>>& endpoints) {
  const std::size_t K = endpoints.size();
  if (K < 2) throw ValidationError("repeatability: need K >= 2 runs");
  const std::size_t W = endpoints[0].size();
  for (const auto& run : endpoints)
    if (run.size() != W) throw ValidationError("repeatability: runs have different waypoint counts");
  RepeatabilityResult r;
  for (std::size_t w = 0; w < W; ++w) {
    const Vec3& x0 = endpoints[0][w];
    Vec3 shift = Vec3::Zero();
    for (std::size_t k = 0; k < K; ++k) shift += endpoints[k][w] - x0;
    const Vec3 centroid = x0 + shift / static_cast<double>(K);
    double sum = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double d = (endpoints[k][w] - centroid).norm();
      sum += d;
      mx = std::max(mx, d);
    }
    r.e_rep.push_back(sum / static_cast<double>(K));
    r.max_dev.push_back(mx);
  }
  return r;
}

TrackingResult tracking_rmse(const std::vector<double>& ref_t, const std::vector<Vec3>& ref_x,
                             const std::vector<double>& exec_t, const std::vector<Vec3>& exec_x) {
  if (ref_t.size() != ref_x.size() || exec_t.size() != exec_x.size() || ref_t.empty() || exec_t.empty())
    throw ValidationError("tracking_rmse: empty or mismatched paths");
  TrackingResult r;
  double sq = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < ref_t.size(); ++i) {
    const double t = ref_t[i];
    if (t < exec_t.front() || t > exec_t.back()) continue;
    while (j + 1 < exec_t.size() && exec_t[j + 1] < t) ++j;
    Vec3 x = exec_x[j];
    if (j + 1 < exec_t.size() && exec_t[j + 1] > exec_t[j]) {
      const double a = std::clamp((t - exec_t[j]) / (exec_t[j + 1] - exec_t[j]), 0.0, 1.0);
      x = (1.0 - a) * exec_x[j] + a * exec_x[j + 1];
    }
    const double e = (x - ref_x[i]).norm();
    sq += e * e;
    r.max = std::max(r.max, e);
    ++r.samples;
  }
  if (r.samples == 0) throw ValidationError("tracking_rmse: time ranges do not overlap");
  r.rmse = std::sqrt(sq / r.samples);
  return r;
}

nlohmann::json to_json(const FeatureStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

FeatureStats feature_stats_from_json(const nlohmann::json& j) {
  FeatureStats s;
  j.at("mean").get_to(s.mean);
  j.at("std").get_to(s.std);
  return s;
}

FeatureStats svis_reference_stats(const Scene& scene, int n, std::uint64_t seed, double std_floor) {
  if (n < 2) throw ValidationError("svis_reference_stats: need n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, kFeatureDim> sum{}, sq{};
  for (int i = 0; i < n; ++i) {
    const ViewPlacement a = sample_placement(scene.task.start, rng);
    const ViewPlacement b = sample_placement(scene.task.goal, rng);
    const double s = unit(rng);
    const ViewPlacement p{a.distance + s * (b.distance - a.distance), a.azimuth + s * (b.azimuth - a.azimuth),
                          a.elevation + s * (b.elevation - a.elevation)};
    const VisualFeature f = render_features_at(scene, view_pose(scene, p), scene.camera);
    for (int c = 0; c < kFeatureDim; ++c) {
      sum[c] += f[c];
      sq[c] += f[c] * f[c];
    }
  }
  FeatureStats st;
  for (int c = 0; c < kFeatureDim; ++c) {
    st.mean[c] = sum[c] / n;
    st.std[c] = std::max(std::sqrt(std::max(0.0, sq[c] / n - st.mean[c] * st.mean[c])), std_floor);
  }
  return st;
}

double visual_alignment(const VisualFeature& a, const VisualFeature& b, const FeatureStats& stats) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int c = 0; c < kFeatureDim; ++c) {
    const double x = (a[c] - stats.mean[c]) / stats.std[c];
    const double y = (b[c] - stats.mean[c]) / stats.std[c];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  if (aa == 0.0 || bb == 0.0) throw ValidationError("visual_alignment: zero standardized feature");
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

bool trial_success(double s_vis, bool collided, double threshold) { return !collided && s_vis > threshold; }

double cartesian_jerk(const std::vector<Vec3>& x, double dt) {
  if (x.size() < 4) throw ValidationError("cartesian_jerk: need at least 4 samples");
  if (!(dt > 0.0)) throw ValidationError("cartesian_jerk: dt must be > 0");
  double sum = 0.0;
  for (std::size_t k = 3; k < x.size(); ++k) sum += (x[k] - 3.0 * x[k - 1] + 3.0 * x[k - 2] - x[k - 3]).norm();
  return sum / static_cast<double>(x.size() - 3) / (dt * dt * dt);
}

double cartesian_jerk(const std::vector<JointConfig>& joints, const RobotModel& model, double dt) {
  std::vector<Vec3> x;
  x.reserve(joints.size());
  for (const auto& q : joints) x.push_back(camera_pose(model, q).position);
  return cartesian_jerk(x, dt);
}

double framing_error(const VisualFeature& f, const CameraIntrinsics& intr) {
  const double hw = 0.5 * intr.width, hh = 0.5 * intr.height;
  if (!f.target_visible()) return std::hypot(hw, hh);
  return std::hypot(f.target_u() * hw, f.target_v() * hh);
}

double screen_retention(const std::vector<VisualFeature>& frames) {
  if (frames.empty()) return 0.0;
  std::size_t in = 0;
  for (const auto& f : frames)
    if (f.target_visible() && std::abs(f.target_u()) <= 0.5 && std::abs(f.target_v()) <= 0.5) ++in;
  return static_cast<double>(in) / static_cast<double>(frames.size());
}

}  // namespace camarm

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/sim/camera.hpp"

namespace camarm {

struct RepeatabilityResult {
  std::vector<double> e_rep;    // per waypoint, m
  std::vector<double> max_dev;  // per waypoint, m
};

// endpoints[k][w]: end-effector position of run k at waypoint w. The centroid
// is taken as x_0 + mean_k(x_k - x_0), so identical runs give exactly 0.
// Throws for K < 2 or ragged input.
RepeatabilityResult repeatability(const std::vector<std::vector<Vec3>>& endpoints);

struct TrackingResult {
  double rmse = 0.0;  // m
  double max = 0.0;   // m
  int samples = 0;
};

// Executed path linearly interpolated onto the reference timestamps that fall
// inside the executed time range. Throws when the ranges do not overlap.
TrackingResult tracking_rmse(const std::vector<double>& ref_t, const std::vector<Vec3>& ref_x,
                             const std::vector<double>& exec_t, const std::vector<Vec3>& exec_x);

// Per-slot standardization used by visual_alignment.
struct FeatureStats {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> std{};
};
nlohmann::json to_json(const FeatureStats& s);
FeatureStats feature_stats_from_json(const nlohmann::json& j);

// Reference frames for S_vis: n look-at cameras whose placements interpolate
// between a random start placement and a random goal placement of the scene's
// task; std floored at `std_floor`.
FeatureStats svis_reference_stats(const Scene& scene, int n = 2000, std::uint64_t seed = 0, double std_floor = 0.1);

// Cosine of the standardized features, in [-1, 1]. Throws if either
// standardized vector is zero.
double visual_alignment(const VisualFeature& a, const VisualFeature& b, const FeatureStats& stats);

// Strict: S_vis > threshold and no collision.
bool trial_success(double s_vis, bool collided, double threshold = 0.85);

// Mean norm of the third backward difference of camera positions over
// k = 3..N-1. Throws for fewer than 4 samples or dt <= 0.
double cartesian_jerk(const std::vector<JointConfig>& joints, const RobotModel& model, double dt);
double cartesian_jerk(const std::vector<Vec3>& positions, double dt);

// Pixel distance of the target centroid from the image center; the half
// diagonal when the target is not visible.
double framing_error(const VisualFeature& f, const CameraIntrinsics& intr);

// Fraction of frames with the target visible and |u|, |v| <= 0.5. 0 for an
// empty stream.
double screen_retention(const std::vector<VisualFeature>& frames);

}  // namespace camarm

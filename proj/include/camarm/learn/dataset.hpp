#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camarm/sim/camera.hpp"
#include "camarm/sim/scene.hpp"

namespace camarm {

enum class Provenance { Teleop, Scripted, Policy };
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// One recorded demonstration: 200 Hz joint stream, 30 Hz feature stream, and
// the goal (the final rendered feature).
struct Episode {
  std::string id;
  Scene scene;
  Provenance provenance = Provenance::Scripted;
  bool obstacle = false;
  std::string style;  // free-form tag, e.g. the scripted style
  double joint_rate = 200.0;
  double feature_rate = 30.0;
  std::vector<double> joint_time;
  std::vector<JointConfig> joints;
  std::vector<double> feature_time;
  std::vector<VisualFeature> features;
  VisualFeature goal;

  double duration() const;
  void validate() const;
};

// S observations at the policy rate, the goal, and the next H joint targets.
struct Clip {
  std::vector<VisualFeature> obs_features;
  std::vector<JointConfig> obs_joints;
  VisualFeature goal;
  std::vector<JointConfig> future;
  std::string episode_id;
  int offset = 0;  // first observation index on the resampled grid
};

// Both streams resampled onto t_j = t0 + j / rate by nearest timestamp (ties
// take the earlier sample), j = 0 .. floor(duration * rate).
struct ResampledEpisode {
  std::vector<VisualFeature> features;
  std::vector<JointConfig> joints;
};
ResampledEpisode resample(const Episode& e, double rate);

// count = floor((T - S - H) / stride) + 1 clips for T resampled steps; empty
// when T < S + H.
std::vector<Clip> slice_clips(const Episode& e, int history, int horizon, int stride, double policy_rate);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Episode-level partition into index lists. val and test each receive
// max(1, round(n * ratio)) episodes when their ratio is positive; train keeps
// the rest. Throws when n is smaller than the number of non-empty splits.
struct EpisodeSplit {
  std::vector<int> train, val, test;
};
EpisodeSplit split_episodes(int n, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace camarm

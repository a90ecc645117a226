#include "camarm/learn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace camarm {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Teleop: return "teleop";
    case Provenance::Scripted: return "scripted";
    case Provenance::Policy: return "policy";
  }
  return "scripted";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "teleop") return Provenance::Teleop;
  if (s == "scripted") return Provenance::Scripted;
  if (s == "policy") return Provenance::Policy;
  throw ValidationError("unknown provenance '" + s + "'");
}

double Episode::duration() const { return joint_time.empty() ? 0.0 : joint_time.back() - joint_time.front(); }

void Episode::validate() const {
  if (joints.empty() || features.empty()) throw ValidationError("episode '" + id + "': empty stream");
  if (joints.size() != joint_time.size() || features.size() != feature_time.size())
    throw ValidationError("episode '" + id + "': stream/time length mismatch");
  for (std::size_t i = 1; i < joint_time.size(); ++i)
    if (joint_time[i] < joint_time[i - 1]) throw ValidationError("episode '" + id + "': joint time decreases");
  for (std::size_t i = 1; i < feature_time.size(); ++i)
    if (feature_time[i] < feature_time[i - 1]) throw ValidationError("episode '" + id + "': feature time decreases");
}

namespace {

std::size_t nearest(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const auto hi = static_cast<std::size_t>(it - times.begin());
  return (times[hi] - t < t - times[hi - 1]) ? hi : hi - 1;
}

}  // namespace

ResampledEpisode resample(const Episode& e, double rate) {
  if (!(rate > 0.0)) throw ValidationError("resample: rate must be > 0");
  e.validate();
  ResampledEpisode r;
  const double t0 = e.joint_time.front();
  const auto steps = static_cast<std::size_t>(std::floor(e.duration() * rate + 1e-9)) + 1;
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = t0 + static_cast<double>(j) / rate;
    r.joints.push_back(e.joints[nearest(e.joint_time, t)]);
    r.features.push_back(e.features[nearest(e.feature_time, t)]);
  }
  return r;
}

std::vector<Clip> slice_clips(const Episode& e, int history, int horizon, int stride, double policy_rate) {
  if (history < 1 || horizon < 1 || stride < 1) throw ValidationError("slice_clips: S, H, stride must be >= 1");
  const ResampledEpisode r = resample(e, policy_rate);
  const int T = static_cast<int>(r.joints.size());
  std::vector<Clip> clips;
  if (T < history + horizon) return clips;
  const int count = (T - history - horizon) / stride + 1;
  for (int i = 0; i < count; ++i) {
    const int o = i * stride;
    Clip c;
    c.obs_features.assign(r.features.begin() + o, r.features.begin() + o + history);
    c.obs_joints.assign(r.joints.begin() + o, r.joints.begin() + o + history);
    c.future.assign(r.joints.begin() + o + history, r.joints.begin() + o + history + horizon);
    c.goal = e.goal;
    c.episode_id = e.id;
    c.offset = o;
    clips.push_back(std::move(c));
  }
  return clips;
}

EpisodeSplit split_episodes(int n, const SplitRatios& ratios, std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 || std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("split_episodes: ratios must be non-negative and sum to 1");
  const int splits = (ratios.train > 0.0) + (ratios.val > 0.0) + (ratios.test > 0.0);
  if (n < splits) throw ValidationError("split_episodes: fewer episodes than splits");

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng() % static_cast<std::uint64_t>(i + 1)]);

  auto quota = [n](double r) { return r > 0.0 ? std::max(1, static_cast<int>(std::lround(n * r))) : 0; };
  const int nv = quota(ratios.val);
  const int nt = quota(ratios.test);
  if (ratios.train > 0.0 && n - nv - nt < 1) throw ValidationError("split_episodes: no episodes left for train");

  EpisodeSplit s;
  for (int i = 0; i < n; ++i) {
    const int idx = order[static_cast<std::size_t>(i)];
    if (i < nv) s.val.push_back(idx);
    else if (i < nv + nt) s.test.push_back(idx);
    else s.train.push_back(idx);
  }
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

}  // namespace camarm

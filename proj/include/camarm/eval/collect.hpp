#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/eval/rollout.hpp"
#include "camarm/learn/dataset.hpp"
#include "camarm/plan/scripted_expert.hpp"

namespace camarm {

struct CollectConfig {
  int episodes = 40;
  double obstacle_fraction = 0.5;  // rounded; balanced 40 gives 20/20
  double noise_sigma = 0.01;       // rad, expert jitter
  double task_margin = 0.075;
  int max_attempts = 20;           // per episode
  std::uint64_t seed = 0;
  ExpertParams expert;
  RolloutConfig rollout;

  void validate() const;
};

CollectConfig collect_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CollectConfig& c);

// Measured streams of an executed trial as an episode; the goal is the last
// rendered frame.
Episode episode_from_record(const TrialRecord& r, const Scene& scene, const std::string& id, Provenance p,
                            const std::string& style);

// Scripted demonstrations executed through the filter and servo. Obstacle
// episodes come first in index order (0 .. n_obs-1) alternating ARC_LEFT and
// ARC_RIGHT, free episodes use DIRECT; postures alternate per scene. Failed
// generations and colliding executions are redrawn. Throws std::runtime_error
// when an episode exhausts max_attempts.
std::vector<Episode> collect_scripted(const RobotModel& model, const Scene& free_scene, const Scene& obstacle_scene,
                                      const CollectConfig& cfg);

}  // namespace camarm

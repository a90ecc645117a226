#include "camarm/eval/collect.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "camarm/plan/task_sampler.hpp"

namespace camarm {

void CollectConfig::validate() const {
  if (episodes < 1) throw ValidationError("collect: episodes must be >= 1");
  if (!(obstacle_fraction >= 0.0 && obstacle_fraction <= 1.0)) throw ValidationError("collect: obstacle_fraction in [0, 1]");
  if (!(noise_sigma >= 0.0) || !(task_margin >= 0.0)) throw ValidationError("collect: noise_sigma and task_margin must be >= 0");
  if (max_attempts < 1) throw ValidationError("collect: max_attempts must be >= 1");
  expert.validate();
  rollout.validate();
}

CollectConfig collect_config_from_json(const nlohmann::json& j) {
  CollectConfig c;
  c.episodes = j.value("episodes", c.episodes);
  c.obstacle_fraction = j.value("obstacle_fraction", c.obstacle_fraction);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.task_margin = j.value("task_margin", c.task_margin);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.seed = j.value("seed", c.seed);
  if (j.contains("expert")) c.expert = expert_params_from_json(j.at("expert"));
  if (j.contains("rollout")) c.rollout = rollout_config_from_json(j.at("rollout"));
  c.validate();
  return c;
}

nlohmann::json to_json(const CollectConfig& c) {
  return {{"episodes", c.episodes},       {"obstacle_fraction", c.obstacle_fraction},
          {"noise_sigma", c.noise_sigma}, {"task_margin", c.task_margin},
          {"max_attempts", c.max_attempts}, {"seed", c.seed},
          {"expert", to_json(c.expert)},  {"rollout", to_json(c.rollout)}};
}

Episode episode_from_record(const TrialRecord& r, const Scene& scene, const std::string& id, Provenance p,
                            const std::string& style) {
  Episode e;
  e.id = id;
  e.scene = scene;
  e.provenance = p;
  e.obstacle = scene.obstacle_present;
  e.style = style;
  e.joint_rate = r.rate;
  e.feature_rate = r.feature_rate;
  e.joints = r.joints;
  for (std::size_t k = 0; k < r.joints.size(); ++k) e.joint_time.push_back(static_cast<double>(k) / r.rate);
  e.feature_time = r.feature_time;
  e.features = r.features;
  if (r.features.empty()) throw ValidationError("episode_from_record: no frames");
  e.goal = r.features.back();
  e.validate();
  return e;
}

std::vector<Episode> collect_scripted(const RobotModel& model, const Scene& free_scene, const Scene& obstacle_scene,
                                      const CollectConfig& cfg) {
  cfg.validate();
  const int n_obs = static_cast<int>(std::lround(cfg.episodes * cfg.obstacle_fraction));
  std::vector<Episode> out;
  for (int i = 0; i < cfg.episodes; ++i) {
    const bool obstacle = i < n_obs;
    const int j = obstacle ? i : i - n_obs;  // index within the scene
    const Scene& scene = obstacle ? obstacle_scene : free_scene;
    const Style style = obstacle ? (j % 2 == 0 ? Style::ArcLeft : Style::ArcRight) : Style::Direct;
    const int posture = (j / 2) % 2;
    std::mt19937_64 rng(cfg.seed * 7919ULL + static_cast<std::uint64_t>(i));
    bool done = false;
    for (int a = 0; a < cfg.max_attempts && !done; ++a) {
      const std::optional<TaskInstance> inst = sample_task(model, scene, rng, cfg.task_margin, posture);
      if (!inst) continue;
      ExpertParams p = cfg.expert;
      p.noise_sigma = cfg.noise_sigma;
      p.seed = rng();
      const ExpertTrajectory traj = scripted_push_in(model, scene, inst->q_start, inst->goal_eye, style, p);
      if (!traj.ok) continue;
      RolloutRunner runner(model, scene, cfg.rollout, rng());
      const TrialRecord rec = runner.run_reference(traj.reference, VisualFeature{});
      if (rec.collided || rec.passive) continue;
      char id[32];
      std::snprintf(id, sizeof id, "ep%04d", i);
      out.push_back(episode_from_record(rec, scene, id, Provenance::Scripted, to_string(style)));
      done = true;
    }
    if (!done) throw std::runtime_error("collect: episode " + std::to_string(i) + " exhausted its attempts");
  }
  return out;
}

}  // namespace camarm

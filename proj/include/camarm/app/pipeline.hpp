#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camarm/eval/benchmark.hpp"
#include "camarm/eval/collect.hpp"
#include "camarm/learn/dataset.hpp"
#include "camarm/learn/train.hpp"

namespace camarm {

inline constexpr const char* kRunSchema = "camarm.run/1";

// Everything one pipeline run depends on. File references in the JSON are
// resolved against the config file's directory.
struct RunConfig {
  std::filesystem::path source;  // config file, empty for defaults
  RobotModel model;
  Scene scene_free, scene_obstacle;
  std::uint64_t seed = 0;
  CollectConfig collect;
  SplitRatios split;
  PolicyConfig policy;
  TrainConfig train;
  BenchmarkConfig benchmark;
  std::vector<std::string> ablations;  // trained and evaluated by bench next to the full policy
  double expert_noise = 0.01;          // noisy expert reference in bench
  nlohmann::json raw;                  // resolved JSON (files inlined), hashed

  // Seed fans out to every stage.
  void set_seed(std::uint64_t s);
  std::string hash() const;
  // {schema, config_hash, seed}
  nlohmann::json stamp(const std::string& schema) const;
  const Scene& scene(Task t) const { return t == Task::PushInFree ? scene_free : scene_obstacle; }
};

// configs/run.json beside the sources when `path` is empty.
RunConfig load_run_config(const std::filesystem::path& path = {});
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// collect: episode files plus manifest.json under out/. n < 3 puts every
// episode in train. Returns the manifest path.
std::filesystem::path cmd_collect(const RunConfig& rc, const std::filesystem::path& out);

struct TrainOutput {
  std::filesystem::path checkpoint;
  TrainResult result;
};
// train: reads the manifest's train/val episodes; writes <name>.camckpt
// and <name>_log.json under out/.
TrainOutput cmd_train(const RunConfig& rc, const std::filesystem::path& manifest, const std::filesystem::path& out,
                      Ablation ablation = Ablation::None, const std::string& name = "checkpoint");

// eval: one method ("expert", "expert_noisy", "planner" or a checkpoint path)
// on the given tasks. Writes report.json, report.txt, paths.svg. Returns the report.
nlohmann::json cmd_eval(const RunConfig& rc, const std::string& method, const std::vector<Task>& tasks,
                        const std::filesystem::path& out);

// plan: RRT* + shortcut on task draw `index`; writes plan.json. True on success.
bool cmd_plan(const RunConfig& rc, Task task, int index, const std::filesystem::path& out);

struct ReplayResult {
  double rmse = 0.0;  // m, camera position vs the recording
  double max = 0.0;
  std::size_t samples = 0;
};
// replay: streams a recorded joint trajectory (episode file or trial JSON)
// back through the filter and servo; writes replay.json.
ReplayResult cmd_replay(const RunConfig& rc, const std::filesystem::path& recording, const std::filesystem::path& out);

// bench: collect -> train (full + ablations) -> evaluate expert, noisy
// expert, planner and every policy on both tasks; writes report files and
// returns the report. `lowlevel` adds the repeatability/tracking suites.
nlohmann::json cmd_bench(const RunConfig& rc, const std::filesystem::path& out, bool lowlevel = false);

}  // namespace camarm

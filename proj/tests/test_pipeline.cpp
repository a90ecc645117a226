#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "camarm/app/pipeline.hpp"
#include "camarm/learn/checkpoint.hpp"
#include "camarm/learn/episode_io.hpp"

using namespace camarm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("camarm_test_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void check_stamp(const json& j, const RunConfig& rc, bool with_schema = true) {
  if (with_schema) CHECK(j.contains("schema"));
  CHECK(j.at("config_hash") == rc.hash());
  CHECK(j.at("seed") == rc.seed);
}

RunConfig small_config(std::uint64_t seed) {
  RunConfig rc = load_run_config();
  rc.set_seed(seed);
  return rc;
}

}  // namespace

TEST_CASE("collect: balanced 20/20, 32/4/4 split, stamped, byte-identical per seed") {
  const RunConfig rc = small_config(3);
  const fs::path a = temp_dir("collect_a"), b = temp_dir("collect_b");
  const fs::path ma = cmd_collect(rc, a);
  const Manifest m = read_manifest(ma);
  REQUIRE(m.episodes.size() == 40);
  int obstacle = 0, train = 0, val = 0, test = 0;
  for (const auto& e : m.episodes) {
    obstacle += e.obstacle ? 1 : 0;
    train += e.split == "train";
    val += e.split == "val";
    test += e.split == "test";
  }
  CHECK(obstacle == 20);
  CHECK(train == 32);
  CHECK(val == 4);
  CHECK(test == 4);
  check_stamp(read_json(ma), rc);
  CHECK(read_json(ma).at("schema") == kManifestSchema);
  const json h = read_episode_header(a / m.episodes[0].file);
  check_stamp(h, rc);
  CHECK(h.at("schema") == kEpisodeSchema);

  cmd_collect(rc, b);
  CHECK(slurp(ma) == slurp(b / "manifest.json"));
  for (const auto& e : m.episodes) CHECK(slurp(a / e.file) == slurp(b / e.file));

  const fs::path c = temp_dir("collect_c");
  cmd_collect(small_config(4), c);
  CHECK(slurp(a / m.episodes[0].file) != slurp(c / m.episodes[0].file));
}

TEST_CASE("collect n=1 puts the episode in train; replay reproduces it within 2 cm") {
  RunConfig rc = small_config(0);
  rc.collect.episodes = 1;
  const fs::path d = temp_dir("collect_one");
  const Manifest m = read_manifest(cmd_collect(rc, d));
  REQUIRE(m.episodes.size() == 1);
  CHECK(m.episodes[0].split == "train");

  const ReplayResult r = cmd_replay(rc, d / m.episodes[0].file, d / "replay");
  CHECK(r.samples > 100);
  CHECK(r.rmse < 0.02);
  check_stamp(read_json(d / "replay" / "replay.json"), rc);
}

TEST_CASE("eval of the noiseless expert succeeds on every trial of both tasks") {
  const RunConfig rc = small_config(0);
  const fs::path d = temp_dir("eval_expert");
  const json rep = cmd_eval(rc, "expert", {Task::PushInFree, Task::PushInObstacle}, d);
  check_stamp(rep.at("stamp"), rc);
  const json& rows = rep.at("metrics").at("rows");
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) CHECK(row.at("aggregate").at("successes") == 10);
  CHECK(fs::exists(d / "report.json"));
  CHECK(fs::exists(d / "report.txt"));
  CHECK(read_json(d / "report.json") == rep);
  // Same seed, same metrics.
  const json again = cmd_eval(rc, "expert", {Task::PushInFree}, temp_dir("eval_expert2"));
  CHECK(again.at("metrics").at("rows")[0] == rows[0]);
}

TEST_CASE("plan writes a stamped, collision-checked path") {
  const RunConfig rc = small_config(0);
  const fs::path d = temp_dir("plan");
  REQUIRE(cmd_plan(rc, Task::PushInObstacle, 0, d));
  const json j = read_json(d / "plan.json");
  check_stamp(j, rc);
  CHECK(j.at("waypoints").size() >= 2);
  CHECK(j.at("clearance_ok") == true);
}

TEST_CASE("train on a short budget writes a stamped checkpoint that eval can load") {
  RunConfig rc = small_config(1);
  rc.collect.episodes = 6;
  rc.train.epochs = 2;
  rc.policy.d_model = 16;
  rc.policy.heads = 2;
  rc.benchmark.n_trials = 1;
  const fs::path d = temp_dir("train");
  const fs::path manifest = cmd_collect(rc, d);
  const TrainOutput t = cmd_train(rc, manifest, d);
  CHECK_FALSE(t.result.diverged);
  CHECK(t.result.history.size() == 2);
  const Checkpoint c = read_checkpoint(t.checkpoint);
  check_stamp(c.stamp, rc, false);  // the schema lives in the file header
  CHECK(c.stamp.contains("model_hash"));
  check_stamp(read_json(d / "checkpoint_log.json"), rc);
  const json rep = cmd_eval(rc, t.checkpoint.string(), {Task::PushInFree}, d / "eval");
  CHECK(rep.at("metrics").at("rows").size() == 1);
}

TEST_CASE("CLI: collect and eval run, bad arguments exit with status 2") {
  const fs::path d = temp_dir("cli");
  const std::string cli = CAMARM_CLI;
  const std::string q = " > " + (d / "log.txt").string() + " 2>&1";
  CHECK(std::system((cli + " collect -n 2 --seed 5 --out " + (d / "c").string() + q).c_str()) == 0);
  const Manifest m = read_manifest(d / "c" / "manifest.json");
  CHECK(m.episodes.size() == 2);
  CHECK(m.stamp.at("seed") == 5);
  CHECK(std::system((cli + " eval --method expert --task free --trials 2 --out " + (d / "e").string() + q).c_str()) == 0);
  CHECK(fs::exists(d / "e" / "report.json"));
  const int bad = std::system((cli + " eval --method expert --task sideways --out " + (d / "x").string() + q).c_str());
  CHECK(WEXITSTATUS(bad) == 2);
}

// camarm: batch entry points and the teleoperation service.
#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "camarm/app/pipeline.hpp"
#include "camarm/service/server.hpp"

using namespace camarm;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

std::vector<Task> parse_tasks(const std::string& s) {
  if (s == "both") return {Task::PushInFree, Task::PushInObstacle};
  return {task_from_string(s)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camarm: desk-scale camera arm toolkit"};
  app.require_subcommand(1);
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";

  auto common = [&](CLI::App* c) {
    c->add_option("--config", config, "run config (default configs/run.json)");
    c->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; seed_set = true; }, "seed");
    c->add_option("--out", out, "output directory");
  };

  auto* collect = app.add_subcommand("collect", "generate scripted demonstrations");
  common(collect);
  int episodes = -1;
  double noise = -1.0;
  std::string obstacle = "balanced";
  collect->add_option("-n,--episodes", episodes, "episode count");
  collect->add_option("--noise", noise, "expert jitter sigma, rad");
  collect->add_option("--obstacle", obstacle, "balanced | all | none")->check(CLI::IsMember({"balanced", "all", "none"}));

  auto* train = app.add_subcommand("train", "train a policy from a manifest");
  common(train);
  std::string manifest, ablation = "none";
  train->add_option("--manifest", manifest, "manifest.json from collect")->required();
  train->add_option("--ablation", ablation, "none | incremental_action | rgb_only | no_proprio");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or a baseline");
  common(eval);
  std::string method = "expert", task = "both";
  int trials = -1;
  eval->add_option("--method", method, "expert | expert_noisy | planner | <checkpoint path>");
  eval->add_option("--task", task, "free | obstacle | both");
  eval->add_option("--trials", trials, "trials per task");

  auto* plan = app.add_subcommand("plan", "plan one push-in task with RRT*");
  common(plan);
  std::string plan_task = "obstacle";
  int index = 0;
  plan->add_option("--task", plan_task, "free | obstacle");
  plan->add_option("--index", index, "task draw index");

  auto* replay = app.add_subcommand("replay", "replay an episode or trial through the servo");
  common(replay);
  std::string recording;
  replay->add_option("recording", recording, "episode (.camepi) or trial (.json)")->required();

  auto* serve = app.add_subcommand("serve", "run the WebSocket teleoperation service");
  common(serve);
  int port = 8765;
  std::string model_path, scene_name = "free", bind = "127.0.0.1";
  double rate = 30.0;
  bool virtual_time = false;
  serve->add_option("--port", port, "TCP port (0 = any)");
  serve->add_option("--bind", bind, "bind address");
  serve->add_option("--model", model_path, "robot model JSON (default from the run config)");
  serve->add_option("--scene", scene_name, "free | obstacle | <scene JSON>");
  serve->add_option("--rate", rate, "state broadcast rate, Hz");
  serve->add_flag("--virtual-time", virtual_time, "advance the sim only on 'advance' messages");

  auto* bench = app.add_subcommand("bench", "collect, train, evaluate everything");
  common(bench);
  bool lowlevel = false;
  bench->add_flag("--lowlevel", lowlevel, "add repeatability and tracking suites");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = load_run_config(config);
    if (seed_set) rc.set_seed(seed);
    const fs::path outp = out;

    if (*collect) {
      if (episodes > 0) rc.collect.episodes = episodes;
      if (noise >= 0.0) rc.collect.noise_sigma = noise;
      rc.collect.obstacle_fraction = obstacle == "all" ? 1.0 : obstacle == "none" ? 0.0 : 0.5;
      rc.raw["collect"] = to_json(rc.collect);
      std::printf("%s\n", cmd_collect(rc, outp).string().c_str());
      return 0;
    }
    if (*train) {
      const TrainOutput o = cmd_train(rc, manifest, outp, ablation_from_string(ablation));
      std::printf("%s\n", o.checkpoint.string().c_str());
      return o.result.diverged ? 3 : 0;
    }
    if (*eval) {
      if (trials > 0) rc.benchmark.n_trials = trials;
      rc.raw["benchmark"] = to_json(rc.benchmark);
      cmd_eval(rc, method, parse_tasks(task), outp);
      return 0;
    }
    if (*plan) return cmd_plan(rc, task_from_string(plan_task), index, outp) ? 0 : 2;
    if (*replay) {
      cmd_replay(rc, recording, outp);
      return 0;
    }
    if (*serve) {
      RobotModel model = model_path.empty() ? rc.model : load_model(model_path);
      Scene scene = scene_name == "free" ? rc.scene_free : scene_name == "obstacle" ? rc.scene_obstacle : load_scene(scene_name);
      SessionConfig sc;
      sc.rollout = rc.benchmark.rollout;
      sc.deploy = rc.benchmark.deploy;
      sc.planner = rc.benchmark.planner;
      sc.broadcast_rate = rate;
      sc.data_dir = data_dir_from_env(outp);
      sc.seed = rc.seed;
      sc.virtual_time = virtual_time;
      Session session(std::move(model), std::move(scene), sc);
      Server server(session, {bind, port, virtual_time});
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on ws://%s:%d/ (data dir %s%s)\n", bind.c_str(), server.port(), sc.data_dir.string().c_str(),
                  virtual_time ? ", virtual time" : "");
      std::fflush(stdout);
      server.run(g_stop);
      return 0;
    }
    if (*bench) {
      cmd_bench(rc, outp, lowlevel);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

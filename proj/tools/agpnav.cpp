// agpnav command-line front end.

#include "agpnav/config.hpp"
#include "agpnav/error.hpp"
#include "agpnav/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace agpnav;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
  out << text;
}

// Writes to `out` when given, else stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text << '\n';
  else
    write_text(out, text + '\n');
}

struct Common {
  std::string scene;
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  bool seed_set = false;

  void attach(CLI::App* app, bool with_scene = true) {
    if (with_scene) app->add_option("--scene", scene, "scene JSON");
    app->add_option("--config", config, "config JSON");
    app->add_option("--out", out, "output path");
    app->add_option("--seed", seed, "random seed")->each([this](const std::string&) {
      seed_set = true;
    });
  }

  AppConfig load() const { return config.empty() ? AppConfig{} : load_config(config); }

  std::optional<Scene> scene_or_none() const {
    if (scene.empty()) return std::nullopt;
    return scene_load(scene);
  }
};

std::optional<PolicyHandle> load_policy(const std::string& path, Controller c) {
  if (c != Controller::Rl) return std::nullopt;
  return PolicyHandle(load_model(path));
}

int cmd_plan(const Common& c, double alpha, double spacing) {
  if (c.scene.empty()) throw Error(ErrorKind::InvalidArgument, "plan needs --scene");
  const Scene scene = scene_load(c.scene);
  const Vec2 s = scene.start.value_or(arena_start(scene.width, scene.height));
  const Vec2 e = scene.targets.empty() ? arena_end(scene.width, scene.height)
                                       : scene.targets.front().position;
  AgpOptions opts;
  opts.alpha = alpha;
  opts.spacing = spacing;
  emit(c.out, path_to_json(plan_2d(scene, s, e, opts)));
  return 0;
}

int cmd_plan3d(const Common& c, int spheres, int planes) {
  const Scene3d sc = c.scene.empty() ? random_scene3d(spheres, c.seed)
                                     : scene3d_from_json(read_text(c.scene));
  Plan3dOptions opts;
  opts.robot_radius = sc.robot_radius;
  opts.n_planes = planes;
  emit(c.out, path3d_to_json(plan_3d(sc.start, sc.end, sc.spheres, opts)));
  return 0;
}

int cmd_bench_main(const Common& c, int runs, const std::vector<std::string>& planners,
                   const std::vector<int>& arenas) {
  BenchConfig cfg = c.load().bench;
  if (c.seed_set) cfg.seed = c.seed;
  if (runs > 0) cfg.runs = runs;
  if (!planners.empty()) {
    cfg.planners.clear();
    for (const auto& p : planners) cfg.planners.push_back(planner_from_string(p));
  }
  if (!arenas.empty()) cfg.arenas = arenas;
  const auto records = cmd_bench(cfg, [](const RunRecord& r) {
    std::fprintf(stderr, "%-6s arena %2d run %2d  %s  %.3f ms\n", r.planner.c_str(), r.arena, r.run,
                 r.feasible ? "ok" : "infeasible", r.seconds * 1e3);
  });
  const fs::path dir = c.out.empty() ? fs::path("bench_out") : fs::path(c.out);
  write_text(dir / "records.csv", records_to_csv(records));
  write_text(dir / "summary.json", summary_to_json(summarize(records)) + "\n");
  write_text(dir / "host.json", host_metadata_json() + "\n");
  std::cout << summary_to_json(summarize(records)) << '\n';
  return 0;
}

int cmd_scenario_main(const Common& c, const std::string& controller, const std::string& model,
                      long frames, const std::string& log_path) {
  const AppConfig cfg = c.load();
  NavConfig nav = cfg.nav;
  if (!controller.empty()) nav.controller = controller_from_string(controller);
  const auto policy = load_policy(model, nav.controller);
  SimState state = scenario_state(c.scene_or_none(), cfg.sim, c.seed);
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw Error(ErrorKind::InvalidArgument, "cannot write " + log_path);
  }
  const std::string id = c.scene.empty() ? "dynamic-" + std::to_string(c.seed)
                                         : fs::path(c.scene).stem().string();
  const ScenarioReport rep = run_scenario(std::move(state), NavState{}, nav,
                                          policy ? &policy->net() : nullptr, frames,
                                          log_path.empty() ? nullptr : &log, id);
  emit(c.out, scenario_report_json(rep));
  return 0;
}

int cmd_train_main(const Common& c, bool desk, long steps, const std::string& log_path) {
  AppConfig base;
  if (desk) base.train = desk_config();
  TrainConfig cfg = c.config.empty() ? base.train : load_config(c.config, base).train;
  if (c.seed_set) cfg.seed = c.seed;
  if (steps > 0) cfg.total_steps = steps;
  const fs::path model = c.out.empty() ? fs::path("model.qnet") : fs::path(c.out);
  if (cfg.diagnostic_path.empty()) cfg.diagnostic_path = fs::path(model).concat(".diverged");
  std::ofstream log;
  if (!log_path.empty()) log.open(log_path);
  const TrainResult res = train(cfg, [&](const EvalRecord& r) {
    const std::string line = eval_record_json(r);
    std::cerr << line << '\n';
    if (log) log << line << '\n';
  });
  save_model(res.best_net, model, cfg.seed);
  json summary = {{"model", model.string()},
                  {"updates", res.updates},
                  {"stored", res.stored},
                  {"best_checkpoint", res.best.checkpoint},
                  {"best_success", res.best.success_rate},
                  {"best_return", res.best.mean_return}};
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_eval_main(const Common& c, const std::string& model, bool random, int episodes) {
  const AppConfig cfg = c.load();
  EnvConfig env = cfg.train.env;
  const ActFn act = random ? random_policy() : greedy_policy(load_model(model));
  const EvalReport rep = evaluate(env, act, episodes, c.seed);
  json j = {{"policy", random ? "random" : model},
            {"episodes", rep.episodes},
            {"seed", c.seed},
            {"success_rate", rep.success_rate},
            {"mean_return", rep.mean_return},
            {"mean_length", rep.mean_length}};
  emit(c.out, j.dump());
  return 0;
}

int cmd_serve_main(const Common& c, const std::string& bind, double fps,
                   const std::string& controller, const std::string& model) {
  const AppConfig cfg = c.load();
  NavConfig nav = cfg.nav;
  if (!controller.empty()) nav.controller = controller_from_string(controller);
  ServeOptions opts;
  opts.fps = fps;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--bind expects host:port");
  opts.address = bind.substr(0, colon);
  try {
    opts.port = static_cast<unsigned short>(std::stoul(bind.substr(colon + 1)));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--bind expects host:port");
  }
  // Loaded once; every session shares the same immutable weights.
  std::optional<PolicyHandle> policy;
  if (nav.controller == Controller::Rl || fs::exists(model)) policy = PolicyHandle(load_model(model));
  const std::optional<Scene> scene = c.scene_or_none();
  const SimConfig sim = cfg.sim;
  const std::uint64_t seed = c.seed;
  Server server(opts, [=] {
    return std::make_unique<Session>(
        [scene, sim](std::uint64_t s) { return scenario_state(scene, sim, s); }, nav, policy, seed);
  });
  std::cerr << "serving ws://" << opts.address << ':' << server.port() << " at " << fps << " fps\n";
  server.run(true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic geometry planning and escape control for rolling microrobots"};
  app.require_subcommand(1);

  Common common;
  auto* plan = app.add_subcommand("plan", "plan one 2D path through a scene");
  common.attach(plan);
  double alpha = 6.0, spacing = 20.0;
  plan->add_option("--alpha", alpha, "pruning factor");
  plan->add_option("--spacing", spacing, "waypoint spacing, px");

  auto* plan3d = app.add_subcommand("plan3d", "plan a 3D path among spheres");
  common.attach(plan3d);
  int spheres = 30, planes = 16;
  plan3d->add_option("--spheres", spheres, "random spheres when no --scene is given");
  plan3d->add_option("--planes", planes, "cutting planes");

  auto* bench = app.add_subcommand("bench", "static planner benchmark");
  common.attach(bench, false);
  int runs = 0;
  std::vector<std::string> planners;
  std::vector<int> arenas;
  bench->add_option("--runs", runs, "runs per arena");
  bench->add_option("--planners", planners, "subset of agp wastar pso rrt")->delimiter(',');
  bench->add_option("--arenas", arenas, "obstacle counts")->delimiter(',');

  auto* scenario = app.add_subcommand("scenario", "closed-loop navigation run");
  common.attach(scenario);
  std::string controller, model = AGPNAV_DEFAULT_MODEL, log_path;
  long frames = 3000;
  scenario->add_option("--controller", controller, "none | rule | rl");
  scenario->add_option("--model", model, "Q-network for the rl controller");
  scenario->add_option("--frames", frames, "frame cap");
  scenario->add_option("--log", log_path, "per-frame JSONL trajectory");

  auto* trainc = app.add_subcommand("train", "train the escape Q-network");
  common.attach(trainc, false);
  bool desk = false;
  long steps = 0;
  std::string train_log;
  trainc->add_flag("--desk", desk, "2e5-step desk preset");
  trainc->add_option("--steps", steps, "total environment steps");
  trainc->add_option("--log", train_log, "evaluation history JSONL");

  auto* evalc = app.add_subcommand("eval", "evaluate a policy in the escape environment");
  common.attach(evalc, false);
  bool random = false;
  int episodes = 500;
  evalc->add_option("--model", model, "Q-network");
  evalc->add_flag("--random", random, "uniform random policy");
  evalc->add_option("--episodes", episodes, "evaluation episodes");

  auto* serve = app.add_subcommand("serve", "operator session server over WebSocket");
  common.attach(serve);
  std::string bind = "127.0.0.1:8765";
  double fps = 25.0;
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--fps", fps, "frame rate");
  serve->add_option("--controller", controller, "none | rule | rl");
  serve->add_option("--model", model, "Q-network for the rl controller");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan) return cmd_plan(common, alpha, spacing);
    if (*plan3d) return cmd_plan3d(common, spheres, planes);
    if (*bench) return cmd_bench_main(common, runs, planners, arenas);
    if (*scenario) return cmd_scenario_main(common, controller, model, frames, log_path);
    if (*trainc) return cmd_train_main(common, desk, steps, train_log);
    if (*evalc) return cmd_eval_main(common, model, random, episodes);
    if (*serve) return cmd_serve_main(common, bind, fps, controller, model);
  } catch (const Error& e) {
    std::cerr << "agpnav: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "agpnav: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

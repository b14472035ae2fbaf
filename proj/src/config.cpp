#include "agpnav/config.hpp"

#include "agpnav/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace agpnav {

using nlohmann::json;

namespace {

// Reads the keys of one section and rejects anything it does not know.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = doc.at(name_);
      if (!obj_.is_object()) fail(name_, "must be an object");
    }
  }

  template <class T>
  Section& get(const char* key, T& field) {
    seen_.insert(key);
    if (!obj_.contains(key)) return *this;
    try {
      field = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(name_ + "." + key, "wrong type");
    }
    return *this;
  }

  Section& vec(const char* key, Vec2& field) {
    std::vector<double> v{field.x(), field.y()};
    get(key, v);
    if (v.size() != 2) fail(name_ + "." + key, "expected [x, y]");
    field = Vec2(v[0], v[1]);
    return *this;
  }

  template <class E>
  Section& named(const char* key, E& field, E (*parse)(const std::string&)) {
    seen_.insert(key);
    if (!obj_.contains(key)) return *this;
    if (!obj_.at(key).is_string()) fail(name_ + "." + key, "expected a string");
    try {
      field = parse(obj_.at(key).get<std::string>());
    } catch (const Error& e) {
      fail(name_ + "." + key, e.what());
    }
    return *this;
  }

  void done() const {
    for (const auto& [k, v] : obj_.items())
      if (!seen_.count(k)) fail(name_ + "." + k, "unknown key");
  }

 private:
  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ParseError, "config " + where + ": " + what);
  }

  std::string name_;
  json obj_ = json::object();
  std::set<std::string> seen_;
};

void read_sim(Section&& s, SimConfig& c) {
  s.get("width", c.width)
      .get("height", c.height)
      .get("robot_radius", c.robot_radius)
      .get("robot_speed", c.robot_speed)
      .get("n_dynamic", c.n_dynamic)
      .get("n_static", c.n_static)
      .get("radius_min", c.radius_min)
      .get("radius_max", c.radius_max)
      .get("speed_min", c.speed_min)
      .get("speed_max", c.speed_max)
      .get("directions", c.directions)
      .get("frame_period", c.frame_period)
      .vec("flow_drift", c.flow_drift)
      .get("seed", c.seed)
      .done();
}

ReplanPolicy replan_from_string(const std::string& s) {
  if (s == "every_frame") return ReplanPolicy::EveryFrame;
  if (s == "on_exit") return ReplanPolicy::OnExit;
  throw Error(ErrorKind::InvalidArgument, "unknown replan policy '" + s + "' (every_frame|on_exit)");
}

}  // namespace

AppConfig config_from_json(const std::string& text, AppConfig base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config: expected an object");
  for (const auto& [k, v] : doc.items())
    if (k != "sim" && k != "nav" && k != "train" && k != "bench")
      throw Error(ErrorKind::ParseError, "config " + k + ": unknown section");

  read_sim(Section(doc, "sim"), base.sim);

  NavConfig& n = base.nav;
  Section(doc, "nav")
      .get("arrival_radius", n.arrival_radius)
      .get("alpha", n.alpha)
      .get("spacing", n.spacing)
      .get("plan_margin", n.plan_margin)
      .named("controller", n.controller, &controller_from_string)
      .named("replan", n.replan, &replan_from_string)
      .get("use_planner", n.use_planner)
      .get("commit_frames", n.rule.commit_frames)
      .get("rule_repel", n.rule.repel)
      .get("rule_lookahead", n.rule.lookahead)
      .get("rule_forecast", n.rule.forecast)
      .get("rule_walls", n.rule.walls)
      .get("timeout_frames", n.timeout_frames)
      .get("field_amplitude", n.field_amplitude)
      .get("field_frequency", n.field_frequency)
      .get("frame_period", n.frame_period)
      .done();

  TrainConfig& t = base.train;
  Section(doc, "train")
      .get("n_env", t.n_env)
      .get("buffer", t.buffer)
      .get("batch", t.batch)
      .get("warmup", t.warmup)
      .get("train_every", t.train_every)
      .get("target_sync", t.target_sync)
      .get("gamma", t.gamma)
      .get("eps_start", t.eps_start)
      .get("eps_end", t.eps_end)
      .get("eps_fraction", t.eps_fraction)
      .get("lr", t.lr)
      .get("eval_every", t.eval_every)
      .get("eval_episodes", t.eval_episodes)
      .get("total_steps", t.total_steps)
      .get("seed", t.seed)
      .get("max_frames", t.env.max_frames)
      .get("k_shape", t.env.rewards.k_shape)
      .get("step_penalty", t.env.rewards.step_penalty)
      .get("collision_reward", t.env.rewards.collision)
      .get("success_reward", t.env.rewards.success)
      .done();

  BenchConfig& b = base.bench;
  std::vector<std::string> planners;
  for (PlannerKind p : b.planners) planners.emplace_back(to_string(p));
  Section(doc, "bench")
      .get("arenas", b.arenas)
      .get("runs", b.runs)
      .get("planners", planners)
      .get("seed", b.seed)
      .get("obstacle_radius", b.arena.obstacle_radius)
      .get("robot_radius", b.arena.robot_radius)
      .get("width", b.arena.width)
      .get("height", b.arena.height)
      .get("alpha", b.agp.alpha)
      .get("spacing", b.agp.spacing)
      .get("wastar_weight", b.wastar.weight)
      .get("wastar_cell", b.wastar.cell)
      .get("pso_particles", b.pso.particles)
      .get("pso_iterations", b.pso.iterations)
      .get("pso_interior_nodes", b.pso.interior_nodes)
      .get("pso_segments", b.pso.segments)
      .get("pso_v_max", b.pso.v_max)
      .get("pso_penalty", b.pso.penalty)
      .get("rrt_step", b.rrt.step)
      .get("rrt_goal_tolerance", b.rrt.goal_tolerance)
      .get("rrt_max_iterations", b.rrt.max_iterations)
      .done();
  b.planners.clear();
  for (const auto& p : planners) {
    try {
      b.planners.push_back(planner_from_string(p));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, std::string("config bench.planners: ") + e.what());
    }
  }
  return base;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::move(base));
}

}  // namespace agpnav

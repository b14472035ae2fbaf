#include "agpnav/bench.hpp"

#include "agpnav/error.hpp"

#include <json.hpp>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace agpnav {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

const char* to_string(PlannerKind p) {
  switch (p) {
    case PlannerKind::Agp: return "agp";
    case PlannerKind::WAStar: return "wastar";
    case PlannerKind::Pso: return "pso";
    case PlannerKind::Rrt: return "rrt";
  }
  return "?";
}

PlannerKind planner_from_string(const std::string& s) {
  if (s == "agp") return PlannerKind::Agp;
  if (s == "wastar") return PlannerKind::WAStar;
  if (s == "pso") return PlannerKind::Pso;
  if (s == "rrt") return PlannerKind::Rrt;
  throw Error(ErrorKind::InvalidArgument, "unknown planner '" + s + "' (agp|wastar|pso|rrt)");
}

Scene bench_arena(const BenchConfig& config, int n_obstacles) {
  ArenaSpec spec = config.arena;
  spec.n_obstacles = n_obstacles;
  spec.seed = std::uint64_t(n_obstacles);
  return generate_arena(spec);
}

RunRecord run_planner(PlannerKind planner, const Scene& scene, std::uint64_t seed,
                      const BenchConfig& config) {
  RunRecord rec;
  rec.planner = to_string(planner);
  rec.seed = seed;
  const Vec2 s = scene.start.value_or(arena_start(scene.width, scene.height));
  const Vec2 e = scene.targets.empty() ? arena_end(scene.width, scene.height)
                                       : scene.targets.front().position;
  const auto zones = scene_zones(scene);
  const Bounds bounds = scene.bounds();
  const auto t0 = Clock::now();
  try {
    switch (planner) {
      case PlannerKind::Agp: {
        AgpOptions o = config.agp;
        if (!o.bounds) o.bounds = bounds;
        rec.length = plan_2d(zones, s, e, o).length;
        rec.feasible = true;
        break;
      }
      case PlannerKind::WAStar: {
        const auto r = wastar_plan(zones, bounds, s, e, config.wastar);
        rec.length = r.path.length;
        rec.feasible = true;
        break;
      }
      case PlannerKind::Pso: {
        PsoParams p = config.pso;
        p.seed = seed;
        const auto r = pso_plan(zones, bounds, s, e, p);
        rec.length = r.path.length;
        rec.feasible = r.feasible();
        break;
      }
      case PlannerKind::Rrt: {
        RrtParams p = config.rrt;
        p.seed = seed;
        rec.length = rrt_plan(zones, bounds, s, e, p).path.length;
        rec.feasible = true;
        break;
      }
    }
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::InvalidArgument) throw;
    rec.feasible = false;
  }
  rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!rec.feasible) rec.length = 0.0;
  return rec;
}

std::vector<RunRecord> cmd_bench(const BenchConfig& config,
                                 const std::function<void(const RunRecord&)>& progress) {
  if (config.runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
  std::vector<RunRecord> out;
  std::map<int, Scene> arenas;
  for (int n : config.arenas) arenas.emplace(n, bench_arena(config, n));
  for (PlannerKind p : config.planners) {
    for (int n : config.arenas) {
      for (int run = 0; run < config.runs; ++run) {
        Rng mix(config.seed ^ (std::uint64_t(p) << 48) ^ (std::uint64_t(n) << 24) ^
                std::uint64_t(run));
        RunRecord r = run_planner(p, arenas.at(n), mix.next(), config);
        r.arena = n;
        r.run = run;
        if (progress) progress(r);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.planner, r.arena);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({r.planner, r.arena});
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }
  // Welford updates: identical samples give a variance of exactly zero.
  struct Moments {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
      ++n;
      const double d = x - mean;
      mean += d / double(n);
      m2 += d * (x - mean);
    }
    double var() const { return n ? m2 / double(n) : 0.0; }
  };
  for (std::size_t g = 0; g < rows.size(); ++g) {
    SummaryRow& row = rows[g];
    Moments len, sec;
    for (const RunRecord* r : groups[g]) {
      sec.add(r->seconds);
      if (r->feasible) len.add(r->length);
    }
    row.runs = int(sec.n);
    row.feasible = int(len.n);
    row.mean_seconds = sec.mean;
    row.var_seconds = sec.var();
    row.mean_length = len.mean;
    row.var_length = len.var();
  }
  return rows;
}

namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kCsvHeader = "planner,arena,run,seed,length,seconds,feasible";

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.planner << ',' << r.arena << ',' << r.run << ',' << r.seed << ','
       << (r.feasible ? exact(r.length) : std::string()) << ',' << exact(r.seconds) << ','
       << (r.feasible ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<RunRecord> records_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::vector<RunRecord> out;
  if (!std::getline(is, line)) return out;
  if (line != kCsvHeader) throw Error(ErrorKind::ParseError, "csv: unexpected header '" + line + "'");
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 7)
      throw Error(ErrorKind::ParseError, "csv line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      RunRecord r;
      r.planner = f[0];
      r.arena = std::stoi(f[1]);
      r.run = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.feasible = f[6] == "1";
      r.length = r.feasible ? std::stod(f[4]) : 0.0;
      r.seconds = std::stod(f[5]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, "csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

std::string summary_to_json(const std::vector<SummaryRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    a.push_back({{"planner", r.planner},
                 {"arena", r.arena},
                 {"runs", r.runs},
                 {"feasible", r.feasible},
                 {"mean_length", r.mean_length},
                 {"var_length", r.var_length},
                 {"mean_seconds", r.mean_seconds},
                 {"var_seconds", r.var_seconds}});
  }
  return a.dump(2);
}

std::string host_metadata_json() {
  char host[256] = {0};
  if (gethostname(host, sizeof(host) - 1) != 0) host[0] = '\0';
  std::string cpu;
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  json j = {{"hostname", host},
            {"cpu", cpu},
            {"hardware_threads", std::thread::hardware_concurrency()},
            {"compiler", __VERSION__},
            {"clock", "steady_clock"}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// Scenarios

SimState dynamic_episode(std::uint64_t seed, const SimConfig& base) {
  SimConfig c = base;
  c.seed = seed;
  const Vec2 start = arena_start(c.width, c.height);
  const Vec2 goal = arena_end(c.width, c.height);
  SimState s = generate_sim(c, start, {goal});
  s.targets = {Target{goal, Vec2::Zero()}};
  return s;
}

SimState scenario_state(const std::optional<Scene>& scene, const SimConfig& sim,
                        std::uint64_t seed) {
  if (!scene) return dynamic_episode(seed, sim);
  validate(*scene);
  const bool has_cells = std::any_of(scene->obstacles.begin(), scene->obstacles.end(),
                                     [](const Obstacle& o) { return o.kind == ObstacleKind::BoundaryCell; });
  const Scene full = has_cells ? *scene : add_boundary_cells(*scene, sim.robot_radius);
  const Vec2 start = full.start.value_or(arena_start(full.width, full.height));
  SimState s = make_sim_state(full, start, sim.robot_radius, sim.robot_speed, sim.flow_drift);
  s.targets = full.targets;
  if (s.targets.empty()) s.targets.push_back({arena_end(full.width, full.height), Vec2::Zero()});
  return s;
}

ScenarioReport run_scenario(SimState state, NavState nav, const NavConfig& config,
                            const QNet<float>* policy, long frame_cap, std::ostream* log,
                            const std::string& id) {
  ScenarioReport rep;
  rep.scenario = id;
  rep.controller = to_string(config.controller);
  double total_ms = 0.0;
  long timed = 0;
  while (state.frame < frame_cap) {
    const auto t0 = Clock::now();
    NavOutput out = nav_step(state, nav, config, policy);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (nav.finished) {
      rep.frames_to_target = state.frame;
      if (log && !out.events.empty()) {
        state.events = out.events;
        *log << frame_record(state, "global") << '\n';
      }
      break;
    }
    total_ms += ms;
    rep.max_ms = std::max(rep.max_ms, ms);
    ++timed;
    step_in_place(state, out.displacement);
    if (nav.mode == NavMode::Local) ++rep.local_frames;
    const Vec2 goal = state.targets[nav.target].position;
    rep.distance.push_back((state.robot - goal).norm());
    if (log) {
      state.events.insert(state.events.begin(), out.events.begin(), out.events.end());
      const std::string mode = nav.mode == NavMode::Local ? to_string(config.controller) : "global";
      *log << frame_record(state, mode) << '\n';
    }
  }
  rep.frames = state.frame;
  rep.collisions = state.collisions;
  rep.mean_ms = timed ? total_ms / double(timed) : 0.0;
  rep.outcome = rep.frames_to_target >= 0 ? "reached" : "timeout";
  return rep;
}

std::string scenario_report_json(const ScenarioReport& r) {
  json j = {{"scenario", r.scenario},
            {"controller", r.controller},
            {"frames", r.frames},
            {"frames_to_target", r.frames_to_target},
            {"collisions", r.collisions},
            {"mean_ms", r.mean_ms},
            {"max_ms", r.max_ms},
            {"local_frames", r.local_frames},
            {"outcome", r.outcome},
            {"distance", r.distance}};
  return j.dump();
}

}  // namespace agpnav

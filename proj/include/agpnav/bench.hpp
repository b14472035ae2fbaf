#pragma once

#include "agpnav/baselines.hpp"
#include "agpnav/navigator.hpp"
#include "agpnav/rl.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace agpnav {

// ---------------------------------------------------------------------------
// Static planner benchmark

enum class PlannerKind { Agp, WAStar, Pso, Rrt };

const char* to_string(PlannerKind p);
PlannerKind planner_from_string(const std::string& s);

struct RunRecord {
  std::string planner;
  int arena = 0;  // obstacle count
  int run = 0;
  std::uint64_t seed = 0;
  double length = 0.0;  // meaningful only when feasible
  double seconds = 0.0;
  bool feasible = false;
};

struct BenchConfig {
  std::vector<int> arenas = {10, 20, 30, 40, 50, 60};
  int runs = 10;
  std::vector<PlannerKind> planners = {PlannerKind::Agp, PlannerKind::WAStar, PlannerKind::Pso,
                                       PlannerKind::Rrt};
  std::uint64_t seed = 1;  // run seeds derive from (seed, planner, arena, run)
  ArenaSpec arena;         // n_obstacles and seed are set per arena
  AgpOptions agp;
  WAStarParams wastar;
  PsoParams pso;
  RrtParams rrt;
};

/// Arena n uses seed n, so every planner sees identical obstacles.
Scene bench_arena(const BenchConfig& config, int n_obstacles);

RunRecord run_planner(PlannerKind planner, const Scene& scene, std::uint64_t seed,
                      const BenchConfig& config);

/// Records ordered by (planner, arena, run).
std::vector<RunRecord> cmd_bench(const BenchConfig& config,
                                 const std::function<void(const RunRecord&)>& progress = {});

struct SummaryRow {
  std::string planner;
  int arena = 0;
  int runs = 0;
  int feasible = 0;
  double mean_length = 0.0;  // over feasible runs
  double var_length = 0.0;   // population variance over feasible runs
  double mean_seconds = 0.0;
  double var_seconds = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& csv);
std::string summary_to_json(const std::vector<SummaryRow>& rows);
std::string host_metadata_json();

// ---------------------------------------------------------------------------
// Closed-loop scenarios

struct ScenarioReport {
  std::string scenario;
  std::string controller;
  long frames = 0;             // frames simulated
  long frames_to_target = -1;  // -1 unless every target was reached
  long collisions = 0;
  double mean_ms = 0.0;        // navigator compute per frame
  double max_ms = 0.0;
  long local_frames = 0;
  std::string outcome;         // "reached" or "timeout"
  std::vector<double> distance;  // robot to active target, per frame

  bool collision_free_arrival() const { return outcome == "reached" && collisions == 0; }
};

/// Runs navigator and simulator in lock step until every target is reached
/// or `frame_cap` frames pass. Each frame is written to `log` as JSONL.
ScenarioReport run_scenario(SimState state, NavState nav, const NavConfig& config,
                            const QNet<float>* policy, long frame_cap,
                            std::ostream* log = nullptr, const std::string& id = "scenario");

/// Dynamic arena of the hybrid evaluation: 50 moving and 5 static circles,
/// start near the upper-left corner, fixed target near the lower-right one.
SimState dynamic_episode(std::uint64_t seed, const SimConfig& base = {});

/// Start state of a closed-loop run: the scene when one is given (robot at
/// its start, its targets or the far corner; boundary contours become cells
/// unless the scene already carries them), else dynamic_episode(seed).
SimState scenario_state(const std::optional<Scene>& scene, const SimConfig& sim,
                        std::uint64_t seed);

std::string scenario_report_json(const ScenarioReport& r);

}  // namespace agpnav

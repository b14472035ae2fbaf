#include "agpnav/bench.hpp"
#include "agpnav/error.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>
#include <tuple>

using namespace agpnav;

namespace {

BenchConfig small_config() {
  BenchConfig c;
  c.arenas = {10, 30};
  c.runs = 3;
  c.pso.particles = 20;
  c.pso.iterations = 10;
  return c;
}

bool same(const std::vector<SummaryRow>& a, const std::vector<SummaryRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (std::tie(x.planner, x.arena, x.runs, x.feasible, x.mean_length, x.var_length, x.mean_seconds,
                 x.var_seconds) != std::tie(y.planner, y.arena, y.runs, y.feasible, y.mean_length,
                                            y.var_length, y.mean_seconds, y.var_seconds))
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("benchmark records cover every planner, arena and run in order") {
  const BenchConfig cfg = small_config();
  int progress = 0;
  const auto rec = cmd_bench(cfg, [&](const RunRecord&) { ++progress; });
  CHECK(rec.size() == 4 * 2 * 3);
  CHECK(progress == int(rec.size()));
  for (std::size_t i = 1; i < rec.size(); ++i) {
    const auto& a = rec[i - 1];
    const auto& b = rec[i];
    const int pa = int(planner_from_string(a.planner)), pb = int(planner_from_string(b.planner));
    CHECK(std::make_tuple(pa, a.arena, a.run) < std::make_tuple(pb, b.arena, b.run));
  }
  for (const auto& r : rec)
    if (r.planner == "agp") CHECK(r.feasible);
}

TEST_CASE("CSV round trip reproduces the summary") {
  const auto rec = cmd_bench(small_config());
  const auto back = records_from_csv(records_to_csv(rec));
  REQUIRE(back.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(back[i].planner == rec[i].planner);
    CHECK(back[i].seed == rec[i].seed);
    if (rec[i].feasible) CHECK(back[i].length == rec[i].length);
    CHECK(back[i].seconds == rec[i].seconds);
    CHECK(back[i].feasible == rec[i].feasible);
  }
  CHECK(same(summarize(rec), summarize(back)));
  CHECK(summary_to_json(summarize(rec)) == summary_to_json(summarize(back)));
}

TEST_CASE("deterministic planners have zero length variance") {
  const auto rows = summarize(cmd_bench(small_config()));
  int checked = 0;
  for (const auto& r : rows) {
    if (r.planner == "agp" || r.planner == "wastar") {
      CHECK(r.var_length == 0.0);
      ++checked;
    }
    CHECK(r.runs == 3);
    CHECK(r.var_seconds >= 0);
  }
  CHECK(checked == 4);
}

TEST_CASE("summary statistics") {
  std::vector<RunRecord> rec{{"pso", 10, 0, 1, 2.0, 1.0, true},
                             {"pso", 10, 1, 2, 4.0, 3.0, true},
                             {"pso", 10, 2, 3, 99.0, 5.0, false}};
  const auto rows = summarize(rec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 3);
  CHECK(rows[0].feasible == 2);
  CHECK(rows[0].mean_length == doctest::Approx(3));
  CHECK(rows[0].var_length == doctest::Approx(1));
  const auto j = nlohmann::json::parse(summary_to_json(rows));
  CHECK(j.is_array());
  CHECK(j[0]["planner"] == "pso");
}

TEST_CASE("every arena is shared across planners") {
  const BenchConfig cfg = small_config();
  const Scene a = bench_arena(cfg, 30), b = bench_arena(cfg, 30);
  CHECK(a.obstacles == b.obstacles);
  CHECK(a.obstacles.size() == 30);
}

TEST_CASE("malformed CSV is rejected") {
  CHECK_THROWS_AS(records_from_csv("nonsense"), Error);
  CHECK_THROWS_AS(records_from_csv("planner,arena,run,seed,length,seconds,feasible\nagp,x,0,1,2,3,1\n"),
                  Error);
  CHECK_THROWS_AS(planner_from_string("dijkstra"), Error);
}

TEST_CASE("host metadata is JSON") {
  const auto j = nlohmann::json::parse(host_metadata_json());
  CHECK(j.is_object());
}

TEST_CASE("dynamic episodes are reproducible and start clear") {
  const SimState a = dynamic_episode(17), b = dynamic_episode(17);
  CHECK(a.obstacles == b.obstacles);
  CHECK(a.robot == b.robot);
  CHECK(a.targets.size() == 1);
  CHECK(min_clearance(a) > 0);
  CHECK(a.obstacles.size() == 55);
}

TEST_CASE("scenario state adds boundary cells to phantom scenes") {
  const Scene sc = scene_load(testing::source_path("scenes/vascular_phantom.json"));
  SimConfig sim;
  sim.robot_radius = 8;
  sim.robot_speed = 3;
  const SimState s = scenario_state(sc, sim, 1);
  CHECK(s.obstacles.size() > sc.obstacles.size());
  CHECK(s.targets.size() == 2);
  CHECK(s.robot == *sc.start);
  const SimState again = scenario_state(std::optional<Scene>(add_boundary_cells(sc, 8)), sim, 1);
  CHECK(again.obstacles.size() == s.obstacles.size());
}

TEST_CASE("scenario reports serialize") {
  NavConfig cfg;
  const ScenarioReport r = run_scenario(dynamic_episode(3), {}, cfg, nullptr, 50, nullptr, "x");
  const auto j = nlohmann::json::parse(scenario_report_json(r));
  CHECK(j["scenario"] == "x");
  CHECK(j["frames"] == r.frames);
  CHECK(j["distance"].size() == r.distance.size());
  std::ostringstream log;
  run_scenario(dynamic_episode(3), {}, cfg, nullptr, 20, &log);
  std::istringstream lines(log.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    CHECK(nlohmann::json::parse(line).contains("phi"));
    ++n;
  }
  CHECK(n == 20);
}

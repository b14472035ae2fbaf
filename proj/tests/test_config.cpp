#include "agpnav/config.hpp"
#include "agpnav/error.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace agpnav;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    config_from_json(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("accepted: " << text);
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("empty document keeps the defaults") {
  const AppConfig c = config_from_json("{}");
  CHECK(c.sim.robot_radius == AppConfig{}.sim.robot_radius);
  CHECK(c.nav.plan_margin == 30);
  CHECK(c.nav.rule.commit_frames == 1);
  CHECK(c.train.total_steps == 1000000);
  CHECK(c.bench.runs == 10);
}

TEST_CASE("keys override their fields") {
  const AppConfig c = config_from_json(R"({
    "sim": {"robot_radius": 8, "flow_drift": [0.5, -1], "seed": 3},
    "nav": {"controller": "rl", "replan": "on_exit", "rule_repel": false, "commit_frames": 4},
    "train": {"n_env": 2, "lr": 0.001, "max_frames": 500},
    "bench": {"planners": ["agp", "rrt"], "arenas": [10], "pso_particles": 7}
  })");
  CHECK(c.sim.robot_radius == 8);
  CHECK(c.sim.flow_drift == Vec2(0.5, -1));
  CHECK(c.sim.seed == 3);
  CHECK(c.nav.controller == Controller::Rl);
  CHECK(c.nav.replan == ReplanPolicy::OnExit);
  CHECK_FALSE(c.nav.rule.repel);
  CHECK(c.nav.rule.commit_frames == 4);
  CHECK(c.train.n_env == 2);
  CHECK(c.train.lr == 0.001);
  CHECK(c.train.env.max_frames == 500);
  CHECK(c.bench.planners == std::vector<PlannerKind>{PlannerKind::Agp, PlannerKind::Rrt});
  CHECK(c.bench.arenas == std::vector<int>{10});
  CHECK(c.bench.pso.particles == 7);
}

TEST_CASE("base values survive when keys are absent") {
  AppConfig base;
  base.nav.alpha = 9;
  const AppConfig c = config_from_json(R"({"nav": {"spacing": 5}})", base);
  CHECK(c.nav.alpha == 9);
  CHECK(c.nav.spacing == 5);
}

TEST_CASE("malformed documents are parse errors") {
  CHECK(kind_of("{") == ErrorKind::ParseError);
  CHECK(kind_of("[]") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"physics": {}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"sim": {"gravity": 1}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"sim": {"robot_radius": "big"}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"sim": {"flow_drift": [1]}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"sim": 3})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"nav": {"controller": "pid"}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"nav": {"replan": 1}})") == ErrorKind::ParseError);
  CHECK(kind_of(R"({"bench": {"planners": ["dijkstra"]}})") == ErrorKind::ParseError);
}

TEST_CASE("error messages name the offending key") {
  try {
    config_from_json(R"({"train": {"gama": 0.9}})");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("train.gama") != std::string::npos);
  }
}

TEST_CASE("shipped config files load") {
  const AppConfig c = load_config(testing::source_path("scenes/phantom.config.json"));
  CHECK(c.sim.robot_radius == 8);
  CHECK(c.sim.robot_speed == 3);
  CHECK_THROWS_AS(load_config("/nonexistent.json"), Error);
}

#include "agpnav/bench.hpp"
#include "agpnav/error.hpp"
#include "agpnav/service.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace agpnav;
using nlohmann::json;

namespace {

Session make_session(Controller c = Controller::Rule) {
  NavConfig nav;
  nav.controller = c;
  return Session([](std::uint64_t seed) { return dynamic_episode(seed); }, nav, std::nullopt, 5);
}

json command(const std::string& kind, json extra = json::object()) {
  extra["type"] = "command";
  extra["proto"] = 1;
  extra["kind"] = kind;
  extra["id"] = "c1";
  return extra;
}

json send(Session& s, const json& msg) { return json::parse(s.handle(msg.dump())); }

json tick(Session& s) {
  const auto t = s.tick();
  REQUIRE(t);
  return json::parse(*t);
}

bool has_event(const json& telemetry, const std::string& kind, const std::string& detail = {}) {
  for (const auto& e : telemetry["events"])
    if (e["kind"] == kind && (detail.empty() || e.value("detail", "") == detail)) return true;
  return false;
}

// Obstacle farthest from both robot and goal, so its zone is never shrunk.
const Obstacle& far_obstacle(const Session& s) {
  auto reach = [&](const Obstacle& o) {
    return std::min((o.center - s.state().robot).norm(),
                    (o.center - s.state().targets[0].position).norm());
  };
  const Obstacle* best = &s.state().obstacles.front();
  for (const auto& o : s.state().obstacles)
    if (reach(o) > reach(*best)) best = &o;
  return *best;
}

}  // namespace

TEST_CASE("snapshot describes the arena") {
  Session s = make_session();
  const json snap = json::parse(s.snapshot());
  CHECK(snap["type"] == "snapshot");
  CHECK(snap["proto"] == 1);
  CHECK(snap["frame"] == 0);
  CHECK(snap["width"] == 2000);
  CHECK(snap["obstacles"].size() == 55);
  CHECK(snap["targets"].size() == 1);
}

TEST_CASE("acks name the frame whose telemetry reflects the command") {
  Session s = make_session();
  tick(s);
  tick(s);
  const json ack = send(s, command("pause"));
  CHECK(ack["type"] == "ack");
  CHECK(ack["id"] == "c1");
  CHECK(ack["frame"] == 2);
  CHECK_FALSE(s.tick());
  CHECK(s.paused());
  send(s, command("resume"));
  const json t = tick(s);
  CHECK(t["frame"] == 2);
}

TEST_CASE("pause and resume leave no gap in frame numbers") {
  Session s = make_session();
  std::vector<long> frames;
  for (int k = 0; k < 30; ++k) {
    if (k == 10) send(s, command("pause"));
    if (k == 20) send(s, command("resume"));
    if (auto t = s.tick()) frames.push_back(json::parse(*t)["frame"].get<long>());
  }
  REQUIRE(frames.size() == 20);
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(frames[i] == long(i));
}

TEST_CASE("inflating an obstacle widens its zone and the plan clears it") {
  Session s = make_session();
  tick(s);
  const Obstacle& o = far_obstacle(s);
  const json ack = send(s, command("inflate_obstacle", {{"obstacle", o.id}, {"delta", 150}}));
  REQUIRE(ack["type"] == "ack");
  const json t = tick(s);
  CHECK(has_event(t, "replan", "inflate"));
  for (const auto& ob : t["obstacles"])
    if (ob["id"] == o.id) CHECK(ob["zone"].get<double>() == doctest::Approx(o.safety_radius + 150));
  std::vector<Vec2> plan;
  for (const auto& p : t["plan"]) plan.emplace_back(p[0].get<double>(), p[1].get<double>());
  REQUIRE(plan.size() >= 2);
  CHECK(testing::sampled_clearance(plan, o.center, o.safety_radius + 150) >= -1e-6);
}

TEST_CASE("invalid commands get an error and change nothing") {
  Session s = make_session();
  Session twin = make_session();
  const int id = s.state().obstacles.front().id;
  const std::vector<json> bad{
      command("inflate_obstacle", {{"obstacle", id}, {"delta", -1}}),
      command("inflate_obstacle", {{"obstacle", 9999}, {"delta", 10}}),
      command("set_target", {{"x", -5}, {"y", 10}}),
      command("set_target", {{"x", "a"}, {"y", 10}}),
      command("add_via", {{"x", s.state().obstacles.front().center.x()},
                          {"y", s.state().obstacles.front().center.y()}}),
      command("switch_controller", {{"controller", "rl"}}),
      command("switch_controller", {{"controller", "pid"}}),
      command("reset", {{"seed", -3}}),
      command("teleport"),
      json{{"type", "command"}, {"proto", 2}, {"kind", "pause"}},
      json{{"type", "hello"}, {"proto", 1}},
      json::array(),
  };
  for (const auto& m : bad) {
    const json r = send(s, m);
    CHECK(r["type"] == "error");
    CHECK(r["proto"] == 1);
    CHECK_FALSE(r["message"].get<std::string>().empty());
  }
  CHECK(json::parse(s.handle("{not json"))["type"] == "error");
  for (int k = 0; k < 5; ++k) CHECK(*s.tick() == *twin.tick());
}

TEST_CASE("set_target replans in the next telemetry") {
  Session s = make_session();
  tick(s);
  send(s, command("set_target", {{"x", 1000}, {"y", 1500}}));
  const json t = tick(s);
  CHECK(has_event(t, "replan", "target"));
  CHECK(t["targets"][0][0] == 1000);
  CHECK(t["targets"][0][1] == 1500);
}

TEST_CASE("via-points are added and cleared") {
  Session s = make_session();
  tick(s);
  Vec2 via(1000, 1000);
  for (const auto& o : s.state().obstacles)
    if ((via - o.center).norm() < o.safety_radius + 1) via += Vec2(37, 11);
  const json ack = send(s, command("add_via", {{"x", via.x()}, {"y", via.y()}}));
  if (ack["type"] == "ack") {
    const json t = tick(s);
    CHECK(t["via"].size() == 1);
    CHECK(has_event(t, "replan", "via"));
    send(s, command("clear_via"));
    CHECK(tick(s)["via"].empty());
  }
}

TEST_CASE("switching controllers takes effect on the next frame") {
  Session s = make_session();
  send(s, command("switch_controller", {{"controller", "none"}}));
  CHECK(tick(s)["controller"] == "none");
}

TEST_CASE("reset restores the initial arena and keeps counting frames") {
  Session s = make_session();
  const json first = json::parse(s.snapshot());
  for (int k = 0; k < 10; ++k) tick(s);
  send(s, command("reset"));
  const json t = tick(s);
  CHECK(t["frame"] == 10);
  CHECK(t["obstacles"][0]["x"] == first["obstacles"][0]["x"]);
  CHECK(t["collisions"] == 0);
}

TEST_CASE("telemetry carries the actuation command") {
  Session s = make_session();
  const json t = tick(s);
  CHECK(t["type"] == "telemetry");
  CHECK(t["command"]["omega"].get<double>() > 0);
  CHECK(t["mode"] == "global");
}

TEST_CASE("rl sessions need a policy") {
  CHECK_THROWS_AS(make_session(Controller::Rl), Error);
}

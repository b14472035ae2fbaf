#include "agpnav/error.hpp"
#include "agpnav/escape.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace agpnav;

namespace {

Obstacle zone(int id, Vec2 c, double r_sim, Vec2 v = Vec2::Zero()) {
  Obstacle o;
  o.id = id;
  o.center = c;
  o.physical_radius = r_sim / 2;
  o.safety_radius = r_sim;
  o.velocity = v;
  o.kind = v.isZero() ? ObstacleKind::Static : ObstacleKind::Dynamic;
  return o;
}

SimState state_with(std::vector<Obstacle> obs, Vec2 robot, Vec2 dir = Vec2(1, 0)) {
  SimState s;
  s.bounds = {Vec2(0, 0), Vec2(2000, 2000)};
  s.robot = robot;
  s.robot_dir = dir;
  s.robot_radius = 25;
  s.robot_speed = 10;
  s.obstacles = std::move(obs);
  for (const auto& o : s.obstacles) s.v_cmax = std::max(s.v_cmax, o.velocity.norm());
  s.buffer = s.robot_speed + s.v_cmax;
  return s;
}

}  // namespace

TEST_CASE("Case II reflects the zone center across the robot") {
  const auto d = rule_intermediate(Vec2(100, 100), Vec2(100, 130), {zone(1, Vec2(110, 100), 20)});
  CHECK(d.which == EscapeCase::II);
  CHECK(d.target->isApprox(Vec2(90, 100)));
  CHECK(d.obstacle == 1);
}

TEST_CASE("Case I reflects the arrow tip across the robot") {
  const auto d = rule_intermediate(Vec2(100, 100), Vec2(120, 100), {zone(2, Vec2(130, 100), 15)});
  CHECK(d.which == EscapeCase::I);
  CHECK(d.target->isApprox(Vec2(80, 100)));
  CHECK(d.obstacle == 2);
}

TEST_CASE("no case without a violated zone") {
  const auto d = rule_intermediate(Vec2(100, 100), Vec2(120, 100), {zone(1, Vec2(300, 100), 15)});
  CHECK(d.which == EscapeCase::None);
  CHECK_FALSE(d.target);
}

TEST_CASE("Case II takes precedence and picks the deepest violation") {
  const std::vector<Obstacle> obs{zone(1, Vec2(130, 100), 15), zone(2, Vec2(100, 108), 20),
                                  zone(3, Vec2(95, 100), 20)};
  const auto d = rule_intermediate(Vec2(100, 100), Vec2(120, 100), obs);
  CHECK(d.which == EscapeCase::II);
  CHECK(d.obstacle == 3);
  CHECK(d.target->isApprox(Vec2(105, 100)));
  // Equal clearance: lower id wins.
  const auto tie = rule_intermediate(Vec2(0, 0), Vec2(50, 0),
                                     {zone(9, Vec2(5, 0), 10), zone(4, Vec2(-5, 0), 10)});
  CHECK(tie.obstacle == 4);
}

TEST_CASE("reflection is an involution") {
  Rng rng(51);
  for (int t = 0; t < 1000; ++t) {
    const Vec2 m = testing::random_point(rng, 0, 500), c = testing::random_point(rng, 0, 500);
    const double r = (c - m).norm() + 1;
    const auto d = rule_intermediate(m, m, {zone(1, c, r)});
    REQUIRE(d.which == EscapeCase::II);
    const auto back = rule_intermediate(m, m, {zone(1, *d.target, r)});
    CHECK((*back.target - c).norm() <= 1e-9 * std::max(1.0, c.norm()));
    CHECK(((*d.target - m).norm() - (c - m).norm()) == doctest::Approx(0).epsilon(1e-9).scale(1));
  }
}

TEST_CASE("arrow tip") {
  SimState s = state_with({zone(1, Vec2(500, 500), 30, Vec2(0, 6))}, Vec2(100, 100), Vec2(0, 1));
  CHECK(arrow_tip(s).isApprox(Vec2(100, 116)));
}

TEST_CASE("repulsion pushes away from nearby zones") {
  RuleOptions o;
  o.walls = false;
  o.lookahead = 0;
  o.forecast = 0;
  SimState s = state_with({zone(1, Vec2(110, 100), 20)}, Vec2(100, 100));
  CHECK(repulsion(s, o).isApprox(Vec2(-10, 0)));
  s.obstacles.push_back(zone(2, Vec2(90, 100), 20));
  CHECK(repulsion(s, o).norm() <= 1e-12);
  s.obstacles.pop_back();
  s.obstacles.push_back(zone(3, Vec2(400, 100), 20));
  CHECK(repulsion(s, o).isApprox(Vec2(-10, 0)));

  o.walls = true;
  SimState w = state_with({}, Vec2(20, 1000));
  CHECK(repulsion(w, o).x() == doctest::Approx(25 + 10 - 20));
  CHECK(repulsion(w, o).y() == 0);

  o.forecast = 1;
  o.walls = false;
  SimState f = state_with({zone(1, Vec2(115, 100), 20, Vec2(-5, 0))}, Vec2(100, 100));
  CHECK(repulsion(f, o).isApprox(Vec2(-10, 0)));
}

TEST_CASE("rule step never exceeds the robot speed") {
  Rng rng(52);
  RuleOptions opt;
  for (int t = 0; t < 2000; ++t) {
    std::vector<Obstacle> obs;
    for (int k = 0; k < 6; ++k)
      obs.push_back(zone(k, testing::random_point(rng, 0, 400), rng.uniform(20, 120),
                         Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5))));
    const double a = rng.uniform(0, 2 * std::numbers::pi);
    SimState s = state_with(obs, testing::random_point(rng, 0, 400), Vec2(std::cos(a), std::sin(a)));
    opt.commit_frames = 1 + int(rng.below(4));
    opt.repel = rng.bernoulli(0.5);
    RuleState rs;
    for (int f = 0; f < 3; ++f) {
      const auto mv = rule_step(rs, s, opt);
      if (mv) CHECK(mv->norm() <= s.robot_speed + 1e-9);
    }
  }
}

TEST_CASE("rule step commits for the configured frames") {
  RuleOptions opt;
  opt.repel = false;
  opt.commit_frames = 3;
  SimState s = state_with({zone(1, Vec2(150, 100), 60)}, Vec2(100, 100));
  RuleState rs;
  const auto first = rule_step(rs, s, opt);
  REQUIRE(first);
  CHECK(first->isApprox(Vec2(-10, 0)));
  CHECK(rs.active_case == EscapeCase::II);
  CHECK(rs.commit_frames_left == 2);
  s.obstacles.clear();
  CHECK(rule_step(rs, s, opt));
  CHECK(rule_step(rs, s, opt));
  CHECK(rs.commit_frames_left == 0);
  CHECK_FALSE(rule_step(rs, s, opt));
}

TEST_CASE("observation layout") {
  SimState s = state_with({zone(1, Vec2(1100, 1000), 30, Vec2(4, 0)),
                           zone(2, Vec2(1000, 950), 30, Vec2(0, -8))},
                          Vec2(1000, 1000));
  const Observation o = build_observation(s);
  const double dmax = std::hypot(2000.0, 2000.0);
  CHECK(dmax == doctest::Approx(2828.427).epsilon(1e-6));
  CHECK(o[0] == doctest::Approx(0));
  CHECK(o[1] == doctest::Approx(-50 / dmax));
  CHECK(o[2] == 0);
  CHECK(o[3] == -1);
  CHECK(o[4] == doctest::Approx(100 / dmax));
  CHECK(o[6] == doctest::Approx(0.5));
  CHECK(o.tail<8>().isZero());
}

TEST_CASE("observation ties go to the lower id and values stay in range") {
  SimState s = state_with({zone(7, Vec2(1100, 1000), 30), zone(3, Vec2(900, 1000), 30)},
                          Vec2(1000, 1000));
  const Observation o = build_observation(s);
  CHECK(o[0] < 0);
  CHECK(o[4] > 0);

  Rng rng(53);
  for (int t = 0; t < 500; ++t) {
    std::vector<Obstacle> obs;
    for (int k = 0, n = int(rng.below(10)); k < n; ++k)
      obs.push_back(zone(k, testing::random_point(rng, 0, 2000), 40,
                         Vec2(rng.uniform(-8, 8), rng.uniform(-8, 8))));
    const Observation x = build_observation(state_with(obs, testing::random_point(rng, 0, 2000)));
    CHECK(x.maxCoeff() <= 1);
    CHECK(x.minCoeff() >= -1);
  }
  CHECK(build_observation(state_with({}, Vec2(1, 1))).isZero());
}

TEST_CASE("action table") {
  CHECK(apply_action(0, 10) == Vec2::Zero());
  CHECK(apply_action(1, 10).isApprox(Vec2(10, 0)));
  CHECK(apply_action(3, 10).isApprox(Vec2(0, 10)));
  CHECK(apply_action(2, 10).isApprox(Vec2(10 / std::sqrt(2.0), 10 / std::sqrt(2.0))));
  for (int a = 1; a < kActionCount; ++a) {
    CHECK(apply_action(a, 10).norm() == doctest::Approx(10));
    const double ang = std::atan2(apply_action(a, 1).y(), apply_action(a, 1).x());
    CHECK(std::remainder(ang - (a - 1) * std::numbers::pi / 4, 2 * std::numbers::pi) ==
          doctest::Approx(0).scale(1));
  }
  CHECK_THROWS_AS(apply_action(9, 10), Error);
  CHECK_THROWS_AS(apply_action(-1, 10), Error);
}

TEST_CASE("greedy policy") {
  QNet<float> zero;
  CHECK(policy_act(zero, Observation::Zero()) == 0);
  QNet<float> net;
  net.bias(2)[5] = 1;
  CHECK(policy_act(PolicyHandle(net), Observation::Zero()) == 5);
  net.bias(2)[2] = 1;
  CHECK(policy_act(net, Observation::Zero()) == 2);
}

TEST_CASE("greedy action is invariant under positive affine maps of Q") {
  Rng rng(54);
  for (int t = 0; t < 20; ++t) {
    QNet<float> net(rng);
    QNet<float> scaled = net;
    scaled.weight(2) *= 2.0f;
    scaled.bias(2) = scaled.bias(2) * 2.0f + Eigen::VectorXf::Constant(9, 0.25f);
    for (int k = 0; k < 20; ++k) {
      Observation o;
      for (int i = 0; i < 16; ++i) o[i] = rng.uniform(-1, 1);
      const Eigen::VectorXf q = net.forward(o.cast<float>());
      Eigen::VectorXf sorted = q;
      std::sort(sorted.data(), sorted.data() + 9);
      if (sorted[8] - sorted[7] < 1e-4f) continue;
      CHECK(policy_act(scaled, o) == policy_act(net, o));
    }
  }
}

#include "agpnav/agp.hpp"
#include "agpnav/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace agpnav;
using agpnav::testing::sampled_clearance;

namespace {

// Clearance of the polyline against every zone, by dense sampling.
double min_zone_clearance(const std::vector<Vec2>& poly, const std::vector<Zone>& zones) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : zones) best = std::min(best, sampled_clearance(poly, z.center, z.radius));
  return best;
}

double line_distance(const Vec2& v, const Vec2& dir, const Vec2& c) {
  const Vec2 r = c - v;
  return std::abs(dir.x() * r.y() - dir.y() * r.x()) / dir.norm();
}

Scene arena(int n, std::uint64_t seed) {
  ArenaSpec spec;
  spec.n_obstacles = n;
  spec.seed = seed;
  return generate_arena(spec);
}

}  // namespace

TEST_CASE("pruning keeps zones near the ideal path") {
  const Vec2 s(0, 0), e(100, 0);
  const std::vector<Zone> mid{{1, Vec2(50, 0), 10}};
  const PruneResult p = prune_obstacles(mid, s, e, 3);
  REQUIRE(p.retained == std::vector<int>{1});
  CHECK(p.t[0] == doctest::Approx(0.5));

  CHECK(prune_obstacles({{2, Vec2(-20, 5), 10}}, s, e, 3).retained.empty());

  // Strip test with alpha = 3: 20 <= 30 keeps zone 1, 40 > 30 drops zone 3.
  const std::vector<Zone> fig{{1, Vec2(30, 20), 10}, {3, Vec2(60, 40), 10}};
  CHECK(prune_obstacles(fig, s, e, 3).retained == std::vector<int>{1});
}

TEST_CASE("pruning sorts by foot x") {
  const std::vector<Zone> z{{7, Vec2(80, 1), 5}, {2, Vec2(20, -1), 5}, {4, Vec2(50, 2), 5}};
  const auto p = prune_obstacles(z, Vec2(0, 0), Vec2(100, 0), 6);
  CHECK(p.retained == std::vector<int>{2, 4, 7});
}

TEST_CASE("tangent slopes") {
  const auto [a, b] = tangent_slopes(Vec2(0, 0), Vec2(10, 0), 5);
  CHECK(a == doctest::Approx(std::tan(std::numbers::pi / 6)));
  CHECK(b == doctest::Approx(-std::tan(std::numbers::pi / 6)));
  const auto [da, db] = tangent_directions(Vec2(0, 0), Vec2(0, 10), 5);
  CHECK(std::atan2(da.y(), da.x()) == doctest::Approx(std::numbers::pi / 2 + std::numbers::pi / 6));
  CHECK(std::atan2(db.y(), db.x()) == doctest::Approx(std::numbers::pi / 2 - std::numbers::pi / 6));
  CHECK_THROWS_AS(tangent_slopes(Vec2(0, 0), Vec2(3, 0), 5), Error);
}

TEST_CASE("tangent lines touch the circle") {
  Rng rng(21);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 v = testing::random_point(rng, -500, 500), c = testing::random_point(rng, -500, 500);
    const double d = (c - v).norm();
    if (d < 1e-3) continue;
    const double r = rng.uniform(0.0, 0.999) * d;
    const auto [a, b] = tangent_directions(v, c, r);
    CHECK(std::abs(line_distance(v, a, c) - r) <= 1e-9 * std::max(1.0, d));
    CHECK(std::abs(line_distance(v, b, c) - r) <= 1e-9 * std::max(1.0, d));
  }
}

TEST_CASE("intersection counting") {
  const Zone z{1, Vec2(5, 0), 2};
  CHECK(count_intersections(Vec2(0, 0), Vec2(10, 0), z) == 2);
  CHECK(count_intersections(Vec2(0, 2), Vec2(10, 2), z) == 1);
  CHECK(count_intersections(Vec2(0, 3), Vec2(10, 3), z) == 0);
  CHECK(count_intersections(Vec2(0, 0), Vec2(5, 0), z) == 1);
  CHECK(count_intersections(Vec2(4, 0), Vec2(6, 0), z) == 0);
}

TEST_CASE("waypoint insertion") {
  auto w = insert_waypoints({Vec2(0, 0), Vec2(10, 0)}, 5);
  REQUIRE(w.size() == 3);
  CHECK(w[1] == Vec2(5, 0));
  w = insert_waypoints({Vec2(0, 0), Vec2(3, 4)}, 10);
  CHECK(w == std::vector<Vec2>{Vec2(0, 0), Vec2(3, 4)});
  CHECK_THROWS_AS(insert_waypoints({Vec2(0, 0), Vec2(1, 1)}, 0), Error);
}

TEST_CASE("waypoint gaps never exceed h") {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Vec2> v;
    for (int k = 0, n = 2 + int(rng.below(6)); k < n; ++k) v.push_back(testing::random_point(rng, 0, 1000));
    const double h = rng.uniform(1, 100);
    const auto w = insert_waypoints(v, h);
    for (std::size_t k = 0; k + 1 < w.size(); ++k) CHECK((w[k + 1] - w[k]).norm() <= h + 1e-9);
    CHECK(w.front() == v.front());
    CHECK(w.back() == v.back());
    CHECK(polyline_length(w) == doctest::Approx(polyline_length(v)));
  }
}

TEST_CASE("plan without obstacles is the straight segment") {
  const Vec2 s(10, 20), e(700, 400);
  const PlannedPath p = plan_2d(std::vector<Zone>{}, s, e);
  REQUIRE(p.nodes.size() == 2);
  CHECK(p.nodes.front() == s);
  CHECK(p.nodes.back() == e);
  CHECK(p.length == doctest::Approx((e - s).norm()));
}

TEST_CASE("plan around a single centred obstacle") {
  const Vec2 s(0, 0), e(1000, 0);
  const std::vector<Zone> z{{1, Vec2(500, 0), 100}};
  const PlannedPath p = plan_2d(z, s, e);
  CHECK(p.length > 1000.0);
  CHECK(sampled_clearance(p.nodes, z[0].center, z[0].radius) >= -1e-6);
}

TEST_CASE("endpoint inside a zone is rejected") {
  const std::vector<Zone> z{{1, Vec2(0, 0), 50}};
  try {
    plan_2d(z, Vec2(10, 0), Vec2(500, 0));
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::EndpointInZone);
  }
  CHECK_THROWS_AS(plan_2d(z, Vec2(100, 0), Vec2(100, 0)), Error);
}

TEST_CASE("plans clear every zone on random arenas") {
  Rng rng(8);
  for (int n : {10, 20, 30, 40, 50, 60}) {
    for (int k = 0; k < 15; ++k) {
      const Scene sc = arena(n, rng.next());
      const Vec2 s = *sc.start, e = sc.targets[0].position;
      const PlannedPath p = plan_2d(sc, s, e);
      CHECK(min_zone_clearance(p.nodes, scene_zones(sc)) >= -1e-6);
      CHECK(p.nodes.front() == s);
      CHECK(p.nodes.back() == e);
      for (const Vec2& v : p.nodes) CHECK(sc.bounds().contains(v, 1e-6));
    }
  }
}

TEST_CASE("plans are deterministic") {
  const Scene sc = arena(40, 3);
  const std::string a = path_to_json(plan_2d(sc, *sc.start, sc.targets[0].position));
  for (int i = 0; i < 5; ++i) CHECK(path_to_json(plan_2d(sc, *sc.start, sc.targets[0].position)) == a);
}

TEST_CASE("zones outside the S-E span do not change the plan") {
  Rng rng(12);
  for (int k = 0; k < 30; ++k) {
    const Scene sc = arena(30, rng.next());
    auto zones = scene_zones(sc);
    const Vec2 s = *sc.start, e = sc.targets[0].position;
    const PlannedPath base = plan_2d(zones, s, e);
    const double t = rng.bernoulli(0.5) ? -0.4 : 1.4;
    zones.push_back({1000, s + t * (e - s), 40});
    const PlannedPath with = plan_2d(zones, s, e);
    CHECK(with.nodes == base.nodes);
  }
}

TEST_CASE("via-points become path vertices") {
  Rng rng(13);
  for (int k = 0; k < 30; ++k) {
    const Scene sc = arena(20, rng.next());
    const auto zones = scene_zones(sc);
    Vec2 via;
    bool free = false;
    while (!free) {
      via = testing::random_point(rng, 200, 1800);
      free = true;
      for (const auto& z : zones) free = free && (via - z.center).norm() > z.radius + 1;
    }
    AgpOptions o;
    o.via = {via};
    const PlannedPath p = plan_2d(sc, *sc.start, sc.targets[0].position, o);
    CHECK(std::find(p.nodes.begin(), p.nodes.end(), via) != p.nodes.end());
    CHECK(min_zone_clearance(p.nodes, zones) >= -1e-6);
  }
}

TEST_CASE("inflating an obstacle pushes the path away from it") {
  const Scene sc = arena(30, 30);
  const Vec2 s = *sc.start, e = sc.targets[0].position;
  const PlannedPath base = plan_2d(sc, s, e);
  const auto pr = prune_obstacles(scene_zones(sc), s, e, 6);
  REQUIRE(!pr.retained.empty());
  const Obstacle* o = sc.find(pr.retained[0]);
  AgpOptions opts;
  opts.inflation[o->id] = 150;
  const PlannedPath p = plan_2d(sc, s, e, opts);
  CHECK(sampled_clearance(p.nodes, o->center, o->safety_radius + 150) >= -1e-6);
  CHECK(sampled_clearance(p.nodes, o->center, o->safety_radius) >=
        sampled_clearance(base.nodes, o->center, o->safety_radius));
  opts.inflation[o->id] = -1;
  CHECK_THROWS_AS(plan_2d(sc, s, e, opts), Error);
}

TEST_CASE("3D plan without spheres") {
  const Vec3 s(1, 2, 3), e(400, 500, 600);
  const Plan3dResult r = plan_3d(s, e, {});
  CHECK(r.waypoints.front() == s);
  CHECK(r.waypoints.back() == e);
  CHECK(r.length == doctest::Approx((e - s).norm()));
  CHECK(r.best_plane >= 0);
}

TEST_CASE("sphere section") {
  PlaneSlice sl;
  sl.origin = Vec3::Zero();
  sl.e1 = Vec3::UnitX();
  sl.e2 = Vec3::UnitY();
  sl.normal = Vec3::UnitZ();
  slice_spheres(sl, {Sphere{Vec3(5, 0, 1), 2}}, 0.0);
  REQUIRE(sl.circles.size() == 1);
  CHECK(sl.circles[0].center.x() == doctest::Approx(5));
  CHECK(sl.circles[0].center.y() == doctest::Approx(0));
  CHECK(sl.circles[0].radius == doctest::Approx(std::sqrt(3.0)));
  PlaneSlice far = sl;
  far.circles.clear();
  slice_spheres(far, {Sphere{Vec3(5, 0, 3), 2}}, 0.0);
  CHECK(far.circles.empty());
}

TEST_CASE("slice frames are orthonormal and round-trip") {
  Rng rng(14);
  for (int k = 0; k < 50; ++k) {
    const Vec3 s(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
    const Vec3 e(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(-100, 100));
    for (int i = 0; i < 16; ++i) {
      const PlaneSlice sl = make_slice(s, e, i, 16);
      CHECK(std::abs(sl.e1.dot(sl.e2)) < 1e-12);
      CHECK(sl.e1.dot((e - s).normalized()) == doctest::Approx(1.0));
      const Vec2 q(rng.uniform(-500, 500), rng.uniform(-500, 500));
      CHECK((sl.project(sl.lift(q)) - q).norm() <= 1e-9);
      CHECK((sl.lift(sl.project(e)) - e).norm() <= 1e-9);
    }
  }
}

TEST_CASE("3D waypoints clear every sphere") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Scene3d sc = random_scene3d(30, seed);
    Plan3dOptions o;
    o.robot_radius = sc.robot_radius;
    const Plan3dResult r = plan_3d(sc.start, sc.end, sc.spheres, o);
    for (const Vec3& w : r.waypoints)
      for (const auto& sp : sc.spheres)
        CHECK((w - sp.center).norm() >= sp.radius + sc.robot_radius - 1e-6);
    CHECK((r.waypoints.front() - sc.start).norm() < 1e-9);
    CHECK((r.waypoints.back() - sc.end).norm() < 1e-9);
  }
}

TEST_CASE("best plane is invariant under uniform rescaling") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scene3d sc = random_scene3d(30, seed);
    Plan3dOptions o;
    o.robot_radius = sc.robot_radius;
    const Plan3dResult r = plan_3d(sc.start, sc.end, sc.spheres, o);
    for (double k : {0.5, 2.0}) {
      auto spheres = sc.spheres;
      for (auto& sp : spheres) {
        sp.center *= k;
        sp.radius *= k;
      }
      Plan3dOptions ok = o;
      ok.robot_radius *= k;
      ok.spacing *= k;
      const Plan3dResult rk = plan_3d(k * sc.start, k * sc.end, spheres, ok);
      // Planes whose lengths tie to rounding may swap, so compare per plane.
      REQUIRE(rk.slice_lengths.size() == r.slice_lengths.size());
      for (std::size_t i = 0; i < r.slice_lengths.size(); ++i) {
        if (std::isinf(r.slice_lengths[i]))
          CHECK(std::isinf(rk.slice_lengths[i]));
        else
          CHECK(rk.slice_lengths[i] == doctest::Approx(k * r.slice_lengths[i]));
      }
      CHECK(rk.slice_lengths[std::size_t(r.best_plane)] == doctest::Approx(rk.length));
      CHECK(rk.length == doctest::Approx(k * r.length));
    }
  }
}

TEST_CASE("3D scene JSON") {
  const Scene3d sc = scene3d_from_json(
      R"({"start":[0,0,0],"end":[100,0,0],"robot_radius":2,"spheres":[{"center":[50,0,0],"r":10}]})");
  CHECK(sc.spheres.size() == 1);
  CHECK(sc.robot_radius == 2);
  const Plan3dResult r = plan_3d(sc.start, sc.end, sc.spheres, {sc.robot_radius, 8});
  for (const Vec3& w : r.waypoints) CHECK((w - Vec3(50, 0, 0)).norm() >= 12 - 1e-6);
  CHECK_THROWS_AS(scene3d_from_json(R"({"start":[0,0],"end":[1,1,1]})"), Error);
}

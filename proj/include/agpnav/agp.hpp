#pragma once

#include "agpnav/geometry.hpp"
#include "agpnav/scene.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace agpnav {

/// A circular keep-out region seen by a planner.
struct Zone {
  int id = 0;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  Circle circle() const { return {center, radius}; }
};

/// Safety zones of every obstacle in the scene.
std::vector<Zone> scene_zones(const Scene& scene);

/// Additive radius per obstacle id (r' = r + delta). Missing ids mean 0.
using InflationSpec = std::map<int, double>;

struct PruneResult {
  std::vector<int> retained;  // obstacle ids
  std::vector<Vec2> feet;     // projection of each center onto S->E
  std::vector<double> t;      // foot parameter along S->E
};

/// Keeps zones whose foot lies on [S, E] and whose center is within
/// alpha * r of it. Sorted by foot x, then foot y, then id.
PruneResult prune_obstacles(const std::vector<Zone>& zones, const Vec2& s, const Vec2& e,
                            double alpha);

/// Slopes tan(theta +- asin(r/d)) of the two tangents from v to the circle.
/// A vertical tangent is reported as +infinity.
std::pair<double, double> tangent_slopes(const Vec2& v, const Vec2& c, double r);

/// Unit directions of the two tangents from v to the circle, in the same
/// order as tangent_slopes.
std::pair<Vec2, Vec2> tangent_directions(const Vec2& v, const Vec2& c, double r);

/// Exact number of crossings of the closed segment with the circle boundary;
/// a tangent touch counts once.
int count_intersections(const Vec2& a, const Vec2& b, const Zone& zone);

struct PlannedPath {
  std::vector<Vec2> nodes;
  std::vector<Vec2> waypoints;
  double length = 0.0;
};

struct AgpOptions {
  double alpha = 6.0;
  double spacing = 20.0;  // waypoint spacing h, px
  InflationSpec inflation;
  std::vector<Vec2> via;
  std::optional<Bounds> bounds;  // nodes must stay inside when set
};

/// Splits each segment of V into ceil(len / h) equal pieces.
std::vector<Vec2> insert_waypoints(const std::vector<Vec2>& nodes, double h);

double polyline_length(const std::vector<Vec2>& points);

/// Analytic-geometry planner over circular zones.
PlannedPath plan_2d(const std::vector<Zone>& zones, const Vec2& s, const Vec2& e,
                    const AgpOptions& options = {});

/// Same, over the scene's safety zones and bounded by the arena.
PlannedPath plan_2d(const Scene& scene, const Vec2& s, const Vec2& e, AgpOptions options = {});

std::string path_to_json(const PlannedPath& path);

// ---------------------------------------------------------------------------
// 3D

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;  // physical radius; the robot radius is added by plan_3d
};

/// A cutting plane through S containing the S->E direction.
struct PlaneSlice {
  int index = 0;
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 normal = Vec3::UnitZ();
  std::vector<Zone> circles;  // sphere sections in (u, v)

  Vec2 project(const Vec3& p) const { return {e1.dot(p - origin), e2.dot(p - origin)}; }
  Vec3 lift(const Vec2& q) const { return origin + q.x() * e1 + q.y() * e2; }
};

/// The i-th of n planes rotated about S->E by 2*pi*i/n.
PlaneSlice make_slice(const Vec3& s, const Vec3& e, int index, int n_planes);

/// Adds the section of each sphere (radius + robot radius) cut by the plane.
void slice_spheres(PlaneSlice& slice, const std::vector<Sphere>& spheres, double robot_radius);

struct Plan3dOptions {
  double robot_radius = 0.0;
  int n_planes = 16;
  double spacing = 20.0;
  double alpha = 6.0;
};

struct Plan3dResult {
  std::vector<Vec3> waypoints;
  double length = 0.0;
  int best_plane = -1;
  std::vector<double> slice_lengths;       // +inf for failed slices
  std::vector<std::string> slice_errors;   // empty for successful slices
};

Plan3dResult plan_3d(const Vec3& s, const Vec3& e, const std::vector<Sphere>& spheres,
                     const Plan3dOptions& options = {});

std::string path3d_to_json(const Plan3dResult& result);

struct Scene3d {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  double robot_radius = 0.0;
  std::vector<Sphere> spheres;
};

/// {"start": [x,y,z], "end": [x,y,z], "robot_radius": R,
///  "spheres": [{"center": [x,y,z], "r": r}, ...]}
Scene3d scene3d_from_json(const std::string& text);

/// Spheres of radius 30..80 in a 1000^3 box, start and end near opposite
/// corners and outside every inflated sphere.
Scene3d random_scene3d(int n_spheres, std::uint64_t seed, double robot_radius = 25.0);

}  // namespace agpnav

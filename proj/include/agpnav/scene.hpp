#pragma once

#include "agpnav/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace agpnav {

enum class ObstacleKind { Static, Dynamic, BoundaryCell };

const char* to_string(ObstacleKind kind);
ObstacleKind obstacle_kind_from_string(const std::string& s);

struct Obstacle {
  int id = 0;
  Vec2 center = Vec2::Zero();
  double physical_radius = 0.0;  // px
  double safety_radius = 0.0;    // px, >= physical_radius
  Vec2 velocity = Vec2::Zero();  // px / frame
  ObstacleKind kind = ObstacleKind::Static;

  Circle zone() const { return {center, safety_radius}; }
  bool operator==(const Obstacle&) const = default;
};

/// Background flow acting on the robot. `speed` in um/s.
struct FlowModel {
  double speed = 0.0;
  Vec2 direction = Vec2(1.0, 0.0);
  double wall_coupling = 1.0;  // alpha_c in (0, 1]

  bool operator==(const FlowModel&) const = default;
};

/// A navigation goal; moving targets advance by `velocity` each frame.
struct Target {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  bool operator==(const Target&) const = default;
};

struct Scene {
  double width = 0.0;
  double height = 0.0;
  std::vector<Obstacle> obstacles;
  std::vector<std::vector<Vec2>> boundaries;
  std::optional<FlowModel> flow;
  std::uint64_t seed = 0;
  // Optional scenario data (extension keys of the scene document).
  std::optional<Vec2> start;
  std::vector<Target> targets;

  Bounds bounds() const { return {Vec2::Zero(), Vec2(width, height)}; }
  const Obstacle* find(int id) const;
  int next_id() const;
  bool operator==(const Scene&) const = default;
};

/// Checks the Scene invariants (centers inside bounds, unique ids,
/// safety_radius >= physical_radius, flow coefficients). Throws on failure.
void validate(const Scene& scene);

/// Occupancy bitmap in row-major order.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h);
  bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[std::size_t(y) * width + x] = v ? 1 : 0; }
};

/// Safety radius from an axis-aligned bounding box: half the diagonal plus
/// the robot radius.
double bbox_safety_radius(double w, double h, double robot_radius);

/// Safety radius of a circular obstacle: obstacle radius plus robot radius.
double circle_safety_radius(double obstacle_radius, double robot_radius);

/// One static obstacle per 8-connected foreground component. Ids are
/// assigned 1, 2, ... in row-major order of each component's first pixel.
std::vector<Obstacle> extract_obstacles(const BinaryMask& mask, double robot_radius);

/// Cells of side `cell` (aligned to the origin) crossed by the polyline
/// `contour` become boundary-cell obstacles. Ids start at `first_id`.
std::vector<Obstacle> discretize_boundary(const std::vector<Vec2>& contour, double cell,
                                          double robot_radius, int first_id = 1);

/// Grid cells (column, row) crossed by the polyline, in first-visit order
/// without duplicates.
std::vector<std::pair<long, long>> boundary_cells(const std::vector<Vec2>& contour,
                                                  double cell);

struct ArenaSpec {
  int n_obstacles = 10;
  double obstacle_radius = 50.0;
  double robot_radius = 25.0;
  double width = 2000.0;
  double height = 2000.0;
  std::uint64_t seed = 1;
  int max_attempts = 10000;  // per obstacle
};

/// Benchmark start/end convention: upper-left and lower-right corners, inset
/// by 5% of the arena size.
Vec2 arena_start(double width, double height);
Vec2 arena_end(double width, double height);

/// Seeded static arena of circular obstacles. Centers are rejection-sampled
/// so safety zones lie inside the arena, do not overlap each other, and keep
/// circle_safety_radius + R of clearance around the start and end corners.
Scene generate_arena(const ArenaSpec& spec);

void scene_save(const Scene& scene, const std::filesystem::path& path);
Scene scene_load(const std::filesystem::path& path);
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

/// Reads 8-bit PGM (P5/P2) or 1-bit PBM (P4/P1). Gray values >= 128 and PBM
/// ones are foreground.
BinaryMask load_mask(const std::filesystem::path& path);
BinaryMask parse_mask(const std::string& bytes);

}  // namespace agpnav

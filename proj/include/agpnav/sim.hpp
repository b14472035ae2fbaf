#pragma once

#include "agpnav/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace agpnav {

struct SimConfig {
  double width = 2000.0;
  double height = 2000.0;
  double robot_radius = 25.0;  // R, px
  double robot_speed = 10.0;   // v_m, px/frame
  int n_dynamic = 50;
  int n_static = 5;
  double radius_min = 25.0;
  double radius_max = 50.0;
  double speed_min = 4.0;  // px/frame
  double speed_max = 8.0;
  int directions = 16;          // evenly spaced headings for dynamic obstacles
  double frame_period = 0.04;   // s, metadata for unit conversion only
  Vec2 flow_drift = Vec2::Zero();  // px/frame added to every robot move
  std::uint64_t seed = 1;
};

void validate(const SimConfig& config);

enum class EventKind {
  ZoneEnter,
  ZoneExit,
  Collision,
  TargetReached,
  Replan,
  ModeSwitch,
  NavigationFailed,
};

const char* to_string(EventKind kind);

struct Event {
  long frame = 0;
  EventKind kind = EventKind::ZoneEnter;
  int id = -1;         // obstacle or target id when relevant
  std::string detail;  // e.g. "global->local"
};

struct SimState {
  long frame = 0;
  Vec2 robot = Vec2::Zero();
  Vec2 robot_dir = Vec2(1.0, 0.0);
  std::vector<Obstacle> obstacles;  // safety_radius holds r_sim
  std::vector<Target> targets;
  std::vector<Event> events;  // raised by the latest step
  bool collided = false;      // robot overlaps an obstacle after the latest step
  long collisions = 0;        // contact onsets so far

  Bounds bounds;
  double robot_radius = 25.0;
  double robot_speed = 10.0;
  Vec2 flow_drift = Vec2::Zero();
  double v_cmax = 0.0;  // fastest obstacle speed
  double buffer = 0.0;  // delta = v_m + v_cmax

  std::vector<int> in_contact;  // obstacle ids overlapping the robot
  bool in_zone = false;         // min_clearance < 0 after the latest step
};

/// r_sim = r + R + (v_m + v_cmax).
double sim_zone_radius(double physical_radius, double robot_radius, double robot_speed,
                       double v_cmax);

/// Builds a state from scene obstacles: static and boundary obstacles keep
/// zero velocity, every zone is re-inflated to r_sim.
SimState make_sim_state(const Scene& scene, const Vec2& robot, double robot_radius,
                        double robot_speed, const Vec2& flow_drift = Vec2::Zero());

/// Randomly placed dynamic and static circles. No two bodies overlap and no
/// zone covers any of the `keep_clear` points or the robot.
SimState generate_sim(const SimConfig& config, const Vec2& robot,
                      const std::vector<Vec2>& keep_clear = {});

/// Advances one frame in place. The commanded displacement may not exceed v_m.
void step_in_place(SimState& state, const Vec2& displacement);

SimState step(const SimState& state, const Vec2& displacement);

/// phi = min_i (|m - c_i| - r_sim_i); +infinity without obstacles.
double min_clearance(const Vec2& robot, const std::vector<Obstacle>& obstacles);
inline double min_clearance(const SimState& s) { return min_clearance(s.robot, s.obstacles); }

/// V_net = alpha_c * 2 pi R f - u_flow (um/s for R in um, f in Hz).
double net_velocity(double f, double radius, double alpha_c, double u_flow);

/// Scene with every boundary polyline discretized into cells of side `cell`.
Scene load_phantom(const std::filesystem::path& path, double robot_radius, double cell = 30.0);
Scene add_boundary_cells(Scene scene, double robot_radius, double cell = 30.0);

/// One JSONL trajectory record (no trailing newline).
std::string frame_record(const SimState& state, const std::string& mode);

std::string event_json(const Event& event);

}  // namespace agpnav

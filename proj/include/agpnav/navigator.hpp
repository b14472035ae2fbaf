#pragma once

#include "agpnav/agp.hpp"
#include "agpnav/escape.hpp"
#include "agpnav/sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace agpnav {

enum class Controller { None, Rule, Rl };
enum class ReplanPolicy { EveryFrame, OnExit };
enum class NavMode { Global, Local };

const char* to_string(Controller c);
const char* to_string(NavMode m);
Controller controller_from_string(const std::string& s);

struct NavConfig {
  double arrival_radius = 10.0;  // gamma, px
  double alpha = 6.0;
  double spacing = 20.0;         // AGP waypoint spacing, px
  double plan_margin = 30.0;     // planning zones are r_sim + margin
  Controller controller = Controller::Rule;
  ReplanPolicy replan = ReplanPolicy::EveryFrame;
  bool use_planner = true;       // false: head straight for the target
  RuleOptions rule;
  long timeout_frames = 3000;
  double field_amplitude = 1.0;  // B0, mT
  double field_frequency = 35.0; // f, Hz
  double frame_period = 0.04;    // s
};

struct ActuationCmd {
  double azimuth = 0.0;             // alpha, rad
  double tilt = 1.5707963267948966; // beta = pi/2 for planar rolling
  double amplitude = 0.0;           // B0; zero while holding position
  double omega = 0.0;               // rad/s
};

struct NavState {
  NavMode mode = NavMode::Global;
  std::size_t waypoint = 0;
  PlannedPath plan;
  bool have_plan = false;
  bool plan_failed = false;
  long frames_in_local = 0;
  RuleState rule;
  std::size_t target = 0;           // index into SimState::targets
  bool finished = false;
  bool timed_out = false;
  long frames = 0;
  std::string replan_reason = "initial";  // pending forced replan
  std::vector<Vec2> via;
  InflationSpec inflation;
  std::string local_label;          // "I", "II" or "rl" while local
};

struct NavOutput {
  Vec2 displacement = Vec2::Zero();
  ActuationCmd command;
  std::vector<Event> events;  // stamped with the upcoming frame
};

/// (theta_j, d_j) = (atan2(w - m), |w - m|); (0, 0) when m == w.
std::pair<double, double> track_bearing(const Vec2& m, const Vec2& w);

/// B(t) for beta = pi/2 with alpha = theta + pi/2:
/// B0 (sin a sin wt, -cos a sin wt, cos wt).
Vec3 field_command(double theta, double b0, double omega, double t);

/// Full-form rotating field for arbitrary azimuth alpha and tilt beta.
Vec3 rotating_field(double alpha, double beta, double b0, double omega, double t);

/// Planning zones: r_sim + margin and inflation, shrunk just enough that the
/// robot, the goal and every via-point lie outside.
std::vector<Zone> planning_zones(const SimState& state, const NavConfig& config,
                                 const InflationSpec& inflation, const Vec2& goal,
                                 const std::vector<Vec2>& via = {});

/// One control frame: decides the robot displacement for the next sim step.
NavOutput nav_step(const SimState& state, NavState& nav, const NavConfig& config,
                   const QNet<float>* policy = nullptr);

}  // namespace agpnav

#include "agpnav/navigator.hpp"

#include "agpnav/error.hpp"

#include <cmath>
#include <numbers>

namespace agpnav {

const char* to_string(Controller c) {
  switch (c) {
    case Controller::None: return "none";
    case Controller::Rule: return "rule";
    case Controller::Rl: return "rl";
  }
  return "?";
}

const char* to_string(NavMode m) { return m == NavMode::Global ? "global" : "local"; }

Controller controller_from_string(const std::string& s) {
  if (s == "none") return Controller::None;
  if (s == "rule") return Controller::Rule;
  if (s == "rl") return Controller::Rl;
  throw Error(ErrorKind::InvalidArgument, "unknown controller '" + s + "' (none|rule|rl)");
}

std::pair<double, double> track_bearing(const Vec2& m, const Vec2& w) {
  const Vec2 d = w - m;
  const double dist = d.norm();
  if (dist == 0.0) return {0.0, 0.0};
  return {std::atan2(d.y(), d.x()), dist};
}

Vec3 field_command(double theta, double b0, double omega, double t) {
  const double a = theta + std::numbers::pi / 2.0;
  const double s = std::sin(omega * t);
  return b0 * Vec3(std::sin(a) * s, -std::cos(a) * s, std::cos(omega * t));
}

Vec3 rotating_field(double alpha, double beta, double b0, double omega, double t) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  return b0 * Vec3(-std::cos(beta) * std::cos(alpha) * c + std::sin(alpha) * s,
                   -std::cos(beta) * std::sin(alpha) * c - std::cos(alpha) * s,
                   std::sin(beta) * c);
}

std::vector<Zone> planning_zones(const SimState& state, const NavConfig& config,
                                 const InflationSpec& inflation, const Vec2& goal,
                                 const std::vector<Vec2>& via) {
  constexpr double kGap = 1e-3;
  std::vector<Zone> zones;
  zones.reserve(state.obstacles.size());
  for (const auto& o : state.obstacles) {
    double r = o.safety_radius + config.plan_margin;
    if (auto it = inflation.find(o.id); it != inflation.end()) r += it->second;
    auto shrink = [&](const Vec2& p) { r = std::min(r, (p - o.center).norm() - kGap); };
    shrink(state.robot);
    shrink(goal);
    for (const Vec2& v : via) shrink(v);
    if (r > 0.0) zones.push_back({o.id, o.center, r});
  }
  return zones;
}

namespace {

ActuationCmd actuation(const Vec2& move, const NavConfig& c) {
  ActuationCmd cmd;
  cmd.omega = 2.0 * std::numbers::pi * c.field_frequency;
  if (move.squaredNorm() > 0.0) {
    cmd.azimuth = std::atan2(move.y(), move.x()) + std::numbers::pi / 2.0;
    cmd.amplitude = c.field_amplitude;
  }
  return cmd;
}

Vec2 head_to(const Vec2& m, const Vec2& w, double speed) {
  const auto [theta, d] = track_bearing(m, w);
  const double len = std::min(speed, d);
  return len * Vec2(std::cos(theta), std::sin(theta));
}

}  // namespace

NavOutput nav_step(const SimState& state, NavState& nav, const NavConfig& config,
                   const QNet<float>* policy) {
  if (!(config.arrival_radius > 0.0))
    throw Error(ErrorKind::InvalidArgument, "arrival radius must be positive");
  NavOutput out;
  auto emit = [&](EventKind kind, int id, std::string detail) {
    out.events.push_back({state.frame, kind, id, std::move(detail)});
  };
  auto finish = [&](const Vec2& move) {
    out.displacement = move;
    out.command = actuation(move, config);
    return out;
  };
  if (nav.finished) return finish(Vec2::Zero());
  ++nav.frames;

  const Vec2 m = state.robot;
  while (nav.target < state.targets.size() &&
         (state.targets[nav.target].position - m).norm() <= config.arrival_radius) {
    emit(EventKind::TargetReached, int(nav.target), {});
    ++nav.target;
    nav.have_plan = false;
    nav.replan_reason = "target";
  }
  if (nav.target >= state.targets.size()) {
    nav.finished = true;
    return finish(Vec2::Zero());
  }
  const Vec2 goal = state.targets[nav.target].position;

  if (!nav.timed_out && nav.frames > config.timeout_frames) {
    nav.timed_out = true;
    emit(EventKind::NavigationFailed, int(nav.target), "timeout");
  }

  const double phi = min_clearance(state);
  if (nav.mode == NavMode::Global && config.controller != Controller::None && phi < 0.0) {
    nav.mode = NavMode::Local;
    nav.rule = {};
    nav.frames_in_local = 0;
    emit(EventKind::ModeSwitch, -1, "global->local");
  }

  if (nav.mode == NavMode::Local) {
    std::optional<Vec2> move;
    if (config.controller == Controller::Rule) {
      move = rule_step(nav.rule, state, config.rule);
      nav.local_label = to_string(nav.rule.active_case);
    } else if (config.controller == Controller::Rl && phi < 0.0) {
      if (!policy) throw Error(ErrorKind::InvalidArgument, "rl controller without a policy");
      move = apply_action(policy_act(*policy, build_observation(state)), state.robot_speed);
      nav.local_label = "rl";
    }
    if (move) {
      ++nav.frames_in_local;
      return finish(*move);
    }
    nav.mode = NavMode::Global;
    nav.rule = {};
    nav.local_label.clear();
    nav.have_plan = false;
    nav.replan_reason = "exit";
    emit(EventKind::ModeSwitch, -1, "local->global");
  }

  if (!config.use_planner) return finish(head_to(m, goal, state.robot_speed));

  while (!nav.via.empty() && (nav.via.front() - m).norm() <= config.arrival_radius)
    nav.via.erase(nav.via.begin());

  const bool replan = config.replan == ReplanPolicy::EveryFrame || !nav.have_plan ||
                      !nav.replan_reason.empty();
  if (replan) {
    AgpOptions opts;
    opts.alpha = config.alpha;
    opts.spacing = config.spacing;
    opts.via = nav.via;
    opts.bounds = state.bounds;
    try {
      nav.plan = plan_2d(planning_zones(state, config, nav.inflation, goal, nav.via), m, goal, opts);
      nav.have_plan = true;
      nav.plan_failed = false;
      nav.waypoint = 0;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PlanFailed && e.kind() != ErrorKind::EndpointInZone &&
          e.kind() != ErrorKind::TangentInfeasible)
        throw;
      nav.have_plan = false;
      nav.plan_failed = true;
      return finish(Vec2::Zero());
    }
    if (!nav.replan_reason.empty()) {
      emit(EventKind::Replan, -1, nav.replan_reason);
      nav.replan_reason.clear();
    }
  }

  const auto& w = nav.plan.waypoints;
  while (nav.waypoint + 1 < w.size() && (w[nav.waypoint] - m).norm() <= config.arrival_radius)
    ++nav.waypoint;
  return finish(head_to(m, w[nav.waypoint], state.robot_speed));
}

}  // namespace agpnav

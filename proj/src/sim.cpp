#include "agpnav/sim.hpp"

#include "agpnav/error.hpp"
#include "agpnav/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace agpnav {

using nlohmann::json;

namespace {

bool is_mobile(const Obstacle& o) { return o.kind == ObstacleKind::Dynamic; }

// Mirror a body back inside the arena and point the normal velocity inward.
void reflect_walls(Obstacle& o, const Bounds& b) {
  const double r = o.physical_radius;
  for (int k = 0; k < 2; ++k) {
    const double lo = b.min[k] + r;
    const double hi = b.max[k] - r;
    if (lo > hi) {
      o.center[k] = 0.5 * (b.min[k] + b.max[k]);
      continue;
    }
    if (o.center[k] < lo) {
      o.center[k] = std::min(2.0 * lo - o.center[k], hi);
      o.velocity[k] = std::abs(o.velocity[k]);
    } else if (o.center[k] > hi) {
      o.center[k] = std::max(2.0 * hi - o.center[k], lo);
      o.velocity[k] = -std::abs(o.velocity[k]);
    }
  }
}

void clamp_inside(Vec2& p, double r, const Bounds& b) {
  for (int k = 0; k < 2; ++k) {
    const double lo = b.min[k] + r;
    const double hi = b.max[k] - r;
    p[k] = lo > hi ? 0.5 * (b.min[k] + b.max[k]) : std::clamp(p[k], lo, hi);
  }
}

// Specular bounce: each body reverses the part of its velocity that points
// at the other one. Speeds are unchanged; overlapping bodies are pushed apart.
void resolve_pair(Obstacle& a, Obstacle& b) {
  const bool ma = is_mobile(a);
  const bool mb = is_mobile(b);
  if (!ma && !mb) return;
  Vec2 d = b.center - a.center;
  const double reach = a.physical_radius + b.physical_radius;
  const double dist2 = d.squaredNorm();
  if (dist2 >= reach * reach) return;
  const double dist = std::sqrt(dist2);
  const Vec2 n = dist > 0.0 ? Vec2(d / dist) : Vec2(1.0, 0.0);
  if (ma) {
    const double vn = a.velocity.dot(n);
    if (vn > 0.0) a.velocity -= 2.0 * vn * n;
  }
  if (mb) {
    const double vn = b.velocity.dot(n);
    if (vn < 0.0) b.velocity -= 2.0 * vn * n;
  }
  const double overlap = reach - dist;
  if (ma && mb) {
    a.center -= 0.5 * overlap * n;
    b.center += 0.5 * overlap * n;
  } else if (ma) {
    a.center -= overlap * n;
  } else {
    b.center += overlap * n;
  }
}

double fastest(const std::vector<Obstacle>& obstacles) {
  double v = 0.0;
  for (const auto& o : obstacles) v = std::max(v, o.velocity.norm());
  return v;
}

void update_zone_flags(SimState& s, bool emit) {
  double phi = std::numeric_limits<double>::infinity();
  int nearest = -1;
  for (const auto& o : s.obstacles) {
    const double c = (s.robot - o.center).norm() - o.safety_radius;
    if (c < phi) {
      phi = c;
      nearest = o.id;
    }
  }
  const bool inside = phi < 0.0;
  if (emit && inside != s.in_zone)
    s.events.push_back({s.frame, inside ? EventKind::ZoneEnter : EventKind::ZoneExit,
                        inside ? nearest : -1, {}});
  s.in_zone = inside;
}

void update_contacts(SimState& s, bool emit) {
  std::vector<int> now;
  for (const auto& o : s.obstacles) {
    const double reach = o.physical_radius + s.robot_radius;
    if ((s.robot - o.center).squaredNorm() < reach * reach) now.push_back(o.id);
  }
  if (emit) {
    for (int id : now) {
      if (std::find(s.in_contact.begin(), s.in_contact.end(), id) == s.in_contact.end()) {
        s.events.push_back({s.frame, EventKind::Collision, id, {}});
        ++s.collisions;
      }
    }
  }
  s.collided = !now.empty();
  s.in_contact = std::move(now);
}

}  // namespace

void validate(const SimConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (!(c.width > 0.0) || !(c.height > 0.0)) bad("arena size must be positive");
  if (!(c.robot_radius >= 0.0) || !(c.robot_speed > 0.0)) bad("robot radius/speed");
  if (c.n_dynamic < 0 || c.n_static < 0) bad("obstacle counts must be non-negative");
  if (!(c.radius_min > 0.0) || c.radius_max < c.radius_min) bad("obstacle radius range");
  if (!(c.speed_min > 0.0) || c.speed_max < c.speed_min) bad("obstacle speed range");
  if (c.directions < 1) bad("direction set must be non-empty");
  if (!(c.frame_period > 0.0)) bad("frame period must be positive");
  if (!c.flow_drift.allFinite()) bad("flow drift must be finite");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ZoneEnter: return "zone-enter";
    case EventKind::ZoneExit: return "zone-exit";
    case EventKind::Collision: return "collision";
    case EventKind::TargetReached: return "target-reached";
    case EventKind::Replan: return "replan";
    case EventKind::ModeSwitch: return "mode-switch";
    case EventKind::NavigationFailed: return "navigation-failed";
  }
  return "?";
}

double sim_zone_radius(double physical_radius, double robot_radius, double robot_speed,
                       double v_cmax) {
  return physical_radius + robot_radius + robot_speed + v_cmax;
}

SimState make_sim_state(const Scene& scene, const Vec2& robot, double robot_radius,
                        double robot_speed, const Vec2& flow_drift) {
  if (!(robot_speed > 0.0) || !(robot_radius >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "robot radius/speed");
  SimState s;
  s.bounds = scene.bounds();
  s.robot = robot;
  s.robot_radius = robot_radius;
  s.robot_speed = robot_speed;
  s.flow_drift = flow_drift;
  s.obstacles = scene.obstacles;
  for (auto& o : s.obstacles)
    if (!is_mobile(o)) o.velocity = Vec2::Zero();
  s.targets = scene.targets;
  s.v_cmax = fastest(s.obstacles);
  s.buffer = robot_speed + s.v_cmax;
  for (auto& o : s.obstacles)
    o.safety_radius = sim_zone_radius(o.physical_radius, robot_radius, robot_speed, s.v_cmax);
  update_zone_flags(s, false);
  update_contacts(s, false);
  return s;
}

SimState generate_sim(const SimConfig& config, const Vec2& robot,
                      const std::vector<Vec2>& keep_clear) {
  validate(config);
  Rng rng(config.seed);
  const double buffer = config.robot_radius + config.robot_speed + config.speed_max;
  std::vector<Obstacle> placed;
  const int total = config.n_dynamic + config.n_static;
  constexpr int kAttempts = 10000;
  for (int i = 0; i < total; ++i) {
    Obstacle o;
    o.id = i + 1;
    o.physical_radius = rng.uniform(config.radius_min, config.radius_max);
    const double r = o.physical_radius;
    bool ok = false;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      o.center = Vec2(rng.uniform(r, config.width - r), rng.uniform(r, config.height - r));
      ok = (o.center - robot).norm() > r + buffer;
      for (const Vec2& p : keep_clear) ok = ok && (o.center - p).norm() > r + buffer;
      for (const auto& q : placed)
        ok = ok && (o.center - q.center).norm() >= r + q.physical_radius;
    }
    if (!ok) throw Error(ErrorKind::GenerationFailed, "could not place obstacle " + std::to_string(o.id));
    if (i < config.n_dynamic) {
      o.kind = ObstacleKind::Dynamic;
      const double heading =
          2.0 * std::numbers::pi * double(rng.below(std::uint64_t(config.directions))) /
          config.directions;
      const double speed = rng.uniform(config.speed_min, config.speed_max);
      o.velocity = speed * Vec2(std::cos(heading), std::sin(heading));
    } else {
      o.kind = ObstacleKind::Static;
    }
    placed.push_back(o);
  }
  Scene scene;
  scene.width = config.width;
  scene.height = config.height;
  scene.seed = config.seed;
  scene.obstacles = std::move(placed);
  return make_sim_state(scene, robot, config.robot_radius, config.robot_speed,
                        config.flow_drift);
}

void step_in_place(SimState& s, const Vec2& displacement) {
  if (!displacement.allFinite() || displacement.norm() > s.robot_speed + 1e-9)
    throw Error(ErrorKind::InvalidCommand, "displacement exceeds robot speed");
  s.events.clear();
  ++s.frame;

  for (auto& o : s.obstacles) {
    if (!is_mobile(o)) continue;
    o.center += o.velocity;
    reflect_walls(o, s.bounds);
  }
  const std::size_t n = s.obstacles.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) resolve_pair(s.obstacles[i], s.obstacles[j]);
  for (auto& o : s.obstacles)
    if (is_mobile(o)) clamp_inside(o.center, o.physical_radius, s.bounds);

  for (auto& t : s.targets) {
    t.position += t.velocity;
    for (int k = 0; k < 2; ++k) {
      if (t.position[k] < s.bounds.min[k]) {
        t.position[k] = 2.0 * s.bounds.min[k] - t.position[k];
        t.velocity[k] = std::abs(t.velocity[k]);
      } else if (t.position[k] > s.bounds.max[k]) {
        t.position[k] = 2.0 * s.bounds.max[k] - t.position[k];
        t.velocity[k] = -std::abs(t.velocity[k]);
      }
    }
    clamp_inside(t.position, 0.0, s.bounds);
  }

  const double len = displacement.norm();
  if (len > 0.0) s.robot_dir = displacement / len;
  s.robot += displacement + s.flow_drift;
  clamp_inside(s.robot, s.robot_radius, s.bounds);

  update_contacts(s, true);
  update_zone_flags(s, true);
}

SimState step(const SimState& state, const Vec2& displacement) {
  SimState next = state;
  step_in_place(next, displacement);
  return next;
}

double min_clearance(const Vec2& robot, const std::vector<Obstacle>& obstacles) {
  double phi = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) phi = std::min(phi, (robot - o.center).norm() - o.safety_radius);
  return phi;
}

double net_velocity(double f, double radius, double alpha_c, double u_flow) {
  if (!(f >= 0.0)) throw Error(ErrorKind::InvalidArgument, "frequency must be non-negative");
  return alpha_c * 2.0 * std::numbers::pi * radius * f - u_flow;
}

Scene add_boundary_cells(Scene scene, double robot_radius, double cell) {
  for (const auto& contour : scene.boundaries) {
    auto cells = discretize_boundary(contour, cell, robot_radius, scene.next_id());
    scene.obstacles.insert(scene.obstacles.end(), cells.begin(), cells.end());
  }
  return scene;
}

Scene load_phantom(const std::filesystem::path& path, double robot_radius, double cell) {
  return add_boundary_cells(scene_load(path), robot_radius, cell);
}

std::string event_json(const Event& e) {
  json j = {{"frame", e.frame}, {"kind", to_string(e.kind)}};
  if (e.id >= 0) j["id"] = e.id;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j.dump();
}

std::string frame_record(const SimState& s, const std::string& mode) {
  const double phi = min_clearance(s);
  json events = json::array();
  for (const auto& e : s.events) events.push_back(json::parse(event_json(e)));
  json j = {{"frame", s.frame},
            {"robot", {s.robot.x(), s.robot.y()}},
            {"phi", std::isfinite(phi) ? json(phi) : json(nullptr)},
            {"mode", mode},
            {"events", events}};
  return j.dump();
}

}  // namespace agpnav

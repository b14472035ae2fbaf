#include "agpnav/escape.hpp"

#include "agpnav/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace agpnav {

const char* to_string(EscapeCase c) {
  switch (c) {
    case EscapeCase::None: return "none";
    case EscapeCase::I: return "I";
    case EscapeCase::II: return "II";
  }
  return "?";
}

RuleDecision rule_intermediate(const Vec2& m, const Vec2& a,
                               const std::vector<Obstacle>& obstacles) {
  const Obstacle* nearest = nullptr;
  double best = 0.0;
  bool tip_inside = false;
  int tip_id = -1;
  for (const auto& o : obstacles) {
    const double clearance = (m - o.center).norm() - o.safety_radius;
    if (clearance < 0.0 &&
        (!nearest || clearance < best || (clearance == best && o.id < nearest->id))) {
      nearest = &o;
      best = clearance;
    }
    if (!tip_inside && (a - o.center).norm() < o.safety_radius) {
      tip_inside = true;
      tip_id = o.id;
    }
  }
  if (nearest) return {EscapeCase::II, Vec2(2.0 * m - nearest->center), nearest->id};
  if (tip_inside) return {EscapeCase::I, Vec2(2.0 * m - a), tip_id};
  return {};
}

Vec2 arrow_tip(const SimState& s) {
  return s.robot + (s.robot_speed + s.v_cmax) * s.robot_dir;
}

Vec2 repulsion(const SimState& s, const RuleOptions& opt) {
  const Vec2& m = s.robot;
  Vec2 push = Vec2::Zero();
  auto add = [&](const Vec2& c, double reach) {
    const Vec2 away = m - c;
    const double d = away.norm();
    if (d > 0.0 && d < reach) push += (reach - d) / d * away;
  };
  for (const auto& o : s.obstacles)
    add(o.center + opt.forecast * o.velocity, o.safety_radius + opt.lookahead);
  if (opt.walls) {
    const Bounds& b = s.bounds;
    const double reach = s.robot_radius + s.buffer + opt.lookahead;
    add(Vec2(b.min.x(), m.y()), reach);
    add(Vec2(b.max.x(), m.y()), reach);
    add(Vec2(m.x(), b.min.y()), reach);
    add(Vec2(m.x(), b.max.y()), reach);
  }
  return push;
}

RuleDecision rule_intermediate(const SimState& s, const RuleOptions& opt) {
  RuleDecision d = rule_intermediate(s.robot, arrow_tip(s), s.obstacles);
  if (d.which == EscapeCase::II && opt.repel) d.target = Vec2(s.robot + repulsion(s, opt));
  return d;
}

std::optional<Vec2> rule_step(RuleState& rs, const SimState& s, const RuleOptions& opt) {
  if (rs.commit_frames_left <= 0) {
    const RuleDecision d = rule_intermediate(s, opt);
    rs.active_case = d.which;
    rs.current_intermediate = d.target;
    rs.obstacle = d.obstacle;
    rs.commit_frames_left = d.target ? std::max(opt.commit_frames, 1) : 0;
    if (!d.target) return std::nullopt;
  }
  const Vec2 to = *rs.current_intermediate - s.robot;
  const double dist = to.norm();
  Vec2 move = Vec2::Zero();
  if (dist > 0.0) move = to * (std::min(dist, s.robot_speed) / dist);
  if (--rs.commit_frames_left <= 0 || dist <= s.robot_speed) {
    rs.commit_frames_left = 0;
    rs.current_intermediate.reset();
  }
  return move;
}

Observation build_observation(const SimState& s) {
  Observation obs = Observation::Zero();
  const double d_max = std::hypot(s.bounds.width(), s.bounds.height());
  if (s.obstacles.empty() || !(d_max > 0.0)) return obs;

  struct Item {
    double dist2;
    int id;
    const Obstacle* o;
  };
  std::vector<Item> items;
  items.reserve(s.obstacles.size());
  for (const auto& o : s.obstacles) items.push_back({(o.center - s.robot).squaredNorm(), o.id, &o});
  const std::size_t k = std::min<std::size_t>(4, items.size());
  std::partial_sort(items.begin(), items.begin() + long(k), items.end(),
                    [](const Item& a, const Item& b) {
                      return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.id < b.id;
                    });
  const double v_scale = s.v_cmax > 0.0 ? 1.0 / s.v_cmax : 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Obstacle& o = *items[i].o;
    const Vec2 rel = (o.center - s.robot) / d_max;
    const Vec2 vel = o.velocity * v_scale;
    obs.segment<4>(4 * long(i)) << rel.x(), rel.y(), vel.x(), vel.y();
  }
  return obs.cwiseMax(-1.0).cwiseMin(1.0);
}

Vec2 apply_action(int action, double v_m) {
  if (action < 0 || action >= kActionCount)
    throw Error(ErrorKind::InvalidArgument, "action out of range: " + std::to_string(action));
  if (action == 0) return Vec2::Zero();
  static const std::array<Vec2, 8> dirs = [] {
    std::array<Vec2, 8> d;
    const double h = std::numbers::sqrt2 / 2.0;
    d = {Vec2(1, 0), Vec2(h, h), Vec2(0, 1), Vec2(-h, h),
         Vec2(-1, 0), Vec2(-h, -h), Vec2(0, -1), Vec2(h, -h)};
    return d;
  }();
  return v_m * dirs[std::size_t(action - 1)];
}

int policy_act(const QNet<float>& net, const Observation& obs) {
  const Eigen::MatrixXf q = net.forward(obs.cast<float>());
  return argmax(q.col(0));
}

}  // namespace agpnav

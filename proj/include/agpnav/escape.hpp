#pragma once

#include "agpnav/qnet.hpp"
#include "agpnav/sim.hpp"

#include <array>
#include <optional>
#include <vector>

namespace agpnav {

// ---------------------------------------------------------------------------
// Rule-based controller

enum class EscapeCase { None, I, II };

const char* to_string(EscapeCase c);

struct RuleDecision {
  EscapeCase which = EscapeCase::None;
  std::optional<Vec2> target;
  int obstacle = -1;
};

/// Case II (m inside a zone): reflect the center of the violated zone with the
/// least clearance across m. Case I (arrow tip inside a zone): reflect the tip
/// across m. Case II wins when both hold.
RuleDecision rule_intermediate(const Vec2& m, const Vec2& arrow_tip,
                               const std::vector<Obstacle>& obstacles);

/// m + (v_m + v_cmax) * dir.
Vec2 arrow_tip(const SimState& state);

struct RuleOptions {
  int commit_frames = 1;  // Delta: frames spent on one intermediate target
  // Case II target from the combined push of every zone within `lookahead`
  // px of m and of the arena walls, instead of one reflected center.
  bool repel = true;
  double lookahead = 30.0;  // px beyond r_sim
  double forecast = 1.0;    // frames of obstacle motion applied to centers
  bool walls = true;        // walls push like a zone of radius R + delta
};

/// Summed push away from nearby zones: each contributes (reach - d) along the
/// unit vector from its forecast center to m.
Vec2 repulsion(const SimState& state, const RuleOptions& options);

/// Case decision on the current state, with the Case II target replaced by
/// m + repulsion when `options.repel` is set.
RuleDecision rule_intermediate(const SimState& state, const RuleOptions& options);

struct RuleState {
  EscapeCase active_case = EscapeCase::None;
  int commit_frames_left = 0;
  std::optional<Vec2> current_intermediate;
  int obstacle = -1;  // obstacle that triggered the active case
};

/// One frame of the rule controller. Continues an active commitment or
/// evaluates the two cases; returns no command when neither case holds.
std::optional<Vec2> rule_step(RuleState& rs, const SimState& state,
                              const RuleOptions& options = {});

// ---------------------------------------------------------------------------
// Learned controller

using Observation = Eigen::Matrix<double, 16, 1>;

/// Four nearest obstacles (ties by id), each as relative position over
/// D_max = sqrt(W^2 + H^2) and velocity over v_cmax; zero-padded.
Observation build_observation(const SimState& state);

inline constexpr int kActionCount = 9;

/// 0: stay; 1..8: v_m * (cos k45deg, sin k45deg) for k = a - 1.
Vec2 apply_action(int action, double v_m);

/// Immutable greedy policy over a trained network.
class PolicyHandle {
 public:
  PolicyHandle() = default;
  explicit PolicyHandle(QNet<float> net) : net_(std::move(net)) {}

  const QNet<float>& net() const { return net_; }

 private:
  QNet<float> net_;
};

/// argmax_a Q(obs, a); ties go to the lowest index.
int policy_act(const QNet<float>& net, const Observation& obs);
inline int policy_act(const PolicyHandle& p, const Observation& obs) {
  return policy_act(p.net(), obs);
}

}  // namespace agpnav

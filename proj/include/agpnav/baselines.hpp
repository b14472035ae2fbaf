#pragma once

#include "agpnav/agp.hpp"

#include <cstdint>
#include <vector>

namespace agpnav {

// ---------------------------------------------------------------------------
// Particle swarm

struct PsoCoefficients {
  double w;
  double c1;
  double c2;
};

/// Clerc-Kennedy constriction with phi1 = phi2 = 2.05, k = 1.
PsoCoefficients constriction_coefficients();

struct PsoParams {
  int interior_nodes = 5;  // K
  int segments = 50;       // J
  int particles = 100;     // P
  int iterations = 50;     // G
  PsoCoefficients coeffs = constriction_coefficients();
  double v_max = 200.0;
  std::optional<double> y_min;  // default: arena bottom edge
  std::optional<double> y_max;  // default: arena top edge
  double w_damp = 0.9;
  double penalty = 100.0;  // C_v
  std::uint64_t seed = 1;
};

struct PsoCost {
  double cost = 0.0;
  double length = 0.0;
  double violation = 0.0;
};

/// Cost = L * (1 + C_v * V) with the soft overlap penalty summed over every
/// waypoint and zone.
PsoCost pso_cost(const std::vector<Vec2>& waypoints, const std::vector<Zone>& zones,
                 double penalty);

/// Natural cubic spline through (xs, ys) evaluated at `at`. xs must be
/// strictly increasing.
std::vector<double> natural_spline(const std::vector<double>& xs, const std::vector<double>& ys,
                                   const std::vector<double>& at);

struct PsoResult {
  PlannedPath path;               // nodes: S, interior nodes, E; waypoints: J + 1 samples
  PsoCost cost;
  std::vector<double> history;    // global-best cost after each iteration
  bool feasible() const { return cost.violation == 0.0; }
};

PsoResult pso_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                   const Vec2& e, const PsoParams& params);

// ---------------------------------------------------------------------------
// RRT

struct RrtParams {
  double step = 50.0;       // delta s
  double goal_tolerance = 50.0;
  long max_iterations = 100000;
  std::uint64_t seed = 1;
};

struct RrtResult {
  PlannedPath path;
  std::vector<Vec2> tree;
  std::vector<long> parent;  // -1 for the root
  long iterations = 0;
};

/// x_near + step * unit(x_rand - x_near).
Vec2 rrt_steer(const Vec2& near, const Vec2& rand, double step);

RrtResult rrt_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                   const Vec2& e, const RrtParams& params);

// ---------------------------------------------------------------------------
// Weighted A*

struct WAStarParams {
  double weight = 1.5;
  double cell = 10.0;  // px
};

/// f = g + w h.
inline double wastar_priority(double g, double h, double w) { return g + w * h; }

/// Search result on a bare occupancy grid. Costs are in cell units.
struct GridSearch {
  bool found = false;
  double cost = 0.0;            // straight + diagonal * sqrt(2), computed from the counts
  long straight = 0;
  long diagonal = 0;
  std::vector<long> cells;      // row-major indices, start to goal
  long expanded = 0;
};

/// 8-connected weighted A* with Euclidean heuristic; ties broken by lowest
/// f, then lowest h, then lowest row-major index.
GridSearch wastar_grid(const std::vector<std::uint8_t>& free, int cols, int rows, long start,
                       long goal, double weight);

struct WAStarResult {
  PlannedPath path;
  GridSearch search;
};

WAStarResult wastar_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                         const Vec2& e, const WAStarParams& params);

}  // namespace agpnav

#pragma once

// Shared oracles and fixtures for the unit tests.

#include "agpnav/geometry.hpp"
#include "agpnav/rng.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <string>
#include <vector>

namespace agpnav::testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(AGPNAV_SOURCE_DIR) / rel;
}

/// Minimum over `samples` points per segment of |p - c| - r.
inline double sampled_clearance(const std::vector<Vec2>& poly, const Vec2& c, double r,
                                int samples = 1000) {
  double best = std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return (poly[0] - c).norm() - r;
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
    for (int i = 0; i <= samples; ++i) {
      const double t = double(i) / samples;
      const Vec2 p = poly[k] + t * (poly[k + 1] - poly[k]);
      best = std::min(best, (p - c).norm() - r);
    }
  }
  return best;
}

// Exact 8-connected shortest path in (straight, diagonal) step counts.
// Diagonal moves need only the destination cell to be free, as in the planner.
inline std::optional<std::pair<long, long>> dijkstra_counts(const std::vector<std::uint8_t>& free,
                                                     int cols, int rows, long s, long g) {
  if (!free[std::size_t(s)] || !free[std::size_t(g)]) return std::nullopt;
  using Cost = std::pair<long, long>;
  auto value = [](const Cost& c) { return double(c.first) + double(c.second) * std::sqrt(2.0); };
  std::vector<std::optional<Cost>> best(free.size());
  using Item = std::tuple<double, long, long, long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  best[std::size_t(s)] = Cost{0, 0};
  pq.emplace(0.0, 0, 0, s);
  std::vector<bool> done(free.size(), false);
  while (!pq.empty()) {
    const auto [v, a, b, cur] = pq.top();
    pq.pop();
    if (done[std::size_t(cur)]) continue;
    done[std::size_t(cur)] = true;
    if (cur == g) return Cost{a, b};
    const int cx = int(cur % cols), cy = int(cur / cols);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (nx < 0 || ny < 0 || nx >= cols || ny >= rows) continue;
        const long nb = long(ny) * cols + nx;
        if (!free[std::size_t(nb)] || done[std::size_t(nb)]) continue;
        const Cost c = (dx && dy) ? Cost{a, b + 1} : Cost{a + 1, b};
        if (!best[std::size_t(nb)] || value(c) < value(*best[std::size_t(nb)])) {
          best[std::size_t(nb)] = c;
          pq.emplace(value(c), c.first, c.second, nb);
        }
      }
  }
  return std::nullopt;
}

inline Vec2 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace agpnav::testing

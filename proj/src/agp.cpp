#include "agpnav/agp.hpp"

#include "agpnav/error.hpp"
#include "agpnav/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace agpnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Minimum forward progress between foot lines.
constexpr double kStepEps = 1e-9;

struct PruneEntry {
  std::size_t index;
  double t;
  Vec2 foot;
};

void require_distinct(const Vec2& s, const Vec2& e) {
  if (!all_finite(s) || !all_finite(e))
    throw Error(ErrorKind::InvalidArgument, "non-finite endpoint");
  if ((e - s).squaredNorm() == 0.0)
    throw Error(ErrorKind::InvalidArgument, "start and end coincide");
}

std::vector<PruneEntry> prune_indices(const std::vector<Zone>& zones, const Vec2& s,
                                      const Vec2& e, double alpha) {
  const Vec2 d = e - s;
  const double dd = d.squaredNorm();
  std::vector<PruneEntry> kept;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    const double t = (zones[i].center - s).dot(d) / dd;
    if (t < 0.0 || t > 1.0) continue;
    const Vec2 g = s + t * d;
    if ((zones[i].center - g).norm() <= alpha * zones[i].radius) kept.push_back({i, t, g});
  }
  std::sort(kept.begin(), kept.end(), [&](const PruneEntry& a, const PruneEntry& b) {
    if (a.foot.x() != b.foot.x()) return a.foot.x() < b.foot.x();
    if (a.foot.y() != b.foot.y()) return a.foot.y() < b.foot.y();
    return zones[a.index].id < zones[b.index].id;
  });
  return kept;
}

std::string format_nodes(const std::vector<Vec2>& nodes) {
  std::ostringstream os;
  os.precision(10);
  os << '[';
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) os << ", ";
    os << '(' << nodes[i].x() << ", " << nodes[i].y() << ')';
  }
  os << ']';
  return os.str();
}

void check_outside(const std::vector<Zone>& zones, const Vec2& p, const char* what) {
  for (const auto& z : zones) {
    if (!point_clears(p, z.circle(), kClearanceEps)) {
      std::ostringstream os;
      os << what << " (" << p.x() << ", " << p.y() << ") lies inside zone " << z.id;
      throw Error(ErrorKind::EndpointInZone, os.str());
    }
  }
}

/// One S->E leg. Works in the frame where S is the origin and E = (L, 0), so
/// the perpendicular family is the set of vertical lines u = const.
class LegPlanner {
 public:
  LegPlanner(const std::vector<Zone>& zones, const Vec2& s, const Vec2& e, double alpha,
             const std::optional<Bounds>& bounds)
      : frame_(s, e), length_((e - s).norm()), bounds_(bounds) {
    // Zones sorted by u so collision queries only visit the slab they can reach.
    std::vector<std::size_t> order(zones.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Vec2> centers;
    centers.reserve(zones.size());
    for (const auto& z : zones) centers.push_back(frame_.to_local(z.center));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (centers[a].x() != centers[b].x()) return centers[a].x() < centers[b].x();
      return zones[a].id < zones[b].id;
    });
    std::vector<std::size_t> slot(zones.size());
    local_.reserve(zones.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Zone& z = zones[order[k]];
      slot[order[k]] = k;
      local_.push_back({z.id, centers[order[k]], z.radius});
      max_r_ = std::max(max_r_, z.radius);
    }
    for (const auto& p : prune_indices(zones, s, e, alpha)) {
      active_.push_back(slot[p.index]);
      foot_u_.push_back(p.t * length_);
    }
  }

  std::vector<Vec2> run() {
    const Vec2 end(length_, 0.0);
    std::vector<Vec2> nodes{Vec2::Zero()};
    Vec2 p = Vec2::Zero();
    for (;;) {
      if (segment_free(p, end)) {
        nodes.push_back(end);
        break;
      }
      const double u = next_foot(p, end);
      std::optional<Vec2> next;
      if (std::isfinite(u)) {
        next = perpendicular_foot(p, u);
        if (!next) next = tangent_candidates(p, u);
        if (!next) next = extended_candidates(p, u);
      }
      if (!next) {
        // Dead end of the line construction: finish around the zones.
        auto rest = detour(p);
        if (rest.empty())
          fail(nodes, p, std::isfinite(u) ? "no valid node on the next foot line"
                                          : "no foot line ahead");
        nodes.insert(nodes.end(), rest.begin(), rest.end());
        break;
      }
      nodes.push_back(*next);
      p = *next;
      drop_closest(p);
    }
    std::vector<Vec2> world;
    world.reserve(nodes.size());
    for (const auto& q : nodes) world.push_back(frame_.to_world(q));
    return world;
  }

 private:
  struct LocalZone {
    int id;
    Vec2 c;
    double r;
  };

  /// Zones whose center u lies in [lo - max_r, hi + max_r]; nothing else can
  /// come within a radius of a point or segment spanning [lo, hi] in u.
  std::pair<std::size_t, std::size_t> slab(double lo, double hi) const {
    auto cmp = [](const LocalZone& z, double u) { return z.c.x() < u; };
    auto first = std::lower_bound(local_.begin(), local_.end(), lo - max_r_, cmp);
    auto last = std::lower_bound(first, local_.end(), std::nextafter(hi + max_r_, kInf), cmp);
    return {std::size_t(first - local_.begin()), std::size_t(last - local_.begin())};
  }

  bool segment_free(const Vec2& a, const Vec2& b) const {
    const auto [first, last] = slab(std::min(a.x(), b.x()), std::max(a.x(), b.x()));
    for (std::size_t k = first; k < last; ++k) {
      const auto& z = local_[k];
      if (point_segment_distance(a, b, z.c) < z.r - kClearanceEps) return false;
    }
    return true;
  }

  bool point_free(const Vec2& q) const {
    const auto [first, last] = slab(q.x(), q.x());
    for (std::size_t k = first; k < last; ++k)
      if ((q - local_[k].c).norm() < local_[k].r - kClearanceEps) return false;
    return true;
  }

  bool in_bounds(const Vec2& q) const {
    return !bounds_ || bounds_->contains(frame_.to_world(q), 1e-9);
  }

  bool valid(const Vec2& from, const Vec2& q) const {
    if (!all_finite(q) || !in_bounds(q)) return false;
    return point_free(q) && segment_free(from, q);
  }

  /// Smallest active foot ahead of p; ties go to the lowest id. With no
  /// active foot left, falls back to zones that still block p -> end.
  double next_foot(const Vec2& p, const Vec2& end) const {
    double best = kInf;
    int best_id = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < active_.size(); ++k) {
      const double u = foot_u_[k];
      const int id = local_[active_[k]].id;
      if (u > p.x() + kStepEps && (u < best || (u == best && id < best_id))) {
        best = u;
        best_id = id;
      }
    }
    if (std::isfinite(best)) return best;
    for (const auto& z : local_) {
      const double u = std::min(z.c.x(), length_);
      if (u > p.x() + kStepEps && u < best &&
          point_segment_distance(p, end, z.c) < z.r - kClearanceEps)
        best = u;
    }
    return best;
  }

  std::optional<Vec2> perpendicular_foot(const Vec2& p, double u) const {
    const Vec2 q(u, p.y());
    if (valid(p, q)) return q;
    return std::nullopt;
  }

  void add_tangent_hits(const Vec2& p, const LocalZone& z, double u,
                        std::vector<Vec2>& out) const {
    if ((z.c - p).norm() <= z.r) return;
    const auto [d1, d2] = tangent_directions(p, z.c, z.r);
    for (const Vec2& dir : {d1, d2}) {
      if (dir.x() <= 1e-12) continue;
      const double s = (u - p.x()) / dir.x();
      out.push_back(p + s * dir);
    }
  }

  std::optional<Vec2> closest_valid(const Vec2& p, const std::vector<Vec2>& candidates,
                                    bool to_go = false) const {
    const Vec2 end(length_, 0.0);
    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const Vec2& q = candidates[k];
      ranked.emplace_back((q - p).norm() + (to_go ? (end - q).norm() : 0.0), k);
    }
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [cost, k] : ranked)
      if (valid(p, candidates[k])) return candidates[k];
    return std::nullopt;
  }

  /// Tangents from p to the two nearest active circles, cut by the line.
  std::optional<Vec2> tangent_candidates(const Vec2& p, double u) const {
    auto before = [&](std::size_t a, std::size_t b) {
      const double da = (local_[a].c - p).squaredNorm(), db = (local_[b].c - p).squaredNorm();
      return da != db ? da < db : local_[a].id < local_[b].id;
    };
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t first = kNone, second = kNone;
    for (std::size_t k : active_) {
      if (first == kNone || before(k, first)) {
        second = first;
        first = k;
      } else if (second == kNone || before(k, second)) {
        second = k;
      }
    }
    std::vector<Vec2> cands;
    for (std::size_t k : {first, second})
      if (k != kNone) add_tangent_hits(p, local_[k], u, cands);
    return closest_valid(p, cands);
  }

  /// Fallback when neither the foot nor the two-circle tangents are usable:
  /// tangents to every circle, circle/line crossings and the arena edges.
  std::optional<Vec2> extended_candidates(const Vec2& p, double u) const {
    std::vector<Vec2> cands;
    for (const auto& z : local_) {
      add_tangent_hits(p, z, u, cands);
      const double du = u - z.c.x();
      if (std::abs(du) <= z.r) {
        const double h = std::sqrt(z.r * z.r - du * du);
        cands.emplace_back(u, z.c.y() + h);
        cands.emplace_back(u, z.c.y() - h);
      }
    }
    if (bounds_) {
      // Range of v for which (u, v) stays inside the rectangle.
      double lo = -kInf, hi = kInf;
      const Vec2 base = frame_.to_world(Vec2(u, 0.0));
      for (int axis = 0; axis < 2; ++axis) {
        const double a = frame_.across[axis];
        const double mn = bounds_->min[axis] - base[axis];
        const double mx = bounds_->max[axis] - base[axis];
        if (std::abs(a) < 1e-15) {
          if (mn > 0.0 || mx < 0.0) return closest_valid(p, cands, true);
          continue;
        }
        double v0 = mn / a, v1 = mx / a;
        if (v0 > v1) std::swap(v0, v1);
        lo = std::max(lo, v0);
        hi = std::min(hi, v1);
      }
      if (lo <= hi) {
        const double shrink = 1e-7 * std::max(1.0, hi - lo);
        cands.emplace_back(u, lo + shrink);
        cands.emplace_back(u, hi - shrink);
      }
    }
    return closest_valid(p, cands, true);
  }

  /// Shortest route from p to the end over the vertices of polygons
  /// circumscribed about each zone (visibility search, edges tested lazily).
  /// Returns the nodes after p, or nothing when the end is unreachable.
  std::vector<Vec2> detour(const Vec2& p) const {
    constexpr int kSides = 12;
    const double grow = 1.0 / std::cos(M_PI / kSides);
    const Vec2 end(length_, 0.0);
    auto vertex = [&](const LocalZone& z, int m) {
      const double a = 2.0 * M_PI * m / kSides;
      return Vec2(z.c + (z.r * grow + 1e-6) * Vec2(std::cos(a), std::sin(a)));
    };

    // Usually one zone hides the end: try a single corner of its polygon.
    std::optional<Vec2> via;
    double via_len = kInf;
    for (const auto& z : local_) {
      if (point_segment_distance(p, end, z.c) >= z.r - kClearanceEps) continue;
      for (int m = 0; m < kSides; ++m) {
        const Vec2 q = vertex(z, m);
        const double len = (q - p).norm() + (end - q).norm();
        if (len < via_len && in_bounds(q) && point_free(q) && segment_free(p, q) &&
            segment_free(q, end)) {
          via = q;
          via_len = len;
        }
      }
    }
    if (via) return {*via, end};

    std::vector<Vec2> verts{p, end};
    for (const auto& z : local_) {
      for (int m = 0; m < kSides; ++m) {
        const Vec2 q = vertex(z, m);
        if (in_bounds(q) && point_free(q)) verts.push_back(q);
      }
    }
    const std::size_t n = verts.size();
    std::vector<double> g(n, kInf);
    std::vector<std::size_t> parent(n, n);
    std::vector<char> closed(n, 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    g[0] = 0.0;
    open.push({(verts[1] - verts[0]).norm(), 0});
    while (!open.empty()) {
      const auto [f, k] = open.top();
      open.pop();
      if (closed[k]) continue;
      closed[k] = 1;
      if (k == 1) break;
      for (std::size_t j = 1; j < n; ++j) {
        if (closed[j]) continue;
        const double cand = g[k] + (verts[j] - verts[k]).norm();
        if (cand >= g[j] || !segment_free(verts[k], verts[j])) continue;
        g[j] = cand;
        parent[j] = k;
        open.push({cand + (verts[1] - verts[j]).norm(), j});
      }
    }
    if (!closed[1]) return {};
    std::vector<Vec2> out;
    for (std::size_t k = 1; k != 0; k = parent[k]) out.push_back(verts[k]);
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Retires the active obstacle nearest to p among those whose foot line
  /// has been reached.
  void drop_closest(const Vec2& p) {
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t best = kNone;
    double best_d = kInf;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      if (foot_u_[k] > p.x() + kStepEps) continue;
      const double d = (local_[active_[k]].c - p).norm();
      if (d < best_d || (d == best_d && local_[active_[k]].id < local_[active_[best]].id)) {
        best = k;
        best_d = d;
      }
    }
    if (best == kNone) return;
    active_.erase(active_.begin() + std::ptrdiff_t(best));
    foot_u_.erase(foot_u_.begin() + std::ptrdiff_t(best));
  }

  [[noreturn]] void fail(const std::vector<Vec2>& nodes, const Vec2& p,
                         const std::string& why) const {
    std::vector<Vec2> world;
    for (const auto& q : nodes) world.push_back(frame_.to_world(q));
    const Vec2 at = frame_.to_world(p);
    std::ostringstream os;
    os << why << " at (" << at.x() << ", " << at.y() << "); nodes " << format_nodes(world);
    throw Error(ErrorKind::PlanFailed, os.str());
  }

  PathFrame frame_;
  double length_;
  std::optional<Bounds> bounds_;
  std::vector<LocalZone> local_;  // sorted by center u
  double max_r_ = 0.0;
  std::vector<std::size_t> active_;  // indices into local_
  std::vector<double> foot_u_;       // parallel to active_
};

}  // namespace

std::vector<Zone> scene_zones(const Scene& scene) {
  std::vector<Zone> zones;
  zones.reserve(scene.obstacles.size());
  for (const auto& o : scene.obstacles) zones.push_back({o.id, o.center, o.safety_radius});
  return zones;
}

PruneResult prune_obstacles(const std::vector<Zone>& zones, const Vec2& s, const Vec2& e,
                            double alpha) {
  require_distinct(s, e);
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0");
  PruneResult out;
  for (const auto& p : prune_indices(zones, s, e, alpha)) {
    out.retained.push_back(zones[p.index].id);
    out.feet.push_back(p.foot);
    out.t.push_back(p.t);
  }
  return out;
}

std::pair<Vec2, Vec2> tangent_directions(const Vec2& v, const Vec2& c, double r) {
  const Vec2 rel = c - v;
  const double d = rel.norm();
  if (!(d > r) || !std::isfinite(d))
    throw Error(ErrorKind::TangentInfeasible, "point lies inside or on the circle");
  const double theta = std::atan2(rel.y(), rel.x());
  const double half = std::asin(r / d);
  return {Vec2(std::cos(theta + half), std::sin(theta + half)),
          Vec2(std::cos(theta - half), std::sin(theta - half))};
}

std::pair<double, double> tangent_slopes(const Vec2& v, const Vec2& c, double r) {
  const auto [a, b] = tangent_directions(v, c, r);
  auto slope = [](const Vec2& dir) {
    return std::abs(dir.x()) < 1e-12 ? kInf : dir.y() / dir.x();
  };
  return {slope(a), slope(b)};
}

int count_intersections(const Vec2& a, const Vec2& b, const Zone& zone) {
  return segment_circle_intersections(a, b, zone.circle());
}

std::vector<Vec2> insert_waypoints(const std::vector<Vec2>& nodes, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorKind::InvalidArgument, "waypoint spacing must be > 0");
  std::vector<Vec2> out;
  if (nodes.empty()) return out;
  out.push_back(nodes.front());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const Vec2& a = nodes[k];
    const Vec2& b = nodes[k + 1];
    const double len = (b - a).norm();
    const long pieces = std::max(1L, long(std::ceil(len / h)));
    for (long i = 1; i < pieces; ++i) out.push_back(a + (double(i) / double(pieces)) * (b - a));
    out.push_back(b);
  }
  return out;
}

double polyline_length(const std::vector<Vec2>& points) {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) len += (points[k + 1] - points[k]).norm();
  return len;
}

PlannedPath plan_2d(const std::vector<Zone>& zones, const Vec2& s, const Vec2& e,
                    const AgpOptions& options) {
  require_distinct(s, e);
  if (!(options.alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be > 0");
  std::vector<Zone> inflated = zones;
  for (const auto& [id, delta] : options.inflation) {
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw Error(ErrorKind::InvalidArgument, "inflation must be finite and >= 0");
    for (auto& z : inflated)
      if (z.id == id) z.radius += delta;
  }

  std::vector<Vec2> stops{s};
  for (const auto& v : options.via) {
    if (!all_finite(v)) throw Error(ErrorKind::InvalidArgument, "non-finite via-point");
    stops.push_back(v);
  }
  stops.push_back(e);
  check_outside(inflated, s, "start");
  check_outside(inflated, e, "end");
  for (const auto& v : options.via) check_outside(inflated, v, "via-point");

  PlannedPath path;
  path.nodes.push_back(s);
  for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
    if ((stops[k + 1] - stops[k]).squaredNorm() == 0.0) continue;
    auto leg = LegPlanner(inflated, stops[k], stops[k + 1], options.alpha, options.bounds).run();
    // The frame round trip perturbs the exact endpoints by rounding.
    leg.back() = stops[k + 1];
    path.nodes.insert(path.nodes.end(), leg.begin() + 1, leg.end());
  }
  if (path.nodes.size() == 1) path.nodes.push_back(e);
  path.waypoints = insert_waypoints(path.nodes, options.spacing);
  path.length = polyline_length(path.waypoints);
  return path;
}

PlannedPath plan_2d(const Scene& scene, const Vec2& s, const Vec2& e, AgpOptions options) {
  if (!options.bounds) options.bounds = scene.bounds();
  return plan_2d(scene_zones(scene), s, e, options);
}

std::string path_to_json(const PlannedPath& path) {
  nlohmann::json doc;
  auto pts = [](const std::vector<Vec2>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p.x(), p.y()});
    return a;
  };
  doc["nodes"] = pts(path.nodes);
  doc["waypoints"] = pts(path.waypoints);
  doc["length"] = path.length;
  return doc.dump();
}

// ---------------------------------------------------------------------------
// 3D

PlaneSlice make_slice(const Vec3& s, const Vec3& e, int index, int n_planes) {
  if (n_planes < 1) throw Error(ErrorKind::InvalidArgument, "n_planes must be >= 1");
  const Vec3 d = e - s;
  const double len = d.norm();
  if (!(len > 0.0)) throw Error(ErrorKind::InvalidArgument, "start and end coincide");
  const Vec3 dhat = d / len;
  // Cross with the axis least aligned with d for a well-conditioned normal.
  Eigen::Index axis;
  dhat.cwiseAbs().minCoeff(&axis);
  const Vec3 q0 = dhat.cross(Vec3::Unit(axis)).normalized();
  const double phi = 2.0 * M_PI * double(index) / double(n_planes);
  PlaneSlice slice;
  slice.index = index;
  slice.origin = s;
  slice.e1 = dhat;
  slice.e2 = (q0 * std::cos(phi) + dhat.cross(q0) * std::sin(phi)).normalized();
  slice.normal = slice.e1.cross(slice.e2);
  return slice;
}

void slice_spheres(PlaneSlice& slice, const std::vector<Sphere>& spheres, double robot_radius) {
  for (std::size_t m = 0; m < spheres.size(); ++m) {
    const double r3 = spheres[m].radius + robot_radius;
    const double delta = (spheres[m].center - slice.origin).dot(slice.normal);
    if (std::abs(delta) > r3) continue;
    const Vec3 foot = spheres[m].center - delta * slice.normal;
    const double r_int = std::sqrt(std::max(0.0, r3 * r3 - delta * delta));
    slice.circles.push_back({int(m) + 1, slice.project(foot), r_int});
  }
}

Plan3dResult plan_3d(const Vec3& s, const Vec3& e, const std::vector<Sphere>& spheres,
                     const Plan3dOptions& options) {
  if (!s.allFinite() || !e.allFinite())
    throw Error(ErrorKind::InvalidArgument, "non-finite endpoint");
  if ((e - s).squaredNorm() == 0.0)
    throw Error(ErrorKind::InvalidArgument, "start and end coincide");
  if (options.n_planes < 1) throw Error(ErrorKind::InvalidArgument, "n_planes must be >= 1");
  for (std::size_t m = 0; m < spheres.size(); ++m) {
    const double r3 = spheres[m].radius + options.robot_radius;
    for (const Vec3* p : {&s, &e}) {
      if ((*p - spheres[m].center).norm() < r3 - kClearanceEps)
        throw Error(ErrorKind::EndpointInZone,
                    std::string(p == &s ? "start" : "end") + " lies inside sphere " +
                        std::to_string(m + 1));
    }
  }

  const double len = (e - s).norm();
  AgpOptions opts;
  opts.alpha = options.alpha;
  opts.spacing = options.spacing;

  Plan3dResult result;
  result.slice_lengths.assign(std::size_t(options.n_planes), kInf);
  result.slice_errors.assign(std::size_t(options.n_planes), std::string());
  std::vector<Vec2> best_waypoints;
  PlaneSlice best_slice;
  for (int i = 0; i < options.n_planes; ++i) {
    PlaneSlice slice = make_slice(s, e, i, options.n_planes);
    slice_spheres(slice, spheres, options.robot_radius);
    try {
      PlannedPath p = plan_2d(slice.circles, Vec2::Zero(), Vec2(len, 0.0), opts);
      result.slice_lengths[std::size_t(i)] = p.length;
      if (result.best_plane < 0 || p.length < result.slice_lengths[std::size_t(result.best_plane)]) {
        result.best_plane = i;
        best_waypoints = std::move(p.waypoints);
        best_slice = std::move(slice);
      }
    } catch (const Error& err) {
      result.slice_errors[std::size_t(i)] = err.what();
    }
  }
  if (result.best_plane < 0) {
    std::string msg = "every slice failed:";
    for (int i = 0; i < options.n_planes; ++i)
      msg += " [" + std::to_string(i) + "] " + result.slice_errors[std::size_t(i)];
    throw Error(ErrorKind::PlanFailed, msg);
  }
  for (const auto& w : best_waypoints) result.waypoints.push_back(best_slice.lift(w));
  result.waypoints.front() = s;
  result.waypoints.back() = e;
  for (std::size_t k = 0; k + 1 < result.waypoints.size(); ++k)
    result.length += (result.waypoints[k + 1] - result.waypoints[k]).norm();
  return result;
}

std::string path3d_to_json(const Plan3dResult& result) {
  nlohmann::json doc;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : result.waypoints) pts.push_back({p.x(), p.y(), p.z()});
  doc["waypoints"] = std::move(pts);
  doc["length"] = result.length;
  doc["plane"] = result.best_plane;
  nlohmann::json lengths = nlohmann::json::array();
  for (double l : result.slice_lengths) lengths.push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json(nullptr));
  doc["slice_lengths"] = std::move(lengths);
  return doc.dump();
}

Scene3d scene3d_from_json(const std::string& text) {
  using nlohmann::json;
  auto vec3 = [](const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
      throw Error(ErrorKind::ParseError, std::string(what) + ": expected [x, y, z]");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  };
  try {
    const json doc = json::parse(text);
    Scene3d sc;
    sc.start = vec3(doc.at("start"), "start");
    sc.end = vec3(doc.at("end"), "end");
    sc.robot_radius = doc.value("robot_radius", 0.0);
    for (const auto& o : doc.value("spheres", json::array())) {
      Sphere sp{vec3(o.at("center"), "spheres.center"), o.at("r").get<double>()};
      if (!(sp.radius > 0.0)) throw Error(ErrorKind::ParseError, "sphere radius must be positive");
      sc.spheres.push_back(sp);
    }
    if (!(sc.robot_radius >= 0.0)) throw Error(ErrorKind::ParseError, "robot_radius must be >= 0");
    return sc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("3d scene: ") + e.what());
  }
}

Scene3d random_scene3d(int n_spheres, std::uint64_t seed, double robot_radius) {
  if (n_spheres < 0) throw Error(ErrorKind::InvalidArgument, "sphere count must be >= 0");
  constexpr double kBox = 1000.0;
  Scene3d sc;
  sc.start = Vec3::Constant(0.05 * kBox);
  sc.end = Vec3::Constant(0.95 * kBox);
  sc.robot_radius = robot_radius;
  Rng rng(seed);
  while (int(sc.spheres.size()) < n_spheres) {
    const Sphere sp{Vec3(rng.uniform(0, kBox), rng.uniform(0, kBox), rng.uniform(0, kBox)),
                    rng.uniform(30.0, 80.0)};
    const double keep = sp.radius + robot_radius;
    if ((sp.center - sc.start).norm() > keep && (sp.center - sc.end).norm() > keep)
      sc.spheres.push_back(sp);
  }
  return sc;
}

}  // namespace agpnav

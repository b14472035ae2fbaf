#include "agpnav/baselines.hpp"

#include "agpnav/error.hpp"
#include "agpnav/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace agpnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool segment_free(const std::vector<Zone>& zones, const Vec2& a, const Vec2& b) {
  for (const auto& z : zones)
    if (!segment_clears(a, b, z.circle(), kClearanceEps)) return false;
  return true;
}

}  // namespace

PsoCoefficients constriction_coefficients() {
  const double phi1 = 2.05, phi2 = 2.05, k = 1.0;
  const double phi = phi1 + phi2;
  const double chi = 2.0 * k / std::abs(2.0 - phi - std::sqrt(phi * phi - 4.0 * phi));
  return {chi, chi * phi1, chi * phi2};
}

PsoCost pso_cost(const std::vector<Vec2>& waypoints, const std::vector<Zone>& zones,
                 double penalty) {
  if (waypoints.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "pso_cost needs at least two waypoints");
  PsoCost c;
  c.length = polyline_length(waypoints);
  for (const auto& z : zones) {
    for (const auto& w : waypoints) {
      const double phi = 1.0 - (w - z.center).norm() / z.radius;
      if (phi > 0.0) c.violation += phi;
    }
  }
  c.cost = c.length * (1.0 + penalty * c.violation);
  return c;
}

std::vector<double> natural_spline(const std::vector<double>& xs, const std::vector<double>& ys,
                                   const std::vector<double>& at) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) throw Error(ErrorKind::InvalidArgument, "spline needs >= 2 knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(xs[i + 1] > xs[i])) throw Error(ErrorKind::InvalidArgument, "spline knots must increase");

  // Second derivatives m with m[0] = m[n-1] = 0 (Thomas algorithm).
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n - 2), upper(n - 2), rhs(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n - 2; ++i) {
      const double lower = xs[i + 1] - xs[i];
      const double f = lower / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i-- > 0;) {
      m[i + 1] = (rhs[i] - (i + 1 < n - 2 ? upper[i] * m[i + 2] : 0.0)) / diag[i];
    }
  }

  std::vector<double> out;
  out.reserve(at.size());
  std::size_t seg = 0;
  for (double x : at) {
    if (x <= xs.front()) {
      seg = 0;
    } else {
      while (seg + 2 < n && x > xs[seg + 1]) ++seg;
      while (seg > 0 && x < xs[seg]) --seg;
    }
    const double h = xs[seg + 1] - xs[seg];
    const double a = (xs[seg + 1] - x) / h, b = (x - xs[seg]) / h;
    out.push_back(a * ys[seg] + b * ys[seg + 1] +
                  ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0);
  }
  return out;
}

namespace {

/// Fixed-abscissa spline path: knots and waypoints are spaced uniformly in x
/// between S and E; the swarm only moves interior knot ordinates.
class SplinePath {
 public:
  SplinePath(const Vec2& s, const Vec2& e, int interior, int segments) : s_(s), e_(e) {
    if (s.x() == e.x())
      throw Error(ErrorKind::InvalidArgument, "spline path needs x_s != x_e");
    for (int k = 0; k <= interior + 1; ++k) knots_t_.push_back(double(k) / (interior + 1));
    for (int j = 0; j <= segments; ++j) samples_t_.push_back(double(j) / segments);
  }

  std::vector<Vec2> nodes(const Eigen::VectorXd& y) const {
    std::vector<Vec2> out{s_};
    for (Eigen::Index k = 0; k < y.size(); ++k) out.emplace_back(x_at(knots_t_[k + 1]), y[k]);
    out.push_back(e_);
    return out;
  }

  std::vector<Vec2> waypoints(const Eigen::VectorXd& y) const {
    std::vector<double> ys{s_.y()};
    for (Eigen::Index k = 0; k < y.size(); ++k) ys.push_back(y[k]);
    ys.push_back(e_.y());
    const auto sampled = natural_spline(knots_t_, ys, samples_t_);
    std::vector<Vec2> out;
    out.reserve(sampled.size());
    for (std::size_t j = 0; j < sampled.size(); ++j)
      out.emplace_back(x_at(samples_t_[j]), sampled[j]);
    out.front() = s_;
    out.back() = e_;
    return out;
  }

  Eigen::VectorXd straight(int interior) const {
    Eigen::VectorXd y(interior);
    for (int k = 0; k < interior; ++k) y[k] = s_.y() + knots_t_[k + 1] * (e_.y() - s_.y());
    return y;
  }

 private:
  double x_at(double t) const { return s_.x() + t * (e_.x() - s_.x()); }

  Vec2 s_, e_;
  std::vector<double> knots_t_, samples_t_;
};

}  // namespace

PsoResult pso_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                   const Vec2& e, const PsoParams& params) {
  if (params.interior_nodes < 1 || params.segments < 1 || params.particles < 1 ||
      params.iterations < 1)
    throw Error(ErrorKind::InvalidArgument, "PSO sizes must be >= 1");
  if (!(params.w_damp > 0.0 && params.w_damp <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "w_damp must lie in (0, 1]");
  const int K = params.interior_nodes;
  const double y_lo = params.y_min.value_or(bounds.min.y());
  const double y_hi = params.y_max.value_or(bounds.max.y());
  if (!(y_lo < y_hi)) throw Error(ErrorKind::InvalidArgument, "empty y bounds");

  const SplinePath spline(s, e, K, params.segments);
  auto evaluate = [&](const Eigen::VectorXd& y) {
    return pso_cost(spline.waypoints(y), zones, params.penalty);
  };

  Rng rng(params.seed);
  const int P = params.particles;
  std::vector<Eigen::VectorXd> pos(P, Eigen::VectorXd(K)), vel(P, Eigen::VectorXd::Zero(K));
  for (auto& y : pos)
    for (int k = 0; k < K; ++k) y[k] = rng.uniform(y_lo, y_hi);
  std::vector<Eigen::VectorXd> pbest = pos;
  std::vector<double> pbest_cost(P, kInf);

  Eigen::VectorXd gbest = spline.straight(K);
  double gbest_cost = evaluate(gbest).cost;

  PsoResult result;
  double w = params.coeffs.w;
  for (int g = 0; g < params.iterations; ++g) {
    for (int p = 0; p < P; ++p) {
      const double c = evaluate(pos[p]).cost;
      if (c < pbest_cost[p]) {
        pbest_cost[p] = c;
        pbest[p] = pos[p];
      }
      if (pbest_cost[p] < gbest_cost) {
        gbest_cost = pbest_cost[p];
        gbest = pbest[p];
      }
      const double r1 = rng.uniform(), r2 = rng.uniform();
      vel[p] = w * vel[p] + params.coeffs.c1 * r1 * (pbest[p] - pos[p]) +
               params.coeffs.c2 * r2 * (gbest - pos[p]);
      vel[p] = vel[p].cwiseMax(-params.v_max).cwiseMin(params.v_max);
      pos[p] = (pos[p] + vel[p]).cwiseMax(y_lo).cwiseMin(y_hi);
    }
    w *= params.w_damp;
    result.history.push_back(gbest_cost);
  }

  result.path.nodes = spline.nodes(gbest);
  result.path.waypoints = spline.waypoints(gbest);
  result.cost = pso_cost(result.path.waypoints, zones, params.penalty);
  result.path.length = result.cost.length;
  return result;
}

Vec2 rrt_steer(const Vec2& near, const Vec2& rand, double step) {
  const Vec2 d = rand - near;
  const double len = d.norm();
  if (len == 0.0) return near;
  return near + step * d / len;
}

RrtResult rrt_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                   const Vec2& e, const RrtParams& params) {
  if (!(params.step > 0.0) || !(params.goal_tolerance > 0.0))
    throw Error(ErrorKind::InvalidArgument, "RRT step and tolerance must be > 0");
  for (const auto& z : zones)
    for (const Vec2* p : {&s, &e})
      if (!point_clears(*p, z.circle(), kClearanceEps))
        throw Error(ErrorKind::EndpointInZone, "RRT endpoint inside zone " + std::to_string(z.id));

  Rng rng(params.seed);
  RrtResult r;
  r.tree.push_back(s);
  r.parent.push_back(-1);
  long goal_parent = -1;
  if ((e - s).norm() <= params.goal_tolerance && segment_free(zones, s, e)) goal_parent = 0;
  for (long it = 0; it < params.max_iterations && goal_parent < 0; ++it) {
    r.iterations = it + 1;
    const Vec2 rand(rng.uniform(bounds.min.x(), bounds.max.x()),
                    rng.uniform(bounds.min.y(), bounds.max.y()));
    std::size_t near = 0;
    double best = kInf;
    for (std::size_t k = 0; k < r.tree.size(); ++k) {
      const double d = (r.tree[k] - rand).squaredNorm();
      if (d < best) {
        best = d;
        near = k;
      }
    }
    if (best == 0.0) continue;
    const Vec2 x_new = rrt_steer(r.tree[near], rand, params.step);
    if (!bounds.contains(x_new) || !segment_free(zones, r.tree[near], x_new)) continue;
    r.tree.push_back(x_new);
    r.parent.push_back(long(near));
    if ((x_new - e).norm() <= params.goal_tolerance && segment_free(zones, x_new, e))
      goal_parent = long(r.tree.size()) - 1;
  }
  if (goal_parent < 0)
    throw Error(ErrorKind::PlanFailed,
                "RRT reached the iteration cap (" + std::to_string(params.max_iterations) + ")");

  std::vector<Vec2> nodes{e};
  for (long k = goal_parent; k >= 0; k = r.parent[std::size_t(k)])
    nodes.push_back(r.tree[std::size_t(k)]);
  std::reverse(nodes.begin(), nodes.end());
  r.path.nodes = nodes;
  r.path.waypoints = nodes;
  r.path.length = polyline_length(nodes);
  return r;
}

GridSearch wastar_grid(const std::vector<std::uint8_t>& free, int cols, int rows, long start,
                       long goal, double weight) {
  if (cols <= 0 || rows <= 0 || free.size() != std::size_t(cols) * std::size_t(rows))
    throw Error(ErrorKind::InvalidArgument, "grid size mismatch");
  if (!(weight >= 1.0)) throw Error(ErrorKind::InvalidArgument, "WA* weight must be >= 1");
  const long n = long(cols) * rows;
  if (start < 0 || start >= n || goal < 0 || goal >= n)
    throw Error(ErrorKind::InvalidArgument, "start/goal outside grid");

  GridSearch out;
  if (!free[std::size_t(start)] || !free[std::size_t(goal)]) return out;

  const int gx = int(goal % cols), gy = int(goal / cols);
  auto heuristic = [&](long idx) {
    const double dx = double(idx % cols - gx), dy = double(idx / cols - gy);
    return std::sqrt(dx * dx + dy * dy);
  };
  std::vector<double> g(std::size_t(n), kInf);
  std::vector<long> parent(std::size_t(n), -1);
  std::vector<std::uint8_t> closed(std::size_t(n), 0);
  using Entry = std::tuple<double, double, long>;  // f, h, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[std::size_t(start)] = 0.0;
  open.emplace(wastar_priority(0.0, heuristic(start), weight), heuristic(start), start);
  static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const auto [f, h, cur] = open.top();
    open.pop();
    if (closed[std::size_t(cur)]) continue;
    closed[std::size_t(cur)] = 1;
    ++out.expanded;
    if (cur == goal) break;
    const int cx = int(cur % cols), cy = int(cur / cols);
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + dx[k], ny = cy + dy[k];
      if (nx < 0 || ny < 0 || nx >= cols || ny >= rows) continue;
      const long nb = long(ny) * cols + nx;
      if (!free[std::size_t(nb)] || closed[std::size_t(nb)]) continue;
      const double cand = g[std::size_t(cur)] + (k < 4 ? 1.0 : M_SQRT2);
      if (cand < g[std::size_t(nb)]) {
        g[std::size_t(nb)] = cand;
        parent[std::size_t(nb)] = cur;
        const double hn = heuristic(nb);
        open.emplace(wastar_priority(cand, hn, weight), hn, nb);
      }
    }
  }
  if (!closed[std::size_t(goal)]) return out;
  out.found = true;
  for (long k = goal; k >= 0; k = parent[std::size_t(k)]) out.cells.push_back(k);
  std::reverse(out.cells.begin(), out.cells.end());
  for (std::size_t k = 0; k + 1 < out.cells.size(); ++k) {
    const long a = out.cells[k], b = out.cells[k + 1];
    if (a % cols != b % cols && a / cols != b / cols)
      ++out.diagonal;
    else
      ++out.straight;
  }
  out.cost = double(out.straight) + double(out.diagonal) * M_SQRT2;
  return out;
}

WAStarResult wastar_plan(const std::vector<Zone>& zones, const Bounds& bounds, const Vec2& s,
                         const Vec2& e, const WAStarParams& params) {
  if (!(params.cell > 0.0)) throw Error(ErrorKind::InvalidArgument, "cell size must be > 0");
  const int cols = std::max(1, int(std::ceil(bounds.width() / params.cell)));
  const int rows = std::max(1, int(std::ceil(bounds.height() / params.cell)));
  auto center = [&](long idx) {
    return Vec2(bounds.min.x() + (double(idx % cols) + 0.5) * params.cell,
                bounds.min.y() + (double(idx / cols) + 0.5) * params.cell);
  };
  std::vector<std::uint8_t> free(std::size_t(cols) * std::size_t(rows), 1);
  for (long idx = 0; idx < long(free.size()); ++idx) {
    const Vec2 c = center(idx);
    for (const auto& z : zones) {
      if ((c - z.center).squaredNorm() <= z.radius * z.radius) {
        free[std::size_t(idx)] = 0;
        break;
      }
    }
  }
  auto cell_of = [&](const Vec2& p) {
    const int i = std::clamp(int(std::floor((p.x() - bounds.min.x()) / params.cell)), 0, cols - 1);
    const int j = std::clamp(int(std::floor((p.y() - bounds.min.y()) / params.cell)), 0, rows - 1);
    return long(j) * cols + i;
  };
  const long start = cell_of(s), goal = cell_of(e);
  if (!free[std::size_t(start)] || !free[std::size_t(goal)])
    throw Error(ErrorKind::PlanFailed, "WA* start or goal cell is not traversable");

  WAStarResult r;
  r.search = wastar_grid(free, cols, rows, start, goal, params.weight);
  if (!r.search.found) throw Error(ErrorKind::PlanFailed, "WA* found no route");
  std::vector<Vec2> nodes;
  for (long idx : r.search.cells) nodes.push_back(center(idx));
  nodes.front() = s;
  if (nodes.size() == 1)
    nodes.push_back(e);
  else
    nodes.back() = e;
  r.path.nodes = nodes;
  r.path.waypoints = nodes;
  r.path.length = polyline_length(nodes);
  return r;
}

}  // namespace agpnav

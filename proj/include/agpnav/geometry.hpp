#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace agpnav {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;

/// Clearance tolerance shared by every planner: tangent constructions touch
/// circles exactly, so "outside" means distance >= r - kClearanceEps.
inline constexpr double kClearanceEps = 1e-6;

/// A disk used for collision tests (a safety zone, usually).
template <typename Scalar>
struct Disk {
  Vector2<Scalar> center;
  Scalar radius;
};
using Circle = Disk<double>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

/// Distance from p to the closed segment [a, b].
template <typename Scalar>
Scalar point_segment_distance(const Vector2<Scalar>& a, const Vector2<Scalar>& b,
                              const Vector2<Scalar>& p) {
  const Vector2<Scalar> d = b - a;
  const Scalar len2 = d.squaredNorm();
  if (len2 == Scalar(0)) return (p - a).norm();
  Scalar t = (p - a).dot(d) / len2;
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (a + t * d - p).norm();
}

/// Exact root count of |a + t(b-a) - c| = r for t in [0, 1]. A tangent
/// touch (zero discriminant) counts as one intersection.
template <typename Scalar>
int segment_circle_intersections(const Vector2<Scalar>& a, const Vector2<Scalar>& b,
                                 const Disk<Scalar>& circle) {
  const Vector2<Scalar> d = b - a;
  const Vector2<Scalar> f = a - circle.center;
  const Scalar qa = d.squaredNorm();
  const Scalar qb = Scalar(2) * d.dot(f);
  const Scalar qc = f.squaredNorm() - circle.radius * circle.radius;
  if (qa == Scalar(0)) return qc == Scalar(0) ? 1 : 0;
  const Scalar disc = qb * qb - Scalar(4) * qa * qc;
  if (disc < Scalar(0)) return 0;
  auto in_unit = [](Scalar t) { return t >= Scalar(0) && t <= Scalar(1); };
  if (disc == Scalar(0)) return in_unit(-qb / (Scalar(2) * qa)) ? 1 : 0;
  const Scalar sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const Scalar q = qb >= Scalar(0) ? Scalar(-0.5) * (qb + sq) : Scalar(-0.5) * (qb - sq);
  const Scalar t1 = q / qa;
  const Scalar t2 = q != Scalar(0) ? qc / q : -t1;
  return int(in_unit(t1)) + int(in_unit(t2));
}

/// True when the closed segment stays outside the disk up to `eps`.
template <typename Scalar>
bool segment_clears(const Vector2<Scalar>& a, const Vector2<Scalar>& b,
                    const Disk<Scalar>& circle, Scalar eps) {
  return point_segment_distance(a, b, circle.center) >= circle.radius - eps;
}

template <typename Scalar>
bool point_clears(const Vector2<Scalar>& p, const Disk<Scalar>& circle, Scalar eps) {
  return (p - circle.center).norm() >= circle.radius - eps;
}

/// Axis-aligned rectangle [min, max].
struct Bounds {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool contains(const Vec2& p, double eps = 0.0) const {
    return p.x() >= min.x() - eps && p.y() >= min.y() - eps && p.x() <= max.x() + eps &&
           p.y() <= max.y() + eps;
  }
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

/// Orthonormal frame with origin `origin`, first axis `along`, second axis
/// `along` rotated +90 degrees. Used to express a straight ideal path as the
/// positive u axis so no slope arithmetic is needed.
struct PathFrame {
  Vec2 origin;
  Vec2 along;
  Vec2 across;

  PathFrame(const Vec2& from, const Vec2& to) : origin(from) {
    along = (to - from).normalized();
    across = Vec2(-along.y(), along.x());
  }
  Vec2 to_local(const Vec2& p) const {
    const Vec2 r = p - origin;
    return {r.dot(along), r.dot(across)};
  }
  Vec2 to_world(const Vec2& q) const { return origin + q.x() * along + q.y() * across; }
};

}  // namespace agpnav

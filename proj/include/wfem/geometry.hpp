#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace wfem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Absolute tolerance for geometric predicates. Domains are assumed O(1).
inline constexpr double kGeomTol = 1e-12;

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
inline double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

struct Triangle {
  std::array<Point, 3> v;

  Triangle() = default;
  Triangle(const Point& a, const Point& b, const Point& c) : v{a, b, c} {}

  double signed_area() const { return 0.5 * orient(v[0], v[1], v[2]); }
  double area() const { return std::abs(signed_area()); }

  double diameter() const {
    return std::max({(v[0] - v[1]).norm(), (v[1] - v[2]).norm(), (v[2] - v[0]).norm()});
  }

  Point centroid() const { return (v[0] + v[1] + v[2]) / 3.0; }

  /// Affine image of barycentric coordinates (l0, l1, l2).
  Point map(double l0, double l1, double l2) const {
    return l0 * v[0] + l1 * v[1] + l2 * v[2];
  }

  Eigen::Vector3d barycentric(const Point& x) const {
    const double d = orient(v[0], v[1], v[2]);
    const double l1 = orient(v[0], x, v[2]) / d;
    const double l2 = orient(v[0], v[1], x) / d;
    return {1.0 - l1 - l2, l1, l2};
  }

  /// Containment with barycentric slack `tol` (relative to the element).
  bool contains(const Point& x, double tol = kGeomTol) const {
    const Eigen::Vector3d l = barycentric(x);
    return l.minCoeff() >= -tol;
  }

  /// Gradients of the three barycentric (P1 hat) functions.
  std::array<Vec2, 3> hat_gradients() const {
    const double d = orient(v[0], v[1], v[2]);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Point& b = v[(i + 1) % 3];
      const Point& c = v[(i + 2) % 3];
      g[i] = Vec2(b.y() - c.y(), c.x() - b.x()) / d;
    }
    return g;
  }

  /// Red refinement: three corner children followed by the middle child.
  std::array<Triangle, 4> red_children() const {
    const Point m01 = 0.5 * (v[0] + v[1]);
    const Point m12 = 0.5 * (v[1] + v[2]);
    const Point m20 = 0.5 * (v[2] + v[0]);
    return {Triangle(v[0], m01, m20), Triangle(m01, v[1], m12), Triangle(m20, m12, v[2]),
            Triangle(m12, m20, m01)};
  }
};

} // namespace wfem

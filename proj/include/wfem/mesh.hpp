#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wfem/geometry.hpp"

namespace wfem {

/// Strictly convex polygon with counterclockwise vertices.
class ConvexPolygon {
public:
  /// Throws GeometryError for fewer than 3 vertices, repeated vertices,
  /// clockwise order or collinear consecutive triples.
  explicit ConvexPolygon(std::vector<Point> vertices);

  static ConvexPolygon unit_square();

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  double area() const;
  Point centroid() const;
  double diameter() const;
  /// Bounding box as (min corner, max corner).
  std::pair<Point, Point> bounding_box() const;
  bool contains(const Point& x, double tol = kGeomTol) const;
  bool on_boundary(const Point& x, double tol = kGeomTol) const;

private:
  std::vector<Point> vertices_;
};

struct Location {
  std::size_t triangle;
  Eigen::Vector3d barycentric;
};

/// Conforming triangulation of a convex polygon. Immutable once built.
class Mesh {
public:
  using Cell = std::array<int, 3>;

  /// Validates orientation and conformity; computes h, h_min and the
  /// quasiuniformity ratio h / h_min.
  Mesh(std::vector<Point> vertices, std::vector<Cell> triangles,
       std::vector<bool> boundary_vertex);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& triangles() const { return triangles_; }
  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  const Cell& cell(std::size_t t) const { return triangles_[t]; }
  Triangle triangle(std::size_t t) const;
  bool is_boundary(std::size_t i) const { return boundary_[i]; }
  const std::vector<bool>& boundary_flags() const { return boundary_; }

  double h() const { return h_; }
  double h_min() const { return h_min_; }
  double quasiuniformity() const { return h_ / h_min_; }
  double area() const;

  /// Unique undirected edges as sorted vertex pairs.
  std::vector<std::array<int, 2>> edges() const;

private:
  std::vector<Point> vertices_;
  std::vector<Cell> triangles_;
  std::vector<bool> boundary_;
  double h_ = 0.0;
  double h_min_ = 0.0;
};

/// Fan from the polygon centroid, then red refinement until h <= target_h.
Mesh triangulate(const ConvexPolygon& polygon, double target_h);

/// Splits every triangle into four via edge midpoints.
Mesh refine_uniform(const Mesh& mesh);

/// Unit square split into n x n squares, each cut along the diagonal from
/// (i, j) to (i+1, j+1). Red refinement of this mesh reproduces the 2n mesh.
Mesh structured_square(int n);

/// Finds a triangle containing x; lowest triangle index wins ties.
/// Throws LocationError when x is outside the mesh.
Location locate(const Mesh& mesh, const Point& x);

} // namespace wfem

#include "wfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wfem/errors.hpp"

namespace wfem {

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3)
    throw GeometryError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((vertices_[i] - vertices_[j]).norm() <= kGeomTol) {
        std::ostringstream msg;
        msg << "polygon has repeated vertices " << i << " and " << j;
        throw GeometryError(msg.str());
      }
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % n];
    const Point& c = vertices_[(i + 2) % n];
    if (orient(a, b, c) <= kGeomTol) {
      std::ostringstream msg;
      msg << "polygon is not strictly convex and counterclockwise at vertex " << (i + 1) % n;
      throw GeometryError(msg.str());
    }
  }
  // A strictly left-turning chain can still wind twice; the angle sum catches it.
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices_[(i + 1) % n] - vertices_[i];
    const Vec2 e1 = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
    turning += std::atan2(e0.x() * e1.y() - e0.y() * e1.x(), e0.dot(e1));
  }
  if (std::abs(turning - 2.0 * M_PI) > 1e-6)
    throw GeometryError("polygon boundary winds more than once");
}

ConvexPolygon ConvexPolygon::unit_square() {
  return ConvexPolygon({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)});
}

double ConvexPolygon::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Point& p = vertices_[i];
    const Point& q = vertices_[(i + 1) % size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Point ConvexPolygon::centroid() const {
  Point c = Point::Zero();
  for (const auto& v : vertices_)
    c += v;
  return c / static_cast<double>(size());
}

double ConvexPolygon::diameter() const {
  double d = 0.0;
  for (const auto& a : vertices_)
    for (const auto& b : vertices_)
      d = std::max(d, (a - b).norm());
  return d;
}

std::pair<Point, Point> ConvexPolygon::bounding_box() const {
  Point lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

bool ConvexPolygon::contains(const Point& x, double tol) const {
  for (std::size_t i = 0; i < size(); ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % size()];
    if (orient(a, b, x) / (b - a).norm() < -tol)
      return false;
  }
  return true;
}

bool ConvexPolygon::on_boundary(const Point& x, double tol) const {
  if (!contains(x, tol))
    return false;
  for (std::size_t i = 0; i < size(); ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % size()];
    if (std::abs(orient(a, b, x)) / (b - a).norm() <= tol)
      return true;
  }
  return false;
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Cell> triangles,
           std::vector<bool> boundary_vertex)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)),
      boundary_(std::move(boundary_vertex)) {
  if (boundary_.size() != vertices_.size())
    throw GeometryError("boundary flag count does not match vertex count");
  if (triangles_.empty())
    throw GeometryError("mesh has no triangles");

  // Each directed edge may appear once; its reverse at most once.
  std::map<std::pair<int, int>, std::size_t> directed;
  h_ = 0.0;
  h_min_ = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Cell& c = triangles_[t];
    for (int k : c)
      if (k < 0 || static_cast<std::size_t>(k) >= vertices_.size())
        throw GeometryError("triangle references a missing vertex");
    const Triangle tri = triangle(t);
    if (tri.signed_area() <= 0.0) {
      std::ostringstream msg;
      msg << "triangle " << t << " has non-positive signed area";
      throw GeometryError(msg.str());
    }
    for (int k = 0; k < 3; ++k) {
      auto [it, inserted] = directed.emplace(std::make_pair(c[k], c[(k + 1) % 3]), t);
      if (!inserted)
        throw GeometryError("non-conforming mesh: directed edge used twice");
    }
    const double d = tri.diameter();
    h_ = std::max(h_, d);
    h_min_ = std::min(h_min_, d);
  }
}

Triangle Mesh::triangle(std::size_t t) const {
  const Cell& c = triangles_[t];
  return Triangle(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
}

double Mesh::area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < num_triangles(); ++t)
    a += triangle(t).signed_area();
  return a;
}

std::vector<std::array<int, 2>> Mesh::edges() const {
  std::vector<std::array<int, 2>> out;
  out.reserve(3 * triangles_.size());
  for (const Cell& c : triangles_)
    for (int k = 0; k < 3; ++k) {
      int a = c[k], b = c[(k + 1) % 3];
      if (a > b)
        std::swap(a, b);
      out.push_back({a, b});
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  std::vector<bool> boundary = mesh.boundary_flags();
  std::map<std::pair<int, int>, int> midpoint;

  // An edge lies on the boundary iff it belongs to exactly one triangle.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& c : mesh.triangles())
    for (int k = 0; k < 3; ++k) {
      int a = c[k], b = c[(k + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }

  auto mid = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = midpoint.find(key);
    if (it != midpoint.end())
      return it->second;
    const int idx = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (mesh.vertex(a) + mesh.vertex(b)));
    boundary.push_back(edge_count[key] == 1);
    midpoint.emplace(key, idx);
    return idx;
  };

  std::vector<Mesh::Cell> cells;
  cells.reserve(4 * mesh.num_triangles());
  for (const auto& c : mesh.triangles()) {
    const int m01 = mid(c[0], c[1]);
    const int m12 = mid(c[1], c[2]);
    const int m20 = mid(c[2], c[0]);
    cells.push_back({c[0], m01, m20});
    cells.push_back({m01, c[1], m12});
    cells.push_back({m20, m12, c[2]});
    cells.push_back({m12, m20, m01});
  }
  return Mesh(std::move(vertices), std::move(cells), std::move(boundary));
}

Mesh triangulate(const ConvexPolygon& polygon, double target_h) {
  if (!(target_h > 0.0))
    throw ParameterError("target_h must be positive");
  std::vector<Point> vertices = polygon.vertices();
  const int n = static_cast<int>(vertices.size());
  vertices.push_back(polygon.centroid());
  std::vector<bool> boundary(n, true);
  boundary.push_back(false);
  std::vector<Mesh::Cell> cells;
  for (int i = 0; i < n; ++i)
    cells.push_back({n, i, (i + 1) % n});
  Mesh mesh(std::move(vertices), std::move(cells), std::move(boundary));
  while (mesh.h() > target_h)
    mesh = refine_uniform(mesh);
  return mesh;
}

Mesh structured_square(int n) {
  if (n < 1)
    throw ParameterError("structured_square needs n >= 1");
  std::vector<Point> vertices;
  std::vector<bool> boundary;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      boundary.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Mesh::Cell> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Mesh(std::move(vertices), std::move(cells), std::move(boundary));
}

Location locate(const Mesh& mesh, const Point& x) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle tri = mesh.triangle(t);
    Eigen::Vector3d l = tri.barycentric(x);
    if (l.minCoeff() >= -kGeomTol) {
      return {t, l};
    }
  }
  std::ostringstream msg;
  msg << "point (" << x.x() << ", " << x.y() << ") is outside the mesh";
  throw LocationError(msg.str());
}

} // namespace wfem

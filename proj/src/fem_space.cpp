#include "wfem/fem.hpp"

#include <sstream>

#include "wfem/errors.hpp"

namespace wfem {

FemSpace::FemSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_)
    throw ParameterError("FemSpace needs a mesh");
  Tables t;
  t.dof_of_vertex.assign(mesh_->num_vertices(), -1);
  for (std::size_t v = 0; v < mesh_->num_vertices(); ++v)
    if (!mesh_->is_boundary(v)) {
      t.dof_of_vertex[v] = static_cast<int>(t.free_vertices.size());
      t.free_vertices.push_back(static_cast<int>(v));
    }
  tables_ = std::make_shared<const Tables>(std::move(t));
}

DiscreteField::DiscreteField(FemSpace space, Vector coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != space_.num_dofs())
    throw ParameterError("coefficient vector length does not match the number of free dofs");
}

DiscreteField DiscreteField::interpolate(const FemSpace& space,
                                         const std::function<double(const Point&)>& f) {
  Vector c(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t k = 0; k < space.num_dofs(); ++k)
    c[static_cast<Eigen::Index>(k)] = f(space.mesh().vertex(space.free_dofs()[k]));
  return DiscreteField(space, std::move(c));
}

double DiscreteField::vertex_value(std::size_t v) const {
  const int d = space_.dof_of_vertex(v);
  return d < 0 ? 0.0 : coeffs_[d];
}

Vector DiscreteField::vertex_values() const {
  Vector out(static_cast<Eigen::Index>(space_.mesh().num_vertices()));
  for (std::size_t v = 0; v < space_.mesh().num_vertices(); ++v)
    out[static_cast<Eigen::Index>(v)] = vertex_value(v);
  return out;
}

Vec2 DiscreteField::gradient(std::size_t t) const {
  const auto& cell = space_.mesh().cell(t);
  const auto grads = space_.mesh().triangle(t).hat_gradients();
  Vec2 g = Vec2::Zero();
  for (int k = 0; k < 3; ++k)
    g += vertex_value(cell[k]) * grads[k];
  return g;
}

double DiscreteField::value(std::size_t t, const Point& x) const {
  const auto& cell = space_.mesh().cell(t);
  const Eigen::Vector3d l = space_.mesh().triangle(t).barycentric(x);
  return l[0] * vertex_value(cell[0]) + l[1] * vertex_value(cell[1]) + l[2] * vertex_value(cell[2]);
}

double DiscreteField::operator()(const Point& x) const {
  const Location loc = locate(space_.mesh(), x);
  return value(loc.triangle, x);
}

ScalarFunction DiscreteField::as_function() const {
  auto self = std::make_shared<const DiscreteField>(*this);
  return {[self](const Point& x) { return (*self)(x); },
          [self](const Point& x) { return self->gradient(locate(self->space().mesh(), x).triangle); },
          {}};
}

LinearCoefficient LinearCoefficient::identity() {
  return {[](const Point&) { return Mat2::Identity(); }, 1.0, 1.0};
}

LinearCoefficient LinearCoefficient::constant(const Mat2& m) {
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12)
    throw ParameterError("coefficient matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> eig(m);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0))
    throw ParameterError("coefficient matrix must be positive definite");
  return {[m](const Point&) { return m; }, lo, hi};
}

void LinearCoefficient::validate(const std::vector<Point>& points) const {
  if (!(alpha > 0.0) || !(Lambda >= alpha))
    throw ParameterError("coefficient bounds need 0 < alpha <= Lambda");
  for (const Point& x : points) {
    const Mat2 m = A(x);
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12)
      throw ParameterError("coefficient matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2> eig(m);
    if (eig.eigenvalues().minCoeff() < alpha - 1e-9 || eig.eigenvalues().maxCoeff() > Lambda + 1e-9) {
      std::ostringstream msg;
      msg << "coefficient eigenvalues at (" << x.x() << ", " << x.y() << ") leave [alpha, Lambda]";
      throw ParameterError(msg.str());
    }
  }
}

std::vector<Point> ProblemData::singular_points() const {
  std::vector<Point> s = f.singular;
  s.insert(s.end(), g.singular.begin(), g.singular.end());
  return s;
}

SparseMatrix prolongation(const FemSpace& coarse, const FemSpace& fine) {
  std::vector<Eigen::Triplet<double>> trip;
  const Mesh& cm = coarse.mesh();
  for (std::size_t k = 0; k < fine.num_dofs(); ++k) {
    const Point& x = fine.mesh().vertex(fine.free_dofs()[k]);
    const Location loc = locate(cm, x);
    const auto& cell = cm.cell(loc.triangle);
    for (int a = 0; a < 3; ++a) {
      const int d = coarse.dof_of_vertex(cell[a]);
      if (d >= 0 && std::abs(loc.barycentric[a]) > 1e-14)
        trip.emplace_back(static_cast<int>(k), d, loc.barycentric[a]);
    }
  }
  SparseMatrix P(static_cast<Eigen::Index>(fine.num_dofs()),
                 static_cast<Eigen::Index>(coarse.num_dofs()));
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

} // namespace wfem

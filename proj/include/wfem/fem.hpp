#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "wfem/mesh.hpp"
#include "wfem/quadrature.hpp"
#include "wfem/weights.hpp"

namespace wfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Scalar function with gradient; `singular` lists points where either may
/// blow up (quadrature subdivides toward them).
struct ScalarFunction {
  std::function<double(const Point&)> value;
  std::function<Vec2(const Point&)> gradient;
  std::vector<Point> singular;
};

struct VectorFunction {
  std::function<Vec2(const Point&)> value;
  std::vector<Point> singular;
};

struct SourceFunction {
  std::function<double(const Point&)> value;
  std::vector<Point> singular;
};

/// P1 space with homogeneous Dirichlet conditions: one dof per interior
/// vertex. Copies share the mesh and the dof tables.
class FemSpace {
public:
  explicit FemSpace(std::shared_ptr<const Mesh> mesh);
  explicit FemSpace(Mesh mesh) : FemSpace(std::make_shared<const Mesh>(std::move(mesh))) {}

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  std::size_t num_dofs() const { return tables_->free_vertices.size(); }
  /// Vertex index of each free dof.
  const std::vector<int>& free_dofs() const { return tables_->free_vertices; }
  /// Free dof of a vertex, or -1 on the boundary.
  int dof_of_vertex(std::size_t v) const { return tables_->dof_of_vertex[v]; }

  bool operator==(const FemSpace& o) const { return mesh_ == o.mesh_; }

private:
  struct Tables {
    std::vector<int> free_vertices;
    std::vector<int> dof_of_vertex;
  };
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const Tables> tables_;
};

/// Element of the P1 space, vanishing on the boundary.
class DiscreteField {
public:
  DiscreteField(FemSpace space, Vector coeffs);
  static DiscreteField zero(const FemSpace& space) {
    return DiscreteField(space, Vector::Zero(static_cast<Eigen::Index>(space.num_dofs())));
  }
  /// Vertex interpolant of f (boundary values dropped).
  static DiscreteField interpolate(const FemSpace& space, const std::function<double(const Point&)>& f);

  const FemSpace& space() const { return space_; }
  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  double vertex_value(std::size_t v) const;
  Vector vertex_values() const;
  /// Constant gradient on triangle t.
  Vec2 gradient(std::size_t t) const;
  double value(std::size_t t, const Point& x) const;
  /// Point evaluation via locate().
  double operator()(const Point& x) const;
  /// Exact representation as a ScalarFunction (gradient picked by locate()).
  ScalarFunction as_function() const;

private:
  FemSpace space_;
  Vector coeffs_;
};

/// Symmetric matrix field with spectral bounds alpha I <= A(x) <= Lambda I.
struct LinearCoefficient {
  std::function<Mat2(const Point&)> A;
  double alpha = 1.0;
  double Lambda = 1.0;

  static LinearCoefficient identity();
  /// Bounds taken from the eigenvalues of the constant matrix.
  static LinearCoefficient constant(const Mat2& m);

  /// Samples A on `points`; throws ParameterError on asymmetry beyond 1e-12
  /// or eigenvalues outside [alpha - 1e-9, Lambda + 1e-9].
  void validate(const std::vector<Point>& points) const;
};

struct ProblemData {
  VectorFunction f;
  SourceFunction g;
  double p = 2.0;
  WeightSpec omega = WeightSpec::constant(1.0);

  std::vector<Point> singular_points() const;
};

enum class NormKind { value, gradient };

/// Stiffness over free dofs: sum_T int_T A grad(phi_i) . grad(phi_j).
SparseMatrix assemble_stiffness(const FemSpace& space, const LinearCoefficient& A);

/// Stiffness over all vertex hats, before boundary elimination.
SparseMatrix assemble_stiffness_all_vertices(const Mesh& mesh, const LinearCoefficient& A);

/// int f . grad(phi_i) + int g phi_i over free dofs.
Vector assemble_load(const FemSpace& space, const ProblemData& data,
                     const SingularIntegrationPolicy& policy = {});

/// sum_T (int_T w) grad(phi_i) . grad(phi_j).
SparseMatrix weighted_gradient_gram(const FemSpace& space, const WeightSpec& w,
                                    const SingularIntegrationPolicy& policy = {});

/// int w phi_i phi_j.
SparseMatrix weighted_mass_gram(const FemSpace& space, const WeightSpec& w,
                                const SingularIntegrationPolicy& policy = {});

/// int_T w for every triangle.
std::vector<double> element_weight_integrals(const Mesh& mesh, const WeightSpec& w,
                                             const SingularIntegrationPolicy& policy = {});

/// (int |u|^p w)^(1/p) or (int |grad u|^p w)^(1/p).
double weighted_norm(const DiscreteField& u, double p, const WeightSpec& w, NormKind kind,
                     const SingularIntegrationPolicy& policy = {});
double weighted_norm(const Mesh& mesh, const ScalarFunction& u, double p, const WeightSpec& w,
                     NormKind kind, const SingularIntegrationPolicy& policy = {});
/// Norm of exact - u_h.
double weighted_error_norm(const ScalarFunction& exact, const DiscreteField& uh, double p,
                           const WeightSpec& w, NormKind kind,
                           const SingularIntegrationPolicy& policy = {});
double weighted_norm(const Mesh& mesh, const VectorFunction& f, double p, const WeightSpec& w,
                     const SingularIntegrationPolicy& policy = {});
double weighted_norm(const Mesh& mesh, const SourceFunction& g, double p, const WeightSpec& w,
                     const SingularIntegrationPolicy& policy = {});

struct DataNorms {
  double f = 0.0;
  double g = 0.0;
};

/// Weighted L^p norms of f and g; throws DivergenceError when either is
/// not finite.
DataNorms validate_problem_data(const Mesh& mesh, const ProblemData& data,
                                const SingularIntegrationPolicy& policy = {});

/// Right-hand side of the Ritz projection: int grad(w) . grad(phi_i).
Vector ritz_rhs(const FemSpace& space, const ScalarFunction& w,
                const SingularIntegrationPolicy& policy = {});

/// Galerkin projection onto the space in the unweighted Dirichlet form.
DiscreteField ritz_project(const FemSpace& space, const ScalarFunction& w,
                           const SingularIntegrationPolicy& policy = {});

/// Interpolation of coarse hats at the vertices of a (nested) fine mesh,
/// restricted to free dofs of both spaces: fine = P * coarse.
SparseMatrix prolongation(const FemSpace& coarse, const FemSpace& fine);

} // namespace wfem

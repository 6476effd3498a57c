#include "wfem/fem.hpp"

#include "wfem/parallel.hpp"

namespace wfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using Local3 = Eigen::Matrix3d;

/// Assembles per-element 3x3 blocks; `dof` maps vertex -> row (or -1).
template <class LocalFn>
SparseMatrix assemble_blocks(const Mesh& mesh, std::size_t n, const std::function<int(int)>& dof,
                             LocalFn&& local) {
  std::vector<Triplets> parts(chunk_count(mesh.num_triangles()));
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int chunk) {
    Triplets& out = parts[chunk];
    out.reserve(9 * (end - begin));
    for (std::size_t t = begin; t < end; ++t) {
      const Local3 K = local(t);
      const auto& cell = mesh.cell(t);
      for (int a = 0; a < 3; ++a) {
        const int i = dof(cell[a]);
        if (i < 0)
          continue;
        for (int b = 0; b < 3; ++b) {
          const int j = dof(cell[b]);
          if (j >= 0)
            out.emplace_back(i, j, K(a, b));
        }
      }
    }
  });
  Triplets all;
  for (auto& p : parts)
    all.insert(all.end(), p.begin(), p.end());
  SparseMatrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  M.setFromTriplets(all.begin(), all.end());
  return M;
}

Local3 gradient_block(const Triangle& tri, const Mat2& Aint) {
  const auto g = tri.hat_gradients();
  Local3 K;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      K(a, b) = g[a].dot(Aint * g[b]);
  return K;
}

Local3 stiffness_block(const Mesh& mesh, std::size_t t, const LinearCoefficient& A) {
  const Triangle tri = mesh.triangle(t);
  const Mat2 Aint = integrate_rule<Mat2>(tri, [&](const Point& x) { return A.A(x); });
  return gradient_block(tri, Aint);
}

} // namespace

SparseMatrix assemble_stiffness(const FemSpace& space, const LinearCoefficient& A) {
  return assemble_blocks(space.mesh(), space.num_dofs(),
                         [&](int v) { return space.dof_of_vertex(v); },
                         [&](std::size_t t) { return stiffness_block(space.mesh(), t, A); });
}

SparseMatrix assemble_stiffness_all_vertices(const Mesh& mesh, const LinearCoefficient& A) {
  return assemble_blocks(mesh, mesh.num_vertices(), [](int v) { return v; },
                         [&](std::size_t t) { return stiffness_block(mesh, t, A); });
}

Vector assemble_load(const FemSpace& space, const ProblemData& data,
                     const SingularIntegrationPolicy& policy) {
  const Mesh& mesh = space.mesh();
  const std::vector<Point> singular = data.singular_points();
  std::vector<Eigen::Vector3d> local(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t t = begin; t < end; ++t) {
      const Triangle tri = mesh.triangle(t);
      const auto grads = tri.hat_gradients();
      auto integrand = [&](const Point& x) {
        const Vec2 fx = data.f.value(x);
        const double gx = data.g.value(x);
        const Eigen::Vector3d l = tri.barycentric(x);
        Eigen::Vector3d r;
        for (int a = 0; a < 3; ++a)
          r[a] = fx.dot(grads[a]) + gx * l[a];
        return r;
      };
      local[t] = integrate_singular<Eigen::Vector3d>(tri, integrand, singular, policy);
    }
  });
  Vector b = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& cell = mesh.cell(t);
    for (int a = 0; a < 3; ++a) {
      const int i = space.dof_of_vertex(cell[a]);
      if (i >= 0)
        b[i] += local[t][a];
    }
  }
  return b;
}

std::vector<double> element_weight_integrals(const Mesh& mesh, const WeightSpec& w,
                                             const SingularIntegrationPolicy& policy) {
  std::vector<double> out(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t t = begin; t < end; ++t)
      out[t] = integrate_weighted<double>(mesh.triangle(t), [](const Point&) { return 1.0; }, w,
                                          policy);
  });
  return out;
}

SparseMatrix weighted_gradient_gram(const FemSpace& space, const WeightSpec& w,
                                    const SingularIntegrationPolicy& policy) {
  const std::vector<double> mass = element_weight_integrals(space.mesh(), w, policy);
  return assemble_blocks(space.mesh(), space.num_dofs(),
                         [&](int v) { return space.dof_of_vertex(v); },
                         [&](std::size_t t) {
                           return gradient_block(space.mesh().triangle(t),
                                                 mass[t] * Mat2::Identity());
                         });
}

SparseMatrix weighted_mass_gram(const FemSpace& space, const WeightSpec& w,
                                const SingularIntegrationPolicy& policy) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  const Mesh& mesh = space.mesh();
  return assemble_blocks(mesh, space.num_dofs(), [&](int v) { return space.dof_of_vertex(v); },
                         [&](std::size_t t) {
                           const Triangle tri = mesh.triangle(t);
                           const Vec6 m = integrate_weighted<Vec6>(
                               tri,
                               [&](const Point& x) {
                                 const Eigen::Vector3d l = tri.barycentric(x);
                                 Vec6 r;
                                 r << l[0] * l[0], l[1] * l[1], l[2] * l[2], l[0] * l[1],
                                     l[1] * l[2], l[0] * l[2];
                                 return r;
                               },
                               w, policy);
                           Local3 K;
                           K << m[0], m[3], m[5], m[3], m[1], m[4], m[5], m[4], m[2];
                           return K;
                         });
}

Vector ritz_rhs(const FemSpace& space, const ScalarFunction& w,
                const SingularIntegrationPolicy& policy) {
  const Mesh& mesh = space.mesh();
  Vector b = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  std::vector<Eigen::Vector3d> local(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t t = begin; t < end; ++t) {
      const Triangle tri = mesh.triangle(t);
      const auto grads = tri.hat_gradients();
      const Vec2 gw = integrate_singular<Vec2>(tri, w.gradient, w.singular, policy);
      for (int a = 0; a < 3; ++a)
        local[t][a] = gw.dot(grads[a]);
    }
  });
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& cell = mesh.cell(t);
    for (int a = 0; a < 3; ++a) {
      const int i = space.dof_of_vertex(cell[a]);
      if (i >= 0)
        b[i] += local[t][a];
    }
  }
  return b;
}

} // namespace wfem

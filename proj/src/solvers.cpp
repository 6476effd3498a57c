#include "wfem/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "wfem/errors.hpp"
#include "wfem/linear_solvers.hpp"
#include "wfem/parallel.hpp"

namespace wfem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Vec2> element_gradients(const FemSpace& space, const Vector& coeffs) {
  const DiscreteField u(space, coeffs);
  std::vector<Vec2> g(space.mesh().num_triangles());
  for (std::size_t t = 0; t < g.size(); ++t)
    g[t] = u.gradient(t);
  return g;
}

/// Dual norm of the residual, sqrt(R^T S^-1 R).
double dual_norm(const SpdFactorization& S, const Vector& R) {
  return std::sqrt(std::max(0.0, R.dot(S.solve(R))));
}

} // namespace

nlohmann::json SolveReport::to_json() const {
  return {{"method", method},
          {"iterations", iterations},
          {"residual_history", residual_history},
          {"converged", converged},
          {"wall_time", wall_time},
          {"final_weighted_norm", final_weighted_norm}};
}

Solution solve_linear(const FemSpace& space, const LinearCoefficient& A, const ProblemData& data,
                      const SingularIntegrationPolicy& policy) {
  const auto start = Clock::now();
  const SparseMatrix S = assemble_stiffness(space, A);
  const Vector b = assemble_load(space, data, policy);
  LinearSolveInfo info;
  Vector c = solve_spd(S, b, &info);
  DiscreteField u(space, std::move(c));
  SolveReport rep;
  rep.method = info.direct ? "dense_cholesky" : "pcg_jacobi";
  rep.iterations = info.direct ? 1 : info.iterations;
  rep.residual_history = {b.norm() > 0.0 ? 1.0 : 0.0, info.relative_residual};
  rep.converged = true;
  rep.final_weighted_norm = weighted_norm(u, data.p, data.omega, NormKind::gradient, policy);
  rep.wall_time = seconds_since(start);
  return {std::move(u), std::move(rep)};
}

Vector assemble_residual(const FemSpace& space, const Nonlinearity& a, const Vector& load,
                         const Vector& coeffs) {
  const Mesh& mesh = space.mesh();
  const std::vector<Vec2> grads = element_gradients(space, coeffs);
  std::vector<Eigen::Vector3d> local(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t t = begin; t < end; ++t) {
      const Triangle tri = mesh.triangle(t);
      const Vec2 flux =
          integrate_rule<Vec2>(tri, [&](const Point& x) { return a.flux(x, grads[t]); });
      const auto hats = tri.hat_gradients();
      for (int k = 0; k < 3; ++k)
        local[t][k] = flux.dot(hats[k]);
    }
  });
  Vector R = -load;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& cell = mesh.cell(t);
    for (int k = 0; k < 3; ++k) {
      const int i = space.dof_of_vertex(cell[k]);
      if (i >= 0)
        R[i] += local[t][k];
    }
  }
  return R;
}

SparseMatrix assemble_jacobian(const FemSpace& space, const Nonlinearity& a, const Vector& coeffs) {
  const Mesh& mesh = space.mesh();
  const std::vector<Vec2> grads = element_gradients(space, coeffs);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle tri = mesh.triangle(t);
    const Mat2 J = integrate_rule<Mat2>(tri, [&](const Point& x) {
      const std::optional<Mat2> d = a.jacobian(x, grads[t]);
      if (!d)
        throw ParameterError("Newton needs the Jacobian of '" + a.name() + "'");
      return *d;
    });
    const auto hats = tri.hat_gradients();
    const auto& cell = mesh.cell(t);
    for (int r = 0; r < 3; ++r) {
      const int i = space.dof_of_vertex(cell[r]);
      if (i < 0)
        continue;
      for (int c = 0; c < 3; ++c) {
        const int j = space.dof_of_vertex(cell[c]);
        if (j >= 0)
          trip.emplace_back(i, j, hats[r].dot(J * hats[c]));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Solution solve_quasilinear(const FemSpace& space, const NonlinearityPtr& a,
                           const ProblemData& data, const QuasilinearOptions& options) {
  if (!a)
    throw ParameterError("solve_quasilinear needs a nonlinearity");
  const auto start = Clock::now();
  const bool newton = options.method == QuasilinearMethod::newton;
  SolveReport rep;
  rep.method = newton ? "newton" : "zarantonello";
  if (!newton && !a->mu())
    throw ParameterError("Zarantonello iteration needs a strong monotonicity constant mu");

  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  const Vector load = assemble_load(space, data, options.policy);
  const LinearCoefficient A_inf = asymptotic_coefficient(a);
  const SparseMatrix S = assemble_stiffness(space, A_inf);
  const SpdFactorization S_fact(S);

  Vector c = Vector::Zero(n);
  if (options.initial_guess) {
    if (options.initial_guess->size() != n)
      throw ParameterError("initial guess has the wrong length");
    c = *options.initial_guess;
  } else if (options.continuation) {
    c = S_fact.solve(load);
  }

  const int max_it = options.max_iterations > 0 ? options.max_iterations : (newton ? 100 : 20000);
  Vector R = assemble_residual(space, *a, load, c);
  double res = dual_norm(S_fact, R);
  const double initial = res;
  const double floor = 1e-15 * std::max(1.0, dual_norm(S_fact, load));
  rep.residual_history.push_back(res);

  auto finish = [&](bool converged) {
    DiscreteField u(space, c);
    rep.converged = converged;
    rep.final_weighted_norm = weighted_norm(u, data.p, data.omega, NormKind::gradient,
                                            options.policy);
    rep.wall_time = seconds_since(start);
    return Solution{std::move(u), rep};
  };
  auto done = [&] { return res <= options.rel_tol * initial || res <= floor; };

  if (newton) {
    while (!done()) {
      if (rep.iterations >= max_it) {
        rep.wall_time = seconds_since(start);
        throw NonconvergenceError("Newton reached the iteration limit", rep);
      }
      const SparseMatrix J = assemble_jacobian(space, *a, c);
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success)
        throw NonconvergenceError("Newton Jacobian is singular", rep);
      const Vector step = -lu.solve(R);
      double damping = 1.0;
      for (;;) {
        const Vector trial = c + damping * step;
        Vector R_trial = assemble_residual(space, *a, load, trial);
        const double res_trial = dual_norm(S_fact, R_trial);
        if (res_trial <= (1.0 - options.sigma * damping) * res) {
          c = trial;
          R = std::move(R_trial);
          res = res_trial;
          break;
        }
        damping *= 0.5;
        if (damping < options.min_damping) {
          rep.wall_time = seconds_since(start);
          std::ostringstream msg;
          msg << "Newton damping fell below " << options.min_damping << " at iteration "
              << rep.iterations + 1 << " (residual " << res << ")";
          throw NonconvergenceError(msg.str(), rep);
        }
      }
      ++rep.iterations;
      rep.residual_history.push_back(res);
    }
  } else {
    const double tau = *a->mu() / (a->Lambda() * a->Lambda());
    while (!done()) {
      if (rep.iterations >= max_it) {
        rep.wall_time = seconds_since(start);
        throw NonconvergenceError("Zarantonello iteration reached the iteration limit", rep);
      }
      c -= tau * S_fact.solve(R);
      R = assemble_residual(space, *a, load, c);
      res = dual_norm(S_fact, R);
      ++rep.iterations;
      rep.residual_history.push_back(res);
    }
  }
  return finish(true);
}

} // namespace wfem

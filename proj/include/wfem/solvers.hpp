#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfem/fem.hpp"
#include "wfem/nonlinearity.hpp"

namespace wfem {

struct SolveReport {
  std::string method;
  int iterations = 0;
  std::vector<double> residual_history; ///< preconditioned (dual-norm) residuals
  bool converged = false;
  double wall_time = 0.0;               ///< seconds
  double final_weighted_norm = 0.0;     ///< ||grad u_h||_{L^p(omega)}

  nlohmann::json to_json() const;
};

/// Solver failure carrying the partial report.
class NonconvergenceError : public SolverError {
public:
  NonconvergenceError(const std::string& what, SolveReport report)
      : SolverError(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

struct Solution {
  DiscreteField field;
  SolveReport report;
};

/// Solves stiffness(A) c = load(data): dense Cholesky below 2000 dofs,
/// Jacobi-PCG to relative residual 1e-12 above.
Solution solve_linear(const FemSpace& space, const LinearCoefficient& A, const ProblemData& data,
                      const SingularIntegrationPolicy& policy = {});

enum class QuasilinearMethod { newton, zarantonello };

struct QuasilinearOptions {
  QuasilinearMethod method = QuasilinearMethod::newton;
  double rel_tol = 1e-10;       ///< on the preconditioned residual, relative to the initial one
  double sigma = 1e-4;          ///< sufficient-decrease constant of the damped Newton step
  double min_damping = 0x1p-30; ///< smallest admissible damping factor
  int max_iterations = 0;       ///< 0: 100 for Newton, 20000 for Zarantonello
  bool continuation = false;    ///< start from the solution of the A_inf problem
  std::optional<Vector> initial_guess;
  SingularIntegrationPolicy policy;
};

/// R(c)_i = int a(x, grad u_h) . grad(phi_i) - load_i.
Vector assemble_residual(const FemSpace& space, const Nonlinearity& a, const Vector& load,
                         const Vector& coeffs);

/// dR/dc assembled from the Jacobian of a. Throws ParameterError when da is
/// unavailable at some element gradient.
SparseMatrix assemble_jacobian(const FemSpace& space, const Nonlinearity& a, const Vector& coeffs);

/// Solves the discrete quasilinear problem by damped Newton or by the
/// Zarantonello iteration c <- c - tau S^-1 R(c) with S = stiffness(A_inf)
/// and tau = mu / Lambda^2.
Solution solve_quasilinear(const FemSpace& space, const NonlinearityPtr& a,
                           const ProblemData& data, const QuasilinearOptions& options = {});

} // namespace wfem

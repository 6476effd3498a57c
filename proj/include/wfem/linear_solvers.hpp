#pragma once

#include <memory>

#include "wfem/fem.hpp"

namespace wfem {

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
  bool direct = false;
};

/// Systems below this size are solved by dense Cholesky.
inline constexpr std::size_t kDenseThreshold = 2000;

/// Jacobi-preconditioned conjugate gradients on x (initial guess in, solution
/// out). Stops at ||b - Ax|| <= rel_tol ||b||. Throws SolverError after
/// max_iterations (default 10 n) or on a non-positive curvature direction.
LinearSolveInfo pcg_jacobi(const SparseMatrix& A, const Vector& b, Vector& x,
                           double rel_tol = 1e-12, int max_iterations = -1);

/// Dense Cholesky below kDenseThreshold unknowns, PCG above.
Vector solve_spd(const SparseMatrix& A, const Vector& b, LinearSolveInfo* info = nullptr);

/// Reusable sparse Cholesky factorization of an SPD matrix.
class SpdFactorization {
public:
  explicit SpdFactorization(const SparseMatrix& A);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  Vector solve(const Vector& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
  std::size_t size() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Whether a Cholesky factorization of the symmetric part succeeds.
bool is_spd(const SparseMatrix& A);

} // namespace wfem

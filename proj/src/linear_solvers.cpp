#include "wfem/linear_solvers.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "wfem/errors.hpp"

namespace wfem {

LinearSolveInfo pcg_jacobi(const SparseMatrix& A, const Vector& b, Vector& x, double rel_tol,
                           int max_iterations) {
  const Eigen::Index n = b.size();
  if (A.rows() != n || A.cols() != n)
    throw ParameterError("pcg_jacobi: dimension mismatch");
  if (x.size() != n)
    x = Vector::Zero(n);
  if (max_iterations < 0)
    max_iterations = static_cast<int>(10 * std::max<Eigen::Index>(n, 1));

  Vector inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    if (!(d > 0.0))
      throw SolverError("pcg_jacobi: non-positive diagonal entry");
    inv_diag[i] = 1.0 / d;
  }

  LinearSolveInfo info;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    return info;
  }
  Vector r = b - A * x;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  double res = r.norm() / bnorm;
  while (res > rel_tol) {
    if (info.iterations >= max_iterations) {
      std::ostringstream msg;
      msg << "pcg_jacobi: no convergence in " << max_iterations
          << " iterations (relative residual " << res << ")";
      throw SolverError(msg.str());
    }
    const Vector q = A * p;
    const double curvature = p.dot(q);
    if (!(curvature > 0.0))
      throw SolverError("pcg_jacobi: matrix is not positive definite");
    const double step = rz / curvature;
    x += step * p;
    r -= step * q;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    res = r.norm() / bnorm;
    ++info.iterations;
  }
  info.relative_residual = res;
  return info;
}

Vector solve_spd(const SparseMatrix& A, const Vector& b, LinearSolveInfo* info) {
  LinearSolveInfo local;
  Vector x;
  if (static_cast<std::size_t>(b.size()) < kDenseThreshold) {
    const Eigen::MatrixXd dense(A);
    Eigen::LLT<Eigen::MatrixXd> llt(dense);
    if (llt.info() != Eigen::Success)
      throw SolverError("dense Cholesky failed: matrix is not SPD");
    x = llt.solve(b);
    local.direct = true;
    const double bnorm = b.norm();
    local.relative_residual = bnorm > 0.0 ? (b - A * x).norm() / bnorm : 0.0;
  } else {
    x = Vector::Zero(b.size());
    local = pcg_jacobi(A, b, x);
  }
  if (info)
    *info = local;
  return x;
}

struct SpdFactorization::Impl {
  Eigen::SimplicialLLT<SparseMatrix> llt;
  std::size_t n = 0;
};

SpdFactorization::SpdFactorization(const SparseMatrix& A) : impl_(std::make_unique<Impl>()) {
  impl_->n = static_cast<std::size_t>(A.rows());
  impl_->llt.compute(A);
  if (impl_->llt.info() != Eigen::Success)
    throw SolverError("sparse Cholesky failed: matrix is not SPD");
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

Vector SpdFactorization::solve(const Vector& b) const { return impl_->llt.solve(b); }

Eigen::MatrixXd SpdFactorization::solve(const Eigen::MatrixXd& B) const {
  return impl_->llt.solve(B);
}

std::size_t SpdFactorization::size() const { return impl_->n; }

bool is_spd(const SparseMatrix& A) {
  const SparseMatrix sym = 0.5 * (A + SparseMatrix(A.transpose()));
  Eigen::SimplicialLLT<SparseMatrix> llt(sym);
  return llt.info() == Eigen::Success;
}

} // namespace wfem

#include "wfem/analysis.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wfem/errors.hpp"
#include "wfem/linear_solvers.hpp"

namespace wfem {

namespace {

using Dense = Eigen::MatrixXd;

void check_dense_cap(std::size_t n) {
  if (n > kDenseDiagnosticsCap) {
    std::ostringstream msg;
    msg << "dense diagnostics are capped at " << kDenseDiagnosticsCap << " dofs (got " << n << ")";
    throw ParameterError(msg.str());
  }
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw ParameterError("exponent p must lie in (1, inf)");
}

Dense lower_cholesky(const Dense& A, const char* what) {
  Eigen::LLT<Dense> llt(A);
  if (llt.info() != Eigen::Success)
    throw SolverError(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

/// Random probe fields: Gaussian coefficients and smooth trigonometric modes.
std::vector<Vector> probe_fields(const FemSpace& space, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> mode(1, 4);
  const Mesh& mesh = space.mesh();
  Point lo = mesh.vertex(0), hi = mesh.vertex(0);
  for (const Point& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::vector<Vector> out;
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  for (int k = 0; k < count; ++k) {
    Vector c(n);
    if (k % 2 == 0) {
      for (Eigen::Index i = 0; i < n; ++i)
        c[i] = normal(rng);
    } else {
      const int mx = mode(rng), my = mode(rng);
      const double a = normal(rng), b = normal(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Point& x = mesh.vertex(space.free_dofs()[i]);
        const double sx = (x.x() - lo.x()) / (hi.x() - lo.x());
        const double sy = (x.y() - lo.y()) / (hi.y() - lo.y());
        c[i] = a * std::sin(mx * M_PI * sx) * std::sin(my * M_PI * sy) +
               b * std::sin(M_PI * sx) * std::sin(M_PI * sy);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

Mesh refine_times(Mesh mesh, int times) {
  for (int i = 0; i < times; ++i)
    mesh = refine_uniform(mesh);
  return mesh;
}

} // namespace

double infsup_constant(const FemSpace& space, double p, const WeightSpec& w,
                       const SingularIntegrationPolicy& policy) {
  check_p(p);
  if (p != 2.0)
    throw ParameterError("infsup_constant: exact computation is only available for p = 2");
  check_dense_cap(space.num_dofs());
  const Dense S(assemble_stiffness(space, LinearCoefficient::identity()));
  const Dense L = lower_cholesky(Dense(weighted_gradient_gram(space, w, policy)), "weighted Gram");
  const Dense Ld = lower_cholesky(Dense(weighted_gradient_gram(space, dual_weight(w, p), policy)),
                                  "dual weighted Gram");
  // M = L^-1 S Ld^-T
  const Dense X = L.triangularView<Eigen::Lower>().solve(S);
  const Dense M = Ld.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
  Eigen::BDCSVD<Dense> svd(M);
  return svd.singularValues().minCoeff();
}

ConstantEstimate infsup_sampled(const FemSpace& space, double p, const WeightSpec& w,
                                int num_probes, std::uint64_t seed,
                                const SingularIntegrationPolicy& policy) {
  check_p(p);
  const double q = p / (p - 1.0);
  const WeightSpec wd = dual_weight(w, p);
  const SparseMatrix S = assemble_stiffness(space, LinearCoefficient::identity());
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& c : probe_fields(space, num_probes, seed)) {
    const DiscreteField u(space, c);
    const double num = c.dot(S * c);
    const double den = weighted_norm(u, p, w, NormKind::gradient, policy) *
                       weighted_norm(u, q, wd, NormKind::gradient, policy);
    if (den > 0.0)
      best = std::min(best, num / den);
  }
  return {best, false, "sampled v = w ratio over random probes"};
}

ConstantEstimate ritz_stability_constant(const FemSpace& coarse, double p, const WeightSpec& w,
                                         int probe_refinements, std::uint64_t seed,
                                         const SingularIntegrationPolicy& policy) {
  check_p(p);
  if (probe_refinements < 1)
    throw ParameterError("ritz_stability_constant needs probe_refinements >= 1");
  const FemSpace fine(refine_times(coarse.mesh(), probe_refinements));
  const SparseMatrix Sc = assemble_stiffness(coarse, LinearCoefficient::identity());
  const SparseMatrix Sf = assemble_stiffness(fine, LinearCoefficient::identity());
  const SparseMatrix P = prolongation(coarse, fine);
  const SpdFactorization Sc_fact(Sc);

  if (p == 2.0) {
    check_dense_cap(coarse.num_dofs());
    // R = Sc^-1 P^T Sf maps fine coefficients to their Ritz projection.
    // K = R Df^-1 R^T = Y^T Df^-1 Y with Y = Sf P Sc^-1.
    const Dense Sc_inv = Sc_fact.solve(Dense(Dense::Identity(Sc.rows(), Sc.cols())));
    const Dense Y = Sf * (P * Sc_inv);
    const SpdFactorization Df(weighted_gradient_gram(fine, w, policy));
    const Dense K = Y.transpose() * Df.solve(Y);
    const Dense Lc = lower_cholesky(Dense(weighted_gradient_gram(coarse, w, policy)),
                                    "coarse weighted Gram");
    const Dense B = Lc.transpose() * K * Lc;
    Eigen::SelfAdjointEigenSolver<Dense> eig(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
    return {std::sqrt(eig.eigenvalues().maxCoeff()), true,
            "dense generalized eigenvalue of the Ritz operator"};
  }

  // Coarse probes lie in the range of the projection (ratio 1); both norms
  // are taken on the fine mesh so quadrature is shared.
  std::vector<Vector> probes = probe_fields(fine, 64, seed);
  for (const Vector& c : probe_fields(coarse, 4, seed + 1))
    probes.push_back(P * c);
  double best = 0.0;
  for (const Vector& c : probes) {
    const DiscreteField u(fine, c);
    const DiscreteField ru(fine, P * Sc_fact.solve(Vector(P.transpose() * (Sf * c))));
    const double den = weighted_norm(u, p, w, NormKind::gradient, policy);
    if (den > 0.0)
      best = std::max(best, weighted_norm(ru, p, w, NormKind::gradient, policy) / den);
  }
  return {best, false, "max ratio over random probes (lower bound)"};
}

PoincareEstimate poincare_constant(const FemSpace& space, double p, const WeightSpec& w,
                                   std::uint64_t seed, const SingularIntegrationPolicy& policy) {
  check_p(p);
  PoincareEstimate out;
  const Mesh& mesh = space.mesh();
  for (const Point& a : mesh.vertices())
    if (mesh.is_boundary(&a - mesh.vertices().data()))
      for (const Point& b : mesh.vertices())
        out.diameter = std::max(out.diameter, (a - b).norm());

  check_dense_cap(space.num_dofs());
  const Dense M(weighted_mass_gram(space, w, policy));
  const Dense D(weighted_gradient_gram(space, w, policy));
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> eig(M, D);
  if (eig.info() != Eigen::Success)
    throw SolverError("poincare_constant: generalized eigenproblem failed");
  if (p == 2.0) {
    out.constant = {std::sqrt(eig.eigenvalues().maxCoeff()), true,
                    "dense generalized eigenvalue (weighted mass, weighted Gram)"};
    return out;
  }
  std::vector<Vector> probes = probe_fields(space, 64, seed);
  probes.push_back(eig.eigenvectors().col(eig.eigenvectors().cols() - 1));
  double best = 0.0;
  for (const Vector& c : probes) {
    const DiscreteField u(space, c);
    const double den = weighted_norm(u, p, w, NormKind::gradient, policy);
    if (den > 0.0)
      best = std::max(best, weighted_norm(u, p, w, NormKind::value, policy) / den);
  }
  out.constant = {best, false, "max ratio over random probes (lower bound)"};
  return out;
}

OscillationReport small_oscillation_check(double alpha, double Lambda, double C_delta,
                                          double C_R) {
  if (!(alpha > 0.0) || !(Lambda > 0.0) || !(C_delta > 0.0) || !(C_R > 0.0))
    throw ParameterError("small_oscillation_check needs positive inputs");
  if (alpha > Lambda)
    throw ParameterError("small_oscillation_check needs alpha <= Lambda");
  OscillationReport r;
  r.lhs = 2.0 * C_delta * C_R * (1.0 - alpha / Lambda);
  r.holds = r.lhs <= 1.0;
  return r;
}

nlohmann::json ConstantsReport::to_json() const {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : beta_h)
    levels.push_back({{"h", l.h}, {"dofs", l.dofs}, {"beta", l.beta}});
  return {{"C_delta_est", C_delta_est}, {"C_R_est", C_R_est},
          {"C_R_exact", C_R_exact},     {"C_P_est", C_P_est},
          {"C_P_exact", C_P_exact},     {"beta_h", levels},
          {"provenance", provenance}};
}

ConstantsReport constants_report(const Mesh& initial, double p, const WeightSpec& w,
                                 const ConstantsOptions& options) {
  if (options.levels < 1 || options.ritz_level < 0 || options.ritz_level >= options.levels)
    throw ParameterError("constants_report needs 0 <= ritz_level < levels");
  ConstantsReport rep;
  Mesh mesh = initial;
  std::optional<FemSpace> finest;
  for (int level = 0; level < options.levels; ++level) {
    if (level > 0)
      mesh = refine_uniform(mesh);
    const FemSpace space(mesh);
    if (level == options.ritz_level) {
      const ConstantEstimate cr =
          ritz_stability_constant(space, p, w, options.probe_refinements, options.seed,
                                  options.policy);
      rep.C_R_est = cr.value;
      rep.C_R_exact = cr.exact;
    }
    const double beta = p == 2.0 ? infsup_constant(space, p, w, options.policy)
                                 : infsup_sampled(space, p, w, 64, options.seed, options.policy).value;
    rep.beta_h.push_back({mesh.h(), space.num_dofs(), beta});
    finest = space;
  }
  rep.C_delta_est = 1.0 / rep.beta_h.back().beta;
  const PoincareEstimate cp = poincare_constant(*finest, p, w, options.seed, options.policy);
  rep.C_P_est = cp.constant.value;
  rep.C_P_exact = cp.constant.exact;
  rep.provenance = {{"p", p},
                    {"weight", w.to_json()},
                    {"levels", options.levels},
                    {"ritz_level", options.ritz_level},
                    {"probe_refinements", options.probe_refinements},
                    {"seed", options.seed},
                    {"inf_sup_exact", p == 2.0},
                    {"diameter", cp.diameter}};
  return rep;
}

} // namespace wfem

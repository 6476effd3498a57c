#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wfem/fem.hpp"
#include "wfem/nonlinearity.hpp"
#include "wfem/solvers.hpp"

namespace wfem {

/// Spectral diagnostics are dense; larger problems are refused.
inline constexpr std::size_t kDenseDiagnosticsCap = 3000;

/// A constant together with how it was obtained.
struct ConstantEstimate {
  double value = 0.0;
  bool exact = true; ///< false: randomized lower bound
  std::string method;
};

/// Discrete inf-sup constant for p = 2:
///   min_w max_v (w^T S v) / (|w|_{D_w} |v|_{D_w'})
/// with S the Dirichlet stiffness and D the weighted gradient Grams of w and
/// its dual. Computed as the smallest singular value of the whitened
/// operator L_w^-1 S L_w'^-T. Throws ParameterError for p != 2.
double infsup_constant(const FemSpace& space, double p, const WeightSpec& w,
                       const SingularIntegrationPolicy& policy = {});

/// Sampled estimate for any p using v = w on random fields: the smallest
/// ratio (w^T S w) / (||grad w||_{L^p(w)} ||grad w||_{L^p'(w')}). Labeled
/// as a lower-bound probe, not the inf-sup constant.
ConstantEstimate infsup_sampled(const FemSpace& space, double p, const WeightSpec& w,
                                int num_probes = 64, std::uint64_t seed = 0xA9,
                                const SingularIntegrationPolicy& policy = {});

/// Operator norm of the Ritz projection onto `coarse`, restricted to the
/// space on the coarse mesh refined `probe_refinements` times, between
/// weighted gradient norms. Exact (dense generalized eigenproblem) for
/// p = 2; max ratio over random probes otherwise.
ConstantEstimate ritz_stability_constant(const FemSpace& coarse, double p, const WeightSpec& w,
                                         int probe_refinements, std::uint64_t seed = 0xA9,
                                         const SingularIntegrationPolicy& policy = {});

struct PoincareEstimate {
  ConstantEstimate constant; ///< C with ||u||_{L^p(w)} <= C ||grad u||_{L^p(w)}
  double diameter = 0.0;     ///< diam of the mesh, for the C_p diam(D) form
};

/// sqrt of the largest generalized eigenvalue of (weighted mass, weighted
/// gradient Gram) for p = 2; sampled lower bound otherwise.
PoincareEstimate poincare_constant(const FemSpace& space, double p, const WeightSpec& w,
                                   std::uint64_t seed = 0xA9,
                                   const SingularIntegrationPolicy& policy = {});

struct OscillationReport {
  double lhs = 0.0;
  bool holds = false;
  nlohmann::json to_json() const { return {{"lhs", lhs}, {"holds", holds}}; }
};

/// lhs = 2 C_delta C_R (1 - alpha / Lambda), holds = lhs <= 1.
OscillationReport small_oscillation_check(double alpha, double Lambda, double C_delta,
                                          double C_R);
inline OscillationReport small_oscillation_check(const LinearCoefficient& A, double C_delta,
                                                 double C_R) {
  return small_oscillation_check(A.alpha, A.Lambda, C_delta, C_R);
}

struct InfSupLevel {
  double h = 0.0;
  std::size_t dofs = 0;
  double beta = 0.0;
};

struct ConstantsReport {
  double C_delta_est = 0.0; ///< 1 / beta_h at the finest level
  double C_R_est = 0.0;
  bool C_R_exact = true;
  double C_P_est = 0.0;
  bool C_P_exact = true;
  std::vector<InfSupLevel> beta_h;
  nlohmann::json provenance;

  nlohmann::json to_json() const;
};

struct ConstantsOptions {
  int levels = 3;              ///< inf-sup levels starting from the initial mesh
  int ritz_level = 0;          ///< level whose space is the Ritz coarse space
  int probe_refinements = 2;
  std::uint64_t seed = 0xA9;
  SingularIntegrationPolicy policy;
};

ConstantsReport constants_report(const Mesh& initial, double p, const WeightSpec& w,
                                 const ConstantsOptions& options = {});

using Model = std::variant<LinearCoefficient, NonlinearityPtr>;

struct LevelResult {
  int level = 0;
  double h = 0.0;
  std::size_t dofs = 0;
  std::optional<double> err_grad;
  std::optional<double> err_val;
  std::optional<double> rate_grad;
  std::optional<double> rate_val;
  double grad_norm = 0.0;    ///< ||grad u_h||_{L^p(w)}
  double norm_monitor = 0.0; ///< grad_norm / (1 + ||f|| + ||g||)
  int iterations = 0;
};

struct ConvergenceReport {
  std::vector<LevelResult> levels;
  double data_norm_f = 0.0;
  double data_norm_g = 0.0;

  /// CSV with columns level,h,dofs,err_grad,err_val,rate_grad,rate_val,
  /// norm_monitor,iterations; `header` lines are written first as "# ...".
  std::string to_csv(const std::vector<std::string>& header = {}) const;
};

/// Failure inside a study; carries the levels completed so far.
class StudyFailure : public Error {
public:
  StudyFailure(const std::string& what, ConvergenceReport partial, bool divergence)
      : Error(what), partial_(std::move(partial)), divergence_(divergence) {}
  const ConvergenceReport& partial() const { return partial_; }
  bool divergence() const { return divergence_; }

private:
  ConvergenceReport partial_;
  bool divergence_;
};

struct StudyOptions {
  QuasilinearOptions solver;
  SingularIntegrationPolicy policy;
  /// Called after each level (for progress output).
  std::function<void(const LevelResult&)> on_level;
};

/// Solves on `initial` and its uniform refinements (levels >= 3). Records
/// weighted errors and log2 rates when `exact` is given, and always the
/// uniform-bound monitor ||grad u_h|| / (1 + ||f|| + ||g||).
ConvergenceReport convergence_study(const Mesh& initial, const ProblemData& data,
                                    const Model& model, const std::optional<ScalarFunction>& exact,
                                    int levels, const StudyOptions& options = {});

} // namespace wfem

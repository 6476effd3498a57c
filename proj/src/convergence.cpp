#include "wfem/analysis.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "wfem/errors.hpp"

namespace wfem {

namespace {

void put(std::ostringstream& out, const std::optional<double>& v) {
  if (v)
    out << *v;
}

std::optional<double> rate(const std::optional<double>& prev, const std::optional<double>& cur,
                           double h_prev, double h_cur) {
  if (!prev || !cur)
    return std::nullopt;
  // Errors at roundoff level carry no rate information.
  if (!(*prev > 1e-12) || !(*cur > 1e-12))
    return std::nullopt;
  return std::log(*prev / *cur) / std::log(h_prev / h_cur);
}

} // namespace

std::string ConvergenceReport::to_csv(const std::vector<std::string>& header) const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& line : header)
    out << "# " << line << '\n';
  out << "level,h,dofs,err_grad,err_val,rate_grad,rate_val,norm_monitor,iterations\n";
  for (const auto& l : levels) {
    out << l.level << ',' << l.h << ',' << l.dofs << ',';
    put(out, l.err_grad);
    out << ',';
    put(out, l.err_val);
    out << ',';
    put(out, l.rate_grad);
    out << ',';
    put(out, l.rate_val);
    out << ',' << l.norm_monitor << ',' << l.iterations << '\n';
  }
  return out.str();
}

ConvergenceReport convergence_study(const Mesh& initial, const ProblemData& data,
                                    const Model& model, const std::optional<ScalarFunction>& exact,
                                    int levels, const StudyOptions& options) {
  if (levels < 3)
    throw ParameterError("convergence_study needs at least 3 levels");
  if (const auto* A = std::get_if<LinearCoefficient>(&model))
    A->validate(initial.vertices());
  else if (!std::get<NonlinearityPtr>(model))
    throw ParameterError("convergence_study: null nonlinearity");

  ConvergenceReport report;
  try {
    const DataNorms norms = validate_problem_data(initial, data, options.policy);
    report.data_norm_f = norms.f;
    report.data_norm_g = norms.g;
  } catch (const DivergenceError& e) {
    throw StudyFailure(e.what(), report, true);
  }

  Mesh mesh = initial;
  for (int level = 0; level < levels; ++level) {
    if (level > 0)
      mesh = refine_uniform(mesh);
    try {
      const FemSpace space(mesh);
      Solution sol = std::holds_alternative<LinearCoefficient>(model)
                         ? solve_linear(space, std::get<LinearCoefficient>(model), data,
                                        options.policy)
                         : solve_quasilinear(space, std::get<NonlinearityPtr>(model), data,
                                             options.solver);
      LevelResult r;
      r.level = level;
      r.h = mesh.h();
      r.dofs = space.num_dofs();
      r.iterations = sol.report.iterations;
      r.grad_norm = weighted_norm(sol.field, data.p, data.omega, NormKind::gradient, options.policy);
      r.norm_monitor = r.grad_norm / (1.0 + report.data_norm_f + report.data_norm_g);
      if (exact) {
        r.err_grad = weighted_error_norm(*exact, sol.field, data.p, data.omega, NormKind::gradient,
                                         options.policy);
        r.err_val = weighted_error_norm(*exact, sol.field, data.p, data.omega, NormKind::value,
                                        options.policy);
      }
      if (!report.levels.empty()) {
        const LevelResult& prev = report.levels.back();
        r.rate_grad = rate(prev.err_grad, r.err_grad, prev.h, r.h);
        r.rate_val = rate(prev.err_val, r.err_val, prev.h, r.h);
      }
      report.levels.push_back(r);
      if (options.on_level)
        options.on_level(r);
    } catch (const DivergenceError& e) {
      throw StudyFailure(e.what(), report, true);
    } catch (const SolverError& e) {
      throw StudyFailure(e.what(), report, false);
    }
  }
  return report;
}

} // namespace wfem

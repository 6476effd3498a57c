#include "wfem/fem.hpp"

#include <cmath>

#include "wfem/errors.hpp"
#include "wfem/parallel.hpp"

namespace wfem {

namespace {

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw ParameterError("norm exponent p must lie in (1, inf)");
}

/// (sum_T int_T integrand(t, x) w(x) dx)^(1/p).
template <class Integrand>
double lp_norm(const Mesh& mesh, double p, const WeightSpec& w, std::span<const Point> singular,
               const SingularIntegrationPolicy& policy, Integrand&& integrand) {
  check_p(p);
  std::vector<double> local(mesh.num_triangles());
  parallel_for(mesh.num_triangles(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t t = begin; t < end; ++t)
      local[t] = integrate_weighted<double>(
          mesh.triangle(t), [&](const Point& x) { return integrand(t, x); }, w, policy, singular);
  });
  double sum = 0.0;
  for (double v : local)
    sum += v;
  if (!std::isfinite(sum))
    throw DivergenceError("weighted norm is not finite");
  return std::pow(sum, 1.0 / p);
}

} // namespace

double weighted_norm(const DiscreteField& u, double p, const WeightSpec& w, NormKind kind,
                     const SingularIntegrationPolicy& policy) {
  check_p(p);
  const Mesh& mesh = u.space().mesh();
  if (kind == NormKind::gradient) {
    // grad u_h is constant per element: only int_T w is needed.
    const std::vector<double> mass = element_weight_integrals(mesh, w, policy);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      sum += std::pow(u.gradient(t).norm(), p) * mass[t];
    if (!std::isfinite(sum))
      throw DivergenceError("weighted norm is not finite");
    return std::pow(sum, 1.0 / p);
  }
  return lp_norm(mesh, p, w, {}, policy, [&](std::size_t t, const Point& x) {
    return std::pow(std::abs(u.value(t, x)), p);
  });
}

double weighted_norm(const Mesh& mesh, const ScalarFunction& u, double p, const WeightSpec& w,
                     NormKind kind, const SingularIntegrationPolicy& policy) {
  if (kind == NormKind::gradient)
    return lp_norm(mesh, p, w, u.singular, policy, [&](std::size_t, const Point& x) {
      return std::pow(u.gradient(x).norm(), p);
    });
  return lp_norm(mesh, p, w, u.singular, policy, [&](std::size_t, const Point& x) {
    return std::pow(std::abs(u.value(x)), p);
  });
}

double weighted_error_norm(const ScalarFunction& exact, const DiscreteField& uh, double p,
                           const WeightSpec& w, NormKind kind,
                           const SingularIntegrationPolicy& policy) {
  const Mesh& mesh = uh.space().mesh();
  if (kind == NormKind::gradient) {
    std::vector<Vec2> grads(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      grads[t] = uh.gradient(t);
    return lp_norm(mesh, p, w, exact.singular, policy, [&](std::size_t t, const Point& x) {
      return std::pow((exact.gradient(x) - grads[t]).norm(), p);
    });
  }
  return lp_norm(mesh, p, w, exact.singular, policy, [&](std::size_t t, const Point& x) {
    return std::pow(std::abs(exact.value(x) - uh.value(t, x)), p);
  });
}

double weighted_norm(const Mesh& mesh, const VectorFunction& f, double p, const WeightSpec& w,
                     const SingularIntegrationPolicy& policy) {
  return lp_norm(mesh, p, w, f.singular, policy, [&](std::size_t, const Point& x) {
    return std::pow(f.value(x).norm(), p);
  });
}

double weighted_norm(const Mesh& mesh, const SourceFunction& g, double p, const WeightSpec& w,
                     const SingularIntegrationPolicy& policy) {
  return lp_norm(mesh, p, w, g.singular, policy, [&](std::size_t, const Point& x) {
    return std::pow(std::abs(g.value(x)), p);
  });
}

DataNorms validate_problem_data(const Mesh& mesh, const ProblemData& data,
                                const SingularIntegrationPolicy& policy) {
  check_p(data.p);
  return {weighted_norm(mesh, data.f, data.p, data.omega, policy),
          weighted_norm(mesh, data.g, data.p, data.omega, policy)};
}

} // namespace wfem

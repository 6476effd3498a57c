#include "wfem/quadrature.hpp"

namespace wfem {

const QuadratureRule& degree4_rule() {
  static const QuadratureRule rule = [] {
    // Two symmetric orbits (a, a, 1 - 2a).
    constexpr double a1 = 0.445948490915964886318329253883;
    constexpr double a2 = 0.0915762135097707434595714634022;
    constexpr double w1 = 0.223381589678011465695007008433;
    constexpr double w2 = (1.0 - 3.0 * w1) / 3.0;
    QuadratureRule r;
    r.degree = 4;
    for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
      const double b = 1.0 - 2.0 * a;
      r.points.emplace_back(b, a, a);
      r.points.emplace_back(a, b, a);
      r.points.emplace_back(a, a, b);
      r.weights.insert(r.weights.end(), 3, w);
    }
    return r;
  }();
  return rule;
}

void SingularIntegrationPolicy::validate() const {
  if (max_depth < 1)
    throw ParameterError("singular integration policy needs max_depth >= 1");
  if (!(rel_tol > 0.0))
    throw ParameterError("singular integration policy needs rel_tol > 0");
}

SingularIntegrationPolicy SingularIntegrationPolicy::from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw ValidationError("quadrature policy must be a JSON object");
  SingularIntegrationPolicy p;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_depth")
      p.max_depth = value.get<int>();
    else if (key == "rel_tol")
      p.rel_tol = value.get<double>();
    else
      throw ValidationError("unknown key in quadrature policy: " + key);
  }
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ValidationError(e.what());
  }
  return p;
}

nlohmann::json SingularIntegrationPolicy::to_json() const {
  return {{"max_depth", max_depth}, {"rel_tol", rel_tol}};
}

} // namespace wfem

#include "wfem/registry.hpp"

#include <cmath>
#include <set>

#include "wfem/errors.hpp"

namespace wfem {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct Ref {
  std::string name;
  json params;
};

Ref parse_ref(const json& ref, const std::string& kind) {
  if (ref.is_string())
    return {ref.get<std::string>(), json::object()};
  if (!ref.is_object() || !ref.contains("name") || !ref.at("name").is_string())
    throw ValidationError(kind + ": expected {\"name\": ..., \"params\": {...}}");
  for (const auto& [key, _] : ref.items())
    if (key != "name" && key != "params")
      throw ValidationError(kind + ": unknown key '" + key + "'");
  json params = ref.value("params", json::object());
  if (!params.is_object())
    throw ValidationError(kind + ": params must be an object");
  return {ref.at("name").get<std::string>(), params};
}

void allow_only(const Ref& r, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : r.params.items())
    if (!allowed.count(key))
      throw ValidationError(r.name + ": unknown parameter '" + key + "'");
}

double number(const Ref& r, const char* key) {
  if (!r.params.contains(key))
    throw ValidationError(r.name + ": missing parameter '" + key + "'");
  const json& v = r.params.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>()))
    throw ValidationError(r.name + ": parameter '" + key + "' must be a finite number");
  return v.get<double>();
}

Point point(const Ref& r, const char* key) {
  if (!r.params.contains(key))
    throw ValidationError(r.name + ": missing parameter '" + key + "'");
  const json& v = r.params.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(r.name + ": parameter '" + key + "' must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

ScalarFunction log_cutoff(const Point& c, double r0, double r1) {
  if (!(r0 > 0.0) || !(r1 > r0))
    throw ValidationError("log_cutoff: need 0 < r0 < r1");
  // eta = 1 on r <= r0, 0 on r >= r1, quintic smoothstep in between (C^2)
  auto eta = [=](double r) {
    if (r <= r0)
      return 1.0;
    if (r >= r1)
      return 0.0;
    const double s = (r - r0) / (r1 - r0);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  };
  auto deta = [=](double r) {
    if (r <= r0 || r >= r1)
      return 0.0;
    const double s = (r - r0) / (r1 - r0);
    return -30.0 * s * s * (1.0 - s) * (1.0 - s) / (r1 - r0);
  };
  ScalarFunction f;
  f.value = [=](const Point& x) {
    const double r = (x - c).norm();
    return r >= r1 ? 0.0 : eta(r) * std::log(r);
  };
  f.gradient = [=](const Point& x) -> Vec2 {
    const Vec2 d = x - c;
    const double r = d.norm();
    if (r >= r1)
      return Vec2::Zero();
    return (deta(r) * std::log(r) + eta(r) / r) / r * d;
  };
  f.singular = {c};
  return f;
}

} // namespace

ScalarFunction make_scalar_function(const json& ref) {
  const Ref r = parse_ref(ref, "scalar function");
  ScalarFunction f;
  if (r.name == "zero") {
    allow_only(r, {});
    f.value = [](const Point&) { return 0.0; };
    f.gradient = [](const Point&) { return Vec2::Zero().eval(); };
  } else if (r.name == "constant") {
    allow_only(r, {"value"});
    const double c = number(r, "value");
    f.value = [c](const Point&) { return c; };
    f.gradient = [](const Point&) { return Vec2::Zero().eval(); };
  } else if (r.name == "sin_sin") {
    allow_only(r, {});
    f.value = [](const Point& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); };
    f.gradient = [](const Point& x) {
      return Vec2(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                  M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
    };
  } else if (r.name == "minus_laplace_sin_sin") {
    allow_only(r, {});
    f.value = [](const Point& x) {
      return 2.0 * M_PI * M_PI * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
    };
    f.gradient = [](const Point& x) {
      const double k = 2.0 * M_PI * M_PI * M_PI;
      return Vec2(k * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                  k * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
    };
  } else if (r.name == "polynomial_bubble") {
    allow_only(r, {});
    f.value = [](const Point& x) { return x.x() * (1 - x.x()) * x.y() * (1 - x.y()); };
    f.gradient = [](const Point& x) {
      return Vec2((1 - 2 * x.x()) * x.y() * (1 - x.y()), x.x() * (1 - x.x()) * (1 - 2 * x.y()));
    };
  } else if (r.name == "minus_laplace_polynomial_bubble") {
    allow_only(r, {});
    f.value = [](const Point& x) {
      return 2.0 * (x.x() * (1 - x.x()) + x.y() * (1 - x.y()));
    };
    f.gradient = [](const Point& x) {
      return Vec2(2.0 * (1 - 2 * x.x()), 2.0 * (1 - 2 * x.y()));
    };
  } else if (r.name == "log_cutoff") {
    allow_only(r, {"center", "r0", "r1"});
    f = log_cutoff(point(r, "center"), number(r, "r0"), number(r, "r1"));
  } else {
    throw ValidationError("unknown scalar function '" + r.name + "'");
  }
  return f;
}

SourceFunction make_source_function(const json& ref) {
  ScalarFunction s = make_scalar_function(ref);
  return {s.value, s.singular};
}

VectorFunction make_vector_function(const json& ref, const Model* model) {
  const Ref r = parse_ref(ref, "vector function");
  VectorFunction f;
  if (r.name == "zero") {
    allow_only(r, {});
    f.value = [](const Point&) { return Vec2::Zero().eval(); };
  } else if (r.name == "constant_vector") {
    allow_only(r, {"value"});
    const Vec2 c = point(r, "value");
    f.value = [c](const Point&) { return c; };
  } else if (r.name == "gradient_of") {
    allow_only(r, {"of"});
    if (!r.params.contains("of"))
      throw ValidationError("gradient_of: missing parameter 'of'");
    ScalarFunction u = make_scalar_function(r.params.at("of"));
    f.value = u.gradient;
    f.singular = u.singular;
  } else if (r.name == "flux_of") {
    allow_only(r, {"of"});
    if (!r.params.contains("of"))
      throw ValidationError("flux_of: missing parameter 'of'");
    if (!model)
      throw ValidationError("flux_of needs a model");
    ScalarFunction u = make_scalar_function(r.params.at("of"));
    auto grad = u.gradient;
    if (const auto* A = std::get_if<LinearCoefficient>(model)) {
      auto Af = A->A;
      f.value = [Af, grad](const Point& x) { return (Af(x) * grad(x)).eval(); };
    } else {
      NonlinearityPtr a = std::get<NonlinearityPtr>(*model);
      f.value = [a, grad](const Point& x) { return a->flux(x, grad(x)); };
    }
    f.singular = u.singular;
  } else {
    throw ValidationError("unknown vector function '" + r.name + "'");
  }
  return f;
}

LinearCoefficient make_coefficient(const json& ref) {
  const Ref r = parse_ref(ref, "coefficient");
  if (r.name == "identity") {
    allow_only(r, {});
    return LinearCoefficient::identity();
  }
  if (r.name == "constant") {
    allow_only(r, {"matrix"});
    const json& m = r.params.value("matrix", json());
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() ||
        m[0].size() != 2 || m[1].size() != 2)
      throw ValidationError("constant: parameter 'matrix' must be [[a, b], [c, d]]");
    Mat2 A;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (!m[i][j].is_number())
          throw ValidationError("constant: matrix entries must be numbers");
        A(i, j) = m[i][j].get<double>();
      }
    if (std::abs(A(0, 1) - A(1, 0)) > 1e-12)
      throw ValidationError("constant: matrix must be symmetric");
    LinearCoefficient c = LinearCoefficient::constant(A);
    if (!(c.alpha > 0.0))
      throw ValidationError("constant: matrix must be positive definite");
    return c;
  }
  if (r.name == "smooth_oscillating") {
    allow_only(r, {"amplitude"});
    const double a = number(r, "amplitude");
    if (!(a >= 0.0 && a < 1.0))
      throw ValidationError("smooth_oscillating: amplitude must lie in [0, 1)");
    LinearCoefficient c;
    c.A = [a](const Point& x) {
      return ((1.0 + a * std::sin(2 * M_PI * x.x()) * std::sin(2 * M_PI * x.y())) *
              Mat2::Identity())
          .eval();
    };
    c.alpha = 1.0 - a;
    c.Lambda = 1.0 + a;
    return c;
  }
  throw ValidationError("unknown coefficient '" + r.name + "'");
}

NonlinearityPtr make_registered_nonlinearity(const json& ref) {
  const Ref r = parse_ref(ref, "nonlinearity");
  if (r.name == "linear") {
    allow_only(r, {"coefficient"});
    const json c = r.params.value("coefficient", json("identity"));
    return make_linear_nonlinearity(make_coefficient(c), {{"coefficient", c}});
  }
  if (r.name == "uhlenbeck_exp") {
    allow_only(r, {});
    return make_uhlenbeck_exp();
  }
  if (r.name == "uhlenbeck_rational") {
    allow_only(r, {"a_tilde"});
    const double a = number(r, "a_tilde");
    if (!(a > 0.0))
      throw ValidationError("uhlenbeck_rational: a_tilde must be positive");
    return make_uhlenbeck_rational(a);
  }
  if (r.name == "unit_direction") {
    // v / |v|: bounded, hence neither coercive nor asymptotically linear.
    allow_only(r, {});
    NonlinearityFunctions fn;
    fn.name = "unit_direction";
    fn.flux = [](const Point&, const Vec2& v) -> Vec2 {
      const double n = v.norm();
      return n > 0.0 ? Vec2(v / n) : Vec2::Zero();
    };
    fn.jacobian = [](const Point&, const Vec2& v) -> std::optional<Mat2> {
      const double n = v.norm();
      if (n == 0.0)
        return std::nullopt;
      return ((Mat2::Identity() - v * v.transpose() / (n * n)) / n).eval();
    };
    fn.asymptotic = [](const Point&) { return Mat2::Identity().eval(); };
    fn.alpha = 1.0;
    fn.Lambda = 1.0;
    return make_nonlinearity(std::move(fn));
  }
  throw ValidationError("unknown nonlinearity '" + r.name + "'");
}

ojson registry_list() {
  auto entry = [](const char* name, ojson params, const char* note) {
    ojson e;
    e["name"] = name;
    e["params"] = params.is_null() ? ojson::object() : params;
    e["description"] = note;
    return e;
  };
  ojson out;
  out["scalar_functions"] = ojson::array({
      entry("zero", {}, "u = 0"),
      entry("constant", {{"value", "number"}}, "u = value"),
      entry("sin_sin", {}, "u = sin(pi x) sin(pi y)"),
      entry("minus_laplace_sin_sin", {}, "2 pi^2 sin(pi x) sin(pi y)"),
      entry("polynomial_bubble", {}, "u = x(1-x) y(1-y)"),
      entry("minus_laplace_polynomial_bubble", {}, "2 x(1-x) + 2 y(1-y)"),
      entry("log_cutoff", {{"center", "[x, y]"}, {"r0", "number"}, {"r1", "number"}},
            "u = eta(r) log r, eta = 1 for r <= r0 and 0 for r >= r1 (C^2 quintic)"),
  });
  out["vector_functions"] = ojson::array({
      entry("zero", {}, "f = 0"),
      entry("constant_vector", {{"value", "[x, y]"}}, "f = value"),
      entry("gradient_of", {{"of", "scalar function"}}, "f = grad u"),
      entry("flux_of", {{"of", "scalar function"}}, "f = a(x, grad u) for the configured model"),
  });
  out["coefficients"] = ojson::array({
      entry("identity", {}, "A = I"),
      entry("constant", {{"matrix", "[[a, b], [b, c]]"}}, "constant SPD matrix"),
      entry("smooth_oscillating", {{"amplitude", "number in [0, 1)"}},
            "A = (1 + amplitude sin(2 pi x) sin(2 pi y)) I"),
  });
  out["nonlinearities"] = ojson::array({
      entry("linear", {{"coefficient", "coefficient (default identity)"}}, "a(x, v) = A(x) v"),
      entry("uhlenbeck_exp", {}, "a(v) = (1 + exp(-|v|^2)) v"),
      entry("uhlenbeck_rational", {{"a_tilde", "positive number"}},
            "a(v) = (a_tilde + 1 / (1 + |v|)) v"),
      entry("unit_direction", {}, "a(v) = v / |v| (not coercive; for the structure checker)"),
  });
  out["weights"] = ojson::array({
      entry("constant", {{"value", "positive number"}}, "w = value"),
      entry("power", {{"center", "[x, y]"}, {"gamma", "number"}}, "w = |x - center|^gamma"),
      entry("lattice_min", {{"children", "[weight, weight]"}}, "pointwise minimum"),
      entry("lattice_max", {{"children", "[weight, weight]"}}, "pointwise maximum"),
      entry("maximal_factor",
            {{"grid", "grid function"},
             {"eps", "number in (0, 1)"},
             {"k", "number or grid function"},
             {"levels", "integer"},
             {"power", "number (default 1)"}},
            "(k M[w]^eps)^power with M the discrete maximal function"),
  });
  return out;
}

} // namespace wfem

#include "wfem/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wfem/errors.hpp"

namespace wfem {

namespace {

Point point_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(std::string(what) + " must be an array [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

double number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError(std::string("missing numeric '") + key + "' in " + where);
  return j.at(key).get<double>();
}

/// Row-wise prefix sums of a grid function for fast ball sums.
struct PrefixRows {
  std::vector<double> sums; // (nx + 1) per row

  explicit PrefixRows(const GridFunction& g) : sums(static_cast<std::size_t>(g.ny) * (g.nx + 1)) {
    for (int j = 0; j < g.ny; ++j) {
      double* row = &sums[static_cast<std::size_t>(j) * (g.nx + 1)];
      row[0] = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row[i + 1] = row[i] + g(i, j);
    }
  }
};

struct MaximalData {
  GridFunction samples;
  PrefixRows prefix;
  GridFunction k;
  double eps;
  double power;
  int levels;
};

double maximal_with_prefix(const GridFunction& g, const PrefixRows& prefix, const Point& xin,
                           int levels) {
  const Point x = xin.cwiseMax(g.lo).cwiseMin(g.hi);
  const double dx = g.dx(), dy = g.dy();
  const double diam = (g.hi - g.lo).norm();
  double best = g.at(x);
  for (int level = 0; level <= levels; ++level) {
    const double r = diam * std::ldexp(1.0, -level);
    const int j_lo = std::max(0, static_cast<int>(std::ceil((x.y() - r - g.lo.y()) / dy - 0.5)));
    const int j_hi =
        std::min(g.ny - 1, static_cast<int>(std::floor((x.y() + r - g.lo.y()) / dy - 0.5)));
    double sum = 0.0;
    long count = 0;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double yc = g.lo.y() + (j + 0.5) * dy;
      const double dy2 = r * r - (yc - x.y()) * (yc - x.y());
      if (dy2 < 0.0)
        continue;
      const double half = std::sqrt(dy2);
      const int i_lo = std::max(0, static_cast<int>(std::ceil((x.x() - half - g.lo.x()) / dx - 0.5)));
      const int i_hi =
          std::min(g.nx - 1, static_cast<int>(std::floor((x.x() + half - g.lo.x()) / dx - 0.5)));
      if (i_hi < i_lo)
        continue;
      const double* row = &prefix.sums[static_cast<std::size_t>(j) * (g.nx + 1)];
      sum += row[i_hi + 1] - row[i_lo];
      count += i_hi - i_lo + 1;
    }
    if (count > 0)
      best = std::max(best, sum / static_cast<double>(count));
  }
  return best;
}

} // namespace

struct WeightSpec::Node {
  WeightFamily family = WeightFamily::constant;
  double value = 1.0;
  Point center = Point::Zero();
  double gamma = 0.0;
  std::shared_ptr<const Node> a, b;
  std::shared_ptr<const MaximalData> maximal;
};

GridFunction GridFunction::sample(Point lo, Point hi, int nx, int ny,
                                  const std::function<double(const Point&)>& f) {
  GridFunction g{lo, hi, nx, ny, {}};
  g.values.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      g.values[static_cast<std::size_t>(j) * nx + i] = f(g.cell_center(i, j));
  return g;
}

GridFunction GridFunction::constant(Point lo, Point hi, double value) {
  return GridFunction{lo, hi, 1, 1, {value}};
}

double GridFunction::at(const Point& x) const {
  const int i = std::clamp(static_cast<int>(std::floor((x.x() - lo.x()) / dx())), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y() - lo.y()) / dy())), 0, ny - 1);
  return (*this)(i, j);
}

double GridFunction::min() const { return *std::min_element(values.begin(), values.end()); }
double GridFunction::max() const { return *std::max_element(values.begin(), values.end()); }

nlohmann::json GridFunction::to_json() const {
  return {{"lo", {lo.x(), lo.y()}}, {"hi", {hi.x(), hi.y()}}, {"nx", nx}, {"ny", ny},
          {"values", values}};
}

GridFunction GridFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw ValidationError("grid must be a JSON object");
  reject_unknown(j, {"lo", "hi", "nx", "ny", "values"}, "grid");
  GridFunction g;
  g.lo = point_from_json(j.at("lo"), "grid.lo");
  g.hi = point_from_json(j.at("hi"), "grid.hi");
  g.nx = j.at("nx").get<int>();
  g.ny = j.at("ny").get<int>();
  g.values = j.at("values").get<std::vector<double>>();
  if (g.nx < 1 || g.ny < 1 || g.values.size() != static_cast<std::size_t>(g.nx) * g.ny)
    throw ValidationError("grid needs nx, ny >= 1 and nx * ny values");
  if (!(g.hi.x() > g.lo.x() && g.hi.y() > g.lo.y()))
    throw ValidationError("grid box must have hi > lo");
  return g;
}

std::string to_string(WeightFamily family) {
  switch (family) {
  case WeightFamily::constant:
    return "constant";
  case WeightFamily::power:
    return "power";
  case WeightFamily::lattice_min:
    return "lattice_min";
  case WeightFamily::lattice_max:
    return "lattice_max";
  case WeightFamily::maximal_factor:
    return "maximal_factor";
  }
  return "unknown";
}

WeightSpec WeightSpec::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw ParameterError("constant weight must be positive and finite");
  auto n = std::make_shared<Node>();
  n->family = WeightFamily::constant;
  n->value = c;
  return WeightSpec(std::move(n));
}

WeightSpec WeightSpec::power(const Point& center, double gamma) {
  if (!std::isfinite(gamma))
    throw ParameterError("power weight exponent must be finite");
  auto n = std::make_shared<Node>();
  n->family = WeightFamily::power;
  n->center = center;
  n->gamma = gamma;
  return WeightSpec(std::move(n));
}

double WeightSpec::operator()(const Point& x) const {
  const Node& n = *node_;
  switch (n.family) {
  case WeightFamily::constant:
    return n.value;
  case WeightFamily::power:
    return n.gamma == 0.0 ? 1.0 : std::pow((x - n.center).norm(), n.gamma);
  case WeightFamily::lattice_min:
    return std::min(WeightSpec(n.a)(x), WeightSpec(n.b)(x));
  case WeightFamily::lattice_max:
    return std::max(WeightSpec(n.a)(x), WeightSpec(n.b)(x));
  case WeightFamily::maximal_factor: {
    const MaximalData& m = *n.maximal;
    const double mw = maximal_with_prefix(m.samples, m.prefix, x, m.levels);
    return std::pow(m.k.at(x) * std::pow(mw, m.eps), m.power);
  }
  }
  return 1.0;
}

WeightFamily WeightSpec::family() const { return node_->family; }

std::vector<Point> WeightSpec::singular_points() const {
  const Node& n = *node_;
  switch (n.family) {
  case WeightFamily::power:
    if (n.gamma != 0.0)
      return {n.center};
    return {};
  case WeightFamily::lattice_min:
  case WeightFamily::lattice_max: {
    auto s = WeightSpec(n.a).singular_points();
    for (const Point& q : WeightSpec(n.b).singular_points())
      if (std::none_of(s.begin(), s.end(), [&](const Point& o) { return (o - q).norm() == 0.0; }))
        s.push_back(q);
    return s;
  }
  default:
    return {};
  }
}

double WeightSpec::constant_value() const {
  if (family() != WeightFamily::constant)
    throw ParameterError("weight is not constant");
  return node_->value;
}

Point WeightSpec::center() const {
  if (family() != WeightFamily::power)
    throw ParameterError("weight is not a power weight");
  return node_->center;
}

double WeightSpec::gamma() const {
  if (family() != WeightFamily::power)
    throw ParameterError("weight is not a power weight");
  return node_->gamma;
}

std::pair<WeightSpec, WeightSpec> WeightSpec::children() const {
  if (family() != WeightFamily::lattice_min && family() != WeightFamily::lattice_max)
    throw ParameterError("weight is not a lattice combination");
  return {WeightSpec(node_->a), WeightSpec(node_->b)};
}

nlohmann::json WeightSpec::to_json() const {
  const Node& n = *node_;
  nlohmann::json j;
  j["family"] = to_string(n.family);
  switch (n.family) {
  case WeightFamily::constant:
    j["value"] = n.value;
    break;
  case WeightFamily::power:
    j["center"] = {n.center.x(), n.center.y()};
    j["gamma"] = n.gamma;
    break;
  case WeightFamily::lattice_min:
  case WeightFamily::lattice_max:
    j["children"] = {WeightSpec(n.a).to_json(), WeightSpec(n.b).to_json()};
    break;
  case WeightFamily::maximal_factor: {
    const MaximalData& m = *n.maximal;
    j["grid"] = m.samples.to_json();
    j["eps"] = m.eps;
    if (m.k.nx == 1 && m.k.ny == 1)
      j["k"] = m.k.values[0];
    else
      j["k"] = m.k.to_json();
    j["levels"] = m.levels;
    if (m.power != 1.0)
      j["power"] = m.power;
    break;
  }
  }
  return j;
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ValidationError("weight must be an object with a string 'family'");
  const std::string family = j.at("family").get<std::string>();
  const std::string where = "weight '" + family + "'";
  try {
    if (family == "constant") {
      reject_unknown(j, {"family", "value"}, where);
      return constant(number(j, "value", where));
    }
    if (family == "power") {
      reject_unknown(j, {"family", "center", "gamma"}, where);
      return power(point_from_json(j.at("center"), "power.center"), number(j, "gamma", where));
    }
    if (family == "lattice_min" || family == "lattice_max") {
      reject_unknown(j, {"family", "children"}, where);
      const auto& c = j.at("children");
      if (!c.is_array() || c.size() != 2)
        throw ValidationError(where + " needs exactly two children");
      return combine(from_json(c[0]), from_json(c[1]),
                     family == "lattice_min" ? LatticeMode::min : LatticeMode::max);
    }
    if (family == "maximal_factor") {
      reject_unknown(j, {"family", "grid", "eps", "k", "levels", "power"}, where);
      const GridFunction samples = GridFunction::from_json(j.at("grid"));
      MaximalFactorOptions opt;
      opt.eps = number(j, "eps", where);
      if (j.contains("k")) {
        if (j.at("k").is_number())
          opt.k_constant = j.at("k").get<double>();
        else
          opt.k = GridFunction::from_json(j.at("k"));
      }
      if (j.contains("levels"))
        opt.levels = j.at("levels").get<int>();
      WeightSpec w = maximal_factor_weight(samples, opt);
      if (j.contains("power")) {
        auto n = std::make_shared<Node>(*w.node_);
        auto m = std::make_shared<MaximalData>(*n->maximal);
        m->power = number(j, "power", where);
        n->maximal = std::move(m);
        return WeightSpec(std::move(n));
      }
      return w;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError("unknown weight family '" + family + "'");
}

WeightSpec dual_weight(const WeightSpec& w, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw ParameterError("dual weight needs p in (1, inf)");
  const double s = -1.0 / (p - 1.0);
  const auto& n = w.node();
  switch (n.family) {
  case WeightFamily::constant:
    return WeightSpec::constant(std::pow(n.value, s));
  case WeightFamily::power:
    return WeightSpec::power(n.center, n.gamma * s);
  case WeightFamily::lattice_min:
  case WeightFamily::lattice_max: {
    // t -> t^s is decreasing, so min and max trade places.
    const auto [a, b] = w.children();
    return combine(dual_weight(a, p), dual_weight(b, p),
                   n.family == WeightFamily::lattice_min ? LatticeMode::max : LatticeMode::min);
  }
  case WeightFamily::maximal_factor: {
    auto node = std::make_shared<WeightSpec::Node>(n);
    auto m = std::make_shared<MaximalData>(*n.maximal);
    m->power *= s;
    node->maximal = std::move(m);
    return WeightSpec(std::move(node));
  }
  }
  throw ParameterError("unsupported weight family");
}

WeightSpec combine(const WeightSpec& a, const WeightSpec& b, LatticeMode mode) {
  auto n = std::make_shared<WeightSpec::Node>();
  n->family = mode == LatticeMode::min ? WeightFamily::lattice_min : WeightFamily::lattice_max;
  n->a = std::make_shared<const WeightSpec::Node>(a.node());
  n->b = std::make_shared<const WeightSpec::Node>(b.node());
  return WeightSpec(std::move(n));
}

double discrete_maximal_function(const GridFunction& samples, const Point& x, int levels) {
  return maximal_with_prefix(samples, PrefixRows(samples), x, levels);
}

WeightSpec maximal_factor_weight(const GridFunction& samples, const MaximalFactorOptions& options) {
  if (!(options.eps > 0.0 && options.eps < 1.0))
    throw ParameterError("maximal factor exponent eps must lie in (0, 1)");
  if (options.levels < 0)
    throw ParameterError("maximal factor needs levels >= 0");
  if (samples.values.empty() || samples.min() < 0.0)
    throw ParameterError("maximal factor samples must be nonnegative");
  if (samples.max() <= 0.0)
    throw ParameterError("degenerate weight: samples are identically zero");
  GridFunction k = options.k ? *options.k
                             : GridFunction::constant(samples.lo, samples.hi, options.k_constant);
  if (!(k.min() > 0.0) || !std::isfinite(k.max()))
    throw ParameterError("maximal factor multiplier k must be positive and bounded");
  auto m = std::make_shared<MaximalData>(
      MaximalData{samples, PrefixRows(samples), std::move(k), options.eps, 1.0, options.levels});
  auto n = std::make_shared<WeightSpec::Node>();
  n->family = WeightFamily::maximal_factor;
  n->maximal = std::move(m);
  return WeightSpec(std::move(n));
}

} // namespace wfem

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfem/geometry.hpp"

namespace wfem {

/// Piecewise-constant samples on a uniform nx x ny cell grid over a box.
struct GridFunction {
  Point lo = Point::Zero();
  Point hi = Point::Ones();
  int nx = 1;
  int ny = 1;
  std::vector<double> values; ///< row-major, values[j * nx + i]

  static GridFunction sample(Point lo, Point hi, int nx, int ny,
                             const std::function<double(const Point&)>& f);
  static GridFunction constant(Point lo, Point hi, double value);

  double dx() const { return (hi.x() - lo.x()) / nx; }
  double dy() const { return (hi.y() - lo.y()) / ny; }
  Point cell_center(int i, int j) const {
    return {lo.x() + (i + 0.5) * dx(), lo.y() + (j + 0.5) * dy()};
  }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  /// Value of the cell containing x; x is clamped to the box.
  double at(const Point& x) const;
  double min() const;
  double max() const;

  nlohmann::json to_json() const;
  static GridFunction from_json(const nlohmann::json& j);
};

enum class WeightFamily { constant, power, lattice_min, lattice_max, maximal_factor };
enum class LatticeMode { min, max };

std::string to_string(WeightFamily family);

/// Immutable, cheaply copyable weight omega : R^2 -> (0, inf).
class WeightSpec {
public:
  static WeightSpec constant(double c);
  /// |x - center|^gamma; singular at `center` when gamma < 0.
  static WeightSpec power(const Point& center, double gamma);

  double operator()(const Point& x) const;
  WeightFamily family() const;

  /// Points where the weight may blow up or vanish non-smoothly.
  std::vector<Point> singular_points() const;

  double constant_value() const;
  Point center() const;
  double gamma() const;
  std::pair<WeightSpec, WeightSpec> children() const;

  nlohmann::json to_json() const;
  /// Throws ValidationError on unknown families, unknown keys or bad values.
  static WeightSpec from_json(const nlohmann::json& j);

  struct Node;
  explicit WeightSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  const Node& node() const { return *node_; }

private:
  std::shared_ptr<const Node> node_;
};

/// omega^(-1/(p-1)). Closed over every family: powers map to powers,
/// min/max swap, maximal-function factors get a negative exponent.
WeightSpec dual_weight(const WeightSpec& w, double p);

/// Pointwise min or max.
WeightSpec combine(const WeightSpec& a, const WeightSpec& b, LatticeMode mode);

/// Multiplier k of a maximal-function weight, on the samples' grid or constant.
struct MaximalFactorOptions {
  double eps = 0.5;
  std::optional<GridFunction> k; ///< nullopt means k == k_constant
  double k_constant = 1.0;
  int levels = 8; ///< dyadic radii diam * 2^-j, j = 0..levels
};

/// k(x) * M[w](x)^eps with M the discrete Hardy-Littlewood maximal function:
/// the largest average of w over balls centered at x with radii from a
/// dyadic set, averages taken over grid cells whose centers fall in the ball.
WeightSpec maximal_factor_weight(const GridFunction& samples, const MaximalFactorOptions& options);

/// Discrete maximal function used by maximal_factor_weight (exposed for tests).
double discrete_maximal_function(const GridFunction& samples, const Point& x, int levels);

} // namespace wfem

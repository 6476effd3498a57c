#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "wfem/errors.hpp"
#include "wfem/geometry.hpp"
#include "wfem/weights.hpp"

namespace wfem {

struct QuadratureRule {
  std::vector<Eigen::Vector3d> points; ///< barycentric coordinates
  std::vector<double> weights;         ///< sum to 1
  int degree = 0;
};

/// Symmetric 6-point rule, exact for total degree <= 4.
const QuadratureRule& degree4_rule();

struct SingularIntegrationPolicy {
  int max_depth = 20;
  double rel_tol = 1e-8;

  void validate() const;
  static SingularIntegrationPolicy from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
template <class Derived> double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

inline bool all_finite(double v) { return std::isfinite(v); }
template <class Derived> bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

template <class V> V zero_like() {
  if constexpr (std::is_arithmetic_v<V>)
    return V(0);
  else
    return V::Zero();
}

} // namespace detail

/// Degree-4 rule mapped onto `tri`. Throws IntegrationError on a
/// non-finite integrand value.
template <class V, class F> V integrate_rule(const Triangle& tri, F&& f) {
  const QuadratureRule& rule = degree4_rule();
  V sum = detail::zero_like<V>();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& l = rule.points[q];
    const V val = f(tri.map(l[0], l[1], l[2]));
    if (!detail::all_finite(val))
      throw IntegrationError("non-finite integrand value in quadrature");
    sum += rule.weights[q] * val;
  }
  return tri.area() * sum;
}

/// Adaptive red refinement: a triangle is accepted when its rule and the sum
/// over its children agree to `tol` (absolute; halved per level), or at
/// `max_levels`. A negative tol means rel_tol times the first estimate.
template <class V, class F>
V integrate_adaptive(const Triangle& tri, F&& f, double tol, int max_levels,
                     const V* coarse = nullptr) {
  const V whole = coarse ? *coarse : integrate_rule<V>(tri, f);
  const std::array<Triangle, 4> ch = tri.red_children();
  std::array<V, 4> parts;
  V sum = detail::zero_like<V>();
  for (int k = 0; k < 4; ++k) {
    parts[k] = integrate_rule<V>(ch[k], f);
    sum += parts[k];
  }
  if (tol < 0.0)
    tol = -tol * detail::magnitude(sum);
  if (max_levels <= 1 || detail::magnitude(sum - whole) <= tol)
    return sum;
  V refined = detail::zero_like<V>();
  for (int k = 0; k < 4; ++k)
    refined += integrate_adaptive<V>(ch[k], f, 0.5 * tol, max_levels - 1, &parts[k]);
  return refined;
}

inline double integrate(const Triangle& tri, const std::function<double(const Point&)>& f) {
  return integrate_rule<double>(tri, f);
}

/// Running sum of per-level increments produced by geometric subdivision
/// toward a singular point. Increments of an integrable power singularity
/// decay geometrically; the tail is extrapolated from the observed ratio.
template <class V> class SubdivisionSeries {
public:
  explicit SubdivisionSeries(const SingularIntegrationPolicy& policy)
      : policy_(policy), total_(detail::zero_like<V>()), tail_(detail::zero_like<V>()) {}

  /// Returns true once the extrapolated tail is below rel_tol. Throws
  /// DivergenceError when the sum of the last kStallLevels increments has
  /// not shrunk against the sum of the kStallLevels before it (per-level
  /// mean ratio >= kStallRatio).
  bool add_level(const V& increment) {
    total_ += increment;
    totals_.push_back(detail::magnitude(total_));
    incs_.push_back(increment);
    const double inc = detail::magnitude(increment);
    const double scale = detail::magnitude(total_);
    const std::size_t n = incs_.size();
    if (n < 2)
      return false;
    // Window sums smooth out the level-to-level oscillation seen when the
    // singular point sits off the subdivision lattice.
    double ratio;
    if (n >= 2 * kStallLevels) {
      V recent = detail::zero_like<V>(), before = detail::zero_like<V>();
      for (std::size_t k = 0; k < kStallLevels; ++k) {
        recent += incs_[n - 1 - k];
        before += incs_[n - 1 - kStallLevels - k];
      }
      const double num = detail::magnitude(recent), den = detail::magnitude(before);
      ratio = den > 0.0 ? std::pow(num / den, 1.0 / kStallLevels) : 0.0;
      if (ratio >= kStallRatio && num > policy_.rel_tol * scale) {
        std::ostringstream msg;
        msg << "integrand not integrable near singular point: increments stopped decaying (mean "
               "ratio "
            << ratio << " over " << 2 * kStallLevels << " levels)";
        throw DivergenceError(msg.str());
      }
    } else {
      const double prev = detail::magnitude(incs_[n - 2]);
      ratio = prev > 0.0 ? inc / prev : 0.0;
    }
    if (ratio < 1.0) {
      const double factor = ratio / (1.0 - ratio);
      tail_ = factor * increment;
      return inc * (1.0 + factor) <= policy_.rel_tol * scale;
    }
    tail_ = detail::zero_like<V>();
    return false;
  }

  V estimate() const { return total_ + tail_; }
  V partial_sum() const { return total_; }
  const std::vector<double>& history() const { return totals_; }

  static constexpr double kStallRatio = 0.98;
  static constexpr std::size_t kStallLevels = 5;

private:
  SingularIntegrationPolicy policy_;
  V total_;
  V tail_;
  std::vector<V> incs_;
  std::vector<double> totals_;
};

/// Barycentric slack used to decide whether a (sub)triangle is "near" a
/// singular point and must be subdivided rather than integrated directly.
inline constexpr double kSingularInflation = 0.25;

/// Regular children next to a singular one are integrated adaptively. Their
/// distance to the singularity scales with their size, so a single rule
/// would leave a fixed relative error at every level.
inline constexpr double kNearFieldTol = 1e-9;
inline constexpr int kNearFieldMaxLevels = 8;

/// Barycentric slack of the near field: elements this close to a singular
/// point, but not touching it, also get the composite rule.
inline constexpr double kNearFieldSlack = 8.0;

/// A split point closer than this (barycentric) to an edge it is not on
/// would leave slivers; the element is red-refined instead until the point
/// sits well inside a child, on its boundary, or outside it.
inline constexpr double kSplitSnap = 0.15;

struct SubdivisionTrace {
  std::vector<double> partial_sums; ///< magnitudes of successive totals
  int depth = 0;
  bool subdivided = false;
};

namespace detail {

/// Point of `tri` closest to x.
inline Point closest_point(const Triangle& tri, const Point& x) {
  if (tri.barycentric(x).minCoeff() >= 0.0)
    return x;
  Point best = tri.v[0];
  double best_d = (x - best).squaredNorm();
  for (int i = 0; i < 3; ++i) {
    const Point& a = tri.v[i];
    const Point e = tri.v[(i + 1) % 3] - a;
    const double t = std::clamp((x - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    const Point q = a + t * e;
    if ((x - q).squaredNorm() < best_d) {
      best = q;
      best_d = (x - q).squaredNorm();
    }
  }
  return best;
}

} // namespace detail

/// Integrates f over `tri`. An element near one of `singular` is split at
/// the closest point c into triangles with a vertex at c (see kSplitSnap); each is refined
/// toward c, so the geometry repeats from level to level and the increments
/// of a power singularity decay at a fixed ratio. Other children use the
/// composite rule, or recurse when near another singular point.
template <class V, class F>
V integrate_singular(const Triangle& tri, F&& f, std::span<const Point> singular,
                     const SingularIntegrationPolicy& policy, SubdivisionTrace* trace = nullptr) {
  const Point* hit = nullptr;
  for (const Point& s : singular)
    if (tri.contains(s, kSingularInflation)) {
      hit = &s;
      break;
    }
  if (!hit) {
    if (trace)
      *trace = {};
    for (const Point& s : singular)
      if (tri.contains(s, kNearFieldSlack))
        return integrate_adaptive<V>(tri, f, -kNearFieldTol, kNearFieldMaxLevels);
    return integrate_rule<V>(tri, f);
  }
  policy.validate();
  Eigen::Vector3d l = tri.barycentric(detail::closest_point(tri, *hit)).cwiseMax(0.0);
  l = (l.array() < 1e-10).select(0.0, l);
  l /= l.sum();
  if ((l.array() > 0.0 && l.array() < kSplitSnap).any()) {
    if (trace)
      *trace = {};
    V sum = detail::zero_like<V>();
    for (const Triangle& c : tri.red_children())
      sum += integrate_singular<V>(c, f, singular, policy);
    return sum;
  }
  const Point c = tri.map(l[0], l[1], l[2]);
  std::vector<Triangle> corners;
  for (int i = 0; i < 3; ++i) {
    const Triangle piece(c, tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
    if (piece.area() > 1e-12 * tri.area())
      corners.push_back(piece);
  }
  SubdivisionSeries<V> series(policy);
  int depth = 0;
  while (depth < policy.max_depth) {
    ++depth;
    V increment = detail::zero_like<V>();
    for (Triangle& t : corners) {
      const std::array<Triangle, 4> ch = t.red_children(); // ch[0] keeps the vertex c
      for (int k = 1; k < 4; ++k)
        increment += integrate_singular<V>(ch[k], f, singular, policy);
      t = ch[0];
    }
    if (series.add_level(increment))
      break;
  }
  if (trace) {
    trace->partial_sums = series.history();
    trace->depth = depth;
    trace->subdivided = true;
  }
  return series.estimate();
}

inline double integrate_singular(const Triangle& tri, const std::function<double(const Point&)>& f,
                                 std::span<const Point> singular,
                                 const SingularIntegrationPolicy& policy = {}) {
  return integrate_singular<double>(tri, f, singular, policy);
}

/// Integral of f * w over `tri`. Subdivides toward the singular points of
/// `w` and toward `extra_singular` (singular data); equals the plain rule
/// applied to f * w when none is near the element.
template <class V, class F>
V integrate_weighted(const Triangle& tri, F&& f, const WeightSpec& w,
                     const SingularIntegrationPolicy& policy,
                     std::span<const Point> extra_singular = {}) {
  std::vector<Point> singular = w.singular_points();
  singular.insert(singular.end(), extra_singular.begin(), extra_singular.end());
  auto weighted = [&](const Point& x) -> V { return f(x) * w(x); };
  return integrate_singular<V>(tri, weighted, singular, policy);
}

inline double integrate_weighted(const Triangle& tri, const std::function<double(const Point&)>& f,
                                 const WeightSpec& w, const SingularIntegrationPolicy& policy = {}) {
  return integrate_weighted<double>(tri, f, w, policy);
}

} // namespace wfem

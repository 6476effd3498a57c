#include "wfem/weight_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wfem/errors.hpp"

namespace wfem {

namespace {

using Sample = Eigen::Vector2d;

/// Per-axis slack, so thin boxes are not "near" points a full length away.
bool near_box(const Point& a, const Point& b, const Point& s, double inflation) {
  const Point slack = inflation * (b - a);
  return s.x() >= a.x() - slack.x() && s.x() <= b.x() + slack.x() && s.y() >= a.y() - slack.y() &&
         s.y() <= b.y() + slack.y();
}

/// 3x3 Gauss-Legendre on each of 2^levels x 2^levels sub-boxes of [a, b].
Sample gauss_box(const Point& a, const Point& b, const std::function<Sample(const Point&)>& f,
                 int levels) {
  static const double node[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double weight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const int n = 1 << levels;
  const Point h = (b - a) / n;
  Sample sum = Sample::Zero();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < 3; ++q)
        for (int r = 0; r < 3; ++r) {
          const Sample v = f(a + Point((i + node[r]) * h.x(), (j + node[q]) * h.y()));
          if (!v.allFinite())
            throw IntegrationError("non-finite weight value in ball average");
          sum += (weight[r] * weight[q] * h.x() * h.y()) * v;
        }
  return sum;
}

/// Integral over the box [a, b]. A box near a singular point is split at
/// the closest point c into boxes with a corner at c, each halved toward c
/// level by level; mirrors integrate_singular on triangles.
Sample integrate_box(const Point& a, const Point& b, const std::function<Sample(const Point&)>& f,
                     std::span<const Point> singular, const SingularIntegrationPolicy& policy) {
  const Point* hit = nullptr;
  for (const Point& s : singular)
    if (near_box(a, b, s, kSingularInflation)) {
      hit = &s;
      break;
    }
  if (!hit) {
    for (const Point& s : singular)
      if (near_box(a, b, s, kNearFieldSlack))
        return gauss_box(a, b, f, 2);
    return gauss_box(a, b, f, 0);
  }
  const Point c = hit->cwiseMax(a).cwiseMin(b);
  const Point rel = (c - a).cwiseQuotient(b - a);
  for (int k = 0; k < 2; ++k) {
    const double edge = std::min(rel[k], 1.0 - rel[k]);
    if (edge > 1e-10 && edge < kSplitSnap) {
      const Point m = 0.5 * (a + b);
      Sample sum = Sample::Zero();
      for (int q = 0; q < 4; ++q) {
        const Point lo((q & 1) ? m.x() : a.x(), (q >> 1) ? m.y() : a.y());
        const Point hi((q & 1) ? b.x() : m.x(), (q >> 1) ? b.y() : m.y());
        sum += integrate_box(lo, hi, f, singular, policy);
      }
      return sum;
    }
  }
  // corner boxes as (corner c, signed extent)
  std::vector<std::pair<Point, Point>> corners;
  const double tiny = 1e-12 * (b - a).maxCoeff();
  for (const double ex : {a.x() - c.x(), b.x() - c.x()})
    for (const double ey : {a.y() - c.y(), b.y() - c.y()})
      if (std::abs(ex) > tiny && std::abs(ey) > tiny)
        corners.emplace_back(c, Point(ex, ey));
  SubdivisionSeries<Sample> series(policy);
  for (int depth = 0; depth < policy.max_depth; ++depth) {
    Sample increment = Sample::Zero();
    for (auto& [corner, extent] : corners) {
      extent *= 0.5;
      for (int q = 1; q < 4; ++q) {
        const Point p = corner + Point((q & 1) * extent.x(), (q >> 1) * extent.y());
        const Point o = p + extent;
        increment += integrate_box(p.cwiseMin(o), p.cwiseMax(o), f, singular, policy);
      }
    }
    if (series.add_level(increment))
      break;
  }
  return series.estimate();
}

Point sample_in(const ConvexPolygon& region, std::mt19937_64& rng) {
  const auto [lo, hi] = region.bounding_box();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  for (;;) {
    const Point x(ux(rng), uy(rng));
    if (region.contains(x))
      return x;
  }
}

void check_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw ParameterError("exponent p must lie in (1, inf)");
}

} // namespace

RadiusRange default_radii(const ConvexPolygon& region) {
  const double d = region.diameter();
  return {d / 64.0, d / 2.0};
}

nlohmann::json ApEstimate::to_json() const {
  return {{"p", p},
          {"value", value},
          {"diverging", diverging},
          {"num_balls", num_balls},
          {"min_radius", min_radius},
          {"max_radius", max_radius},
          {"divergent_balls", divergent_balls}};
}

Eigen::Vector2d ball_average(const Point& center, double radius,
                             const std::function<Eigen::Vector2d(const Point&)>& f,
                             std::span<const Point> singular,
                             const SingularIntegrationPolicy& policy, int subgrid) {
  if (!(radius > 0.0))
    throw ParameterError("ball radius must be positive");
  const double cell = 2.0 * radius / subgrid;
  const Point origin = center - Point(radius, radius);
  Sample sum = Sample::Zero();
  long count = 0;
  for (int j = 0; j < subgrid; ++j)
    for (int i = 0; i < subgrid; ++i) {
      const Point lo = origin + Point(i * cell, j * cell);
      const Point mid = lo + Point(0.5 * cell, 0.5 * cell);
      if ((mid - center).squaredNorm() > radius * radius)
        continue;
      ++count;
      bool near = false;
      for (const Point& sp : singular)
        near = near || near_box(lo, lo + Point(cell, cell), sp, kNearFieldSlack);
      if (near) {
        sum += integrate_box(lo, lo + Point(cell, cell), f, singular, policy) / (cell * cell);
      } else {
        const Sample v = f(mid);
        if (!v.allFinite())
          throw IntegrationError("non-finite weight value in ball average");
        sum += v;
      }
    }
  return sum / static_cast<double>(count);
}

ApEstimate ap_characteristic(const WeightSpec& w, double p, const ConvexPolygon& region,
                             int num_balls, RadiusRange radii, std::uint64_t seed) {
  check_p(p);
  if (num_balls < 1)
    throw ParameterError("ap_characteristic needs num_balls >= 1");
  if (!(radii.min > 0.0 && radii.max >= radii.min))
    throw ParameterError("radius range must satisfy 0 < min <= max");

  const WeightSpec dual = dual_weight(w, p);
  std::vector<Point> singular = w.singular_points();
  const auto both = [&](const Point& x) { return Sample(w(x), dual(x)); };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_ratio = std::log(radii.max / radii.min);

  // products[i] belongs to the i-th smallest radius; NaN marks divergence.
  std::vector<double> products(num_balls);
  ApEstimate est;
  est.p = p;
  est.num_balls = num_balls;
  est.min_radius = radii.max;
  est.max_radius = radii.min;
  for (int i = 0; i < num_balls; ++i) {
    const double u = (i + unit(rng)) / num_balls;
    const double r = radii.min * std::exp(u * log_ratio);
    const Point c = sample_in(region, rng);
    est.min_radius = std::min(est.min_radius, r);
    est.max_radius = std::max(est.max_radius, r);
    try {
      const Sample avg = ball_average(c, r, both, singular);
      products[i] = avg[0] * std::pow(avg[1], p - 1.0);
      if (!std::isfinite(products[i]))
        throw DivergenceError("non-finite ball product");
    } catch (const IntegrationError&) {
      products[i] = std::numeric_limits<double>::quiet_NaN();
      ++est.divergent_balls;
    }
  }

  double running = 0.0;
  double at_three_quarters = 0.0;
  const int quartile_start = num_balls - num_balls / 4;
  for (int k = 0; k < num_balls; ++k) {
    const double v = products[num_balls - 1 - k]; // decreasing radius
    if (std::isfinite(v))
      running = std::max(running, v);
    if (k + 1 == quartile_start)
      at_three_quarters = running;
  }
  est.value = running;
  const bool still_growing = num_balls >= 4 && running > 1.1 * at_three_quarters;
  est.diverging = est.divergent_balls > 0 || still_growing;
  return est;
}

ReverseHolderResult reverse_holder_probe(const WeightSpec& w, double p, const ConvexPolygon& region,
                                         const std::vector<double>& eps_grid, std::uint64_t seed,
                                         int num_centers, int radius_levels) {
  check_p(p);
  if (eps_grid.empty())
    throw ParameterError("reverse_holder_probe needs a non-empty eps grid");
  if (radius_levels < 2 || num_centers < 0)
    throw ParameterError("reverse_holder_probe needs radius_levels >= 2");

  std::vector<Point> singular = w.singular_points();
  std::vector<Point> centers;
  for (const Point& s : singular)
    if (region.contains(s))
      centers.push_back(s);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < num_centers; ++i)
    centers.push_back(sample_in(region, rng));
  if (centers.empty())
    centers.push_back(region.centroid());

  const double top = region.diameter() / 2.0;
  std::vector<double> grid = eps_grid;
  std::sort(grid.begin(), grid.end());

  ReverseHolderResult result;
  for (double eps : grid) {
    if (!(eps > 0.0))
      throw ParameterError("reverse Hoelder exponents must be positive");
    ReverseHolderRow row;
    row.eps = eps;
    row.finite = true;
    const auto both = [&](const Point& x) {
      const double v = w(x);
      return Sample(std::pow(v, 1.0 + eps), v);
    };
    for (int level = 0; level < radius_levels && row.finite; ++level) {
      const double r = top * std::ldexp(1.0, -level);
      double sup = 0.0;
      for (const Point& c : centers) {
        try {
          const Sample avg = ball_average(c, r, both, singular);
          sup = std::max(sup, std::pow(avg[0], 1.0 / (1.0 + eps)) / avg[1]);
        } catch (const IntegrationError&) {
          row.finite = false;
          break;
        }
      }
      row.level_sups.push_back(sup);
    }
    if (row.finite) {
      row.sup_ratio = *std::max_element(row.level_sups.begin(), row.level_sups.end());
      const std::size_t n = row.level_sups.size();
      row.saturated = row.level_sups[n - 1] <= 1.1 * row.level_sups[n - 2];
    }
    if (row.finite && row.saturated) {
      result.eps = eps;
      result.constant = row.sup_ratio;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

} // namespace wfem

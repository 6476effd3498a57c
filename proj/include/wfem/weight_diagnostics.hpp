#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "wfem/mesh.hpp"
#include "wfem/quadrature.hpp"
#include "wfem/weights.hpp"

namespace wfem {

inline constexpr std::uint64_t kDefaultSeed = 0xA9;

struct RadiusRange {
  double min = 0.0;
  double max = 0.0;
};

/// Ball radii from diam / 64 to diam / 2 of the region.
RadiusRange default_radii(const ConvexPolygon& region);

struct ApEstimate {
  double p = 2.0;
  double value = 1.0; ///< lower bound only when `diverging`
  int num_balls = 0;
  double max_radius = 0.0;
  double min_radius = 0.0;
  bool diverging = false;
  int divergent_balls = 0; ///< balls whose averages failed to converge

  nlohmann::json to_json() const;
};

/// Averages over a ball of vector-valued integrand values by the midpoint
/// rule on an n x n sub-grid of the ball's bounding box (cells whose
/// midpoint lies in the ball). Cells close to a singular point are split at
/// it and refined toward it, with a Gauss rule on the pieces. Throws
/// DivergenceError.
Eigen::Vector2d ball_average(const Point& center, double radius,
                             const std::function<Eigen::Vector2d(const Point&)>& f,
                             std::span<const Point> singular,
                             const SingularIntegrationPolicy& policy = {}, int subgrid = 32);

/// Sampled estimate of the A_p characteristic: the largest value of
/// (avg_B w)(avg_B w^(-1/(p-1)))^(p-1) over balls with centers uniform in
/// `region` and radii stratified log-uniformly in `radii`.
///
/// `diverging` is set when any ball average is not integrable, or when the
/// running maximum over balls ordered by decreasing radius still grows by
/// more than 10% across the final quartile.
ApEstimate ap_characteristic(const WeightSpec& w, double p, const ConvexPolygon& region,
                             int num_balls, RadiusRange radii, std::uint64_t seed = kDefaultSeed);

struct ReverseHolderRow {
  double eps = 0.0;
  bool finite = false;
  bool saturated = false;
  double sup_ratio = 0.0;
  std::vector<double> level_sups; ///< sup over centers, per dyadic radius level
};

struct ReverseHolderResult {
  std::optional<double> eps; ///< largest accepted exponent, if any
  double constant = 0.0;     ///< sup ratio at `eps`
  std::vector<ReverseHolderRow> rows;
};

/// For each eps estimates sup_B (avg_B w^(1+eps))^(1/(1+eps)) / avg_B w over
/// balls at dyadic radii R 2^-j around sampled centers (and the singular
/// points of w). An eps is accepted when every average is finite and the sup
/// grows by less than 10% between the two smallest radius levels.
ReverseHolderResult reverse_holder_probe(const WeightSpec& w, double p, const ConvexPolygon& region,
                                         const std::vector<double>& eps_grid,
                                         std::uint64_t seed = kDefaultSeed, int num_centers = 16,
                                         int radius_levels = 6);

} // namespace wfem

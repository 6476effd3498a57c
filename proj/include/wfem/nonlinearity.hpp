#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfem/fem.hpp"
#include "wfem/mesh.hpp"

namespace wfem {

/// Vector field a(x, v) of the quasilinear operator -div a(x, grad u).
/// Implementations must be safe to call concurrently.
class Nonlinearity {
public:
  virtual ~Nonlinearity() = default;

  virtual Vec2 flux(const Point& x, const Vec2& v) const = 0;
  /// d a / d v, or nullopt where unavailable.
  virtual std::optional<Mat2> jacobian(const Point& x, const Vec2& v) const = 0;
  /// Limit coefficient A(x) with a(x, v) ~ A(x) v as |v| -> inf.
  virtual Mat2 asymptotic(const Point& x) const = 0;
  /// Coercivity constant: a(x, v) . v >= alpha |v|^2.
  virtual double alpha() const = 0;
  /// Growth constant: |a(x, v)| <= Lambda |v|.
  virtual double Lambda() const = 0;
  /// Strong monotonicity constant, when known.
  virtual std::optional<double> mu() const { return std::nullopt; }
  virtual std::string name() const = 0;
  virtual nlohmann::json params() const { return nlohmann::json::object(); }
};

using NonlinearityPtr = std::shared_ptr<const Nonlinearity>;

/// A_inf as a linear coefficient with bounds (alpha, Lambda) of `a`.
LinearCoefficient asymptotic_coefficient(const NonlinearityPtr& a);

/// a(x, v) = A(x) v; mu = alpha.
NonlinearityPtr make_linear_nonlinearity(LinearCoefficient A, nlohmann::json params = {});

/// a(v) = (1 + exp(-|v|^2)) v: alpha = 1, Lambda = 2, mu = 1 - 2 exp(-3/2),
/// A_inf = I.
NonlinearityPtr make_uhlenbeck_exp();

/// a(v) = (a_tilde + 1 / (1 + |v|)) v: alpha = mu = a_tilde,
/// Lambda = a_tilde + 1, A_inf = a_tilde I.
NonlinearityPtr make_uhlenbeck_rational(double a_tilde);

struct NonlinearityFunctions {
  std::string name;
  std::function<Vec2(const Point&, const Vec2&)> flux;
  std::function<std::optional<Mat2>(const Point&, const Vec2&)> jacobian;
  std::function<Mat2(const Point&)> asymptotic;
  double alpha = 1.0;
  double Lambda = 1.0;
  std::optional<double> mu;
};

/// Wraps user-supplied callables (used for ad-hoc and deliberately invalid fields).
NonlinearityPtr make_nonlinearity(NonlinearityFunctions functions);

struct StructureReport {
  int samples = 0;
  int pair_samples = 0;
  double alpha = 0.0;
  double Lambda = 0.0;
  double worst_coercivity = 0.0;   ///< min a.v / |v|^2
  double worst_growth = 0.0;       ///< max |a| / |v|
  double worst_monotonicity = 0.0; ///< min (a(v)-a(w)).(v-w) / |v-w|^2
  bool coercivity_ok = false;
  bool growth_ok = false;
  bool monotonicity_ok = false;
  std::vector<double> radii;
  /// eps(N) = max_{|v| >= N} |a(x,v) - A(x) v| / |v|
  std::vector<double> uhlenbeck_profile;
  /// max_{|v| >= N} |da(x,v) - A(x)| (spectral norm); empty if da is unavailable
  std::vector<double> strong_profile;

  bool violations() const { return !(coercivity_ok && growth_ok && monotonicity_ok); }
  nlohmann::json to_json() const;
};

/// Sampling-based refutation of coercivity, growth, strict monotonicity and
/// the (strong) asymptotic Uhlenbeck profile. x is uniform in `region`; |v|
/// is log-uniform within strata [N_k, N_{k+1}] of the schedule (plus one
/// stratum below N_0 and one above N_K), and every N_k is also sampled
/// exactly. Violations are reported, never thrown.
StructureReport check_structure(const Nonlinearity& a, const ConvexPolygon& region,
                                int sample_count, std::vector<double> radius_schedule,
                                std::uint64_t seed = 0xA9);

} // namespace wfem

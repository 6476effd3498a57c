#include "wfem/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wfem/errors.hpp"

namespace wfem {

LinearCoefficient asymptotic_coefficient(const NonlinearityPtr& a) {
  // Bounds of A_inf itself are not known in general; the eigenvalues of the
  // limit lie in [alpha, Lambda] by coercivity and growth.
  return {[a](const Point& x) { return a->asymptotic(x); }, a->alpha(), a->Lambda()};
}

namespace {

class LinearNonlinearity final : public Nonlinearity {
public:
  LinearNonlinearity(LinearCoefficient A, nlohmann::json params)
      : A_(std::move(A)), params_(std::move(params)) {}
  Vec2 flux(const Point& x, const Vec2& v) const override { return A_.A(x) * v; }
  std::optional<Mat2> jacobian(const Point& x, const Vec2&) const override { return A_.A(x); }
  Mat2 asymptotic(const Point& x) const override { return A_.A(x); }
  double alpha() const override { return A_.alpha; }
  double Lambda() const override { return A_.Lambda; }
  std::optional<double> mu() const override { return A_.alpha; }
  std::string name() const override { return "linear"; }
  nlohmann::json params() const override { return params_; }

private:
  LinearCoefficient A_;
  nlohmann::json params_;
};

class UhlenbeckExp final : public Nonlinearity {
public:
  Vec2 flux(const Point&, const Vec2& v) const override {
    return (1.0 + std::exp(-v.squaredNorm())) * v;
  }
  std::optional<Mat2> jacobian(const Point&, const Vec2& v) const override {
    const double e = std::exp(-v.squaredNorm());
    return Mat2((1.0 + e) * Mat2::Identity() - 2.0 * e * v * v.transpose());
  }
  Mat2 asymptotic(const Point&) const override { return Mat2::Identity(); }
  double alpha() const override { return 1.0; }
  double Lambda() const override { return 2.0; }
  // min_t d/dt (t + t exp(-t^2)) is attained at t^2 = 3/2.
  std::optional<double> mu() const override { return 1.0 - 2.0 * std::exp(-1.5); }
  std::string name() const override { return "uhlenbeck_exp"; }
};

class UhlenbeckRational final : public Nonlinearity {
public:
  explicit UhlenbeckRational(double a_tilde) : a_(a_tilde) {
    if (!(a_tilde > 0.0))
      throw ParameterError("uhlenbeck_rational needs a_tilde > 0");
  }
  Vec2 flux(const Point&, const Vec2& v) const override {
    return (a_ + 1.0 / (1.0 + v.norm())) * v;
  }
  std::optional<Mat2> jacobian(const Point&, const Vec2& v) const override {
    const double t = v.norm();
    Mat2 J = (a_ + 1.0 / (1.0 + t)) * Mat2::Identity();
    if (t > 0.0)
      J -= (1.0 / ((1.0 + t) * (1.0 + t) * t)) * v * v.transpose();
    return J;
  }
  Mat2 asymptotic(const Point&) const override { return a_ * Mat2::Identity(); }
  double alpha() const override { return a_; }
  double Lambda() const override { return a_ + 1.0; }
  std::optional<double> mu() const override { return a_; }
  std::string name() const override { return "uhlenbeck_rational"; }
  nlohmann::json params() const override { return {{"a_tilde", a_}}; }

private:
  double a_;
};

class FunctionNonlinearity final : public Nonlinearity {
public:
  explicit FunctionNonlinearity(NonlinearityFunctions f) : f_(std::move(f)) {}
  Vec2 flux(const Point& x, const Vec2& v) const override { return f_.flux(x, v); }
  std::optional<Mat2> jacobian(const Point& x, const Vec2& v) const override {
    if (!f_.jacobian)
      return std::nullopt;
    return f_.jacobian(x, v);
  }
  Mat2 asymptotic(const Point& x) const override {
    return f_.asymptotic ? f_.asymptotic(x) : Mat2::Identity();
  }
  double alpha() const override { return f_.alpha; }
  double Lambda() const override { return f_.Lambda; }
  std::optional<double> mu() const override { return f_.mu; }
  std::string name() const override { return f_.name; }

private:
  NonlinearityFunctions f_;
};

} // namespace

NonlinearityPtr make_linear_nonlinearity(LinearCoefficient A, nlohmann::json params) {
  return std::make_shared<LinearNonlinearity>(std::move(A), std::move(params));
}

NonlinearityPtr make_uhlenbeck_exp() { return std::make_shared<UhlenbeckExp>(); }

NonlinearityPtr make_uhlenbeck_rational(double a_tilde) {
  return std::make_shared<UhlenbeckRational>(a_tilde);
}

NonlinearityPtr make_nonlinearity(NonlinearityFunctions functions) {
  if (!functions.flux)
    throw ParameterError("nonlinearity needs a flux function");
  return std::make_shared<FunctionNonlinearity>(std::move(functions));
}

nlohmann::json StructureReport::to_json() const {
  nlohmann::json j{{"samples", samples},
                   {"pair_samples", pair_samples},
                   {"alpha", alpha},
                   {"Lambda", Lambda},
                   {"worst_coercivity", worst_coercivity},
                   {"worst_growth", worst_growth},
                   {"worst_monotonicity", worst_monotonicity},
                   {"coercivity_ok", coercivity_ok},
                   {"growth_ok", growth_ok},
                   {"monotonicity_ok", monotonicity_ok},
                   {"radii", radii},
                   {"uhlenbeck_profile", uhlenbeck_profile}};
  if (!strong_profile.empty())
    j["strong_profile"] = strong_profile;
  else
    j["strong_profile"] = nullptr;
  return j;
}

StructureReport check_structure(const Nonlinearity& a, const ConvexPolygon& region,
                                int sample_count, std::vector<double> radius_schedule,
                                std::uint64_t seed) {
  if (sample_count < 1)
    throw ParameterError("check_structure needs sample_count >= 1");
  if (radius_schedule.empty())
    throw ParameterError("check_structure needs a non-empty radius schedule");
  std::sort(radius_schedule.begin(), radius_schedule.end());
  if (!(radius_schedule.front() > 0.0))
    throw ParameterError("radius schedule entries must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto [lo, hi] = region.bounding_box();
  auto random_x = [&] {
    for (;;) {
      const Point x(lo.x() + (hi.x() - lo.x()) * unit(rng), lo.y() + (hi.y() - lo.y()) * unit(rng));
      if (region.contains(x))
        return x;
    }
  };
  auto direction = [&] {
    const double theta = 2.0 * M_PI * unit(rng);
    return Vec2(std::cos(theta), std::sin(theta));
  };

  // Strata: [N0/100, N0], [N_k, N_{k+1}], [N_K, 10 N_K].
  std::vector<std::pair<double, double>> strata;
  strata.emplace_back(radius_schedule.front() / 100.0, radius_schedule.front());
  for (std::size_t k = 0; k + 1 < radius_schedule.size(); ++k)
    strata.emplace_back(radius_schedule[k], radius_schedule[k + 1]);
  strata.emplace_back(radius_schedule.back(), 10.0 * radius_schedule.back());

  struct Sample {
    Point x;
    Vec2 v;
  };
  std::vector<Sample> samples;
  for (int i = 0; i < sample_count; ++i) {
    const auto [r0, r1] = strata[static_cast<std::size_t>(i) % strata.size()];
    const double r = r0 * std::pow(r1 / r0, unit(rng));
    samples.push_back({random_x(), r * direction()});
  }
  for (double N : radius_schedule)
    for (int i = 0; i < 8; ++i)
      samples.push_back({random_x(), N * direction()});

  StructureReport rep;
  rep.samples = static_cast<int>(samples.size());
  rep.alpha = a.alpha();
  rep.Lambda = a.Lambda();
  rep.radii = radius_schedule;
  rep.worst_coercivity = std::numeric_limits<double>::infinity();
  rep.worst_growth = 0.0;
  rep.uhlenbeck_profile.assign(radius_schedule.size(), 0.0);
  std::vector<double> strong(radius_schedule.size(), 0.0);
  bool has_jacobian = true;

  for (const Sample& s : samples) {
    const Vec2 f = a.flux(s.x, s.v);
    const double n2 = s.v.squaredNorm();
    const double n = std::sqrt(n2);
    rep.worst_coercivity = std::min(rep.worst_coercivity, f.dot(s.v) / n2);
    rep.worst_growth = std::max(rep.worst_growth, f.norm() / n);
    const Mat2 A = a.asymptotic(s.x);
    const double deviation = (f - A * s.v).norm() / n;
    std::optional<Mat2> J = a.jacobian(s.x, s.v);
    double jdev = 0.0;
    if (J) {
      Eigen::JacobiSVD<Mat2> svd(*J - A);
      jdev = svd.singularValues()[0];
    } else {
      has_jacobian = false;
    }
    for (std::size_t k = 0; k < radius_schedule.size(); ++k)
      if (n >= radius_schedule[k] * (1.0 - 1e-12)) {
        rep.uhlenbeck_profile[k] = std::max(rep.uhlenbeck_profile[k], deviation);
        strong[k] = std::max(strong[k], jdev);
      }
  }
  if (has_jacobian)
    rep.strong_profile = std::move(strong);

  rep.worst_monotonicity = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  rep.pair_samples = sample_count;
  for (int i = 0; i < sample_count; ++i) {
    const Sample& s = samples[pick(rng)];
    const Vec2 w = samples[pick(rng)].v;
    const Vec2 d = s.v - w;
    if (d.squaredNorm() == 0.0)
      continue;
    const double m = (a.flux(s.x, s.v) - a.flux(s.x, w)).dot(d) / d.squaredNorm();
    rep.worst_monotonicity = std::min(rep.worst_monotonicity, m);
  }

  rep.coercivity_ok = rep.worst_coercivity >= rep.alpha * (1.0 - 1e-9);
  rep.growth_ok = rep.worst_growth <= rep.Lambda * (1.0 + 1e-9);
  rep.monotonicity_ok = rep.worst_monotonicity > 0.0;
  return rep;
}

} // namespace wfem

#include <doctest.h>

#include <cmath>

#include "wfem/errors.hpp"
#include "wfem/quadrature.hpp"

using namespace wfem;

namespace {

const Triangle kRef(Point(0, 0), Point(1, 0), Point(0, 1));

// Exact monomial integral on the reference triangle: a! b! / (a + b + 2)!
double monomial_exact(int a, int b) {
  return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

// Composite Simpson on [lo, hi] with n (even) panels.
template <class F> double simpson(F f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// int of |x - s|^-alpha over tri, s inside: per edge, polar coordinates
// about s with R(phi) = d / cos(phi), phi measured from the edge normal.
double polar_power(const Triangle& tri, const Point& s, double alpha) {
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Point a = tri.v[i] - s, b = tri.v[(i + 1) % 3] - s;
    const Point e = (b - a).normalized();
    const Point foot = a - a.dot(e) * e;
    const double d = foot.norm();
    const Point n = foot / d;
    auto angle = [&](const Point& v) { return std::atan2(n.x() * v.y() - n.y() * v.x(), n.dot(v)); };
    const double lo = std::min(angle(a), angle(b)), hi = std::max(angle(a), angle(b));
    total += simpson([&](double phi) { return std::pow(d / std::cos(phi), 2.0 - alpha) / (2.0 - alpha); },
                     lo, hi, 4000);
  }
  return total;
}

} // namespace

TEST_SUITE("quadrature") {

TEST_CASE("degree-4 rule") {
  const QuadratureRule& r = degree4_rule();
  CHECK(r.degree == 4);
  CHECK(r.points.size() == 6);
  double sum = 0.0;
  for (double w : r.weights) {
    CHECK(w > 0.0);
    sum += w;
  }
  CHECK(std::abs(sum - 1.0) < 1e-14);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      const double v = integrate(kRef, [&](const Point& x) {
        return std::pow(x.x(), a) * std::pow(x.y(), b);
      });
      CHECK(std::abs(v - monomial_exact(a, b)) < 1e-13);
    }
}

TEST_CASE("integrate examples") {
  CHECK(integrate(kRef, [](const Point&) { return 1.0; }) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(integrate(kRef, [](const Point& x) { return x.x(); }) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(integrate(kRef, [](const Point& x) { return x.x() * x.x() * x.y() * x.y(); }) ==
        doctest::Approx(1.0 / 180.0).epsilon(1e-13));
  CHECK_THROWS_AS(integrate(kRef, [](const Point&) { return std::nan(""); }), IntegrationError);
}

TEST_CASE("additivity over red children") {
  const Triangle t(Point(0.1, 0.2), Point(1.3, 0.4), Point(0.5, 1.1));
  auto f = [](const Point& x) { return std::exp(x.x()) * std::cos(x.y()); };
  double children = 0.0;
  for (const Triangle& c : t.red_children())
    children += integrate(c, f);
  // the degree-4 rule is not exact here; compare to a fine reference instead
  std::vector<Triangle> level{t};
  for (int k = 0; k < 5; ++k) {
    std::vector<Triangle> next;
    for (const Triangle& c : level)
      for (const Triangle& g : c.red_children())
        next.push_back(g);
    level = next;
  }
  double fine = 0.0;
  for (const Triangle& c : level)
    fine += integrate(c, f);
  CHECK(std::abs(children - fine) < 1e-7 * std::abs(fine));
  // exact additivity for a polynomial integrand
  auto q = [](const Point& x) { return 1.0 + x.x() * x.x() * x.y() - 3.0 * x.y() * x.y(); };
  double cq = 0.0;
  for (const Triangle& c : t.red_children())
    cq += integrate(c, q);
  CHECK(std::abs(cq - integrate(t, q)) < 1e-12 * std::abs(cq));
}

TEST_CASE("policy") {
  SingularIntegrationPolicy p;
  CHECK(p.max_depth == 20);
  CHECK(p.rel_tol == 1e-8);
  const auto q = SingularIntegrationPolicy::from_json({{"max_depth", 12}, {"rel_tol", 1e-6}});
  CHECK(q.max_depth == 12);
  CHECK(q.to_json()["rel_tol"] == 1e-6);
  CHECK_THROWS_AS(SingularIntegrationPolicy::from_json({{"depth", 3}}), ValidationError);
  CHECK_THROWS_AS(SingularIntegrationPolicy::from_json({{"max_depth", 0}}), ValidationError);
  CHECK_THROWS_AS(SingularIntegrationPolicy::from_json({{"rel_tol", -1.0}}), ValidationError);
}

TEST_CASE("integrate_weighted regular cases") {
  auto f = [](const Point& x) { return 1.0 + x.x() * x.y(); };
  const WeightSpec one = WeightSpec::constant(1.0);
  CHECK(integrate_weighted(kRef, f, one) == integrate(kRef, f));
  // singularity far away: plain rule applied to f * w
  const WeightSpec far = WeightSpec::power(Point(5.0, 5.0), -1.0);
  const double a = integrate_weighted(kRef, f, far);
  const double b = integrate(kRef, [&](const Point& x) { return f(x) * far(x); });
  CHECK(std::abs(a - b) <= 1e-14 * std::abs(b));
}

TEST_CASE("integrate_weighted singular vertex, polar oracle") {
  // int over the reference triangle of 1/r = int_0^{pi/2} dtheta / (cos + sin)
  const double oracle =
      simpson([](double t) { return 1.0 / (std::cos(t) + std::sin(t)); }, 0.0, M_PI / 2, 2000);
  CHECK(oracle == doctest::Approx(std::sqrt(2.0) * std::log(1.0 + std::sqrt(2.0))).epsilon(1e-12));
  const WeightSpec w = WeightSpec::power(Point(0, 0), -1.0);
  const double v = integrate_weighted(kRef, [](const Point&) { return 1.0; }, w);
  CHECK(std::abs(v - oracle) < 1e-3);
  CHECK(std::abs(v - oracle) < 1e-6 * oracle);

  // r^-1.5: int_0^{pi/2} R(t)^{0.5} / 0.5 dt with R = 1 / (cos + sin)
  const double oracle15 = simpson(
      [](double t) { return 2.0 * std::pow(1.0 / (std::cos(t) + std::sin(t)), 0.5); }, 0.0,
      M_PI / 2, 2000);
  const double v15 = integrate_weighted(kRef, [](const Point&) { return 1.0; },
                                        WeightSpec::power(Point(0, 0), -1.5));
  CHECK(std::abs(v15 - oracle15) < 1e-5 * oracle15);
}

TEST_CASE("integrate_weighted singular interior point") {
  // int of r^-1 over the unit square with singularity at its center, as two
  // reference-like triangles; oracle: 8 * int_0^{pi/4} 0.5 / cos t dt
  const double oracle = 8.0 * 0.5 * std::log(std::tan(M_PI / 8 + M_PI / 4));
  const WeightSpec w = WeightSpec::power(Point(0.5, 0.5), -1.0);
  const Triangle a(Point(0, 0), Point(1, 0), Point(1, 1));
  const Triangle b(Point(0, 0), Point(1, 1), Point(0, 1));
  auto one = [](const Point&) { return 1.0; };
  const double v = integrate_weighted(a, one, w) + integrate_weighted(b, one, w);
  CHECK(std::abs(v - oracle) < 1e-6 * oracle);
}

TEST_CASE("singular point off every subdivision vertex") {
  const Point s(0.2731, 0.3119);
  for (double alpha : {1.0, 1.5, 1.8}) {
    const double oracle = polar_power(kRef, s, alpha);
    const double v = integrate_weighted(kRef, [](const Point&) { return 1.0; },
                                        WeightSpec::power(s, -alpha));
    CHECK(std::abs(v - oracle) < 1e-5 * oracle);
  }
  CHECK_THROWS_AS(integrate_weighted(kRef, [](const Point&) { return 1.0; },
                                     WeightSpec::power(s, -2.0)),
                  DivergenceError);
  // on an edge, and just outside the element
  const Point edge(0.37, 0.0);
  CHECK_THROWS_AS(integrate_weighted(kRef, [](const Point&) { return 1.0; },
                                     WeightSpec::power(edge, -2.0)),
                  DivergenceError);
  const Point outside(0.4, -0.01);
  const double near = integrate_weighted(kRef, [](const Point&) { return 1.0; },
                                         WeightSpec::power(outside, -1.0));
  const Triangle big(Point(0, -0.5), Point(1, 0), Point(0, 1));
  const double both = integrate_weighted(big, [](const Point&) { return 1.0; },
                                         WeightSpec::power(outside, -1.0));
  const double lower = integrate_weighted(Triangle(Point(0, -0.5), Point(1, 0), Point(0, 0)),
                                          [](const Point&) { return 1.0; },
                                          WeightSpec::power(outside, -1.0));
  CHECK(near == doctest::Approx(both - lower).epsilon(1e-6));
  CHECK(both == doctest::Approx(polar_power(big, outside, 1.0)).epsilon(1e-6));
}

TEST_CASE("non-integrable weight is a divergence error") {
  const WeightSpec w = WeightSpec::power(Point(0, 0), -2.0);
  CHECK_THROWS_AS(integrate_weighted(kRef, [](const Point&) { return 1.0; }, w), DivergenceError);
  const WeightSpec w3 = WeightSpec::power(Point(0, 0), -3.0);
  CHECK_THROWS_AS(integrate_weighted(kRef, [](const Point&) { return 1.0; }, w3), DivergenceError);
}

TEST_CASE("subdivision totals are monotone Cauchy for integrable powers") {
  for (double gamma : {-1.0, -1.5, 0.5}) {
    const WeightSpec w = WeightSpec::power(Point(0, 0), gamma);
    SubdivisionTrace trace;
    integrate_singular<double>(kRef, [&](const Point& x) { return w(x); },
                               std::vector<Point>{Point(0, 0)}, SingularIntegrationPolicy{},
                               &trace);
    const auto& t = trace.partial_sums;
    REQUIRE(t.size() >= 3);
    for (std::size_t k = 2; k < t.size(); ++k)
      CHECK(std::abs(t[k] - t[k - 1]) <= std::abs(t[k - 1] - t[k - 2]) * (1 + 1e-12));
  }
}

}

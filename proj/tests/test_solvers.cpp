#include <doctest.h>

#include <cmath>
#include <random>

#include "wfem/errors.hpp"
#include "wfem/linear_solvers.hpp"
#include "wfem/nonlinearity.hpp"
#include "wfem/solvers.hpp"

using namespace wfem;

namespace {

ProblemData sin_sin_data() {
  ProblemData d;
  d.f = {[](const Point&) { return Vec2::Zero().eval(); }, {}};
  d.g = {[](const Point& x) {
           return 2 * M_PI * M_PI * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
         },
         {}};
  return d;
}

// smooth data whose solution is not a hat combination: f = a(grad u*)
ProblemData flux_data(const NonlinearityPtr& a) {
  ProblemData d;
  d.f = {[a](const Point& x) {
           const Vec2 g(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                        M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
           return a->flux(x, g);
         },
         {}};
  d.g = {[](const Point& x) { return x.x() - 0.3; }, {}};
  return d;
}

// 1-D oracle: min over t >= 0 of d/dt (t + t exp(-t^2)) on a fine grid,
// refined by golden-section search.
double mu_oracle() {
  auto dphi = [](double t) { return 1.0 + (1.0 - 2.0 * t * t) * std::exp(-t * t); };
  double best = 0.0;
  for (double t = 0.0; t < 5.0; t += 1e-3)
    if (dphi(t) < dphi(best))
      best = t;
  double lo = best - 1e-3, hi = best + 1e-3;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int k = 0; k < 80; ++k) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (dphi(a) < dphi(b))
      hi = b;
    else
      lo = a;
  }
  return dphi(0.5 * (lo + hi));
}

} // namespace

TEST_SUITE("solvers") {

TEST_CASE("pcg and dense paths agree") {
  const FemSpace s(structured_square(16));
  const SparseMatrix S = assemble_stiffness(s, LinearCoefficient::identity());
  Vector b = Vector::LinSpaced(S.rows(), -1.0, 2.0);
  Vector x = Vector::Zero(S.rows());
  const LinearSolveInfo info = pcg_jacobi(S, b, x);
  CHECK(info.relative_residual <= 1e-10);
  const Vector y = solve_spd(S, b);
  CHECK((x - y).norm() < 1e-9 * y.norm());
  CHECK((S * x - b).norm() <= 1e-12 * b.norm() * 1.0001);
  // an indefinite matrix is rejected
  SparseMatrix I(2, 2);
  I.insert(0, 0) = 1.0;
  I.insert(1, 1) = -1.0;
  Vector z = Vector::Zero(2);
  CHECK_THROWS_AS(pcg_jacobi(I, Vector::Ones(2), z), SolverError);
  CHECK_FALSE(is_spd(I));
}

TEST_CASE("solve_linear examples") {
  const WeightSpec one = WeightSpec::constant(1.0);
  double prev = 1e9;
  for (int n : {4, 8, 16, 32}) {
    const FemSpace s(structured_square(n));
    const Solution sol = solve_linear(s, LinearCoefficient::identity(), sin_sin_data());
    double err = 0.0;
    for (std::size_t d = 0; d < s.num_dofs(); ++d) {
      const Point& x = s.mesh().vertex(s.free_dofs()[d]);
      err = std::max(err, std::abs(sol.field.coeffs()[static_cast<Eigen::Index>(d)] -
                                   std::sin(M_PI * x.x()) * std::sin(M_PI * x.y())));
    }
    CHECK(err < prev);
    prev = err;
    CHECK(sol.report.converged);
  }
  CHECK(prev < 2e-3);

  // Galerkin reproduction of V_h data
  const FemSpace s(triangulate(ConvexPolygon({{0, 0}, {1, 0}, {1.2, 0.8}, {0.1, 1}}), 0.2));
  Vector c = Vector::LinSpaced(static_cast<Eigen::Index>(s.num_dofs()), -1, 1).array().sin();
  const DiscreteField w(s, c);
  ProblemData d;
  d.f = {w.as_function().gradient, {}};
  d.g = {[](const Point&) { return 0.0; }, {}};
  CHECK((solve_linear(s, LinearCoefficient::identity(), d).field.coeffs() - c).cwiseAbs().maxCoeff() <
        1e-10);

  ProblemData zero;
  zero.f = {[](const Point&) { return Vec2::Zero().eval(); }, {}};
  zero.g = {[](const Point&) { return 0.0; }, {}};
  CHECK(solve_linear(s, LinearCoefficient::identity(), zero).field.coeffs().norm() == 0.0);

  // the PCG path above the dense threshold
  const FemSpace big(structured_square(64));
  const Solution sb = solve_linear(big, LinearCoefficient::identity(), sin_sin_data());
  CHECK(big.num_dofs() > kDenseThreshold);
  CHECK(sb.report.method.find("pcg") != std::string::npos);
  CHECK(sb.field(Point(0.5, 0.5)) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("nonlinearity constants") {
  const NonlinearityPtr e = make_uhlenbeck_exp();
  CHECK(e->alpha() == 1.0);
  CHECK(e->Lambda() == 2.0);
  REQUIRE(e->mu());
  CHECK(*e->mu() == doctest::Approx(mu_oracle()).epsilon(1e-9));
  CHECK(*e->mu() == doctest::Approx(0.553).epsilon(1e-3));
  const NonlinearityPtr r = make_uhlenbeck_rational(0.5);
  CHECK(r->alpha() == 0.5);
  CHECK(r->Lambda() == 1.5);
  CHECK_THROWS_AS(make_uhlenbeck_rational(0.0), ParameterError);
  // a(x, 0) = 0
  CHECK(e->flux(Point(0.2, 0.3), Vec2::Zero()).norm() == 0.0);
  CHECK(r->flux(Point(0.2, 0.3), Vec2::Zero()).norm() == 0.0);
}

TEST_CASE("analytic Jacobians match finite differences of the flux") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.5);
  for (const NonlinearityPtr& a : {make_uhlenbeck_exp(), make_uhlenbeck_rational(0.7)})
    for (int k = 0; k < 20; ++k) {
      const Vec2 v(n(rng), n(rng));
      const Point x(0.3, 0.4);
      const auto J = a->jacobian(x, v);
      REQUIRE(J);
      Mat2 fd;
      const double h = 1e-6;
      for (int j = 0; j < 2; ++j) {
        Vec2 dv = Vec2::Zero();
        dv[j] = h;
        fd.col(j) = (a->flux(x, v + dv) - a->flux(x, v - dv)) / (2 * h);
      }
      CHECK((fd - *J).norm() < 1e-7 * (1 + J->norm()));
    }
}

TEST_CASE("linear nonlinearity matches solve_linear") {
  Mat2 A;
  A << 2.0, 0.5, 0.5, 1.0;
  const LinearCoefficient c = LinearCoefficient::constant(A);
  const FemSpace s(structured_square(8));
  const ProblemData d = sin_sin_data();
  const Solution lin = solve_linear(s, c, d);
  const Solution nl = solve_quasilinear(s, make_linear_nonlinearity(c), d);
  CHECK(nl.report.converged);
  CHECK((lin.field.coeffs() - nl.field.coeffs()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Newton on the prototype") {
  const NonlinearityPtr a = make_uhlenbeck_exp();
  const FemSpace s(structured_square(16));
  const ProblemData d = flux_data(a);
  const Solution sol = solve_quasilinear(s, a, d);
  CHECK(sol.report.converged);
  CHECK(sol.report.iterations <= 25);
  CHECK(sol.report.residual_history.back() < 1e-10 * sol.report.residual_history.front());
  for (std::size_t k = 1; k < sol.report.residual_history.size(); ++k)
    CHECK(sol.report.residual_history[k] < sol.report.residual_history[k - 1]);

  // consistency: fresh residual evaluation
  const Vector load = assemble_load(s, d);
  const Vector res = assemble_residual(s, *a, load, sol.field.coeffs());
  const SpdFactorization S(assemble_stiffness(s, LinearCoefficient::identity()));
  const double dual = std::sqrt(res.dot(S.solve(res)));
  const double dual0 = std::sqrt(load.dot(S.solve(load)));
  CHECK(dual < 10 * 1e-10 * dual0);

  // Zarantonello agrees and its residual is non-increasing
  QuasilinearOptions z;
  z.method = QuasilinearMethod::zarantonello;
  const Solution zs = solve_quasilinear(s, a, d, z);
  CHECK(zs.report.converged);
  for (std::size_t k = 1; k < zs.report.residual_history.size(); ++k)
    CHECK(zs.report.residual_history[k] <= zs.report.residual_history[k - 1] * (1 + 1e-12));
  const DiscreteField diff(s, sol.field.coeffs() - zs.field.coeffs());
  CHECK(weighted_norm(diff, 2.0, WeightSpec::constant(1.0), NormKind::gradient) < 1e-8);

  // uniqueness from random starts, and continuation
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 2; ++k) {
    QuasilinearOptions o;
    Vector g(static_cast<Eigen::Index>(s.num_dofs()));
    for (Eigen::Index i = 0; i < g.size(); ++i)
      g[i] = n(rng);
    o.initial_guess = g;
    const Solution r = solve_quasilinear(s, a, d, o);
    const DiscreteField e(s, r.field.coeffs() - sol.field.coeffs());
    CHECK(weighted_norm(e, 2.0, WeightSpec::constant(1.0), NormKind::gradient) < 1e-8);
  }
  QuasilinearOptions cont;
  cont.continuation = true;
  const Solution cs = solve_quasilinear(s, a, d, cont);
  CHECK((cs.field.coeffs() - sol.field.coeffs()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Newton Jacobian matches finite differences of the residual") {
  const FemSpace s(triangulate(ConvexPolygon::unit_square(), 0.2));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(s.num_dofs());
  for (const NonlinearityPtr& a : {make_uhlenbeck_exp(), make_uhlenbeck_rational(0.5)}) {
    const Vector load = Vector::Zero(N);
    for (int k = 0; k < 10; ++k) {
      Vector c(N), dir(N);
      for (Eigen::Index i = 0; i < N; ++i) {
        c[i] = n(rng);
        dir[i] = n(rng);
      }
      const SparseMatrix J = assemble_jacobian(s, *a, c);
      const double h = 1e-6;
      const Vector fd = (assemble_residual(s, *a, load, c + h * dir) -
                         assemble_residual(s, *a, load, c - h * dir)) / (2 * h);
      CHECK((fd - J * dir).norm() <= 1e-5 * (J * dir).norm());
    }
  }
}

TEST_CASE("solver errors") {
  const FemSpace s(structured_square(4));
  NonlinearityFunctions fn;
  fn.name = "no_mu";
  fn.flux = [](const Point&, const Vec2& v) { return (2.0 * v).eval(); };
  fn.jacobian = [](const Point&, const Vec2&) { return std::optional<Mat2>(2.0 * Mat2::Identity()); };
  fn.asymptotic = [](const Point&) { return (2.0 * Mat2::Identity()).eval(); };
  fn.alpha = 2.0;
  fn.Lambda = 2.0;
  QuasilinearOptions z;
  z.method = QuasilinearMethod::zarantonello;
  CHECK_THROWS_AS(solve_quasilinear(s, make_nonlinearity(fn), sin_sin_data(), z), ParameterError);

  // Newton with a capped iteration count reports nonconvergence with its history
  QuasilinearOptions capped;
  capped.max_iterations = 1;
  capped.rel_tol = 1e-300;
  try {
    solve_quasilinear(s, make_uhlenbeck_exp(), flux_data(make_uhlenbeck_exp()), capped);
    FAIL("expected NonconvergenceError");
  } catch (const NonconvergenceError& e) {
    CHECK_FALSE(e.report().converged);
    CHECK(e.report().residual_history.size() >= 1);
  }
}

TEST_CASE("check_structure") {
  const ConvexPolygon sq = ConvexPolygon::unit_square();
  const std::vector<double> radii{1, 2, 3, 5, 10};

  Mat2 A;
  A << 2.0, 0.5, 0.5, 1.0;
  const StructureReport lin =
      check_structure(*make_linear_nonlinearity(LinearCoefficient::constant(A)), sq, 2000, radii);
  CHECK_FALSE(lin.violations());
  for (double e : lin.uhlenbeck_profile)
    CHECK(e == 0.0);
  for (double e : lin.strong_profile)
    CHECK(e < 1e-15);
  CHECK(lin.worst_coercivity >= lin.alpha - 1e-12);
  CHECK(lin.worst_growth <= lin.Lambda + 1e-12);

  const StructureReport ex = check_structure(*make_uhlenbeck_exp(), sq, 4000, radii);
  CHECK_FALSE(ex.violations());
  REQUIRE(ex.uhlenbeck_profile.size() == radii.size());
  // oracle: sup_{t >= N} exp(-t^2) = exp(-N^2)
  CHECK(ex.uhlenbeck_profile[2] < 4e-4);
  CHECK(ex.uhlenbeck_profile[2] == doctest::Approx(std::exp(-9.0)).epsilon(1e-12));
  for (std::size_t k = 1; k < radii.size(); ++k)
    CHECK(ex.uhlenbeck_profile[k] <= ex.uhlenbeck_profile[k - 1]);
  CHECK(ex.uhlenbeck_profile[0] > ex.uhlenbeck_profile[2]);
  REQUIRE(ex.strong_profile.size() == radii.size());
  for (std::size_t k = 1; k < radii.size(); ++k)
    CHECK(ex.strong_profile[k] <= ex.strong_profile[k - 1]);

  NonlinearityFunctions fn;
  fn.name = "unit_direction";
  fn.flux = [](const Point&, const Vec2& v) -> Vec2 {
    return v.norm() > 0 ? Vec2(v / v.norm()) : Vec2::Zero();
  };
  fn.jacobian = [](const Point&, const Vec2&) { return std::optional<Mat2>(); };
  fn.asymptotic = [](const Point&) { return Mat2::Identity().eval(); };
  const StructureReport bad = check_structure(*make_nonlinearity(fn), sq, 2000, radii);
  CHECK_FALSE(bad.coercivity_ok);
  CHECK(bad.violations());
  CHECK(bad.strong_profile.empty());
  CHECK(bad.to_json()["strong_profile"].is_null());

  // determinism
  const StructureReport again = check_structure(*make_uhlenbeck_exp(), sq, 4000, radii);
  CHECK(again.to_json() == ex.to_json());
}

}

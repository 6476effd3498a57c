#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "wfem/analysis.hpp"
#include "wfem/errors.hpp"
#include "wfem/linear_solvers.hpp"

using namespace wfem;

namespace {

using Dense = Eigen::MatrixXd;
const Point kMid(0.5, 0.5);

// beta^2 = smallest eigenvalue of S D'^-1 S w = lambda D w
double infsup_oracle(const FemSpace& s, const WeightSpec& w) {
  const Dense S(assemble_stiffness(s, LinearCoefficient::identity()));
  const Dense D(weighted_gradient_gram(s, w));
  const Dense Dd(weighted_gradient_gram(s, dual_weight(w, 2.0)));
  const Dense K = S * Dd.ldlt().solve(S);
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> eig(0.5 * (K + K.transpose()), D);
  return std::sqrt(eig.eigenvalues().minCoeff());
}

// C_R^2 = largest eigenvalue of R^T D_c R x = lambda D_f x with R = Sc^-1 B,
// B_ij = int grad phi_i^c . grad phi_j^f summed over fine elements (both
// gradients are constant there; coarse hats found by point location).
double ritz_oracle(const FemSpace& coarse, int refinements, const WeightSpec& w) {
  Mesh fm = coarse.mesh();
  for (int i = 0; i < refinements; ++i)
    fm = refine_uniform(fm);
  const FemSpace fine(fm);
  const auto nf = static_cast<Eigen::Index>(fine.num_dofs());
  const auto nc = static_cast<Eigen::Index>(coarse.num_dofs());
  const Mesh& cm = coarse.mesh();
  Dense B = Dense::Zero(nc, nf);
  for (std::size_t t = 0; t < fm.num_triangles(); ++t) {
    const Triangle ft = fm.triangle(t);
    const Location loc = locate(cm, ft.centroid());
    const auto gc = cm.triangle(loc.triangle).hat_gradients();
    const auto gf = ft.hat_gradients();
    for (int a = 0; a < 3; ++a) {
      const int i = coarse.dof_of_vertex(cm.cell(loc.triangle)[a]);
      if (i < 0)
        continue;
      for (int b = 0; b < 3; ++b) {
        const int j = fine.dof_of_vertex(fm.cell(t)[b]);
        if (j >= 0)
          B(i, j) += ft.area() * gc[a].dot(gf[b]);
      }
    }
  }
  const Dense Sc(assemble_stiffness(coarse, LinearCoefficient::identity()));
  const Dense R = Sc.ldlt().solve(B);
  const Dense Dc(weighted_gradient_gram(coarse, w));
  const Dense Df(weighted_gradient_gram(fine, w));
  const Dense K = R.transpose() * Dc * R;
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> eig(0.5 * (K + K.transpose()), Df);
  return std::sqrt(eig.eigenvalues().maxCoeff());
}

ScalarFunction sin_sin() {
  return {[](const Point& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); },
          [](const Point& x) {
            return Vec2(M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y()),
                        M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()));
          },
          {}};
}

ProblemData laplace_sin_sin() {
  ProblemData d;
  d.f = {[](const Point&) { return Vec2::Zero().eval(); }, {}};
  d.g = {[](const Point& x) {
           return 2 * M_PI * M_PI * std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
         },
         {}};
  return d;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("inf-sup: unweighted and constant weights") {
  for (int n : {4, 8, 16}) {
    const FemSpace s(structured_square(n));
    CHECK(std::abs(infsup_constant(s, 2.0, WeightSpec::constant(1.0)) - 1.0) < 1e-10);
    CHECK(std::abs(infsup_constant(s, 2.0, WeightSpec::constant(3.7)) - 1.0) < 1e-10);
  }
  const FemSpace s(structured_square(4));
  CHECK_THROWS_AS(infsup_constant(s, 3.0, WeightSpec::constant(1.0)), ParameterError);
  const ConstantEstimate lb = infsup_sampled(s, 3.0, WeightSpec::power(kMid, 0.5));
  CHECK_FALSE(lb.exact);
  CHECK(lb.value > 0.0);
}

TEST_CASE("inf-sup: weighted goldens against the eigenvalue oracle") {
  // frozen from a run cross-checked against infsup_oracle
  const std::vector<std::pair<int, double>> golden{
      {4, 0.957501374845996}, {8, 0.941082541292073}, {16, 0.930449529096966}};
  std::vector<double> beta;
  for (const auto& [n, value] : golden) {
    const FemSpace s(structured_square(n));
    const WeightSpec w = WeightSpec::power(kMid, 0.5);
    const double b = infsup_constant(s, 2.0, w);
    beta.push_back(b);
    CHECK(b > 0.0);
    CHECK(b <= 1.0 + 1e-9);
    CHECK(b == doctest::Approx(infsup_oracle(s, w)).epsilon(1e-8));
    CHECK(b == doctest::Approx(value).epsilon(1e-7));
  }
  for (double b : beta)
    CHECK(b >= 0.5 * beta.front());
}

TEST_CASE("inf-sup: duality symmetry") {
  for (double gamma : {-0.5, 0.5}) {
    const FemSpace s(structured_square(8));
    const WeightSpec w = WeightSpec::power(kMid, gamma);
    CHECK(std::abs(infsup_constant(s, 2.0, w) - infsup_constant(s, 2.0, dual_weight(w, 2.0))) <
          1e-9);
  }
}

TEST_CASE("Ritz stability") {
  for (int n : {2, 4}) {
    const FemSpace s(structured_square(n));
    const ConstantEstimate c = ritz_stability_constant(s, 2.0, WeightSpec::constant(1.0), 2);
    CHECK(c.exact);
    CHECK(std::abs(c.value - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(ritz_stability_constant(FemSpace(structured_square(2)), 2.0,
                                          WeightSpec::constant(1.0), 0),
                  ParameterError);

  // the dense operator norm equals the generalized eigenvalue oracle
  const FemSpace small(structured_square(4));
  const WeightSpec w = WeightSpec::power(kMid, -0.5);
  CHECK(ritz_stability_constant(small, 2.0, w, 1).value ==
        doctest::Approx(ritz_oracle(small, 1, w)).epsilon(1e-8));

  // golden at h = 1/8, and h-stability at h = 1/16
  const double c8 = ritz_stability_constant(FemSpace(structured_square(8)), 2.0, w, 2).value;
  const double c16 = ritz_stability_constant(FemSpace(structured_square(16)), 2.0, w, 2).value;
  CHECK(c8 >= 1.0 - 1e-9);
  CHECK(c8 == doctest::Approx(1.0338011059409).epsilon(1e-7));
  CHECK(std::abs(c16 - c8) < 0.15 * c8);

  // idempotence: a coarse field seen from the fine space projects to itself
  const FemSpace coarse(structured_square(4));
  const FemSpace fine(refine_uniform(coarse.mesh()));
  const DiscreteField u = DiscreteField::interpolate(coarse, sin_sin().value);
  const DiscreteField uf(fine, prolongation(coarse, fine) * u.coeffs());
  const DiscreteField ru = ritz_project(coarse, uf.as_function());
  CHECK((ru.coeffs() - u.coeffs()).cwiseAbs().maxCoeff() < 1e-12);
  for (double p : {1.5, 3.0}) {
    const WeightSpec wp = WeightSpec::power(kMid, 0.5);
    CHECK(weighted_norm(ru, p, wp, NormKind::gradient) ==
          doctest::Approx(weighted_norm(uf, p, wp, NormKind::gradient)).epsilon(1e-6));
    const ConstantEstimate lb = ritz_stability_constant(coarse, p, wp, 1);
    CHECK_FALSE(lb.exact);
    CHECK(lb.value >= 1.0 - 1e-9);
  }
}

TEST_CASE("Poincare constant") {
  double prev = 0.0;
  for (int n : {4, 8, 16}) {
    const FemSpace s(structured_square(n));
    const PoincareEstimate e = poincare_constant(s, 2.0, WeightSpec::constant(1.0));
    CHECK(e.constant.exact);
    CHECK(e.diameter == doctest::Approx(std::sqrt(2.0)));
    // P1 Rayleigh quotients overestimate the eigenvalue, so C approaches from below
    CHECK(e.constant.value > prev);
    CHECK(e.constant.value < 1.0 / (M_PI * std::sqrt(2.0)));
    prev = e.constant.value;
    const PoincareEstimate five = poincare_constant(s, 2.0, WeightSpec::constant(5.0));
    CHECK(five.constant.value == doctest::Approx(e.constant.value).epsilon(1e-12));
  }
  CHECK(prev == doctest::Approx(1.0 / (M_PI * std::sqrt(2.0))).epsilon(0.01));

  // homogeneity of the ratio used by the sampled path
  const FemSpace s(structured_square(8));
  const DiscreteField u = DiscreteField::interpolate(s, sin_sin().value);
  const DiscreteField u2(s, 2.0 * u.coeffs());
  const WeightSpec w = WeightSpec::power(kMid, 0.5);
  const double r1 = weighted_norm(u, 3.0, w, NormKind::value) / weighted_norm(u, 3.0, w, NormKind::gradient);
  const double r2 = weighted_norm(u2, 3.0, w, NormKind::value) / weighted_norm(u2, 3.0, w, NormKind::gradient);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-13));
  const PoincareEstimate sampled = poincare_constant(s, 3.0, w);
  CHECK_FALSE(sampled.constant.exact);
  CHECK(sampled.constant.value >= r1 * (1 - 1e-12));
}

TEST_CASE("small oscillation check") {
  const OscillationReport id = small_oscillation_check(LinearCoefficient::identity(), 3.0, 2.0);
  CHECK(id.lhs == 0.0);
  CHECK(id.holds);
  const OscillationReport a = small_oscillation_check(1.0, 2.0, 2.0, 1.0);
  CHECK(a.lhs == doctest::Approx(2.0));
  CHECK_FALSE(a.holds);
  const OscillationReport b = small_oscillation_check(0.9, 1.0, 1.2, 1.0);
  CHECK(b.lhs == doctest::Approx(0.24));
  CHECK(b.holds);
  CHECK_THROWS_AS(small_oscillation_check(2.0, 1.0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(small_oscillation_check(1.0, 1.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("constants report") {
  const ConstantsReport r = constants_report(structured_square(4), 2.0, WeightSpec::constant(1.0));
  REQUIRE(r.beta_h.size() == 3);
  for (const auto& l : r.beta_h) {
    CHECK(l.beta > 0.0);
    CHECK(l.beta <= 1.0 + 1e-9);
  }
  CHECK(r.C_delta_est == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.C_R_est == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.C_P_est > 0.0);
  const auto j = r.to_json();
  CHECK(j["beta_h"].size() == 3);
  CHECK(j["provenance"]["levels"] == 3);
  CHECK(j["provenance"]["weight"]["family"] == "constant");
}

TEST_CASE("convergence: smooth Laplace rates") {
  const ConvergenceReport rep = convergence_study(structured_square(4), laplace_sin_sin(),
                                                  LinearCoefficient::identity(), sin_sin(), 5);
  REQUIRE(rep.levels.size() == 5);
  for (std::size_t k = 1; k < rep.levels.size(); ++k)
    CHECK(rep.levels[k].h == doctest::Approx(0.5 * rep.levels[k - 1].h).epsilon(1e-15));
  CHECK_FALSE(rep.levels[0].rate_grad);
  const LevelResult& last = rep.levels.back();
  REQUIRE(last.rate_grad);
  REQUIRE(last.rate_val);
  CHECK(std::abs(*last.rate_grad - 1.0) <= 0.1);
  CHECK(std::abs(*last.rate_val - 2.0) <= 0.15);
  const std::string csv = rep.to_csv({"note"});
  CHECK(csv.rfind("# note\nlevel,h,dofs,err_grad,err_val,rate_grad,rate_val,norm_monitor,iterations\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("convergence: exact solution in the coarse space") {
  const Mesh m = structured_square(4);
  const FemSpace s(m);
  const DiscreteField u = DiscreteField::interpolate(s, sin_sin().value);
  const ScalarFunction exact = u.as_function();
  ProblemData d;
  d.f = {exact.gradient, {}};
  d.g = {[](const Point&) { return 0.0; }, {}};
  Mat2 A;
  A << 1.5, 0.2, 0.2, 1.0;
  // for A != I the flux datum is A grad u
  d.f.value = [exact, A](const Point& x) { return (A * exact.gradient(x)).eval(); };
  const ConvergenceReport rep =
      convergence_study(m, d, LinearCoefficient::constant(A), exact, 3);
  for (const auto& l : rep.levels) {
    CHECK(*l.err_grad < 1e-9);
    CHECK(*l.err_val < 1e-9);
  }
  CHECK_FALSE(rep.levels[1].rate_grad);
  CHECK_FALSE(rep.levels[2].rate_val);
  CHECK_THROWS_AS(convergence_study(m, d, LinearCoefficient::identity(), exact, 2), ParameterError);
}

TEST_CASE("convergence: divergent data fails with a partial report") {
  ProblemData d = laplace_sin_sin();
  d.omega = WeightSpec::power(kMid, -3.0);
  try {
    convergence_study(structured_square(4), d, LinearCoefficient::identity(), std::nullopt, 3);
    FAIL("expected StudyFailure");
  } catch (const StudyFailure& e) {
    CHECK(e.divergence());
    CHECK(e.partial().levels.empty());
  }
}

}

#include <gtest/gtest.h>

#include "kgl3/harness.hpp"

using namespace kgl3;

namespace {

double d(Real x) { return static_cast<double>(x); }

const GL3Form& sym2() {
  static GL3Form f = build_sym_square(600000);
  return f;
}

}  // namespace

TEST(MainTerm, DoublingQuadruples) {
  for (Real T : {3.0L, 20.0L, 33.3L}) EXPECT_EQ(main_term(sym2(), 2 * T), 4 * main_term(sym2(), T));
}

TEST(MainTerm, SelfDualSquare) {
  const Complex l = l_one(sym2());
  EXPECT_LT(std::abs(l.imag()), 1e-15L);
  const Real expect = 12 / (kPi * kPi * kPi) * l.real() * l.real() * 400;
  EXPECT_NEAR(d(main_term(sym2(), 20) / expect), 1, 1e-15);
}

TEST(MainTerm, RejectsDivisorForm) { EXPECT_THROW(main_term(build_d3_form(), 10), InputError); }

TEST(MainTerm, EulerProductCrossCheck) {
  const Real l = l_one(sym2()).real();
  const Real e3 = euler_product_l_one(sym2(), 1000).real();
  const Real e4 = euler_product_l_one(sym2(), 10000).real();
  const Real e5 = euler_product_l_one(sym2(), 100000).real();
  // Partial products at s = 1 close in like cap^{-1/2}: 1e3 and 1e4 differ by
  // about 2.6e-3; the larger caps sit on the approximate functional equation value.
  EXPECT_LT(std::abs(e3 - e4), 3e-3L);
  EXPECT_LT(std::abs(e4 - l), 1e-3L);
  EXPECT_LT(std::abs(e5 - l), std::abs(e4 - l));
}

TEST(MainTerm, AfeStableInWeight) {
  WeightSpec a8;
  a8.A = 8;
  EXPECT_NEAR(d(l_one(sym2(), a8).real()), d(l_one(sym2()).real()), 1e-10);
}

TEST(SmoothCutoff, Shape) {
  SmoothCutoff c{10};
  EXPECT_EQ(c(0.5L), 0);
  EXPECT_EQ(c(1), 1);
  EXPECT_EQ(c(10), 1);
  EXPECT_EQ(c(20), 0);
  EXPECT_GT(c(0.75L), 0);
  EXPECT_LT(c(0.75L), 1);
  EXPECT_NEAR(d(c(15)), 0.5, 1e-15);
  for (Real x = 10; x < 20; x += 0.5L) EXPECT_GE(c(x), c(x + 0.5L));
}

TEST(Diagonal, CapShortfall) {
  DiagonalCaps caps;
  caps.y_cap = 1000;
  EXPECT_THROW(diagonal_term_numeric(sym2(), 20, caps), InputError);
  caps = {};
  caps.n_cap = 10;
  EXPECT_THROW(diagonal_term_numeric(sym2(), 20, caps), InputError);
  EXPECT_THROW(diagonal_term_numeric(build_d3_form(), 5), InputError);
}

TEST(Diagonal, MatchesDirectTheoremWeights) {
  // T = 2: Omega keeps n <= 4 and k keeps m^2 n < 18, so the double sum is short
  // enough to do term by term with theorem_weights (trapezoid in t).
  const Real T = 2;
  const Real eps = 0.1L;
  SmoothCutoff omega{std::pow(T, 1 + eps)}, kcut{std::pow(T, 3 + eps)};
  SpectralWeightCache cache(sym2(), WeightSpec{});
  CoefficientEngine A(sym2(), 64);
  Complex direct{0, 0};
  for (i64 n = 1; n < 2 * omega.X; ++n)
    for (i64 m = 1; m * m * n < 2 * kcut.X; ++m) {
      const Real w = omega(Real(n)) * kcut(Real(m * m * n)) / Real(m * n);
      if (w == 0) continue;
      direct += w * A(m, n) * theorem_weights(T, n, n, m, cache, TheoremVariant::H1);
      direct += w * A(n, m) * theorem_weights(T, n, n, m, cache, TheoremVariant::H2);
    }
  auto rep = diagonal_term_report(sym2(), T);
  EXPECT_NEAR(d(rep.total / direct.real()), 1, 1e-8);
  // Self-dual: Delta_2 is the conjugate of Delta_1.
  EXPECT_NEAR(d(rep.delta1), d(rep.delta2), 1e-12 * d(std::abs(rep.delta1)));
}

TEST(Diagonal, QuadratureStable) {
  DiagonalOptions fine;
  fine.gauss_points = 16;
  fine.panel_growth = 1.5L;
  const Real a = diagonal_term_numeric(sym2(), 6);
  const Real b = diagonal_term_numeric(sym2(), 6, {}, fine);
  EXPECT_NEAR(d(a / b), 1, 1e-10);
}

TEST(Diagonal, RatioAtT20) {
  auto rep = diagonal_term_report(sym2(), 20);
  const Real main = main_term(sym2(), 20);
  const Real ratio = rep.total / main;
  EXPECT_GE(ratio, 0.5L);
  EXPECT_LE(ratio, 1.5L);
  // The closed-form route's leading part is the main term up to the tanh
  // correction and quadrature.
  EXPECT_NEAR(d(rep.leading / main), 1, 1e-3);
  EXPECT_LT(std::abs(rep.correction), rep.slack);
}

TEST(Continuous, IntegrandVanishesAtZero) { EXPECT_EQ(continuous_integrand(sym2(), 0, 10), Complex(0, 0)); }

TEST(Continuous, PositiveForSelfDual) {
  // Both L-values computed independently; the product must come out real and
  // nonnegative.
  for (Real t : {0.37L, 2.5L, 7.25L, 14.0L, 21.5L}) {
    Complex v = continuous_integrand(sym2(), t, 10);
    EXPECT_GE(v.real(), 0) << d(t);
    EXPECT_LT(std::abs(v.imag()), 1e-10L * std::max(Real(1e-12), v.real())) << d(t);
  }
}

TEST(Continuous, ConjugateShortcutMatches) {
  ContinuousOptions opt;
  opt.gaussian_exponent = 6;
  auto r = continuous_contribution_result(sym2(), 2, 0, opt);
  EXPECT_GE(r.min_integrand, 0);
  // Same nodes, independent evaluation of both L-values.
  Real sum = 0;
  std::vector<Real> edges;
  const auto panels = static_cast<std::size_t>(std::ceil(r.r_max / opt.panel_width));
  for (std::size_t i = 0; i <= panels; ++i) edges.push_back(r.r_max * Real(i) / Real(panels));
  auto nodes = detail::composite_gauss(edges, opt.gauss_points);
  for (std::size_t i = 0; i < nodes.x.size(); ++i) sum += 2 * nodes.w[i] * continuous_integrand(sym2(), nodes.x[i], 2, opt.spec).real();
  EXPECT_NEAR(d(r.value.real() / sum), 1, 1e-9);
}

TEST(Continuous, QuadratureRefinement) {
  ContinuousOptions coarse, fine;
  fine.gauss_points = 16;
  fine.panel_width = 0.5L;
  const Real a = continuous_contribution(sym2(), 3, 0, coarse);
  const Real b = continuous_contribution(sym2(), 3, 0, fine);
  EXPECT_NEAR(d(a / b), 1, 1e-7);
}

TEST(Average, EmptyFixtures) {
  AverageOptions opt;
  opt.with_diagonal = false;
  auto rep = averaged_product(sym2(), {}, 3, opt);
  ASSERT_TRUE(rep.discrete_lhs.has_value());
  EXPECT_EQ(*rep.discrete_lhs, 0);
  EXPECT_GT(rep.main_term, 0);
  EXPECT_GT(rep.continuous_term, 0);
  EXPECT_TRUE(rep.partial_coverage);
  EXPECT_EQ(rep.deviation, rep.recomputed_deviation());
  EXPECT_EQ(rep.deviation, rep.continuous_term - rep.main_term);
}

TEST(Average, EisensteinSurrogateIsContinuousIntegrand) {
  for (Real r : {5.0L, 10.0L}) {
    auto ft = fixture_term(sym2(), eisenstein_surrogate(r, 8192), 10);
    Complex ci = continuous_integrand(sym2(), r, 10);
    EXPECT_LT(relative_gap(ft.term, ci), 1e-8L) << d(r);
  }
}

TEST(Average, FixtureBookkeepingAndRoundTrip) {
  // Synthetic records: one with enough coefficients, one far too short.
  MaassFixture ok;
  ok.t = 1;
  ok.norm_convention = "synthetic";
  ok.source = "test";
  for (i64 n = 1; n <= 70000; ++n) ok.coeffs.push_back(eta_coefficient(n, 1) / 2);
  MaassFixture shortfx = ok;
  shortfx.t = 9;
  shortfx.coeffs.resize(50);
  AverageOptions opt;
  opt.with_diagonal = false;
  auto rep = averaged_product(sym2(), {ok, shortfx}, 3, opt);
  EXPECT_EQ(rep.fixtures_used, 1u);
  EXPECT_EQ(rep.fixtures_skipped, 1u);
  EXPECT_TRUE(rep.partial_coverage);
  ASSERT_EQ(rep.terms.size(), 2u);
  EXPECT_NE(rep.terms[1].status, "ok");
  auto single = fixture_term(sym2(), ok, 3);
  EXPECT_EQ(*rep.discrete_lhs, single.term.real());
  EXPECT_EQ(rep.deviation, rep.recomputed_deviation());

  auto back = average_report_from_json(nlohmann::json::parse(to_json(rep).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(rep).dump());
  EXPECT_EQ(back.T, rep.T);
  EXPECT_EQ(back.main_term, rep.main_term);
  EXPECT_EQ(back.continuous_term, rep.continuous_term);
  EXPECT_EQ(*back.discrete_lhs, *rep.discrete_lhs);
  EXPECT_EQ(back.terms[0].term, rep.terms[0].term);
  EXPECT_EQ(back.recomputed_deviation(), rep.deviation);
  EXPECT_EQ(to_csv(back), to_csv(rep));
}

TEST(Average, RejectsOddFixtures) {
  MaassFixture odd;
  odd.t = 2;
  odd.parity = "odd";
  odd.coeffs = {1};
  AverageOptions opt;
  opt.with_diagonal = false;
  EXPECT_THROW(averaged_product(sym2(), {odd}, 3, opt), InputError);
}

TEST(Average, MalformedReportJson) {
  EXPECT_THROW(average_report_from_json(nlohmann::json::parse(R"({"T": "1"})")), InputError);
  auto j = to_json(AverageReport{});
  j["main_term"] = "1.0x";
  EXPECT_THROW(average_report_from_json(j), InputError);
}

#include <gtest/gtest.h>

#include <random>

#include "kgl3/heckegl3.hpp"

using namespace kgl3;

namespace {

double d(Real x) { return static_cast<double>(x); }

constexpr Real kZeta3 = 1.20205690315959428539973816151144999L;

const GL3Form& sym2() {
  static const GL3Form f = build_sym_square(1000);
  return f;
}

// q prod_{n >= 1} (1 - q^n)^24 expanded by repeated multiplication by (1 - q^n).
std::vector<i64> tau_by_direct_product(int order) {
  std::vector<i64> c(order, 0);
  c[0] = 1;
  for (int n = 1; n < order; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (int i = order - 1; i >= n; --i) c[i] -= c[i - n];
  std::vector<i64> tau(order + 1, 0);
  for (int i = 0; i < order; ++i) tau[i + 1] = c[i];
  return tau;
}

}  // namespace

TEST(Coefficient, NormalisedAtOne) {
  EXPECT_EQ(coefficient(build_d3_form(), 1, 1), Complex(1, 0));
  EXPECT_NEAR(d(std::abs(coefficient(sym2(), 1, 1) - Complex(1, 0))), 0, 1e-18);
}

TEST(Coefficient, D3HeckeRelationAtP) {
  auto f = build_d3_form();
  for (i64 p : primes_up_to(50)) {
    Complex ap = coefficient(f, p, 1);
    EXPECT_NEAR(d(std::abs(ap * ap - coefficient(f, p * p, 1) - coefficient(f, 1, p))), 0, 1e-15);
    EXPECT_NEAR(d(ap.real()), 3, 0);
    EXPECT_NEAR(d(coefficient(f, p * p, 1).real()), 6, 0);
  }
}

TEST(Coefficient, D3MatchesSieve) {
  auto f = build_d3_form();
  auto tables = multiplicative_tables(10000);
  CoefficientEngine A(f, 10000);
  for (i64 n = 1; n <= 10000; ++n) {
    EXPECT_EQ(A(1, n), Complex(static_cast<Real>(tables.d3[n]), 0));
    EXPECT_EQ(coefficient(f, 1, n), A(1, n));
  }
}

TEST(Coefficient, MissingPrimeRejected) { EXPECT_THROW(coefficient(sym2(), 1, 1009), InputError); }

TEST(D3Form, Examples) {
  auto f = build_d3_form();
  EXPECT_EQ(f.alpha, Complex(0, 0));
  EXPECT_EQ(f.beta, Complex(0, 0));
  EXPECT_EQ(f.gamma, Complex(0, 0));
  for (i64 p : {2, 3, 5, 97}) {
    EXPECT_EQ(coefficient(f, 1, p), Complex(3, 0));
    EXPECT_EQ(coefficient(f, p, p), Complex(8, 0));
    EXPECT_NEAR(d(std::abs(hecke_relation_residual(f, p, 1, p))), 0, 0);
  }
}

TEST(SymSquare, TauValues) {
  auto tau = ramanujan_tau(200);
  auto oracle = tau_by_direct_product(200);
  EXPECT_EQ(to_string(tau[2]), "-24");
  EXPECT_EQ(to_string(tau[3]), "252");
  for (int n = 1; n <= 200; ++n) EXPECT_EQ(tau[n], static_cast<i128>(oracle[n])) << n;
}

TEST(SymSquare, TauStructure) {
  auto tau = ramanujan_tau(5000);
  for (i64 p : primes_up_to(70)) {
    if (p * p <= 5000) {
      i128 p11 = 1;
      for (int k = 0; k < 11; ++k) p11 *= p;
      EXPECT_EQ(tau[p * p], tau[p] * tau[p] - p11);
    }
    EXPECT_LE(std::abs(to_real(tau[p])), 2 * std::pow(static_cast<Real>(p), Real(5.5)));
  }
  EXPECT_EQ(tau[6], tau[2] * tau[3]);
  EXPECT_EQ(tau[4 * 1001], tau[4] * tau[1001]);
}

TEST(SymSquare, APlusOneEqualsSquare) {
  auto tau = ramanujan_tau(1000);
  for (i64 p : primes_up_to(1000)) {
    Real ap = to_real(tau[p]) / std::pow(static_cast<Real>(p), Real(5.5));
    EXPECT_NEAR(d(std::abs(coefficient(sym2(), 1, p) - (ap * ap - 1))), 0, 1e-15);
  }
}

TEST(HeckeClosure, BothFormsPrimesUpTo50) {
  GL3Form forms[] = {build_d3_form(), sym2()};
  for (const auto& f : forms)
    for (i64 p : primes_up_to(50))
      for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b) {
          i64 pa = 1, pb = 1;
          for (int k = 0; k < a; ++k) pa *= p;
          for (int k = 0; k < b; ++k) pb *= p;
          Complex r = hecke_relation_residual(f, p, pa, pb);
          Real scale = std::max<Real>(1, std::abs(coefficient(f, pa * p, pb)));
          EXPECT_LE(d(std::abs(r) / scale), 1e-10) << f.label << " p=" << p << " a=" << a << " b=" << b;
        }
}

TEST(HeckeClosure, CompositeM) {
  auto f = sym2();
  for (i64 m : {6, 12, 30})
    for (auto [m1, m2] : std::vector<std::pair<i64, i64>>{{4, 9}, {10, 3}, {1, 12}, {35, 2}})
      EXPECT_LE(d(std::abs(hecke_relation_residual(f, m, m1, m2))), 1e-10);
}

TEST(DualSymmetry, SelfDualForms) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<i64> dist(1, 200);
  for (int i = 0; i < 200; ++i) {
    i64 m = dist(rng), n = dist(rng);
    Complex a = coefficient(sym2(), m, n), b = coefficient(sym2(), n, m);
    EXPECT_LE(d(std::abs(a - std::conj(b))), 1e-10);
    EXPECT_EQ(coefficient(build_d3_form(), m, n).imag(), 0);
  }
}

TEST(DualSymmetry, DualFormSwapsArguments) {
  GL3Form f;
  f.label = "generic";
  f.uniform_satake = SatakeTriple{Complex(2, 0.5L), Complex(0.5L, -0.25L), Real(1) / (Complex(2, 0.5L) * Complex(0.5L, -0.25L))};
  GL3Form g = dual_form(f);
  for (i64 m : {1, 2, 8, 12})
    for (i64 n : {1, 3, 4, 18}) EXPECT_LE(d(std::abs(coefficient(g, m, n) - coefficient(f, n, m))), 1e-12);
}

TEST(Multiplicativity, RandomCoprimePairs) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<i64> dist(1, 60);
  int done = 0;
  while (done < 100) {
    i64 m1 = dist(rng), n1 = dist(rng), m2 = dist(rng), n2 = dist(rng);
    if (gcd(m1 * n1, m2 * n2) != 1) continue;
    Complex lhs = coefficient(sym2(), m1 * m2, n1 * n2);
    Complex rhs = coefficient(sym2(), m1, n1) * coefficient(sym2(), m2, n2);
    EXPECT_LE(d(std::abs(lhs - rhs)), 1e-12);
    ++done;
  }
}

TEST(DirichletL, D3AtTwoAndThree) {
  auto f = build_d3_form();
  auto r2 = dirichlet_L(f, 2, 100000);
  Real z2 = kPi * kPi / 6;
  EXPECT_LE(d(std::abs(r2.value - z2 * z2 * z2)), d(r2.abs_error_estimate));
  auto r3 = dirichlet_L(f, 3, 100000);
  EXPECT_LE(d(std::abs(r3.value - kZeta3 * kZeta3 * kZeta3)), d(r3.abs_error_estimate));
  EXPECT_LE(d(r3.abs_error_estimate), 1e-8);
}

TEST(DirichletL, SymSquareMatchesEulerProduct) {
  auto r = dirichlet_L(sym2(), 2, 1000);
  Complex euler{1, 0};
  for (i64 p : primes_up_to(1000)) {
    // Local roots of L(s, f) are the inverses of the stored triple.
    for (Complex x : sym2().satake_at(p)) euler /= Real(1) - std::pow(static_cast<Real>(p), Real(-2)) / x;
  }
  EXPECT_LE(d(std::abs(r.value - euler)), d(2 * r.abs_error_estimate));
}

TEST(DirichletL, RegionEnforced) {
  EXPECT_THROW(dirichlet_L(build_d3_form(), Complex(1, 3), 100), RegimeError);
}

TEST(BumpIdentity, D3AtTwoCutoffMillion) {
  auto f = build_d3_form();
  Complex lhs = bump_double_sum(f, 2, 2, 1000000);
  Real z3 = kZeta3;
  Real z6 = std::pow(kPi, Real(6)) / 945;
  Real rhs = std::pow(z3, Real(6)) / z6;
  EXPECT_LE(d(std::abs(lhs - rhs) / rhs), 1e-4);
  EXPECT_LE(d(bump_identity_residual(f, 2, 2, 1000000)), 1e-4);
}

TEST(BumpIdentity, D3AtThree) {
  auto f = build_d3_form();
  Complex lhs = bump_double_sum(f, 3, 3, 100000);
  Real rhs = std::pow(kZeta3, Real(0)) * std::pow(riemann_zeta(Complex(4, 0)).real(), Real(6)) /
             riemann_zeta(Complex(8, 0)).real();
  EXPECT_LE(d(std::abs(lhs - rhs) / rhs), 1e-6);
  EXPECT_LE(d(bump_identity_residual(f, 3, 3, 100000)), 1e-6);
}

TEST(BumpIdentity, SymSquareCutoffMillion) {
  auto f = build_sym_square(1000000);
  EXPECT_LE(d(bump_identity_residual(f, 2, 2, 1000000)), 1e-3);
}

TEST(BumpIdentity, RegionEnforced) {
  EXPECT_THROW(bump_identity_residual(build_d3_form(), 0.5L, 2, 100), RegimeError);
}

TEST(CoefficientBounds, TrivialN) {
  auto rep = coefficient_bound_report(sym2(), 1);
  EXPECT_NEAR(d(rep.square_mean), 1, 1e-15);
}

TEST(CoefficientBounds, SymSquareBounded) {
  auto a = coefficient_bound_report(sym2(), 1000);
  auto b = coefficient_bound_report(build_sym_square(100000), 10000);
  EXPECT_LE(d(b.square_mean), d(1.25L * a.square_mean));
  for (int m = 0; m < 10; ++m) EXPECT_LE(d(b.row_means[m]), d(1.25L * a.row_means[m]) + 1e-12);
}

TEST(CoefficientBounds, D3BoundedAfterLogNormalisation) {
  Real prev = 1e300;
  for (i64 N : {1000, 10000, 100000}) {
    auto rep = coefficient_bound_report(build_d3_form(), N);
    Real L = std::log(static_cast<Real>(N));
    Real normalised = rep.square_mean / std::pow(L, Real(8));
    EXPECT_LE(d(normalised), d(prev));
    prev = normalised;
  }
}

TEST(GammaFactor, D3VariantsAgree) {
  auto f = build_d3_form();
  for (Complex s : {Complex(0.5L, 0), Complex(0.7L, 3), Complex(2, -1)})
    for (Real t : {Real(0), Real(4), Real(30)}) {
      auto g1 = gamma_factor_gl3(s, t, f, GammaVariant::gamma1);
      auto g2 = gamma_factor_gl3(s, t, f, GammaVariant::gamma2);
      EXPECT_EQ(g1.value, g2.value);
      EXPECT_FALSE(g1.outside_lrs);
    }
}

TEST(GammaFactor, D3AtCentre) {
  auto g = gamma_factor_gl3(Complex(0.5L, 0), 0, build_d3_form(), GammaVariant::gamma1);
  Real expected = std::pow(kPi, Real(-1.5)) * std::pow(std::tgamma(0.25L), Real(6));
  EXPECT_NEAR(d(std::abs(g.value - expected) / expected), 0, 1e-15);
}

TEST(GammaFactor, ConjugateSymmetry) {
  GL3Form f;
  set_maass_shape(f, 0.2L, -0.05L, -0.15L);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> re(0.2, 3), im(-20, 20);
  for (int i = 0; i < 20; ++i) {
    Complex s(re(rng), im(rng));
    Real t = re(rng) * 5;
    for (auto v : {GammaVariant::gamma1, GammaVariant::gamma2}) {
      Complex a = gamma_factor_gl3(std::conj(s), t, f, v).value;
      Complex b = std::conj(gamma_factor_gl3(s, t, f, v).value);
      EXPECT_LE(d(std::abs(a - b) / std::abs(b)), 1e-14);
    }
  }
  EXPECT_TRUE(sym2().outside_lrs());
}

#include <gtest/gtest.h>

#include "kgl3/afe.hpp"

using namespace kgl3;

namespace {

const GL3Form& sym2() {
  static GL3Form f = build_sym_square(200000);
  return f;
}

}  // namespace

TEST(Weights, GIsOneAtZeroAndEven) {
  WeightSpec spec;
  EXPECT_NEAR(std::abs(weight_value(spec, WeightKind::G, Complex(0, 0)) - Real(1)), 0, 1e-18);
  for (Real v : {0.3L, 2.0L, 7.5L}) {
    Complex a = weight_value(spec, WeightKind::G, Complex(0.5L, v));
    Complex b = weight_value(spec, WeightKind::G, Complex(-0.5L, -v));
    EXPECT_LT(std::abs(a - b), 1e-15L * std::abs(a));
  }
}

TEST(Weights, ExponentialDecayOnVerticalLines) {
  WeightSpec spec;
  Real g10 = std::abs(weight_value(spec, WeightKind::G, Complex(0.5L, 10)));
  Real g20 = std::abs(weight_value(spec, WeightKind::G, Complex(0.5L, 20)));
  // |cos(pi(x+iv)/A)|^{-A} ~ 2^A e^{-pi v}
  EXPECT_NEAR(std::log(g10 / g20) / (10 * kPi), 1, 0.02);
  Real f10 = std::abs(weight_value(spec, WeightKind::F, Complex(0.5L, 10)));
  EXPECT_LT(f10, g10 * g10 * g10 * 1.0001L);
}

TEST(Weights, PoleIsRegimeError) {
  WeightSpec spec;
  EXPECT_THROW(weight_value(spec, WeightKind::G, Complex(spec.A / 2.0L, 0)), RegimeError);
}

TEST(UWeight, NearOneForSmallY) {
  WeightSpec spec;
  EXPECT_NEAR(U_weight(spec, 0.1L, 100).real(), 1, 0.05);
}

TEST(UWeight, NegligibleForLargeY) {
  WeightSpec spec;
  EXPECT_LT(std::abs(U_weight(spec, 5000, 50)), 1e-10);
}

TEST(UWeight, StirlingLeadingForm) {
  WeightSpec spec;
  const Real t = 100, y = 100;
  auto lead = [&](Complex u) {
    return std::exp(-u * std::log(y)) * weight_value(spec, WeightKind::G, u) * std::exp(u * std::log(t / kTwoPi)) / u;
  };
  Complex approx = line_integral(lead, spec.sigma_u).value;
  EXPECT_LT(std::abs(U_weight(spec, y, t) - approx), 5 / t);
}

TEST(UWeight, KernelMatchesDirectIntegral) {
  WeightSpec spec;
  MellinNodes K = U_kernel(spec, 40);
  for (Real y : {0.5L, 3.0L, 9.0L, 30.0L}) EXPECT_LT(std::abs(K(y) - U_weight(spec, y, 40)), 1e-11L);
}

TEST(VWeight, NearOneForSmallYDivisor) {
  WeightSpec spec;
  GL3Form d3 = build_d3_form();
  EXPECT_NEAR(V_weight(spec, 1, 50, d3, VVariant::V1).real(), 1, 0.1);
  EXPECT_LT(std::abs(V_weight(spec, 1e6L, 5, d3, VVariant::V1)), 1e-8);
}

TEST(VWeight, VariantsAgreeForSelfDualShifts) {
  WeightSpec spec;
  GL3Form d3 = build_d3_form();
  for (Real y : {0.7L, 20.0L})
    EXPECT_LT(std::abs(V_weight(spec, y, 7, d3, VVariant::V1) - V_weight(spec, y, 7, d3, VVariant::V2)), 1e-14L);
}

TEST(ZetaSquare, MatchesEulerMaclaurin) {
  for (Real r : {2.0L, 10.0L, 30.0L}) {
    Real afe = zeta_square_afe(r);
    Real ref = zeta_square_oracle(r);
    EXPECT_LT(std::abs(afe - ref), 1e-6L * std::max(Real(1), ref)) << "r = " << static_cast<double>(r);
  }
}

TEST(ZetaSquare, AtZero) {
  Real ref = std::norm(riemann_zeta(Complex(0.5L, 0)));
  EXPECT_LT(std::abs(zeta_square_afe(0) - ref), 1e-6L);
}

TEST(CentralValueGL2, IndependentOfA) {
  WeightSpec a12{12}, a16{16};
  Real r = 14;
  MaassFixture fx = eisenstein_surrogate(r, 12000);
  EXPECT_LT(std::abs(central_value_gl2(fx, a12) - central_value_gl2(fx, a16)), 1e-8L);
}

TEST(CentralValueGL2, ShortFixtureIsInputError) {
  MaassFixture fx = eisenstein_surrogate(30, 3);
  EXPECT_THROW(central_value_gl2(fx, WeightSpec{}), InputError);
}

TEST(Degree3, CriticalValueIndependentOfA) {
  WeightSpec a8{8}, a16{16};
  Complex s(0.5L, 3);
  Complex v8 = gl3_critical_value(sym2(), s, a8);
  Complex v16 = gl3_critical_value(sym2(), s, a16);
  EXPECT_LT(std::abs(v8 - v16), 1e-5L);
}

TEST(Degree3, ConjugateSymmetryAndRealCentre) {
  Complex s(0.5L, 2);
  Complex a = gl3_critical_value(sym2(), s);
  Complex b = gl3_critical_value(sym2(), std::conj(s));
  EXPECT_LT(std::abs(a - std::conj(b)), 1e-8L);
  Complex c = gl3_critical_value(sym2(), Complex(0.5L, 0));
  EXPECT_LT(std::abs(c.imag()), 1e-8L);
}

TEST(Degree3, MatchesDirichletSeries) {
  // s = 2 sits on a trivial zero of the dual gamma factor; use s = 5/2.
  Complex afe = degree3_afe(sym2(), Complex(2.5L, 0)).value;
  TransformResult ser = dirichlet_L(sym2(), Complex(2.5L, 0), 200000);
  EXPECT_LT(std::abs(afe - ser.value), std::max(1e-6L, 3 * ser.abs_error_estimate));
}

TEST(Degree3, RejectsPolarForms) {
  EXPECT_THROW(gl3_critical_value(build_d3_form(), Complex(0.5L, 1)), InputError);
}

TEST(RankinSelberg, EisensteinFactorisation) {
  for (Real r : {0.0L, 1.0L}) {
    Complex rs = central_value_rs_eisenstein(sym2(), r);
    Complex prod = gl3_critical_value(sym2(), Complex(0.5L, -r)) * gl3_critical_value(sym2(), Complex(0.5L, r));
    EXPECT_LT(std::abs(rs - prod), 1e-4L * std::max(Real(1), std::abs(prod))) << "r = " << static_cast<double>(r);
  }
}

TEST(RankinSelberg, RejectsDivisorForm) {
  EXPECT_THROW(central_value_rs_eisenstein(build_d3_form(), 1), InputError);
}

TEST(UWeight, DecayEnvelopeBeyondTenT) {
  // G has poles of order A at u = +-A/2, so U(y, t) ~ (y/t)^{-A/2} log^{A-1} y.
  const Real t = 20;
  for (int A : {8, 16}) {
    WeightSpec spec{A};
    Real prev = std::abs(U_weight(spec, 10 * t, t));
    Real prev_ratio = 1;
    for (Real y = 20 * t; y <= 160 * t; y *= 2) {
      Real u = std::abs(U_weight(spec, y, t));
      Real ratio = u / prev;
      EXPECT_LT(ratio, 0.5L);
      EXPECT_LT(ratio, prev_ratio);
      EXPECT_GT(ratio, std::pow(Real(2), -Real(A) / 2));
      prev = u;
      prev_ratio = ratio;
    }
  }
}

TEST(ZetaSquare, Nonnegative) {
  for (Real r : {0.5L, 5.0L, 14.134725L, 21.0L}) EXPECT_GE(zeta_square_afe(r), -1e-9L);
}

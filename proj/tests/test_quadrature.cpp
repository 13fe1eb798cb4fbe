#include <gtest/gtest.h>

#include <random>

#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"

using namespace kgl3;

namespace {

Complex G16(Complex u) { return std::pow(std::cos(kPi * u / Real(16)), Real(-16)); }

}  // namespace

TEST(GaussKronrod, PolynomialsExact) {
  for (int d = 0; d <= 20; ++d) {
    auto r = integrate([d](Real x) { return std::pow(x, d); }, 0, 1);
    EXPECT_NEAR(static_cast<double>(r.value.real()), 1.0 / (d + 1), 1e-16);
  }
}

TEST(GaussKronrod, AdaptiveSmooth) {
  auto r = integrate([](Real x) { return std::exp(-x * x); }, -6, 6);
  EXPECT_NEAR(static_cast<double>(r.value.real()), std::sqrt(M_PI), 1e-14);
  EXPECT_LE(r.abs_error_estimate, 1e-12);
}

TEST(LineIntegral, CahenMellin) {
  for (Real x : {Real(1), Real(0.5), Real(3)}) {
    auto r = line_integral([x](Complex s) { return std::exp(log_gamma(s) - s * std::log(x)); }, 2);
    EXPECT_NEAR(static_cast<double>(std::abs(r.value - std::exp(-x))), 0, 1e-12);
  }
}

TEST(LineIntegral, ZeroIntegrand) {
  auto r = line_integral([](Complex) { return Complex(0, 0); }, 1);
  EXPECT_EQ(r.value, Complex(0, 0));
}

TEST(LineIntegral, ResidueOfGOverU) {
  auto f = [](Complex u) { return G16(u) / u; };
  auto right = line_integral(f, 0.5L);
  auto left = line_integral(f, -0.5L);
  // G even and G(0) = 1: symmetric lines give 1/2 +- 1/2 around the pole.
  EXPECT_NEAR(static_cast<double>(right.value.real()), 0.5, 1e-12);
  EXPECT_NEAR(static_cast<double>(std::abs(right.value - left.value - Complex(1, 0))), 0, 1e-12);
}

TEST(LineIntegral, ContourStable) {
  auto f = [](Complex s) { return std::exp(log_gamma(s) - s * std::log(Real(2))); };
  auto a = line_integral(f, 1), b = line_integral(f, 3);
  EXPECT_LE(std::abs(a.value - b.value), a.abs_error_estimate + b.abs_error_estimate + 1e-14);
}

TEST(LineIntegral, NonDecayDetected) {
  EXPECT_THROW(line_integral([](Complex) { return Complex(1, 0); }, 1), ConvergenceError);
}

TEST(MellinNodes, MatchesDirectLine) {
  auto g = [](Complex s) { return std::exp(log_gamma(s)); };
  auto nodes = build_mellin_nodes(g, 2, {0.5L, 1, 4});
  for (Real y : {Real(0.5), Real(1), Real(2), Real(4)})
    EXPECT_NEAR(static_cast<double>(std::abs(nodes(y) - std::exp(-y))), 0, 1e-12);
}

TEST(Oscillatory, NoOscillation) {
  auto bump = smooth_bump(0, 1, 0.5L);
  auto osc = oscillatory_integral(bump, [](Real) { return Real(0); }, 0, 1);
  auto direct = integrate(bump, 0, 1);
  EXPECT_NEAR(static_cast<double>(std::abs(osc.value - direct.value)), 0, 1e-13);
}

TEST(Oscillatory, NonStationaryDecay) {
  auto bump = smooth_bump(0, 1, 0.9L);
  const Real K0 = 10;
  const Real C = K0 * std::abs(oscillatory_integral(bump, [K0](Real x) { return K0 * x; }, 0, 1).value);
  for (Real K : {Real(100), Real(1000)}) {
    Real v = std::abs(oscillatory_integral(bump, [K](Real x) { return K * x; }, 0, 1).value);
    EXPECT_LE(v, C / K);
  }
}

TEST(Oscillatory, LinearPhaseClosedForm) {
  // \int_0^1 e(Kx) dx has modulus |sin(pi K)| / (pi K).
  for (Real K : {Real(100.25), Real(1000.25)}) {
    Real v = std::abs(oscillatory_integral([](Real) { return Real(1); }, [K](Real x) { return K * x; }, 0, 1).value);
    EXPECT_NEAR(static_cast<double>(v), static_cast<double>(std::abs(std::sin(kPi * K)) / (kPi * K)), 1e-14);
  }
}

TEST(Oscillatory, UnboundedDerivativeRejected) {
  EXPECT_THROW(oscillatory_integral([](Real) { return Real(1); }, [](Real x) { return 1 / x; }, 0, 1), InputError);
}

TEST(StationaryPhase, ZeroAmplitude) {
  auto v = stationary_phase_main_term([](Real) { return Real(0); }, [](Real x) { return x * x; }, 2, 0);
  EXPECT_EQ(v, Complex(0, 0));
}

TEST(StationaryPhase, DegenerateRejected) {
  EXPECT_THROW(stationary_phase_main_term([](Real) { return Real(1); }, [](Real x) { return x; }, 0, 0), InputError);
  EXPECT_THROW(stationary_phase_main_term([](Real) { return Real(1); }, [](Real x) { return x * x; }, 2, 5,
                                          std::pair<Real, Real>{0, 1}),
               InputError);
}

TEST(StationaryPhase, GaussianPhaseWithinFiveOverLambda) {
  auto bump = smooth_bump(0, 2, 0.5L);
  for (Real lambda : {Real(100), Real(400), Real(1000), Real(10000)}) {
    auto phase = [lambda](Real x) { return lambda * (x - 1) * (x - 1) / 2; };
    Complex main = stationary_phase_main_term(bump, phase, lambda, 1);
    Complex direct = oscillatory_integral(bump, phase, 0, 2).value;
    EXPECT_LE(std::abs(main - direct) / std::abs(direct), 5 / lambda) << "lambda " << (double)lambda;
  }
}

TEST(StationaryPhase, NegativeCurvatureIsConjugate) {
  auto bump = smooth_bump(0, 2, 0.5L);
  Real lambda = 1000;
  auto phase = [lambda](Real x) { return -lambda * (x - 1) * (x - 1) / 2; };
  Complex main = stationary_phase_main_term(bump, phase, -lambda, 1);
  Complex direct = oscillatory_integral(bump, phase, 0, 2).value;
  EXPECT_LE(std::abs(main - direct) / std::abs(direct), 5 / lambda);
}

TEST(StationaryPhase, ErrorShrinksWithLambda) {
  auto bump = smooth_bump(0, 2, 0.5L);
  auto amp = [&](Real x) { return bump(x) * (1 + (x - 1) * (x - 1)); };
  Real prev = 0;
  for (Real lambda : {Real(100), Real(1000), Real(10000)}) {
    auto phase = [lambda](Real x) { return lambda * (x - 1) * (x - 1) / 2; };
    Complex main = stationary_phase_main_term(amp, phase, lambda, 1);
    Complex direct = oscillatory_integral(amp, phase, 0, 2).value;
    Real rel = std::abs(main - direct) / std::abs(direct);
    EXPECT_LE(rel, 5 / lambda);
    if (prev > 0) {
      EXPECT_LE(rel, prev / 2);
    }
    prev = rel;
  }
}

TEST(SmoothBump, Basics) {
  auto b = smooth_bump(1, 3, 0.4L);
  EXPECT_EQ(b(2), 1);
  EXPECT_EQ(b(0.5L), 0);
  EXPECT_EQ(b(3.5L), 0);
  for (Real x = 0; x < 4; x += 0.01L) {
    EXPECT_GE(b(x), 0);
    EXPECT_LE(b(x), 1);
  }
  EXPECT_THROW(smooth_bump(2, 1, 0.5L), InputError);
}

TEST(SmoothBump, DyadicPartitionOfUnity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ld(0, std::log(1e4));
  for (int i = 0; i < 50; ++i) {
    Real x = std::exp(Real(ld(rng)));
    EXPECT_NEAR(static_cast<double>(dyadic_partition_sum(x)), 1.0, 1e-12);
  }
  EXPECT_EQ(dyadic_piece(0.9L), 0);
  EXPECT_EQ(dyadic_piece(4.1L), 0);
}

TEST(Poisson, BumpResidual) {
  auto b = smooth_bump(10, 20, 0.2L);
  Real r40 = poisson_residual(b, 10, 20, 40);
  Real r80 = poisson_residual(b, 10, 20, 80);
  EXPECT_LE(r40, 1e-8);
  EXPECT_LE(r80, r40 + 1e-15);
  EXPECT_EQ(poisson_residual([](Real) { return Real(0); }, 10, 20, 40), 0);
}

#include <gtest/gtest.h>

#include <random>

#include "kgl3/exactarith.hpp"

using namespace kgl3;

namespace {

i64 brute_inverse(i64 d, i64 c) {
  for (i64 x = 0; x < c; ++x)
    if (mod_reduce(d * x, c) == 1 % c) return x;
  return -1;
}

Real ramanujan_oracle(i64 a, i64 c) {
  Real s = 0;
  i64 g = gcd(a, c);
  for (i64 d : divisors(g)) s += d * mobius(c / d);
  return s;
}

i64 d3_oracle(i64 n) {
  i64 count = 0;
  for (i64 a = 1; a <= n; ++a)
    for (i64 b = 1; a * b <= n; ++b)
      if (n % (a * b) == 0) ++count;
  return count;
}

}  // namespace

TEST(ModInverse, Examples) {
  EXPECT_EQ(mod_inverse(1, 2).value, 1);
  EXPECT_EQ(mod_inverse(2, 3).value, brute_inverse(2, 3));
  EXPECT_EQ(mod_inverse(2, 3).value, 2);
  EXPECT_EQ(mod_inverse(5, 7).value, brute_inverse(5, 7));
  EXPECT_EQ(mod_inverse(5, 7).value, 3);
}

TEST(ModInverse, NegativeInputReduced) {
  EXPECT_EQ(mod_inverse(-2, 7).value, mod_inverse(5, 7).value);
}

TEST(ModInverse, NonCoprimeRejected) { EXPECT_THROW(mod_inverse(4, 6), InputError); }

TEST(Kloosterman, Examples) {
  for (i64 n : {0, 1, 7, -3})
    for (i64 l : {0, 2, 5}) EXPECT_NEAR(std::abs(kloosterman(n, l, 1) - Complex(1, 0)), 0, 1e-15);
  EXPECT_NEAR(kloosterman(1, 1, 2).real(), 1, 1e-15);
  EXPECT_NEAR(kloosterman(1, 1, 3).real(), -1, 1e-15);
}

TEST(Kloosterman, ImaginaryPartNegligible) {
  for (i64 c = 1; c <= 60; ++c)
    for (i64 n = -3; n <= 3; ++n) {
      Complex s = kloosterman(n, 5, c);
      EXPECT_LE(std::abs(s.imag()), 1e-12 * std::max<Real>(1, std::abs(s)));
    }
}

TEST(Kloosterman, ExactModeAgreesAndIsReal) {
  for (i64 c = 1; c <= 100; ++c)
    for (i64 n : {0, 1, 2, 6})
      for (i64 l : {1, 3, 10}) {
        auto ex = kloosterman_exact(n, l, c);
        EXPECT_TRUE(ex.conjugation_symmetric());
        EXPECT_NEAR(std::abs(ex.evaluate() - kloosterman(n, l, c)), 0, 1e-12);
        EXPECT_LE(std::abs(ex.evaluate()), static_cast<Real>(ex.term_count()) + 1e-12);
      }
}

TEST(Kloosterman, SymmetryAndWeil) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<i64> cd(1, 2000), nd(-5000, 5000);
  for (int i = 0; i < 300; ++i) {
    i64 c = cd(rng), n = nd(rng), l = nd(rng);
    Complex s = kloosterman(n, l, c);
    EXPECT_NEAR(std::abs(s - kloosterman(l, n, c)), 0, 1e-9);
    EXPECT_LE(std::abs(s), weil_bound(n, l, c) + 1e-9);
  }
}

TEST(Kloosterman, TwistedMultiplicativity) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<i64> cd(1, 40), nd(-500, 500);
  int done = 0;
  while (done < 200) {
    i64 c1 = cd(rng), c2 = cd(rng);
    if (gcd(c1, c2) != 1 || c1 * c2 > 1000) continue;
    i64 n = nd(rng), l = nd(rng);
    i64 i1 = mod_inverse(c1, c2).value, i2 = mod_inverse(c2, c1).value;
    Complex composed = kloosterman(n * i2 * i2, l, c1) * kloosterman(n * i1 * i1, l, c2);
    EXPECT_NEAR(std::abs(kloosterman(n, l, c1 * c2) - composed), 0, 1e-9);
    ++done;
  }
}

TEST(Ramanujan, Examples) {
  EXPECT_NEAR(ramanujan(1, 1), 1, 1e-15);
  EXPECT_NEAR(ramanujan(1, 4), 0, 1e-15);
  EXPECT_NEAR(ramanujan(1, 4), mobius(4), 1e-15);
  EXPECT_NEAR(ramanujan(6, 4), -2, 1e-14);
  EXPECT_NEAR(ramanujan(6, 4), ramanujan_oracle(6, 4), 1e-14);
}

TEST(Ramanujan, DivisorMobiusOracle) {
  for (i64 c = 1; c <= 120; ++c)
    for (i64 a = -30; a <= 30; ++a) {
      Real r = ramanujan(a, c);
      EXPECT_NEAR(r, std::round(r), 1e-9);
      EXPECT_NEAR(r, ramanujan_oracle(a, c), 1e-9);
    }
}

TEST(TwistIdentity, Examples) {
  EXPECT_NEAR(kloosterman_twist_identity_residual(1, 1, 1, 1, 1), 0, 1e-15);
  EXPECT_LE(kloosterman_twist_identity_residual(2, 1, 3, 2, 5), 1e-9);
  EXPECT_LE(kloosterman_twist_identity_residual(1, 3, 2, 3, 4), 1e-9);
}

TEST(TwistIdentity, RejectsNonDivisible) {
  EXPECT_THROW(kloosterman_twist_identity_residual(1, 5, 1, 1, 3), InputError);
}

TEST(TwistIdentity, RandomSuite) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<i64> cd(1, 40), md(1, 20), ld(-50, 50);
  int done = 0;
  while (done < 200) {
    i64 c = cd(rng), m = md(rng);
    if (c * m > 200) continue;
    auto divs = divisors(c * m);
    i64 n1 = divs[rng() % divs.size()];
    i64 l = ld(rng), n2 = ld(rng);
    EXPECT_LE(kloosterman_twist_identity_residual(l, n1, n2, m, c), 1e-9 * c * m);
    ++done;
  }
}

TEST(Tables, Examples) {
  auto t = multiplicative_tables(100);
  EXPECT_EQ(t.tau[1], 1);
  EXPECT_EQ(t.d3[4], 6);
  EXPECT_EQ(t.d3[4], d3_oracle(4));
  EXPECT_EQ(t.mu[6], 1);
}

TEST(Tables, AgreeWithFactorization) {
  auto t = multiplicative_tables(5000);
  for (i64 n = 1; n <= 5000; ++n) {
    EXPECT_EQ(t.mu[n], mobius(n));
    EXPECT_EQ(t.tau[n], divisor_count(n));
    EXPECT_EQ(t.d3[n], triple_divisor(n));
  }
  for (i64 n = 1; n <= 300; ++n) EXPECT_EQ(t.d3[n], d3_oracle(n));
}

TEST(Tables, CapEnforced) { EXPECT_THROW(multiplicative_tables(kSieveCap + 1), RegimeError); }

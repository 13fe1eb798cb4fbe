#pragma once

// Exact modular arithmetic: Kloosterman and Ramanujan sums, multiplicative
// function tables, and the additive-twist identity for Kloosterman sums.

#include <cstdint>
#include <numeric>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "kgl3/core.hpp"

namespace kgl3 {

using i64 = std::int64_t;
using i128 = __int128;

struct Residue {
  i64 value = 0;
  i64 modulus = 1;
};

inline i64 mod_reduce(i64 a, i64 c) {
  i64 r = a % c;
  return r < 0 ? r + c : r;
}

inline i64 gcd(i64 a, i64 b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

/// Extended Euclid. Returns g = gcd(a, b) and x, y with a x + b y = g.
inline i64 extended_gcd(i64 a, i64 b, i64& x, i64& y) {
  i64 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    i64 q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  x = old_s;
  y = old_t;
  return old_r;
}

inline Residue mod_inverse(i64 d, i64 c) {
  if (c < 1) throw InputError("mod_inverse: modulus must be positive");
  i64 a = mod_reduce(d, c);
  if (c == 1) return {0, 1};
  i64 x = 0, y = 0;
  if (extended_gcd(a, c, x, y) != 1)
    throw InputError("mod_inverse: " + std::to_string(d) + " is not invertible mod " + std::to_string(c));
  return {mod_reduce(x, c), c};
}

namespace detail {

/// Invertible residues mod c paired with their inverses.
inline std::vector<std::pair<i64, i64>> unit_group(i64 c) {
  std::vector<std::pair<i64, i64>> units;
  if (c == 1) {
    units.emplace_back(0, 0);
    return units;
  }
  for (i64 d = 1; d < c; ++d)
    if (std::gcd(d, c) == 1) units.emplace_back(d, mod_inverse(d, c).value);
  return units;
}

inline std::vector<Complex> roots_of_unity(i64 c) {
  std::vector<Complex> table(static_cast<std::size_t>(c));
  for (i64 k = 0; k < c; ++k) table[k] = e_rational(k, c);
  return table;
}

inline i64 mulmod(i64 a, i64 b, i64 c) {
  return static_cast<i64>((static_cast<i128>(a) * b) % c);
}

}  // namespace detail

/// S(n, l; c) = sum over d dbar = 1 (mod c) of e((d l + dbar n) / c).
inline Complex kloosterman(i64 n, i64 l, i64 c) {
  if (c < 1) throw InputError("kloosterman: modulus must be positive");
  const i64 nn = mod_reduce(n, c), ll = mod_reduce(l, c);
  Real re = 0, im = 0;
  for (auto [d, dbar] : detail::unit_group(c)) {
    i64 k = (detail::mulmod(d, ll, c) + detail::mulmod(dbar, nn, c)) % c;
    Complex z = e_rational(k, c);
    re += z.real();
    im += z.imag();
  }
  return {re, im};
}

struct ExactExponentialSum {
  Complex value{0, 0};
  i64 term_count = 0;
};

inline ExactExponentialSum kloosterman_sum(i64 n, i64 l, i64 c) {
  if (c < 1) throw InputError("kloosterman: modulus must be positive");
  i64 count = 0;
  for (i64 d = 0; d < c; ++d)
    if (std::gcd(d, c) == 1) ++count;
  return {kloosterman(n, l, c), count};
}

/// Element of Z[zeta_c] stored as multiplicities of each c-th root of unity.
/// Kloosterman sums in this form are exact; evaluation is the only rounding.
struct RootOfUnitySum {
  i64 modulus = 1;
  std::vector<i64> counts;

  i64 term_count() const { return std::accumulate(counts.begin(), counts.end(), i64{0}); }

  /// True when the multiset is closed under k -> -k, i.e. the value is real.
  bool conjugation_symmetric() const {
    for (i64 k = 1; k < modulus; ++k)
      if (counts[k] != counts[modulus - k]) return false;
    return true;
  }

  Complex evaluate() const {
    Real re = 0, im = 0;
    for (i64 k = 0; k < modulus; ++k) {
      if (counts[k] == 0) continue;
      Complex z = e_rational(k, modulus);
      re += counts[k] * z.real();
      im += counts[k] * z.imag();
    }
    return {re, im};
  }
};

inline RootOfUnitySum kloosterman_exact(i64 n, i64 l, i64 c) {
  if (c < 1) throw InputError("kloosterman_exact: modulus must be positive");
  RootOfUnitySum s{c, std::vector<i64>(static_cast<std::size_t>(c), 0)};
  const i64 nn = mod_reduce(n, c), ll = mod_reduce(l, c);
  for (auto [d, dbar] : detail::unit_group(c))
    ++s.counts[(detail::mulmod(d, ll, c) + detail::mulmod(dbar, nn, c)) % c];
  return s;
}

/// Ramanujan sum S(0, a; c), computed by enumeration. Always an integer.
inline Real ramanujan(i64 a, i64 c) {
  if (c < 1) throw InputError("ramanujan: modulus must be positive");
  return kloosterman(0, a, c).real();
}

/// |LHS - RHS| of the twisted-sum identity
///   sum_{d mod c, (d,c)=1} e(l d / c) S(m d, n2; M)
///     = sum_{u mod M, (u,M)=1} S(0, l + u n1; c) e(n2 ubar / M),   M = m c / n1.
inline Real kloosterman_twist_identity_residual(i64 l, i64 n1, i64 n2, i64 m, i64 c) {
  if (c < 1 || m < 1 || n1 < 1) throw InputError("twist identity: c, m, n1 must be positive");
  if ((c * m) % n1 != 0)
    throw InputError("twist identity: n1 = " + std::to_string(n1) + " does not divide c*m = " +
                     std::to_string(c * m));
  const i64 M = c * m / n1;
  Complex lhs{0, 0};
  for (auto [d, dbar] : detail::unit_group(c)) {
    (void)dbar;
    lhs += e_rational(detail::mulmod(l, d, c), c) * kloosterman(m * d, n2, M);
  }
  Complex rhs{0, 0};
  for (auto [u, ubar] : detail::unit_group(M))
    rhs += ramanujan(l + u * n1, c) * e_rational(detail::mulmod(n2, ubar, M), M);
  return std::abs(lhs - rhs);
}

/// Sieved tables of Moebius mu, divisor count tau and the triple divisor
/// function d3 = 1 * 1 * 1 on [1, N]. Index 0 is unused.
struct MultiplicativeTables {
  i64 N = 0;
  std::vector<int> mu;
  std::vector<i64> tau;
  std::vector<i64> d3;
  std::vector<std::uint32_t> smallest_prime;
};

inline constexpr i64 kSieveCap = 10'000'000;

inline MultiplicativeTables multiplicative_tables(i64 N) {
  if (N < 1) throw InputError("multiplicative_tables: N must be positive");
  if (N > kSieveCap)
    throw RegimeError("multiplicative_tables: N exceeds the sieve cap; use the per-value functions");
  MultiplicativeTables t;
  t.N = N;
  const auto size = static_cast<std::size_t>(N + 1);
  t.mu.assign(size, 0);
  t.tau.assign(size, 0);
  t.d3.assign(size, 0);
  t.smallest_prime.assign(size, 0);
  // Exponent of the smallest prime in n, for the multiplicative recurrences.
  std::vector<std::uint8_t> spf_exp(size, 0);
  std::vector<std::uint32_t> primes;
  t.mu[1] = 1;
  t.tau[1] = 1;
  t.d3[1] = 1;
  for (i64 n = 2; n <= N; ++n) {
    if (t.smallest_prime[n] == 0) {
      t.smallest_prime[n] = static_cast<std::uint32_t>(n);
      primes.push_back(static_cast<std::uint32_t>(n));
      t.mu[n] = -1;
      t.tau[n] = 2;
      t.d3[n] = 3;
      spf_exp[n] = 1;
    }
    for (std::uint32_t p : primes) {
      i64 m = n * p;
      if (p > t.smallest_prime[n] || m > N) break;
      t.smallest_prime[m] = p;
      if (p == t.smallest_prime[n]) {
        // m = n p shares the smallest prime: strip p^k from n and rebuild.
        int k = spf_exp[n] + 1;
        spf_exp[m] = static_cast<std::uint8_t>(k);
        i64 rest = n;
        for (int j = 1; j < k; ++j) rest /= p;
        t.mu[m] = 0;
        t.tau[m] = t.tau[rest] * (k + 1);
        t.d3[m] = t.d3[rest] * ((k + 1) * (k + 2) / 2);
      } else {
        spf_exp[m] = 1;
        t.mu[m] = -t.mu[n];
        t.tau[m] = t.tau[n] * 2;
        t.d3[m] = t.d3[n] * 3;
      }
    }
  }
  return t;
}

/// Prime factorisation by trial division, for values beyond the sieve.
inline std::vector<std::pair<i64, int>> factorize(i64 n) {
  if (n < 1) throw InputError("factorize: n must be positive");
  std::vector<std::pair<i64, int>> f;
  for (i64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p) continue;
    int k = 0;
    while (n % p == 0) {
      n /= p;
      ++k;
    }
    f.emplace_back(p, k);
  }
  if (n > 1) f.emplace_back(n, 1);
  return f;
}

inline i64 divisor_count(i64 n) {
  i64 r = 1;
  for (auto [p, k] : factorize(n)) r *= k + 1;
  return r;
}

inline i64 triple_divisor(i64 n) {
  i64 r = 1;
  for (auto [p, k] : factorize(n)) r *= static_cast<i64>(k + 1) * (k + 2) / 2;
  return r;
}

inline int mobius(i64 n) {
  int r = 1;
  for (auto [p, k] : factorize(n)) {
    if (k > 1) return 0;
    r = -r;
  }
  return r;
}

/// Weil's bound c^{1/2} (n, l, c)^{1/2} tau(c).
inline Real weil_bound(i64 n, i64 l, i64 c) {
  i64 g = gcd(gcd(n, l), c);
  return std::sqrt(static_cast<Real>(c)) * std::sqrt(static_cast<Real>(g)) *
         static_cast<Real>(divisor_count(c));
}

/// S(n, l; c) rebuilt from its prime-power pieces: for c = q r with (q, r) = 1,
/// S(n, l; q r) = S(n rbar^2, l; q) S(n qbar^2, l; r). Independent of the
/// direct enumeration except through kloosterman() on each q.
inline Complex kloosterman_composed(i64 n, i64 l, i64 c) {
  if (c < 1) throw InputError("kloosterman: modulus must be positive");
  Complex out{1, 0};
  for (auto [p, k] : factorize(c)) {
    i64 q = 1;
    for (int i = 0; i < k; ++i) q *= p;
    const i64 r = c / q;
    const i64 rbar = mod_inverse(r, q).value;
    const i64 twist = detail::mulmod(rbar, rbar, q);
    out *= kloosterman(detail::mulmod(mod_reduce(n, q), twist, q), l, q);
  }
  return out;
}

inline std::vector<i64> primes_up_to(i64 n) {
  std::vector<i64> ps;
  if (n < 2) return ps;
  std::vector<bool> composite(static_cast<std::size_t>(n + 1), false);
  for (i64 p = 2; p <= n; ++p) {
    if (composite[p]) continue;
    ps.push_back(p);
    for (i64 q = p * p; q <= n; q += p) composite[q] = true;
  }
  return ps;
}

inline std::vector<i64> divisors(i64 n) {
  std::vector<i64> small, large;
  for (i64 d = 1; d * d <= n; ++d) {
    if (n % d) continue;
    small.push_back(d);
    if (d * d != n) large.push_back(n / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

}  // namespace kgl3

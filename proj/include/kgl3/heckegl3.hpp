#pragma once

// GL(3) Hecke coefficients A(m, n) from Satake parameters, the d3 and
// symmetric-square forms, Dirichlet series and the double Dirichlet series
// identity.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgl3/core.hpp"
#include "kgl3/exactarith.hpp"
#include "kgl3/parallel.hpp"
#include "kgl3/special.hpp"

namespace kgl3 {

using SatakeTriple = std::array<Complex, 3>;

/// A GL(3) form given by archimedean data and local Satake parameters.
///
/// Coefficients follow A(p^a, p^b) = s_{(a+b, b, 0)}(x_1, x_2, x_3), so
/// A(p^a, 1) = h_a(x) and A(1, p^b) = h_b(1/x): the Euler factor of
/// L(s, f) = sum A(1, n) n^{-s} has the inverses of the stored triple as roots.
///
/// mu and mu_dual are the gamma shifts of L(s, f) and L(s, f~). For a form
/// with archimedean parameters (alpha, beta, gamma) they are
/// (-alpha, -beta, -gamma) and (alpha, beta, gamma).
struct GL3Form {
  std::string label;
  Complex alpha{0, 0}, beta{0, 0}, gamma{0, 0};
  GammaShifts mu{};
  GammaShifts mu_dual{};
  Complex root_number{1, 0};
  bool self_dual = false;
  bool cuspidal = true;
  std::unordered_map<i64, SatakeTriple> satake;
  std::optional<SatakeTriple> uniform_satake;
  i64 prime_cap = 0;

  const SatakeTriple& satake_at(i64 p) const {
    if (auto it = satake.find(p); it != satake.end()) return it->second;
    if (uniform_satake) return *uniform_satake;
    throw InputError("GL3Form " + label + ": no Satake data at p = " + std::to_string(p) +
                     " (prime cap " + std::to_string(prime_cap) + ")");
  }

  bool outside_lrs() const {
    for (Complex z : {alpha, beta, gamma})
      if (std::abs(z.real()) > 0.5L - 0.1L) return true;
    return false;
  }
};

/// Shifts in the (alpha, beta, gamma) shape: mu = -params, mu_dual = params.
inline void set_maass_shape(GL3Form& f, Complex alpha, Complex beta, Complex gamma) {
  f.alpha = alpha;
  f.beta = beta;
  f.gamma = gamma;
  f.mu = {-alpha, -beta, -gamma};
  f.mu_dual = {alpha, beta, gamma};
}

// ---------------------------------------------------------------------------
// Local coefficients.

/// h_0..h_kmax of three variables.
inline std::vector<Complex> complete_homogeneous(const SatakeTriple& x, int kmax) {
  const Complex e1 = x[0] + x[1] + x[2];
  const Complex e2 = x[0] * x[1] + x[0] * x[2] + x[1] * x[2];
  const Complex e3 = x[0] * x[1] * x[2];
  std::vector<Complex> h(static_cast<std::size_t>(std::max(kmax, 0) + 1), Complex(0, 0));
  h[0] = 1;
  for (int k = 1; k <= kmax; ++k) {
    h[k] = e1 * h[k - 1];
    if (k >= 2) h[k] -= e2 * h[k - 2];
    if (k >= 3) h[k] += e3 * h[k - 3];
  }
  return h;
}

/// s_{(a+b, b, 0)}(x) by Jacobi-Trudi: h_{a+b} h_b - h_{a+b+1} h_{b-1}.
inline Complex local_coefficient(const SatakeTriple& x, int a, int b) {
  if (a < 0 || b < 0) throw InputError("local_coefficient: negative exponent");
  auto h = complete_homogeneous(x, a + b + 1);
  Complex v = h[a + b] * h[b];
  if (b >= 1) v -= h[a + b + 1] * h[b - 1];
  return v;
}

namespace detail {

inline void merge_exponents(std::vector<std::pair<i64, std::array<int, 2>>>& out,
                            const std::vector<std::pair<i64, int>>& fm,
                            const std::vector<std::pair<i64, int>>& fn) {
  std::size_t i = 0, j = 0;
  while (i < fm.size() || j < fn.size()) {
    if (j == fn.size() || (i < fm.size() && fm[i].first < fn[j].first)) {
      out.push_back({fm[i].first, {fm[i].second, 0}});
      ++i;
    } else if (i == fm.size() || fn[j].first < fm[i].first) {
      out.push_back({fn[j].first, {0, fn[j].second}});
      ++j;
    } else {
      out.push_back({fm[i].first, {fm[i].second, fn[j].second}});
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

/// A(m, n) assembled multiplicatively from the local Schur values.
inline Complex coefficient(const GL3Form& f, i64 m, i64 n) {
  if (m < 1 || n < 1) throw InputError("coefficient: arguments must be positive");
  std::vector<std::pair<i64, std::array<int, 2>>> ex;
  detail::merge_exponents(ex, factorize(m), factorize(n));
  Complex v{1, 0};
  for (auto& [p, e] : ex) v *= local_coefficient(f.satake_at(p), e[0], e[1]);
  return v;
}

/// Fast repeated evaluation of A(m, n) for m, n up to a bound, using a
/// smallest-prime-factor sieve and cached h_k per prime.
class CoefficientEngine {
 public:
  CoefficientEngine(const GL3Form& form, i64 bound) : form_(form), bound_(bound) {
    if (bound < 1) throw InputError("CoefficientEngine: bound must be positive");
    spf_.assign(static_cast<std::size_t>(bound + 1), 0);
    for (i64 p = 2; p <= bound; ++p) {
      if (spf_[p]) continue;
      for (i64 q = p; q <= bound; q += p)
        if (!spf_[q]) spf_[q] = static_cast<std::uint32_t>(p);
    }
    if (form.uniform_satake && form.satake.empty()) {
      int kmax = 2;
      while ((i64{1} << kmax) <= bound) ++kmax;
      uniform_h_ = complete_homogeneous(*form.uniform_satake, 2 * kmax + 2);
    } else {
      for (i64 p = 2; p <= bound; ++p) {
        if (spf_[p] != p) continue;
        int e = 0;
        for (i64 q = 1; q <= bound / p; q *= p) ++e;
        h_.emplace(p, complete_homogeneous(form.satake_at(p), 2 * e + 2));
      }
    }
  }

  i64 bound() const { return bound_; }
  const GL3Form& form() const { return form_; }

  Complex operator()(i64 m, i64 n) const {
    if (m < 1 || n < 1 || m > bound_ || n > bound_) throw InputError("CoefficientEngine: argument out of range");
    Complex v{1, 0};
    while (m > 1 || n > 1) {
      i64 p = (m > 1 && (n == 1 || spf_[m] <= spf_[n])) ? spf_[m] : spf_[n];
      int a = 0, b = 0;
      while (m % p == 0) {
        m /= p;
        ++a;
      }
      while (n % p == 0) {
        n /= p;
        ++b;
      }
      const auto& h = uniform_h_.empty() ? h_.at(p) : uniform_h_;
      Complex local = h[a + b] * h[b];
      if (b >= 1) local -= h[a + b + 1] * h[b - 1];
      v *= local;
    }
    return v;
  }

 private:
  const GL3Form& form_;
  i64 bound_;
  std::vector<Complex> uniform_h_;
  std::vector<std::uint32_t> spf_;
  std::unordered_map<i64, std::vector<Complex>> h_;
};

/// Left minus right side of the Hecke relation
///   A(m, 1) A(m1, m2) = sum_{c1 c2 c3 = m, c1 | m1, c2 | m2} A(m1 c3 / c1, m2 c1 / c2).
inline Complex hecke_relation_residual(const GL3Form& f, i64 m, i64 m1, i64 m2) {
  Complex rhs{0, 0};
  for (i64 c1 : divisors(m)) {
    if (m1 % c1) continue;
    for (i64 c2 : divisors(m / c1)) {
      if (m2 % c2) continue;
      i64 c3 = m / (c1 * c2);
      rhs += coefficient(f, m1 * c3 / c1, m2 * c1 / c2);
    }
  }
  return coefficient(f, m, 1) * coefficient(f, m1, m2) - rhs;
}

inline GL3Form dual_form(const GL3Form& f) {
  GL3Form d = f;
  d.label = f.label + "~";
  d.alpha = -f.alpha;
  d.beta = -f.beta;
  d.gamma = -f.gamma;
  std::swap(d.mu, d.mu_dual);
  d.root_number = std::conj(f.root_number);
  auto inv = [](const SatakeTriple& x) { return SatakeTriple{Real(1) / x[0], Real(1) / x[1], Real(1) / x[2]}; };
  for (auto& [p, x] : d.satake) x = inv(x);
  if (d.uniform_satake) d.uniform_satake = inv(*d.uniform_satake);
  return d;
}

// ---------------------------------------------------------------------------
// Concrete forms.

/// Minimal parabolic Eisenstein series with L(s, f) = zeta(s)^3.
inline GL3Form build_d3_form() {
  GL3Form f;
  f.label = "d3";
  set_maass_shape(f, 0, 0, 0);
  f.self_dual = true;
  f.cuspidal = false;
  f.uniform_satake = SatakeTriple{Complex(1, 0), Complex(1, 0), Complex(1, 0)};
  return f;
}

/// Ramanujan tau(n) for 0 <= n <= N (tau(0) = 0), from
/// q prod (1 - q^n)^24 = q (sum_k (-1)^k (2k+1) q^{k(k+1)/2})^8.
inline std::vector<i128> ramanujan_tau(i64 N) {
  if (N < 1) throw InputError("ramanujan_tau: N must be positive");
  const i64 M = N - 1;  // need the product to order q^{N-1}
  std::vector<std::pair<i64, i64>> eta3;
  for (i64 k = 0;; ++k) {
    i64 e = k * (k + 1) / 2;
    if (e > M) break;
    eta3.emplace_back(e, (k % 2 ? -1 : 1) * (2 * k + 1));
  }
  std::vector<i128> power(static_cast<std::size_t>(M + 1), 0), next(power.size());
  for (auto [e, c] : eta3) power[e] = c;
  for (int step = 1; step < 8; ++step) {
    std::fill(next.begin(), next.end(), i128{0});
    for (auto [e, c] : eta3) {
      const i128* src = power.data();
      i128* dst = next.data() + e;
      const i64 len = M + 1 - e;
      for (i64 i = 0; i < len; ++i) dst[i] += src[i] * c;
    }
    std::swap(power, next);
  }
  std::vector<i128> tau(static_cast<std::size_t>(N + 1), 0);
  for (i64 n = 1; n <= N; ++n) tau[n] = power[n - 1];
  return tau;
}

inline Real to_real(i128 x) {
  bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  Real hi = static_cast<Real>(static_cast<std::uint64_t>(u >> 64)) * 18446744073709551616.0L;
  Real v = hi + static_cast<Real>(static_cast<std::uint64_t>(u));
  return neg ? -v : v;
}

inline std::string to_string(i128 x) {
  if (x == 0) return "0";
  bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

/// Symmetric-square lift of the discriminant form. Satake triple at p is
/// {alpha_p^2, 1, alpha_p^-2} with alpha_p + alpha_p^-1 = tau(p) / p^{11/2}.
/// The gamma shifts (1, 11, 12) and root number +1 are those of L(s, sym^2 Delta)
/// in the analytic normalisation; (alpha, beta, gamma) are stored as -mu.
inline GL3Form build_sym_square(i64 prime_cap) {
  if (prime_cap < 2) throw InputError("build_sym_square: prime_cap must be at least 2");
  static std::mutex cache_mutex;
  static std::map<i64, std::vector<i128>> tau_cache;
  std::vector<i128> tau;
  {
    std::lock_guard lock(cache_mutex);
    auto it = tau_cache.lower_bound(prime_cap);
    if (it == tau_cache.end()) it = tau_cache.emplace(prime_cap, ramanujan_tau(prime_cap)).first;
    tau = it->second;
  }
  GL3Form f;
  f.label = "sym2_delta";
  f.alpha = -1;
  f.beta = -11;
  f.gamma = -12;
  f.mu = {Complex(1, 0), Complex(11, 0), Complex(12, 0)};
  f.mu_dual = f.mu;
  f.root_number = 1;
  f.self_dual = true;
  f.cuspidal = true;
  f.prime_cap = prime_cap;
  for (i64 p : primes_up_to(prime_cap)) {
    Real ap = to_real(tau[p]) / std::pow(static_cast<Real>(p), Real(5.5));
    Real disc = std::max(Real(0), 4 - ap * ap);
    Complex a(ap / 2, std::sqrt(disc) / 2);
    Complex a2 = a * a;
    f.satake.emplace(p, SatakeTriple{a2, Complex(1, 0), std::conj(a2)});
  }
  return f;
}

// ---------------------------------------------------------------------------
// Gamma factors attached to a form.

enum class GammaVariant { gamma1, gamma2 };

struct GammaFactorValue {
  Complex value;
  Complex log_value;
  bool outside_lrs = false;
};

/// gamma_1(s, t) = pi^{-3s} prod_{i, +-} Gamma((s +- it + mu_i)/2); gamma_2 uses mu_dual.
inline GammaFactorValue gamma_factor_gl3(Complex s, Real t, const GL3Form& f, GammaVariant v) {
  const auto& mu = v == GammaVariant::gamma1 ? f.mu : f.mu_dual;
  Complex lg = log_gamma_factor_rs(s, t, mu);
  return {std::exp(lg), lg, f.outside_lrs()};
}

// ---------------------------------------------------------------------------
// Dirichlet series.

struct DirichletOptions {
  Real delta = 0.05L;
};

/// sum_{m <= cutoff} A(1, m) m^{-s}; the error field is the tail of the
/// d3-type envelope sum_{m > N} d3(m) m^{-sigma}, integrated against the
/// density L^2/2 + (3 gamma_E) L + 0.781 of the d3 summatory function, with a
/// safety factor 1.25.
inline TransformResult dirichlet_L(const GL3Form& f, Complex s, i64 cutoff, DirichletOptions opt = {}) {
  if (s.real() < 1 + opt.delta) throw RegimeError("dirichlet_L: Re s must exceed 1 + delta (no continuation here)");
  if (cutoff < 10) throw InputError("dirichlet_L: cutoff must be at least 10");
  CoefficientEngine A(f, cutoff);
  auto terms = parallel_map<Complex>(static_cast<std::size_t>(cutoff), [&](std::size_t i) {
    i64 m = static_cast<i64>(i) + 1;
    return A(1, m) * std::exp(-s * std::log(static_cast<Real>(m)));
  });
  TransformResult r;
  for (auto& t : terms) r.value += t;
  const Real sig = s.real(), L = std::log(static_cast<Real>(cutoff)), d = sig - 1;
  const Real c1 = 1.7316469L, c0 = 0.7809L;
  const Real rho = L * L / 2 + c1 * L + c0, rho1 = L + c1;
  r.abs_error_estimate = 1.25L * std::pow(static_cast<Real>(cutoff), -d) * (rho / d + rho1 / (d * d) + 1 / (d * d * d));
  r.evaluations = cutoff;
  return r;
}

/// sum_{m^2 n <= cutoff} A(m, n) m^{-s-1} n^{-w-1}, rows summed in order of m.
inline Complex bump_double_sum(const GL3Form& f, Complex s, Complex w, i64 cutoff) {
  if (s.real() < 1 || w.real() < 1) throw RegimeError("bump_double_sum: need Re s, Re w >= 1");
  if (cutoff < 10) throw InputError("bump_double_sum: cutoff must be at least 10");
  CoefficientEngine A(f, cutoff);
  const auto mmax = static_cast<i64>(std::floor(std::sqrt(static_cast<Real>(cutoff))));
  auto rows = parallel_map<Complex>(static_cast<std::size_t>(mmax), [&](std::size_t i) {
    const i64 m = static_cast<i64>(i) + 1;
    Complex row{0, 0};
    const i64 nmax = cutoff / (m * m);
    for (i64 n = nmax; n >= 1; --n) row += A(m, n) * std::exp(-(w + Real(1)) * std::log(static_cast<Real>(n)));
    return row * std::exp(-(s + Real(1)) * std::log(static_cast<Real>(m)));
  });
  Complex lhs{0, 0};
  for (auto& r : rows) lhs += r;
  return lhs;
}

/// |double sum - L(s+1, f~) L(w+1, f) / zeta(s+w+2)| / |RHS|.
inline Real bump_identity_residual(const GL3Form& f, Complex s, Complex w, i64 cutoff) {
  if (s.real() < 1 || w.real() < 1) throw RegimeError("bump_identity_residual: need Re s, Re w >= 1");
  Complex lhs = bump_double_sum(f, s, w, cutoff);
  GL3Form fd = dual_form(f);
  Complex rhs = dirichlet_L(fd, s + Real(1), cutoff).value * dirichlet_L(f, w + Real(1), cutoff).value /
                riemann_zeta(s + w + Real(2));
  return std::abs(lhs - rhs) / std::abs(rhs);
}

// ---------------------------------------------------------------------------

struct CoefficientBoundReport {
  i64 N = 0;
  Real square_mean = 0;            // sum_{m^2 n <= N} |A(m, n)|^2 / N
  std::vector<Real> row_means;     // index m-1: sum_{n <= N} |A(m, n)| / (N m), m <= 10
};

inline CoefficientBoundReport coefficient_bound_report(const GL3Form& f, i64 N) {
  if (N < 1) throw InputError("coefficient_bound_report: N must be positive");
  CoefficientEngine A(f, std::max<i64>(N, 10));
  CoefficientBoundReport rep;
  rep.N = N;
  Real sq = 0;
  for (i64 m = 1; m * m <= N; ++m)
    for (i64 n = 1; m * m * n <= N; ++n) sq += std::norm(A(m, n));
  rep.square_mean = sq / N;
  for (i64 m = 1; m <= 10; ++m) {
    Real s = 0;
    for (i64 n = 1; n <= N; ++n) s += std::abs(A(m, n));
    rep.row_means.push_back(s / (static_cast<Real>(N) * m));
  }
  return rep;
}

struct CoefficientTable {
  i64 bound = 0;
  std::map<std::pair<i64, i64>, Complex> values;
};

inline CoefficientTable build_coefficient_table(const GL3Form& f, i64 bound) {
  CoefficientTable t;
  t.bound = bound;
  CoefficientEngine A(f, bound);
  for (i64 m = 1; m * m <= bound; ++m)
    for (i64 n = 1; m * m * n <= bound; ++n) t.values.emplace(std::pair{m, n}, A(m, n));
  return t;
}

}  // namespace kgl3

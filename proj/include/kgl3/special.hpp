#pragma once

// Complex special functions: log-gamma, gamma-factor ratios, Riemann and
// Hurwitz zeta by Euler-Maclaurin, Bessel functions of imaginary order.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <quadmath.h>

#include "kgl3/core.hpp"
#include "kgl3/quadrature.hpp"

namespace kgl3 {

namespace detail {

// B_{2k} for k = 1..10, for the Stirling series.
inline constexpr std::array<Real, 10> kBernoulliEven = {
    1.0L / 6,     -1.0L / 30,          1.0L / 42,     -1.0L / 30,         5.0L / 66,
    -691.0L / 2730, 7.0L / 6, -3617.0L / 510, 43867.0L / 798, -174611.0L / 330};

inline bool is_pole(Complex z) {
  return z.imag() == 0 && z.real() <= 0 && z.real() == std::floor(z.real());
}

}  // namespace detail

/// log Gamma(z): recurrence up to |z| >= 20, Re z >= 0, then Stirling.
/// exp(log_gamma(z)) = Gamma(z); the imaginary part is the sum-of-logs branch.
inline Complex log_gamma(Complex z) {
  if (detail::is_pole(z)) throw RegimeError("log_gamma: pole at a nonpositive integer");
  Complex shift{0, 0};
  while (z.real() < 0 || std::abs(z) < 20) {
    shift += std::log(z);
    z += 1;
  }
  const Complex inv = Real(1) / z, inv2 = inv * inv;
  Complex series{0, 0}, power = inv;
  for (int k = 1; k <= 10; ++k) {
    series += detail::kBernoulliEven[k - 1] / Real(2 * k * (2 * k - 1)) * power;
    power *= inv2;
  }
  static const Real half_log_two_pi = std::log(kTwoPi) / 2;
  return (z - Real(0.5)) * std::log(z) - z + half_log_two_pi + series - shift;
}

inline Real log_gamma(Real x) { return log_gamma(Complex(x, 0)).real(); }

enum class GammaRegime { exact_quotient, stirling_asymptotic };

struct GammaRatio {
  Complex value;
  GammaRegime regime = GammaRegime::exact_quotient;
};

/// log gamma(u, t) with gamma(u, t) = pi^{-u} Gamma((u + it)/2) Gamma((u - it)/2).
inline Complex log_gamma_gl2(Complex u, Real t) {
  return -u * std::log(kPi) + log_gamma((u + kI * t) / Real(2)) + log_gamma((u - kI * t) / Real(2));
}

/// gamma(1/2 + u, t) / gamma(1/2, t). The asymptotic regime returns the
/// leading Stirling term (t / 2 pi)^u.
inline GammaRatio gamma_ratio_gl2(Complex u, Real t, GammaRegime regime = GammaRegime::exact_quotient) {
  if (regime == GammaRegime::stirling_asymptotic) {
    if (t <= 0) throw InputError("gamma_ratio_gl2: asymptotic regime needs t > 0");
    return {std::exp(u * std::log(t / kTwoPi)), regime};
  }
  if (u == Complex(0, 0)) return {Complex(1, 0), regime};
  const Complex half{0.5L, 0};
  return {std::exp(log_gamma_gl2(half + u, t) - log_gamma_gl2(half, t)), regime};
}

/// Gamma shifts mu_i of a degree-three L-function: the archimedean factor is
/// pi^{-3s/2} prod_i Gamma((s + mu_i)/2).
using GammaShifts = std::array<Complex, 3>;

inline Complex log_gamma_factor_degree3(Complex s, const GammaShifts& mu) {
  Complex r = -Real(1.5) * s * std::log(kPi);
  for (const auto& m : mu) r += log_gamma((s + m) / Real(2));
  return r;
}

/// log of pi^{-3s} prod_i Gamma((s - it + mu_i)/2) Gamma((s + it + mu_i)/2).
inline Complex log_gamma_factor_rs(Complex s, Real t, const GammaShifts& mu) {
  Complex r = -Real(3) * s * std::log(kPi);
  for (const auto& m : mu) r += log_gamma((s - kI * t + m) / Real(2)) + log_gamma((s + kI * t + m) / Real(2));
  return r;
}

// ---------------------------------------------------------------------------
// Zeta functions.

namespace detail {

/// B_{2k} / (2k)! for k = 0..kMax-1 (entry 0 unused).
inline const std::vector<Real>& bernoulli_over_factorial() {
  static const std::vector<Real> table = [] {
    const int kmax = 60;
    std::vector<Real> b(kmax, 0);
    for (int k = 1; k < kmax; ++k) {
      Real z;
      if (k == 1) {
        z = kPi * kPi / 6;
      } else if (k == 2) {
        z = kPi * kPi * kPi * kPi / 90;
      } else {
        const int N = 200;
        const Real p = 2 * k;
        z = 0;
        for (int n = N - 1; n >= 1; --n) z += std::pow(Real(n), -p);
        z += std::pow(Real(N), -p) / 2 + std::pow(Real(N), 1 - p) / (p - 1) + p * std::pow(Real(N), -p - 1) / 12;
      }
      Real sign = (k % 2 == 1) ? 1 : -1;
      b[k] = sign * 2 * z / std::pow(kTwoPi, Real(2 * k));
    }
    return b;
  }();
  return table;
}

}  // namespace detail

/// Hurwitz zeta sum_{k >= 0} (k + a)^{-s}, a in (0, 1], by Euler-Maclaurin.
/// The error field holds the standard remainder bound.
inline TransformResult hurwitz_zeta_em(Complex s, Real a) {
  if (!(a > 0)) throw InputError("hurwitz_zeta: a must be positive");
  if (s == Complex(1, 0)) throw RegimeError("hurwitz_zeta: pole at s = 1");
  const auto& bern = detail::bernoulli_over_factorial();
  const auto N = static_cast<std::int64_t>(std::ceil(std::abs(s) / kPi)) + 12;
  TransformResult r;
  Complex sum{0, 0};
  for (std::int64_t k = N - 1; k >= 0; --k) sum += std::exp(-s * std::log(k + a));
  const Real x = N + a, lx = std::log(x);
  const Complex xs = std::exp(-s * lx);
  sum += xs * x / (s - Real(1)) + xs / Real(2);
  // T_j = B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1}
  Complex term = bern[1] * s * xs / x;
  Real bound = 0;
  const Real eps = std::numeric_limits<Real>::epsilon() / 16;
  for (std::size_t j = 1; j + 1 < bern.size(); ++j) {
    sum += term;
    Complex next = term * (bern[j + 1] / bern[j]) * (s + Real(2 * j - 1)) * (s + Real(2 * j)) / (x * x);
    Real tail = std::abs(next) * std::abs(s + Real(2 * j + 1)) / std::max(s.real() + 2 * j + 1, Real(1e-3));
    bound = tail;
    if (tail < eps * std::abs(sum)) break;
    term = next;
  }
  r.value = sum;
  r.abs_error_estimate = bound + eps * std::abs(sum) * N;
  r.evaluations = N;
  return r;
}

inline Complex hurwitz_zeta(Complex s, Real a) { return hurwitz_zeta_em(s, a).value; }
inline Complex riemann_zeta(Complex s) { return hurwitz_zeta_em(s, 1).value; }

// ---------------------------------------------------------------------------
// Bessel functions of imaginary order.

namespace detail {

using quad = __float128;

struct QuadComplex {
  quad re = 0, im = 0;
  QuadComplex& operator+=(const QuadComplex& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend QuadComplex operator*(const QuadComplex& a, const QuadComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend QuadComplex operator*(const QuadComplex& a, quad x) { return {a.re * x, a.im * x}; }
  friend QuadComplex operator/(const QuadComplex& a, const QuadComplex& b) {
    quad d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  quad norm1() const { return (re < 0 ? -re : re) + (im < 0 ? -im : im); }
};

}  // namespace detail

/// Arguments above this cap leave the ascending series; with 113-bit
/// accumulation the cancellation of size e^z is still absorbed up to here.
inline constexpr Real kBesselSeriesCap = 40;

namespace detail {

/// sum_k (sign z^2/4)^k / (k! (nu+1)_k) times (z/2)^nu / Gamma(nu+1), in quad precision.
inline Complex bessel_ascending(Complex nu, Real z, int sign, const char* who) {
  if (!(z > 0)) throw InputError(std::string(who) + ": argument must be positive");
  if (z > kBesselSeriesCap) throw RegimeError(std::string(who) + ": argument beyond the series cap; use the integral representation");
  if (is_pole(nu + Real(1))) throw InputError(std::string(who) + ": negative integer order");
  const quad q = sign * (static_cast<quad>(z) / 2) * (static_cast<quad>(z) / 2);
  const QuadComplex nq{static_cast<quad>(nu.real()), static_cast<quad>(nu.imag())};
  QuadComplex term{1, 0}, sum{1, 0};
  quad largest = 1;
  for (int k = 1; k < 2000; ++k) {
    QuadComplex denom{(nq.re + k) * k, nq.im * k};
    term = (term * q) / denom;
    sum += term;
    quad size = term.norm1();
    if (size > largest) largest = size;
    if (k > z && size < largest * static_cast<quad>(1e-34L)) break;
  }
  const Complex pre = std::exp(nu * std::log(z / 2) - log_gamma(nu + Real(1)));
  return pre * Complex(static_cast<Real>(sum.re), static_cast<Real>(sum.im));
}

}  // namespace detail

/// J_nu(z) for z > 0 by the ascending series, accumulated in quad precision.
inline Complex bessel_j_series(Complex nu, Real z) { return detail::bessel_ascending(nu, z, -1, "bessel_j_series"); }

/// I_nu(z), same series without the alternating sign. For imaginary order the
/// terms never cancel, unlike K_{2it} which is exponentially small.
inline Complex bessel_i_series(Complex nu, Real z) { return detail::bessel_ascending(nu, z, +1, "bessel_i_series"); }

/// K_{2it}(2 pi x) = \int_0^inf exp(-2 pi x cosh u) cos(2tu) du, truncated
/// where the kernel drops below 1e-18.
inline TransformResult bessel_k_integral(Real t, Real x, Real tol = 1e-17L) {
  if (!(x > 0)) throw InputError("bessel_k_integral: x must be positive");
  const Real a = kTwoPi * x;
  const Real cutoff = std::log(Real(1e18));
  if (a > cutoff) return {};
  const Real u_max = std::acosh(cutoff / a);
  QuadratureOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-15L;
  opt.initial_panels = 1 + static_cast<int>(std::abs(t) * u_max);
  auto f = [&](Real u) { return std::exp(-a * std::cosh(u)) * std::cos(2 * t * u); };
  return integrate(f, 0, u_max, opt);
}

namespace detail {

/// The two halves \int_1^inf e^{+-i a w} cos(2t acosh w) dw / sqrt(w^2-1),
/// a = 2 pi x. Substituting w = cosh z and rotating w = 1 + e^{+-i theta} u^2
/// turns each exponential into a Gaussian-damped integrand.
struct CoshHalves {
  Complex plus, minus;
  Real err_plus = 0, err_minus = 0;
  std::int64_t evaluations = 0;
};

inline CoshHalves cosh_halves(Real t, Real x, Real tol) {
  const Real a = kTwoPi * x;
  // Keep the growth e^{2 t theta} of cos(2t acosh w) bounded.
  const Real theta = std::min(kPi / 2, 2 / std::max(std::abs(t), Real(1e-9)));
  CoshHalves out;
  for (int side = 0; side < 2; ++side) {
    const Real sgn = side == 0 ? 1 : -1;
    const Complex rot = std::polar(Real(1), sgn * theta);
    // Damping exp(-a sin(theta) u^2); growth bounded by e^{2|t| theta + pi |t|}.
    const Real rate = a * std::sin(theta);
    const Real u_max = std::sqrt((46 + 2 * std::abs(t) * theta) / rate);
    auto f = [&](Real u) {
      Complex w = Real(1) + rot * (u * u);
      Complex jac = Real(2) * rot / std::sqrt(rot * (Real(2) + rot * (u * u)));
      return std::exp(sgn * kI * a * w) * std::cos(Real(2) * t * std::acosh(w)) * jac;
    };
    QuadratureOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = 1e-16L;
    opt.initial_panels = 16 + static_cast<int>(a * u_max * u_max / kTwoPi);
    auto r = integrate(f, 0, u_max, opt);
    (side == 0 ? out.plus : out.minus) = r.value;
    (side == 0 ? out.err_plus : out.err_minus) = r.abs_error_estimate;
    out.evaluations += r.evaluations;
  }
  return out;
}

}  // namespace detail

/// J_{2it}(2 pi x) from (2/pi) \int_0^inf sin(2 pi x cosh z - i pi t) cos(2tz) dz.
inline TransformResult bessel_j_integral(Real t, Real x, Real tol = 1e-16L) {
  if (!(x > 0)) throw InputError("bessel_j_integral: x must be positive");
  auto h = detail::cosh_halves(t, x, tol);
  const Complex sin_combo = (std::exp(kPi * t) * h.plus - std::exp(-kPi * t) * h.minus) / (Real(2) * kI);
  TransformResult total;
  total.value = Real(2) / kPi * sin_combo;
  total.abs_error_estimate = 2 / kPi * (h.err_plus * std::exp(kPi * t) + h.err_minus * std::exp(-kPi * t));
  total.evaluations = h.evaluations;
  return total;
}

/// C(x, t) = \int_R cos(2 pi x cosh z) cos(2tz) dz, the kernel that remains
/// after the J_{2it} - J_{-2it} difference is taken inside the integral.
inline TransformResult cosh_cosine_integral(Real t, Real x, Real tol = 1e-16L) {
  if (!(x > 0)) throw InputError("cosh_cosine_integral: x must be positive");
  auto h = detail::cosh_halves(t, x, tol);
  TransformResult r;
  r.value = h.plus + h.minus;
  r.abs_error_estimate = h.err_plus + h.err_minus;
  r.evaluations = h.evaluations;
  return r;
}

// ---------------------------------------------------------------------------
// Quad-precision references. |J_{2it}(2 pi x)| reaches 1e12 at t = 10, so an
// absolute comparison of the two Bessel routes needs about 30 significant
// digits; the long double routines above carry 19.

using QComplex = __complex128;

namespace detail {

inline constexpr std::array<std::array<std::int64_t, 2>, 15> kBernoulliExact = {{
    {1, 6}, {-1, 30}, {1, 42}, {-1, 30}, {5, 66}, {-691, 2730}, {7, 6}, {-3617, 510},
    {43867, 798}, {-174611, 330}, {854513, 138}, {-236364091, 2730}, {8553103, 6},
    {-23749461029, 870}, {8615841276005, 14322}}};

inline quad pi_q() {
  static const quad p = acosq(static_cast<quad>(-1));
  return p;
}

inline QComplex qcomplex(quad re, quad im) {
  QComplex z;
  __real__ z = re;
  __imag__ z = im;
  return z;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n in quad.
struct QuadGaussLegendre {
  std::vector<quad> x, w;
  explicit QuadGaussLegendre(int n) {
    for (int i = 0; i < n; ++i) {
      quad z = cosq(detail::pi_q() * (i + static_cast<quad>(0.75L)) / (n + static_cast<quad>(0.5L)));
      quad dp = 0;
      for (int it = 0; it < 100; ++it) {
        quad p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          quad p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        quad dz = p1 / dp;
        z -= dz;
        if (fabsq(dz) < static_cast<quad>(1e-33L)) break;
      }
      x.push_back(z);
      w.push_back(2 / ((1 - z * z) * dp * dp));
    }
  }
};

inline const QuadGaussLegendre& gauss_legendre_32() {
  static const QuadGaussLegendre g(32);
  return g;
}

}  // namespace detail

/// log Gamma(z) in quad precision: upward recurrence to Re z >= 40, then
/// Stirling with fifteen Bernoulli terms. Principal branch, continuous in z.
inline QComplex log_gamma_quad(QComplex z) {
  using detail::quad;
  QComplex shift = detail::qcomplex(0, 0);
  while (__real__ z < 40) {
    shift += clogq(z);
    z += 1;
  }
  QComplex r = (z - static_cast<quad>(0.5L)) * clogq(z) - z + static_cast<quad>(0.5L) * logq(2 * detail::pi_q());
  QComplex zpow = z, z2 = z * z;
  for (std::size_t k = 1; k <= detail::kBernoulliExact.size(); ++k) {
    quad b = static_cast<quad>(detail::kBernoulliExact[k - 1][0]) / static_cast<quad>(detail::kBernoulliExact[k - 1][1]);
    r += b / (static_cast<quad>(2 * k) * static_cast<quad>(2 * k - 1) * zpow);
    zpow *= z2;
  }
  return r - shift;
}

/// J_{2it}(2 pi x) by the ascending series with the prefactor also in quad.
inline QComplex bessel_j_series_quad(Real t, Real x) {
  using detail::quad;
  if (!(x > 0)) throw InputError("bessel_j_series_quad: x must be positive");
  const quad z = 2 * detail::pi_q() * static_cast<quad>(x);
  const QComplex nu = detail::qcomplex(0, 2 * static_cast<quad>(t));
  const quad q = -(z / 2) * (z / 2);
  QComplex term = detail::qcomplex(1, 0), sum = term;
  quad largest = 1;
  for (int k = 1; k < 4000; ++k) {
    term = term * q / ((nu + k) * k);
    sum += term;
    quad size = cabsq(term);
    if (size > largest) largest = size;
    if (k > z && size < largest * static_cast<quad>(1e-36L)) break;
  }
  return cexpq(nu * logq(z / 2) - log_gamma_quad(nu + 1)) * sum;
}

/// J_{2it}(2 pi x) from the cosh integral representation, both rotated halves
/// integrated by composite 32-point Gauss-Legendre in quad, panels doubled
/// until the value settles to about 1e-30 relative.
inline QComplex bessel_j_integral_quad(Real t, Real x) {
  using detail::quad;
  if (!(x > 0)) throw InputError("bessel_j_integral_quad: x must be positive");
  const quad a = 2 * detail::pi_q() * static_cast<quad>(x), tq = static_cast<quad>(t);
  const quad theta = fminq(detail::pi_q() / 2, 2 / fmaxq(fabsq(tq), static_cast<quad>(1e-9L)));
  const auto& gl = detail::gauss_legendre_32();
  QComplex parts[2];
  for (int side = 0; side < 2; ++side) {
    const quad sgn = side == 0 ? 1 : -1;
    const QComplex rot = detail::qcomplex(cosq(theta), sgn * sinq(theta));
    const quad rate = a * sinq(theta);
    const quad u_max = sqrtq((84 + 2 * fabsq(tq) * theta) / rate);
    auto f = [&](quad u) {
      QComplex w = 1 + rot * (u * u);
      QComplex jac = 2 * rot / csqrtq(rot * (2 + rot * (u * u)));
      return cexpq(detail::qcomplex(0, sgn * a) * w) * ccosq(2 * tq * cacoshq(w)) * jac;
    };
    auto composite = [&](int panels) {
      QComplex acc = detail::qcomplex(0, 0);
      const quad width = u_max / panels;
      for (int p = 0; p < panels; ++p) {
        const quad mid = (p + static_cast<quad>(0.5L)) * width, half = width / 2;
        for (std::size_t i = 0; i < gl.x.size(); ++i) acc += gl.w[i] * half * f(mid + half * gl.x[i]);
      }
      return acc;
    };
    int panels = 8 + static_cast<int>(a * u_max * u_max / (2 * detail::pi_q()) + 2 * fabsq(tq) * u_max / detail::pi_q()) / 4;
    QComplex prev = composite(panels);
    for (int round = 0; round < 12; ++round) {
      panels *= 2;
      QComplex next = composite(panels);
      bool done = cabsq(next - prev) <= static_cast<quad>(1e-31L) * fmaxq(cabsq(next), static_cast<quad>(1e-300L));
      prev = next;
      if (done) break;
    }
    parts[side] = prev;
  }
  const quad ep = expq(detail::pi_q() * tq), em = expq(-detail::pi_q() * tq);
  return (2 / detail::pi_q()) * (ep * parts[0] - em * parts[1]) / detail::qcomplex(0, 2);
}

/// Absolute gap between the two quad references, rounded to long double
/// only after the subtraction.
inline Real bessel_route_gap(Real t, Real x) {
  return static_cast<Real>(cabsq(bessel_j_series_quad(t, x) - bessel_j_integral_quad(t, x)));
}

/// Round a quad complex to working precision.
inline Complex to_complex(QComplex z) { return {static_cast<Real>(__real__ z), static_cast<Real>(__imag__ z)}; }

enum class BesselKind { J, K };

/// J_{2it}(2 pi x) by the ascending series, or K_{2it}(2 pi x) by the cosh integral.
inline Complex bessel_imag_order(BesselKind kind, Real t, Real x) {
  if (!(x > 0)) throw InputError("bessel_imag_order: x must be positive");
  if (kind == BesselKind::J) return bessel_j_series(Complex(0, 2 * t), kTwoPi * x);
  return {bessel_k_integral(t, x).value.real(), 0};
}

}  // namespace kgl3

#pragma once

// Approximate functional equations: the weights G, F, U, V, central values
// of GL(2) and Rankin-Selberg L-functions, the zeta specialisation, and
// critical-line values of degree-three L-functions.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kgl3/core.hpp"
#include "kgl3/exactarith.hpp"
#include "kgl3/heckegl3.hpp"
#include "kgl3/parallel.hpp"
#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"

namespace kgl3 {

struct WeightSpec {
  int A = 16;
  Real sigma_u = 0.5L;
  Real tail_tolerance = 1e-12L;
  Real quadrature_tolerance = 1e-14L;

  void validate() const {
    if (A < 4 || A % 2) throw InputError("WeightSpec: A must be an even integer >= 4");
    if (!(sigma_u > 0)) throw InputError("WeightSpec: sigma_u must be positive");
    if (!(tail_tolerance > 0)) throw InputError("WeightSpec: tail tolerance must be positive");
  }
};

enum class WeightKind { G, F };

/// G(u) = cos(pi u / A)^{-A}, F(u) = cos(pi u / A)^{-3A}.
inline Complex weight_value(const WeightSpec& spec, WeightKind kind, Complex u) {
  Complex c = std::cos(kPi * u / Real(spec.A));
  if (std::abs(c) < 1e-12L) throw RegimeError("weight_value: too close to a pole of the cosine power");
  const int power = kind == WeightKind::G ? spec.A : 3 * spec.A;
  return std::exp(-Real(power) * std::log(c));
}

/// An even GL(2) Maass form given by its spectral parameter and normalised
/// coefficients a(1), a(2), ... An Eisenstein surrogate carries its r, which
/// switches on the polar terms of the approximate functional equation.
struct MaassFixture {
  Real t = 0;
  std::string parity = "even";
  std::string norm_convention;
  std::vector<Real> coeffs;
  std::string source;
  std::optional<Real> eisenstein_r;

  Real a(i64 n) const {
    if (n < 1 || static_cast<std::size_t>(n) > coeffs.size())
      throw InputError("MaassFixture: coefficient a(" + std::to_string(n) + ") not available (have " +
                       std::to_string(coeffs.size()) + ")");
    return coeffs[n - 1];
  }
};

/// eta(n, 1/2 + ir) = sum_{ad = n} (a/d)^{ir}; real because the terms pair up.
inline Real eta_coefficient(i64 n, Real r) {
  Real s = 0;
  for (i64 a : divisors(n)) s += std::cos(r * std::log(static_cast<Real>(a) / static_cast<Real>(n / a)));
  return s;
}

inline MaassFixture eisenstein_surrogate(Real r, i64 N) {
  MaassFixture f;
  f.t = r;
  f.norm_convention = "eisenstein eta(n, 1/2+ir)";
  f.source = "surrogate";
  f.eisenstein_r = r;
  f.coeffs.resize(static_cast<std::size_t>(N));
  for (i64 n = 1; n <= N; ++n) f.coeffs[n - 1] = eta_coefficient(n, r);
  return f;
}

// ---------------------------------------------------------------------------
// Mellin kernels.

namespace detail {

inline LineOptions kernel_line_options(const WeightSpec& spec) {
  LineOptions o;
  o.tol = spec.quadrature_tolerance;
  o.initial_step = 0.25L;
  o.max_height = 4096;
  o.min_step = 1.0L / 1024;
  return o;
}

/// Smallest y = base 2^k beyond which |K(y)| stays below tol at y, 2y, 4y.
template <class K>
Real decay_cutoff(const K& kernel, Real base, Real tol) {
  Real y = std::max(base, Real(1));
  for (int i = 0; i < 200; ++i, y *= 2)
    if (std::abs(kernel(y)) < tol && std::abs(kernel(2 * y)) < tol && std::abs(kernel(4 * y)) < tol) return y;
  throw ConvergenceError("decay_cutoff: kernel does not decay");
}

}  // namespace detail

/// Integrand of U(y, t) without y^{-u}: G(u) gamma(1/2+u, t)/gamma(1/2, t) / u.
inline Complex U_integrand(const WeightSpec& spec, Complex u, Real t) {
  const Complex half{0.5L, 0};
  const Real base = log_gamma_gl2(half, t).real();
  return weight_value(spec, WeightKind::G, u) * std::exp(log_gamma_gl2(half + u, t) - base) / u;
}

/// U(y, t) = (1/2 pi i) \int_{(sigma_u)} y^{-u} G(u) gamma(1/2+u, t)/gamma(1/2, t) du/u.
inline TransformResult U_weight_result(const WeightSpec& spec, Real y, Real t) {
  spec.validate();
  if (!(y > 0)) throw InputError("U_weight: y must be positive");
  const Real ly = std::log(y);
  auto f = [&](Complex u) { return std::exp(-u * ly) * U_integrand(spec, u, t); };
  return line_integral(f, spec.sigma_u, detail::kernel_line_options(spec));
}

inline Complex U_weight(const WeightSpec& spec, Real y, Real t) { return U_weight_result(spec, y, t).value; }

/// U(., t) for many y at once.
inline MellinNodes U_kernel(const WeightSpec& spec, Real t) {
  spec.validate();
  auto g = [&](Complex u) { return U_integrand(spec, u, t); };
  Real scale = std::max(std::abs(t) / kTwoPi, Real(1));
  return build_mellin_nodes(g, spec.sigma_u, {Real(1), scale, 4 * scale, 16 * scale}, detail::kernel_line_options(spec));
}

enum class VVariant { V1, V2 };

inline Complex V_integrand(const WeightSpec& spec, Complex u, Real t, const GL3Form& form, VVariant v) {
  const Complex half{0.5L, 0};
  const Real base = log_gamma_factor_rs(half, t, form.mu).real();
  const auto& mu = v == VVariant::V1 ? form.mu : form.mu_dual;
  return weight_value(spec, WeightKind::F, u) * std::exp(log_gamma_factor_rs(half + u, t, mu) - base) / u;
}

/// V_i(y, t) = (1/2 pi i) \int y^{-u} F(u) gamma_i(1/2+u, t)/gamma_1(1/2, t) du/u.
inline TransformResult V_weight_result(const WeightSpec& spec, Real y, Real t, const GL3Form& form, VVariant v) {
  spec.validate();
  if (!(y > 0)) throw InputError("V_weight: y must be positive");
  const Real ly = std::log(y);
  auto f = [&](Complex u) { return std::exp(-u * ly) * V_integrand(spec, u, t, form, v); };
  return line_integral(f, spec.sigma_u, detail::kernel_line_options(spec));
}

inline Complex V_weight(const WeightSpec& spec, Real y, Real t, const GL3Form& form, VVariant v) {
  return V_weight_result(spec, y, t, form, v).value;
}

inline MellinNodes V_kernel(const WeightSpec& spec, Real t, const GL3Form& form, VVariant v) {
  spec.validate();
  auto g = [&](Complex u) { return V_integrand(spec, u, t, form, v); };
  Real scale = std::max(std::pow(std::abs(t) / kTwoPi, Real(3)), Real(1));
  return build_mellin_nodes(g, spec.sigma_u, {Real(1), scale, 4 * scale, 16 * scale}, detail::kernel_line_options(spec));
}

// ---------------------------------------------------------------------------
// Central values.

/// Polar contribution -2 (R1 + R2) / gamma(1/2, r) for L(s, E) = zeta(s-ir) zeta(s+ir),
/// with R1 = Lambda_zeta(1+2ir) G(1/2+ir)/(1/2+ir) and R2 its mirror. The
/// limit r -> 0 is taken by Richardson extrapolation of the even function.
inline Real eisenstein_polar_term(const WeightSpec& spec, Real r) {
  auto at = [&](Real rr) {
    auto lambda_zeta = [](Complex s) {
      return std::exp(-s / Real(2) * std::log(kPi) + log_gamma(s / Real(2))) * riemann_zeta(s);
    };
    const Complex p1(0.5L, rr), p2(0.5L, -rr);
    Complex R1 = lambda_zeta(Complex(1, 2 * rr)) * weight_value(spec, WeightKind::G, p1) / p1;
    Complex R2 = lambda_zeta(Complex(1, -2 * rr)) * weight_value(spec, WeightKind::G, p2) / p2;
    Real gamma_half = std::exp(log_gamma_gl2(Complex(0.5L, 0), rr).real());
    return (-Real(2) * (R1 + R2)).real() / gamma_half;
  };
  if (std::abs(r) >= 1e-3L) return at(r);
  const Real h = 1e-3L;
  return (4 * at(h) - at(2 * h)) / 3;
}

/// Coefficient cutoff of the GL(2) sum: U(y, t) negligible beyond it.
inline i64 gl2_cutoff(const WeightSpec& spec, const MellinNodes& U, Real t) {
  return static_cast<i64>(std::ceil(detail::decay_cutoff(U, std::max(Real(1), std::abs(t) / kTwoPi), spec.tail_tolerance)));
}

/// L(1/2, u) = 2 sum_l a(l) l^{-1/2} U(l, t), plus the polar terms for an
/// Eisenstein surrogate.
inline Real central_value_gl2(const MaassFixture& fixture, const WeightSpec& spec) {
  spec.validate();
  const Real t = fixture.t;
  MellinNodes U = U_kernel(spec, t);
  const i64 L = gl2_cutoff(spec, U, t);
  if (static_cast<i64>(fixture.coeffs.size()) < L)
    throw InputError("central_value_gl2: fixture needs coefficients up to l = " + std::to_string(L));
  std::vector<Complex> a(static_cast<std::size_t>(L));
  for (i64 l = 1; l <= L; ++l) a[l - 1] = fixture.coeffs[l - 1] / std::sqrt(static_cast<Real>(l));
  Real value = 2 * U.dirichlet_sum(a).real();
  if (fixture.eisenstein_r) value += eisenstein_polar_term(spec, *fixture.eisenstein_r);
  return value;
}

/// |zeta(1/2 + ir)|^2 from the GL(2) approximate functional equation with
/// eta coefficients and polar corrections.
inline Real zeta_square_afe(Real r, const WeightSpec& spec = {}) {
  if (r < 0) throw InputError("zeta_square_afe: r must be nonnegative");
  MellinNodes U = U_kernel(spec, r);
  const i64 L = gl2_cutoff(spec, U, r);
  MaassFixture fx = eisenstein_surrogate(r, L);
  return central_value_gl2(fx, spec);
}

/// Euler-Maclaurin reference value |zeta(1/2 + ir)|^2.
inline Real zeta_square_oracle(Real r) { return std::norm(riemann_zeta(Complex(0.5L, r))); }

namespace detail {

/// sum over m^2 n <= Y of conj(b(n)) C(m, n) (m^2 n)^{-1/2} K(m^2 n), arranged
/// as a Dirichlet series in y = m^2 n.
template <class Coef>
Complex rs_sum(const MellinNodes& K, i64 Y, const std::function<Complex(i64)>& b, Coef&& C) {
  std::vector<Complex> a(static_cast<std::size_t>(Y), Complex(0, 0));
  for (i64 m = 1; m * m <= Y; ++m)
    for (i64 n = 1; m * m * n <= Y; ++n) {
      i64 y = m * m * n;
      a[y - 1] += std::conj(b(n)) * C(m, n) / std::sqrt(static_cast<Real>(y));
    }
  return K.dirichlet_sum(a);
}

}  // namespace detail

struct RsCutoff {
  i64 Y1 = 0, Y2 = 0;
};

inline RsCutoff rs_cutoffs(const WeightSpec& spec, const MellinNodes& V1, const MellinNodes& V2, Real t) {
  Real base = std::max(Real(1), std::pow(std::abs(t) / kTwoPi, Real(3)));
  return {static_cast<i64>(std::ceil(detail::decay_cutoff(V1, base, spec.tail_tolerance))),
          static_cast<i64>(std::ceil(detail::decay_cutoff(V2, base, spec.tail_tolerance)))};
}

/// L(1/2, f x u) from the two double sums with V_1 and V_2.
inline Complex central_value_rs(const GL3Form& form, const MaassFixture& fixture, const WeightSpec& spec) {
  spec.validate();
  const Real t = fixture.t;
  MellinNodes V1 = V_kernel(spec, t, form, VVariant::V1);
  MellinNodes V2 = V_kernel(spec, t, form, VVariant::V2);
  RsCutoff cut = rs_cutoffs(spec, V1, V2, t);
  const i64 Y = std::max(cut.Y1, cut.Y2);
  if (static_cast<i64>(fixture.coeffs.size()) < Y)
    throw InputError("central_value_rs: fixture needs coefficients up to m^2 n = " + std::to_string(Y));
  CoefficientEngine A(form, Y);
  std::function<Complex(i64)> b = [&](i64 n) { return Complex(fixture.coeffs[n - 1], 0); };
  Complex s1 = detail::rs_sum(V1, cut.Y1, b, [&](i64 m, i64 n) { return A(m, n); });
  Complex s2 = detail::rs_sum(V2, cut.Y2, b, [&](i64 m, i64 n) { return A(n, m); });
  return s1 + s2;
}

/// The same double sums with a_j(n) replaced by eta(n, 1/2 + ir).
inline Complex central_value_rs_eisenstein(const GL3Form& form, Real r, const WeightSpec& spec = {}) {
  if (!form.cuspidal) throw InputError("central_value_rs_eisenstein: form " + form.label + " is not cuspidal (polar L-function)");
  MellinNodes V1 = V_kernel(spec, r, form, VVariant::V1);
  MellinNodes V2 = V_kernel(spec, r, form, VVariant::V2);
  RsCutoff cut = rs_cutoffs(spec, V1, V2, r);
  const i64 Y = std::max(cut.Y1, cut.Y2);
  CoefficientEngine A(form, Y);
  std::vector<Real> eta(static_cast<std::size_t>(Y));
  for (i64 n = 1; n <= Y; ++n) eta[n - 1] = eta_coefficient(n, r);
  std::function<Complex(i64)> b = [&](i64 n) { return Complex(eta[n - 1], 0); };
  Complex s1 = detail::rs_sum(V1, cut.Y1, b, [&](i64 m, i64 n) { return A(m, n); });
  Complex s2 = detail::rs_sum(V2, cut.Y2, b, [&](i64 m, i64 n) { return A(n, m); });
  return s1 + s2;
}

// ---------------------------------------------------------------------------
// Degree-three L-functions.

/// W(y) = (1/2 pi i) \int y^{-u} G_A(u) Gamma_mu(s+u)/Gamma_mu(s) du/u for
/// Gamma_mu(s) = pi^{-3s/2} prod Gamma((s + mu_i)/2).
inline MellinNodes degree3_kernel(const WeightSpec& spec, Complex s, const GammaShifts& mu, Real sigma) {
  const Complex base = log_gamma_factor_degree3(s, mu);
  auto g = [&](Complex u) {
    return weight_value(spec, WeightKind::G, u) * std::exp(log_gamma_factor_degree3(s + u, mu) - base) / u;
  };
  Real scale = 1;
  for (const auto& m : mu) scale *= std::max(Real(1), std::abs(s + m) / kTwoPi);
  scale = std::sqrt(scale);
  return build_mellin_nodes(g, sigma, {Real(1), scale, 4 * scale, 16 * scale}, detail::kernel_line_options(spec));
}

struct CriticalValue {
  Complex value;
  i64 cutoff_primary = 0;
  i64 cutoff_dual = 0;
};

/// A(1, n) and A(n, 1) for n <= N, shared across repeated evaluations.
struct Degree3Coefficients {
  std::vector<Complex> primary, dual;

  static Degree3Coefficients build(const GL3Form& form, i64 N) {
    if (N < 1) throw InputError("Degree3Coefficients: N must be positive");
    CoefficientEngine A(form, std::max(N, i64{2}));
    Degree3Coefficients c;
    c.primary.resize(static_cast<std::size_t>(N));
    c.dual.resize(static_cast<std::size_t>(N));
    for (i64 n = 1; n <= N; ++n) {
      c.primary[n - 1] = A(1, n);
      c.dual[n - 1] = A(n, 1);
    }
    return c;
  }
  i64 size() const { return static_cast<i64>(primary.size()); }
};

namespace detail {

struct Degree3Kernels {
  MellinNodes W, Wd;
  i64 N1 = 0, N2 = 0;
};

inline Degree3Kernels degree3_kernels(const GL3Form& form, Complex s, const WeightSpec& spec, Real sigma) {
  spec.validate();
  if (!form.cuspidal) throw InputError("degree3_afe: form " + form.label + " has a polar L-function");
  Degree3Kernels k;
  k.W = degree3_kernel(spec, s, form.mu, sigma);
  k.Wd = degree3_kernel(spec, Real(1) - s, form.mu_dual, sigma);
  Real base = 1;
  for (const auto& m : form.mu) base *= std::max(Real(1), std::abs(s + m) / kTwoPi);
  base = std::sqrt(base);
  k.N1 = static_cast<i64>(std::ceil(decay_cutoff(k.W, base, spec.tail_tolerance)));
  k.N2 = static_cast<i64>(std::ceil(decay_cutoff(k.Wd, base, spec.tail_tolerance)));
  return k;
}

}  // namespace detail

/// Largest coefficient index the approximate functional equation needs at s.
inline i64 degree3_afe_length(const GL3Form& form, Complex s, const WeightSpec& spec = {}, Real sigma = 1) {
  auto k = detail::degree3_kernels(form, s, spec, sigma);
  return std::max(k.N1, k.N2);
}

namespace detail {

/// L(s, f) = sum A(1, n) n^{-s} W_s(n) + eps Gamma~(1-s)/Gamma(s) sum A(n, 1) n^{s-1} W~_{1-s}(n).
inline CriticalValue degree3_afe_sum(const GL3Form& form, Complex s, const Degree3Kernels& k, const Degree3Coefficients& coef,
                                     bool fast = false) {
  if (coef.size() < std::max(k.N1, k.N2))
    throw InputError("degree3_afe: coefficient table stops at n = " + std::to_string(coef.size()) + ", need " +
                     std::to_string(std::max(k.N1, k.N2)));
  std::vector<Complex> a1(static_cast<std::size_t>(k.N1)), a2(static_cast<std::size_t>(k.N2));
  for (i64 n = 1; n <= k.N1; ++n) a1[n - 1] = coef.primary[n - 1] * std::exp(-s * std::log(static_cast<Real>(n)));
  for (i64 n = 1; n <= k.N2; ++n) a2[n - 1] = coef.dual[n - 1] * std::exp((s - Real(1)) * std::log(static_cast<Real>(n)));
  const Complex ratio = std::exp(log_gamma_factor_degree3(Real(1) - s, form.mu_dual) - log_gamma_factor_degree3(s, form.mu));
  auto sum = [&](const MellinNodes& K, const std::vector<Complex>& a) { return fast ? K.dirichlet_sum_fast(a) : K.dirichlet_sum(a); };
  Complex value = sum(k.W, a1) + form.root_number * ratio * sum(k.Wd, a2);
  return {value, k.N1, k.N2};
}

}  // namespace detail

/// Same, with the coefficients taken from a prebuilt table (repeated
/// evaluations along a line).
inline CriticalValue degree3_afe(const GL3Form& form, Complex s, const Degree3Coefficients& coef, const WeightSpec& spec = {},
                                 Real sigma = 1) {
  return detail::degree3_afe_sum(form, s, detail::degree3_kernels(form, s, spec, sigma), coef);
}

/// Valid for any s once f has no poles; used on Re s = 1/2 and at s = 1.
inline CriticalValue degree3_afe(const GL3Form& form, Complex s, const WeightSpec& spec = {}, Real sigma = 1) {
  auto k = detail::degree3_kernels(form, s, spec, sigma);
  return detail::degree3_afe_sum(form, s, k, Degree3Coefficients::build(form, std::max(k.N1, k.N2)));
}

/// L(s, f) on the critical line.
inline Complex gl3_critical_value(const GL3Form& form, Complex s, const WeightSpec& spec = {}) {
  if (std::abs(s.real() - 0.5L) > 1e-12L) throw InputError("gl3_critical_value: Re s must be 1/2");
  return degree3_afe(form, s, spec).value;
}

}  // namespace kgl3

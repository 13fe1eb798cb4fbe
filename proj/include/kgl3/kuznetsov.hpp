#pragma once

// The GL(2) Kuznetsov formula for SL(2, Z), even forms: spectral weights,
// the Bessel transforms H^+ and H^-, both sides of the formula, and the
// theorem-specific weights H_1, H_2 and their Bessel transforms.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kgl3/afe.hpp"
#include "kgl3/core.hpp"
#include "kgl3/exactarith.hpp"
#include "kgl3/heckegl3.hpp"
#include "kgl3/parallel.hpp"
#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"

namespace kgl3 {

/// Even test function h, holomorphic in |Im t| <= sigma, with |h(t)| <<
/// (1 + |t|)^{-theta}. Beyond t_max it is treated as zero.
struct TestFunctionH {
  std::function<Complex(Complex)> eval;
  Real sigma = 1;
  Real theta = 3;
  Real t_max = 0;
  bool is_zero = false;

  Complex operator()(Complex t) const { return is_zero ? Complex(0, 0) : eval(t); }
  Complex operator()(Real t) const { return (*this)(Complex(t, 0)); }

  /// Checks the declared strip and decay, evenness at sample points, and that
  /// h(t)(1+|t|)^theta does not grow past t_max.
  void validate() const {
    if (is_zero) return;
    if (!(sigma > 0.5L)) throw InputError("TestFunctionH: holomorphy strip must exceed 1/2");
    if (!(theta > 2)) throw InputError("TestFunctionH: decay exponent must exceed 2");
    if (!(t_max > 0)) throw InputError("TestFunctionH: t_max must be positive");
    Real inside = 0;
    for (int k = 0; k <= 64; ++k) {
      const Real t = t_max * k / 64;
      const Complex a = (*this)(t), b = (*this)(-t);
      if (std::abs(a - b) > 1e-12L * std::max(std::abs(a), Real(1e-300)) + 1e-300L)
        throw InputError("TestFunctionH: h is not even at t = " + std::to_string(static_cast<double>(t)));
      inside = std::max(inside, std::abs(a) * std::pow(1 + t, theta));
    }
    for (int k = 1; k <= 16; ++k) {
      const Real t = t_max * (1 + Real(k) / 4);
      if (std::abs((*this)(t)) * std::pow(1 + t, theta) > 2 * inside)
        throw InputError("TestFunctionH: decay envelope violated beyond t_max");
    }
  }
};

inline TestFunctionH zero_test_function() {
  TestFunctionH h;
  h.is_zero = true;
  h.t_max = 1;
  return h;
}

/// e^{-t^2/T^2}: entire, so any strip works. Cut where it drops below e^{-46}.
inline TestFunctionH gaussian_test_function(Real T) {
  if (!(T > 0)) throw InputError("gaussian_test_function: T must be positive");
  TestFunctionH h;
  h.eval = [T](Complex t) { return std::exp(-(t * t) / (T * T)); };
  h.sigma = 8;
  h.theta = 4;
  h.t_max = T * std::sqrt(Real(46));
  return h;
}

/// h(t / T).
inline TestFunctionH rescaled(const TestFunctionH& h, Real T) {
  if (!(T > 0)) throw InputError("rescaled: T must be positive");
  TestFunctionH g = h;
  if (h.is_zero) return g;
  g.eval = [h, T](Complex t) { return h(t / T); };
  g.sigma = h.sigma * T;
  g.t_max = h.t_max * T;
  return g;
}

// ---------------------------------------------------------------------------
// Spectral weights.

/// H = (1/pi) \int h(t) tanh(pi t) t dt, on [0, t_max] doubled by evenness.
inline Real H_delta_weight(const TestFunctionH& h) {
  if (h.is_zero) return 0;
  h.validate();
  auto f = [&](Real t) { return (h(t) * std::tanh(kPi * t) * t).real(); };
  QuadratureOptions opt;
  opt.abs_tol = 1e-18L;
  opt.rel_tol = 1e-15L;
  opt.initial_panels = 8 + static_cast<int>(h.t_max);
  auto r = integrate(f, 0, h.t_max, opt);
  const Real edge = std::abs(h(h.t_max)) * h.t_max * h.t_max;
  if (!std::isfinite(r.value.real()) || edge > 1e-8L * std::max(std::abs(r.value), Real(1)))
    throw ConvergenceError("H_delta_weight: h(t) t^2 not negligible at t_max; integral may diverge");
  return 2 / kPi * r.value.real();
}

/// omega(r) = 4 pi |pi^{1/2+ir} / (Gamma(1/2+ir) zeta(1+2ir))|^2 / cosh(pi r).
/// The pole of zeta at r = 0 makes the limit 0.
inline Real omega_weight(Real r) {
  if (r == 0) return 0;
  const Complex s(0.5L, r);
  const Real log_abs = std::log(kPi) / 2 - log_gamma(s).real() - std::log(std::abs(riemann_zeta(Complex(1, 2 * r))));
  const Real log_cosh = std::abs(kPi * r) + std::log1p(std::exp(-2 * std::abs(kPi * r))) - std::log(Real(2));
  return 4 * kPi * std::exp(2 * log_abs - log_cosh);
}

// ---------------------------------------------------------------------------
// Bessel transforms.

enum class BesselSign { plus, minus };

struct BesselTransformOptions {
  // Trapezoid step in t. The integrands are analytic in |Im t| < 1/2, so the
  // error is about e^{-pi / step}.
  Real step = 1.0L / 16;
};

namespace detail {

inline std::vector<Real> t_nodes(Real t_max, Real step) {
  std::vector<Real> t;
  for (i64 k = 1; k * step <= t_max; ++k) t.push_back(static_cast<Real>(k) * step);
  return t;
}

/// 2i B_{2it}(2 pi x) t / cosh(pi t) summed with its mirror at -t; B = J or I.
/// Using B_{-2it}(z) = conj B_{2it}(z) and evenness of h this is
/// -4 Im B_{2it}(2 pi x) t / cosh(pi t) times h(t).
///
/// For I the imaginary part is -K_{2it} sinh(2 pi t) / pi, tiny against
/// |I| ~ e^z. Once x >= t that cancellation costs more than the absolute
/// error of the K integral, so those nodes use (8/pi) K_{2it}(2 pi x)
/// sinh(pi t) t directly.
inline Real bessel_pair_kernel(BesselSign sign, Real t, Real x) {
  const Complex nu(0, 2 * t);
  if (sign == BesselSign::minus && x >= t)
    return 8 / kPi * bessel_k_integral(t, x).value.real() * std::sinh(kPi * t) * t;
  const Complex b = sign == BesselSign::plus ? bessel_j_series(nu, kTwoPi * x) : bessel_i_series(nu, kTwoPi * x);
  return -4 * b.imag() * t / std::cosh(kPi * t);
}

}  // namespace detail

/// H^+(x) = 2i \int J_{2it}(2 pi x) h(t) t / cosh(pi t) dt and
/// H^-(x) = (4/pi) \int K_{2it}(2 pi x) sinh(pi t) h(t) t dt. The second is
/// computed as 2i \int I_{2it}(2 pi x) h(t) t / cosh(pi t) dt, which follows
/// from K_nu = pi (I_{-nu} - I_nu) / (2 sin nu pi) and evenness of h; the K
/// form loses all relative accuracy once K_{2it} ~ e^{-pi t} is small. Nodes
/// with t <= x keep the K form (see bessel_pair_kernel).
inline Complex bessel_transform(const TestFunctionH& h, BesselSign sign, Real x, const BesselTransformOptions& opt = {}) {
  if (!(x > 0)) throw InputError("bessel_transform: x must be positive");
  if (h.is_zero) return {0, 0};
  Complex sum{0, 0};
  for (Real t : detail::t_nodes(h.t_max, opt.step)) sum += detail::bessel_pair_kernel(sign, t, x) * h(t);
  return sum * opt.step;
}

/// H^+(x) by the cosh-integral route: the difference J_{2it} - J_{-2it}
/// becomes -(2i/pi) sinh(pi t) C(x, t) with C(x, t) = \int_R cos(2 pi x cosh z)
/// cos(2tz) dz, so H^+(x) = (2/pi) \int tanh(pi t) h(t) t C(x, t) dt.
inline Complex bessel_transform_plus_integral_route(const TestFunctionH& h, Real x, const BesselTransformOptions& opt = {}) {
  if (!(x > 0)) throw InputError("bessel_transform_plus_integral_route: x must be positive");
  if (h.is_zero) return {0, 0};
  Complex sum{0, 0};
  for (Real t : detail::t_nodes(h.t_max, opt.step))
    sum += std::tanh(kPi * t) * t * cosh_cosine_integral(t, x).value * h(t);
  // Nodes at +-t both counted.
  return 2 * (2 / kPi) * sum * opt.step;
}

/// H^-(x) straight from the K-Bessel definition. Good only while h is
/// negligible before K_{2it}(2 pi x) falls under the quadrature tolerance.
inline Complex bessel_transform_minus_k_route(const TestFunctionH& h, Real x, const BesselTransformOptions& opt = {}) {
  if (!(x > 0)) throw InputError("bessel_transform_minus_k_route: x must be positive");
  if (h.is_zero) return {0, 0};
  Complex sum{0, 0};
  for (Real t : detail::t_nodes(h.t_max, opt.step))
    sum += bessel_imag_order(BesselKind::K, t, x).real() * std::sinh(kPi * t) * t * h(t);
  return 2 * (4 / kPi) * sum * opt.step;
}

/// H^+(x) with the t line moved to Im t = -sigma, where J_{2iy+2 sigma}(2 pi x)
/// carries the factor x^{2 sigma}. The poles of 1/cosh(pi t) at
/// t = -i(k + 1/2), k + 1/2 < sigma, are crossed and their residues
/// 2 (-1)^k 2i J_{2k+1}(2 pi x) h(t_k) t_k are added back.
inline Complex bessel_transform_plus_shifted(const TestFunctionH& h, Real x, Real sigma = 2,
                                             const BesselTransformOptions& opt = {}) {
  if (!(x > 0)) throw InputError("bessel_transform_plus_shifted: x must be positive");
  if (!(sigma > 0)) throw InputError("bessel_transform_plus_shifted: sigma must be positive");
  if (h.is_zero) return {0, 0};
  if (sigma > h.sigma) throw InputError("bessel_transform_plus_shifted: sigma exceeds the holomorphy strip of h");
  const Real frac = sigma - std::floor(sigma);
  if (std::abs(frac - 0.5L) < 1e-6L) throw RegimeError("bessel_transform_plus_shifted: line passes through a pole of 1/cosh");
  const Real z = kTwoPi * x;
  auto G = [&](Complex t) { return Real(2) * kI * bessel_j_series(Real(2) * kI * t, z) * h(t) * t; };
  // The nearest pole sits |frac - 1/2| off the line; keep e^{-2 pi d / step} tiny.
  const Real step = std::min(opt.step, std::abs(frac - 0.5L) / 6);
  Complex line{0, 0};
  const i64 K = static_cast<i64>(std::ceil(h.t_max / step));
  for (i64 k = -K; k <= K; ++k) {
    const Complex t(static_cast<Real>(k) * step, -sigma);
    line += G(t) / std::cosh(kPi * t);
  }
  line *= step;
  Complex residues{0, 0};
  for (int k = 0; k + 0.5L < sigma; ++k) {
    const Complex tk(0, -(k + 0.5L));
    residues += Real(k % 2 ? -2 : 2) * G(tk);
  }
  return line + residues;
}

// ---------------------------------------------------------------------------
// The two sides.

struct GeometricSide {
  Complex delta_term{0, 0};
  Complex kloosterman_term{0, 0};
  Real tail_estimate = 0;
  i64 c_max = 0;
  Complex value() const { return delta_term + kloosterman_term; }
};

/// (1/2) delta(n, l) H + sum_{c <= c_max} (1/2c) [S(n, l; c) H^+(2 sqrt(nl)/c)
/// + S(-n, l; c) H^-(2 sqrt(nl)/c)]. For small x both transforms are
/// O(x) (the pole of 1/cosh at t = -i/2 gives 2 J_1(2 pi x) h(i/2)), so the
/// tail is estimated from the Weil bound and |H^+-(x)|/x fitted at the last c.
inline GeometricSide geometric_side(i64 n, i64 l, const TestFunctionH& h, i64 c_max, const BesselTransformOptions& opt = {}) {
  if (n < 1 || l < 1) throw InputError("geometric_side: n and l must be positive");
  if (c_max < 1) throw InputError("geometric_side: c_max must be at least 1");
  GeometricSide g;
  g.c_max = c_max;
  if (h.is_zero) return g;
  h.validate();
  if (n == l) g.delta_term = H_delta_weight(h) / 2;
  const Real root = std::sqrt(static_cast<Real>(n) * static_cast<Real>(l));
  struct Term {
    Complex value;
    Real plus, minus;
  };
  auto terms = parallel_map<Term>(static_cast<std::size_t>(c_max), [&](std::size_t i) {
    const i64 c = static_cast<i64>(i) + 1;
    const Real x = 2 * root / static_cast<Real>(c);
    const Complex hp = bessel_transform(h, BesselSign::plus, x, opt);
    const Complex hm = bessel_transform(h, BesselSign::minus, x, opt);
    const Complex v = (kloosterman(n, l, c) * hp + kloosterman(-n, l, c) * hm) / (2 * static_cast<Real>(c));
    return Term{v, std::abs(hp), std::abs(hm)};
  });
  for (const auto& t : terms) g.kloosterman_term += t.value;
  Real slope = 0;
  for (i64 c = std::max<i64>(1, c_max - 1); c <= c_max; ++c) {
    const Real x = 2 * root / static_cast<Real>(c);
    slope = std::max(slope, std::max(terms[c - 1].plus, terms[c - 1].minus) / x);
  }
  // sum_{c > C} tau(c) c^{-3/2} <= 2 (log C + 2 gamma + 2) / sqrt(C), then a factor 2 of slack on the slope.
  const Real C = static_cast<Real>(c_max);
  const Real tau_sum = 2 * (std::log(C) + 2 * 0.5772156649015329L + 2) / std::sqrt(C);
  const Real g_nl = std::sqrt(static_cast<Real>(gcd(n, l)));
  g.tail_estimate = 2 * (2 * slope) * root * g_nl * tau_sum;
  return g;
}

/// (1/4 pi) \int_{-r_max}^{r_max} h(r) omega(r) eta(n, 1/2+ir) eta(l, 1/2+ir) dr.
/// eta is real on the line; omega(r)/(4 pi) = 1/|zeta(1+2ir)|^2 is the form used.
inline TransformResult continuous_side(i64 n, i64 l, const TestFunctionH& h, Real r_max) {
  if (n < 1 || l < 1) throw InputError("continuous_side: n and l must be positive");
  if (!(r_max > 0)) throw InputError("continuous_side: r_max must be positive");
  if (h.is_zero) return {};
  auto f = [&](Real r) {
    if (r == 0) return Complex(0, 0);
    return h(r) * (omega_weight(r) / (4 * kPi)) * eta_coefficient(n, r) * eta_coefficient(l, r);
  };
  QuadratureOptions opt;
  opt.abs_tol = 1e-16L;
  opt.rel_tol = 1e-13L;
  const Real freq = 1 + std::log(static_cast<Real>(n) * static_cast<Real>(l));
  opt.initial_panels = 8 + static_cast<int>(r_max * freq);
  auto r = integrate(f, 0, r_max, opt);
  r.value *= 2;
  r.abs_error_estimate *= 2;
  // The part of h beyond r_max, with |eta| <= tau and omega/(4 pi) <= 1/|zeta|^2 <~ 1.
  r.abs_error_estimate += std::abs(h(r_max)) * static_cast<Real>(divisor_count(n) * divisor_count(l));
  return r;
}

struct KuznetsovTruncation {
  i64 c_max = 0;
  Real r_max = 0;
  std::size_t spectral_count = 0;
};

struct KuznetsovReport {
  Complex delta_term{0, 0};
  Complex kloosterman_term{0, 0};
  Complex continuous_term{0, 0};
  std::optional<Complex> discrete_term;
  Complex residual{0, 0};
  Real tail_estimate = 0;
  Real continuous_error = 0;
  KuznetsovTruncation truncations;
  std::vector<std::string> norm_conventions;

  Complex geometric() const { return delta_term + kloosterman_term; }
  /// The estimate covering everything not summed: c-tail, continuous quadrature.
  Real error_estimate() const { return tail_estimate + continuous_error; }
};

/// geometric - continuous - sum_j h(t_j) conj(a_j(n)) a_j(l). Fixture
/// coefficients are used as declared; their normalisation is recorded, not
/// corrected.
inline KuznetsovReport kuznetsov_residual(i64 n, i64 l, const TestFunctionH& h, const std::vector<MaassFixture>& fixtures,
                                          i64 c_max, Real r_max, const BesselTransformOptions& opt = {}) {
  KuznetsovReport rep;
  Complex discrete{0, 0};
  for (std::size_t j = 0; j < fixtures.size(); ++j) {
    const auto& f = fixtures[j];
    if (f.parity != "even")
      throw InputError("kuznetsov_residual: fixture " + std::to_string(j) + " is not even; the formula sums even forms only");
    if (f.eisenstein_r) throw InputError("kuznetsov_residual: Eisenstein surrogates belong to the continuous side");
    discrete += h(f.t) * f.a(n) * f.a(l);
    rep.norm_conventions.push_back(f.norm_convention);
  }
  auto geo = geometric_side(n, l, h, c_max, opt);
  auto cont = continuous_side(n, l, h, r_max);
  rep.delta_term = geo.delta_term;
  rep.kloosterman_term = geo.kloosterman_term;
  rep.tail_estimate = geo.tail_estimate;
  rep.continuous_term = cont.value;
  rep.continuous_error = cont.abs_error_estimate;
  if (!fixtures.empty()) rep.discrete_term = discrete;
  rep.residual = rep.delta_term + rep.kloosterman_term - rep.continuous_term - discrete;
  rep.truncations = {c_max, r_max, fixtures.size()};
  return rep;
}

// ---------------------------------------------------------------------------
// Theorem weights.

enum class TheoremVariant { H1, H2, H1plus, H1minus, H2plus, H2minus };

struct TheoremWeightOptions {
  WeightSpec spec;
  // Trapezoid step in t; halving it is the refinement test.
  Real step = 0.125L;
  // Gaussian cut: e^{-t^2/T^2} dropped below e^{-gaussian_exponent}.
  Real gaussian_exponent = 46;
};

/// U(., t), V_1(., t), V_2(., t) as Mellin kernels, one set per t node. Nodes
/// are added before any parallel phase and only read afterwards.
class SpectralWeightCache {
 public:
  SpectralWeightCache(const GL3Form& form, const WeightSpec& spec) : form_(form), spec_(spec) { spec_.validate(); }

  void ensure(const std::vector<Real>& ts) {
    std::vector<Real> missing;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (Real t : ts)
        if (!entries_.count(t)) missing.push_back(t);
    }
    if (missing.empty()) return;
    const bool self_dual = form_.mu == form_.mu_dual;
    auto built = parallel_map<Entry>(missing.size(), [&](std::size_t i) {
      Entry e;
      e.U = U_kernel(spec_, missing[i]);
      e.V1 = V_kernel(spec_, missing[i], form_, VVariant::V1);
      e.V2 = self_dual ? e.V1 : V_kernel(spec_, missing[i], form_, VVariant::V2);
      return e;
    });
    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) entries_.emplace(missing[i], std::move(built[i]));
  }

  Complex U(Real y, Real t) const { return entry(t).U(y); }
  const MellinNodes& U_nodes(Real t) const { return entry(t).U; }
  const MellinNodes& V_nodes(Real t, VVariant v) const { return v == VVariant::V1 ? entry(t).V1 : entry(t).V2; }
  Complex V(Real y, Real t, VVariant v) const { return v == VVariant::V1 ? entry(t).V1(y) : entry(t).V2(y); }
  std::size_t size() const { return entries_.size(); }
  const GL3Form& form() const { return form_; }
  const WeightSpec& spec() const { return spec_; }

 private:
  struct Entry {
    MellinNodes U, V1, V2;
  };
  const Entry& entry(Real t) const {
    auto it = entries_.find(t);
    if (it == entries_.end()) throw InputError("SpectralWeightCache: t node not populated");
    return it->second;
  }
  GL3Form form_;
  WeightSpec spec_;
  std::map<Real, Entry> entries_;
  mutable std::mutex mu_;
};

inline std::vector<Real> theorem_t_nodes(Real T, const TheoremWeightOptions& opt) {
  const Real t_max = T * std::sqrt(opt.gaussian_exponent);
  // Small T still gets a resolved grid.
  const Real step = std::min(opt.step, t_max / 32);
  return detail::t_nodes(t_max, step);
}

/// H_1 = (1/pi) \int e^{-t^2/T^2} U(n, t) V_1(m^2 n, t) tanh(pi t) t dt, H_2
/// with V_2, and the Bessel transforms H_i^+-(x) of e^{-t^2/T^2} U(l, t)
/// V_i(m^2 n, t). The integrands are even in t; the trapezoid runs over t > 0
/// and the t = 0 node vanishes.
inline Complex theorem_weights(Real T, i64 l, i64 n, i64 m, SpectralWeightCache& cache, TheoremVariant variant,
                               std::optional<Real> x = std::nullopt, const TheoremWeightOptions& opt = {}) {
  if (!(T > 0)) throw InputError("theorem_weights: T must be positive");
  if (l < 1 || n < 1 || m < 1) throw InputError("theorem_weights: l, n, m must be positive");
  const bool transform = variant != TheoremVariant::H1 && variant != TheoremVariant::H2;
  if (transform && !(x && *x > 0)) throw InputError("theorem_weights: the +- variants need x > 0");
  const VVariant v = (variant == TheoremVariant::H1 || variant == TheoremVariant::H1plus || variant == TheoremVariant::H1minus)
                         ? VVariant::V1
                         : VVariant::V2;
  const auto ts = theorem_t_nodes(T, opt);
  if (ts.empty()) return {0, 0};
  const Real step = ts.front();
  cache.ensure(ts);
  const Real yu = static_cast<Real>(transform ? l : n);
  const Real yv = static_cast<Real>(m) * static_cast<Real>(m) * static_cast<Real>(n);
  Complex sum{0, 0};
  for (Real t : ts) {
    const Complex h = std::exp(-(t * t) / (T * T)) * cache.U(yu, t) * cache.V(yv, t, v);
    if (!transform) {
      sum += h * std::tanh(kPi * t) * t;
    } else {
      const bool plus = variant == TheoremVariant::H1plus || variant == TheoremVariant::H2plus;
      sum += detail::bessel_pair_kernel(plus ? BesselSign::plus : BesselSign::minus, t, *x) * h;
    }
  }
  return transform ? sum * step : 2 / kPi * sum * step;
}

/// Same, building a throwaway cache.
inline Complex theorem_weights(Real T, i64 l, i64 n, i64 m, const GL3Form& form, TheoremVariant variant,
                               std::optional<Real> x = std::nullopt, const TheoremWeightOptions& opt = {}) {
  SpectralWeightCache cache(form, opt.spec);
  return theorem_weights(T, l, n, m, cache, variant, x, opt);
}

}  // namespace kgl3

#pragma once

// GL(3) Voronoi summation: Mellin transforms of test functions, the
// transforms Phi_k, the combined kernels, the leading asymptotics of Phi_0,
// and a two-sided evaluator of the summation formula.

#include <fftw3.h>

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "kgl3/core.hpp"
#include "kgl3/exactarith.hpp"
#include "kgl3/heckegl3.hpp"
#include "kgl3/parallel.hpp"
#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"

namespace kgl3 {

/// A smooth function supported in [lo, hi] with 0 < lo < hi. An empty
/// function (no callable) is identically zero.
struct CompactFunction {
  std::function<Complex(Real)> f;
  Real lo = 1, hi = 2;

  bool is_zero() const { return !f; }
  Complex operator()(Real x) const {
    if (!f || x <= lo || x >= hi) return {0, 0};
    return f(x);
  }
};

inline CompactFunction zero_function() { return {}; }

inline CompactFunction bump_function(const SmoothBump& b) {
  if (!(b.a > 0)) throw InputError("bump_function: support must lie in (0, inf)");
  return {[b](Real x) { return Complex(b(x), 0); }, b.a, b.b};
}

/// phi~(s) = \int phi(x) x^{s-1} dx, evaluated as a trapezoid sum in
/// tau = log x. All derivatives of phi(e^tau) vanish at the ends, so the rule
/// is spectrally accurate once the grid resolves frequency |Im s| plus the
/// bandwidth of phi. Samples are cached and refined on demand.
/// The FFTW planner is not reentrant.
inline std::mutex& detail_fftw_mutex() {
  static std::mutex m;
  return m;
}

class MellinTable {
 public:
  explicit MellinTable(CompactFunction phi, Real tol = 1e-17L) : phi_(std::move(phi)), tol_(tol) {
    if (phi_.is_zero()) return;
    if (!(phi_.lo > 0 && phi_.lo < phi_.hi)) throw InputError("MellinTable: support must be an interval in (0, inf)");
    t0_ = std::log(phi_.lo);
    t1_ = std::log(phi_.hi);
    // Bandwidth: double the grid until the transform at s = 1 and s = 1 + i B
    // settles, B being the current Nyquist frequency over four.
    int m = 64;
    sample(m);
    Complex prev = sum_at(Complex(1, 0));
    for (;;) {
      sample(2 * m);
      Complex cur = sum_at(Complex(1, 0));
      Real scale = std::max(std::abs(cur), l1_);
      if (std::abs(cur - prev) <= tol_ * scale) {
        Real nyq = kPi * m / (t1_ - t0_);
        Complex a = sum_at(Complex(1, nyq / 4));
        sample(4 * m);
        Complex b = sum_at(Complex(1, nyq / 4));
        if (std::abs(a - b) <= tol_ * scale) break;
      }
      prev = cur;
      m *= 2;
      if (m > (1 << 22)) throw ConvergenceError("MellinTable: test function is not resolved");
    }
    bandwidth_ = kPi * m / (t1_ - t0_);
  }

  /// phi~(s).
  Complex operator()(Complex s) const {
    if (phi_.is_zero()) return {0, 0};
    std::lock_guard<std::mutex> lock(*mutex_);
    // Grid so that Nyquist exceeds |Im s| + bandwidth.
    Real need = (std::abs(s.imag()) + bandwidth_) * (t1_ - t0_) / kPi;
    int intervals = static_cast<int>(samples_.size()) - 1;
    const int have = intervals;
    while (intervals < need) intervals *= 2;
    if (intervals != have) sample(intervals);
    return sum_at(s);
  }

  /// phi~(c + i k step) for k = -n..n in one FFT: with tau_j = t0 + j delta
  /// and h delta = 2 pi / N the trapezoid sums become a length-N DFT.
  std::vector<Complex> line_values(Real c, Real step, std::int64_t n) const {
    std::vector<Complex> out(static_cast<std::size_t>(2 * n + 1), Complex(0, 0));
    if (phi_.is_zero()) return out;
    const Real h = std::abs(step);
    const Real L = t1_ - t0_;
    if (!(h > 0)) throw InputError("MellinTable::line_values: step must be nonzero");
    if (L * h >= kPi) {
      for (std::int64_t k = -n; k <= n; ++k) out[k + n] = (*this)(Complex(c, k * step));
      return out;
    }
    const Real need = 2 * static_cast<Real>(n) + 2 * bandwidth_ / h + 2;
    std::int64_t N = 64;
    while (static_cast<Real>(N) < need) N *= 2;
    const Real delta = kTwoPi / (h * static_cast<Real>(N));
    const auto M = static_cast<std::int64_t>(std::ceil(L / delta));
    auto* buf = static_cast<fftwl_complex*>(fftwl_malloc(sizeof(fftwl_complex) * N));
    fftwl_plan plan;
    {
      std::lock_guard<std::mutex> lock(detail_fftw_mutex());
      plan = fftwl_plan_dft_1d(static_cast<int>(N), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::int64_t j = 0; j < N; ++j) {
      Complex b{0, 0};
      if (j <= M) b = phi_(std::exp(t0_ + j * delta)) * std::exp(c * (j * delta));
      buf[j][0] = b.real();
      buf[j][1] = b.imag();
    }
    fftwl_execute(plan);
    const Real ec = std::exp(c * t0_);
    for (std::int64_t k = -n; k <= n; ++k) {
      const std::int64_t idx = ((k % N) + N) % N;
      Complex F(buf[idx][0], buf[idx][1]);
      out[k + n] = delta * ec * std::polar(Real(1), k * h * t0_) * F;
    }
    {
      std::lock_guard<std::mutex> lock(detail_fftw_mutex());
      fftwl_destroy_plan(plan);
    }
    fftwl_free(buf);
    if (step < 0) std::reverse(out.begin(), out.end());
    return out;
  }

  const CompactFunction& function() const { return phi_; }
  Real bandwidth() const { return bandwidth_; }

 private:
  void sample(int intervals) const {
    samples_.resize(intervals + 1);
    step_ = (t1_ - t0_) / intervals;
    l1_ = 0;
    for (int j = 0; j <= intervals; ++j) {
      Real tau = t0_ + j * step_;
      samples_[j] = phi_(std::exp(tau));
      l1_ += std::abs(samples_[j]) * std::exp(tau) * step_;
    }
  }

  Complex sum_at(Complex s) const {
    // e^{s tau_j} = e^{s t0} e^{s j step}; the second factor is advanced by a
    // constant ratio and re-anchored every 64 samples. Real arithmetic keeps
    // the inner loop free of library complex multiplication.
    Real re = 0, im = 0;
    const Complex fstep = std::exp(s * step_);
    const Real fr = fstep.real(), fi = fstep.imag();
    Real wr = 1, wi = 0;
    const std::size_t M = samples_.size();
    for (std::size_t j = 0; j < M; ++j) {
      if ((j & 63) == 0 && j) {
        Complex w = std::exp(s * (static_cast<Real>(j) * step_));
        wr = w.real();
        wi = w.imag();
      }
      const Real ar = samples_[j].real(), ai = samples_[j].imag();
      re += ar * wr - ai * wi;
      im += ar * wi + ai * wr;
      const Real nr = wr * fr - wi * fi;
      wi = wr * fi + wi * fr;
      wr = nr;
    }
    return Complex(re, im) * std::exp(s * t0_) * step_;
  }

  CompactFunction phi_;
  Real tol_;
  Real t0_ = 0, t1_ = 0, bandwidth_ = 0;
  mutable Real step_ = 0, l1_ = 0;
  mutable std::vector<Complex> samples_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

/// \int phi(x) x^{s-1} dx.
inline Complex mellin_transform(const CompactFunction& phi, Complex s) {
  if (phi.is_zero()) return {0, 0};
  return MellinTable(phi)(s);
}

struct VoronoiKernelSpec {
  GL3Form form;
  CompactFunction phi;
  Real sigma = -0.25L;
  Real tol = 1e-13L;
};

namespace detail {

inline std::array<Complex, 3> voronoi_params(const GL3Form& f) { return {f.alpha, f.beta, f.gamma}; }

/// Smallest admissible abscissa: sigma > max(-1 - Re alpha_i).
inline Real voronoi_sigma_floor(const GL3Form& f) {
  Real m = -1e300L;
  for (Complex a : voronoi_params(f)) m = std::max(m, -1 - a.real());
  return m;
}

inline void check_voronoi_contour(const GL3Form& f, Real sigma) {
  if (!(sigma > voronoi_sigma_floor(f)))
    throw InputError("Voronoi contour Re s = " + std::to_string(static_cast<double>(sigma)) +
                     " is not to the right of the gamma poles (need > " +
                     std::to_string(static_cast<double>(voronoi_sigma_floor(f))) + ")");
}

/// log of prod Gamma((1+s+2k+alpha_i)/2) / Gamma((-s-alpha_i)/2). Repeated
/// parameters are evaluated once.
inline Complex log_voronoi_gamma(const GL3Form& f, Complex s, int k) {
  const auto p = voronoi_params(f);
  Complex r{0, 0};
  for (int i = 0; i < 3; ++i) {
    if ((i >= 1 && p[i] == p[0]) || (i == 2 && p[2] == p[1])) continue;
    const int mult = 1 + (i < 1 && p[1] == p[i]) + (i < 2 && p[2] == p[i]);
    r += Real(mult) * (log_gamma((Real(1) + s + Real(2 * k) + p[i]) / Real(2)) - log_gamma((-s - p[i]) / Real(2)));
  }
  return r;
}

/// log G_k(w) = log prod Gamma(w + k + alpha_i/2) / Gamma(1/2 - w - alpha_i/2).
inline Complex log_voronoi_gamma_halved(const GL3Form& f, Complex w, int k) {
  const auto p = voronoi_params(f);
  Complex r{0, 0};
  for (int i = 0; i < 3; ++i) {
    if ((i >= 1 && p[i] == p[0]) || (i == 2 && p[2] == p[1])) continue;
    const int mult = 1 + (i < 1 && p[1] == p[i]) + (i < 2 && p[2] == p[i]);
    r += Real(mult) * (log_gamma(w + Real(k) + p[i] / Real(2)) - log_gamma(Real(0.5L) - w - p[i] / Real(2)));
  }
  return r;
}

/// exp(log gamma quotient) on the nodes sigma + i j h, |j| <= n; halving h
/// reuses the previous level.
class GammaNodeCache {
 public:
  template <class LogG>
  std::vector<Complex> values(LogG&& logg, Real sigma, Real h, std::int64_t n) {
    std::vector<Complex> out(static_cast<std::size_t>(2 * n + 1));
    const bool reuse = !prev_.empty() && std::abs(prev_h_ - 2 * h) <= 1e-15L * h;
    for (std::int64_t j = -n; j <= n; ++j) {
      if (reuse && j % 2 == 0 && std::abs(j / 2) <= prev_n_)
        out[j + n] = prev_[j / 2 + prev_n_];
      else
        out[j + n] = std::exp(logg(Complex(sigma, j * h)));
    }
    prev_ = out;
    prev_h_ = h;
    prev_n_ = n;
    return out;
  }

 private:
  std::vector<Complex> prev_;
  Real prev_h_ = 0;
  std::int64_t prev_n_ = 0;
};

/// Phi_1 has no poles in sigma > -3 - Re alpha_i, so its line is moved one
/// unit left, where the gamma quotient no longer grows.
inline Real voronoi_abscissa(const VoronoiKernelSpec& spec, int k) { return spec.sigma - k; }

inline LineOptions voronoi_line_options(Real tol = 1e-13L) {
  LineOptions o;
  o.tol = tol;
  o.edge_factor = 1e-2L;
  o.initial_height = 16;
  o.max_height = 1 << 14;
  o.min_step = 1.0L / 4096;
  return o;
}

}  // namespace detail

namespace detail {

/// Nodes for (1/2 pi i) \int g(s) y^{-s} ds with g(s) = Gamma quotient(s) phi~(-s-k) on Re s = sigma_k.
inline MellinNodes phi_nodes(const VoronoiKernelSpec& spec, const MellinTable& mt, int k, const std::vector<Real>& probes) {
  const Real sigma = voronoi_abscissa(spec, k);
  auto g = [&](Complex s) { return std::exp(log_voronoi_gamma(spec.form, s, k)) * mt(-s - Real(k)); };
  const LineOptions opt = voronoi_line_options(spec.tol);
  const Real H = decay_height(g, sigma, opt);
  GammaNodeCache cache;
  auto batch = [&](Real h, std::int64_t n) {
    std::vector<Complex> v = mt.line_values(-sigma - Real(k), -h, n);
    auto gam = cache.values([&](Complex s) { return log_voronoi_gamma(spec.form, s, k); }, sigma, h, n);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= gam[j];
    return v;
  };
  return build_mellin_nodes_batch(batch, sigma, H, probes, opt);
}

/// The same after s = 2w - 1, as nodes in y = (pi^3 x)^2 on Re w = (1 + sigma_k)/2.
inline MellinNodes phi_nodes_halved(const VoronoiKernelSpec& spec, const MellinTable& mt, int k,
                                    const std::vector<Real>& probes) {
  const Real sigma = (1 + voronoi_abscissa(spec, k)) / 2;
  auto g = [&](Complex w) { return std::exp(log_voronoi_gamma_halved(spec.form, w, k)) * mt(Real(1 - k) - Real(2) * w); };
  LineOptions opt = voronoi_line_options(spec.tol);
  opt.initial_step /= 2;
  const Real H = decay_height(g, sigma, opt);
  GammaNodeCache cache;
  auto batch = [&](Real h, std::int64_t n) {
    std::vector<Complex> v = mt.line_values(Real(1 - k) - 2 * sigma, -2 * h, n);
    auto gam = cache.values([&](Complex w) { return log_voronoi_gamma_halved(spec.form, w, k); }, sigma, h, n);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= gam[j];
    return v;
  };
  return build_mellin_nodes_batch(batch, sigma, H, probes, opt);
}

}  // namespace detail

/// Phi_k(x) = \int_{(sigma)} (pi^3 x)^{-s} prod Gamma((1+s+2k+alpha_i)/2)/Gamma((-s-alpha_i)/2) phi~(-s-k) ds,
/// the integral taken without the 1/(2 pi i).
inline TransformResult phi_transform(const VoronoiKernelSpec& spec, const MellinTable& mt, int k, Real x) {
  if (k != 0 && k != 1) throw InputError("phi_transform: k must be 0 or 1");
  if (!(x > 0)) throw InputError("phi_transform: x must be positive");
  detail::check_voronoi_contour(spec.form, spec.sigma);
  if (mt.function().is_zero()) return {};
  const Real y = kPi * kPi * kPi * x;
  MellinNodes nodes = detail::phi_nodes(spec, mt, k, {y});
  TransformResult r;
  r.value = kTwoPi * kI * nodes(y);
  r.abs_error_estimate = nodes.error_estimate * std::abs(r.value);
  r.evaluations = static_cast<std::int64_t>(nodes.s.size());
  return r;
}

inline TransformResult phi_transform(const VoronoiKernelSpec& spec, int k, Real x) {
  MellinTable mt(spec.phi);
  return phi_transform(spec, mt, k, x);
}

/// The same transform after s = 2w - 1:
/// 2 pi^3 x \int_{(sigma')} (pi^3 x)^{-2w} G_k(w) phi~(-2w + 1 - k) dw, sigma' = (1 + sigma)/2.
inline TransformResult phi_transform_halved(const VoronoiKernelSpec& spec, const MellinTable& mt, int k, Real x) {
  if (k != 0 && k != 1) throw InputError("phi_transform_halved: k must be 0 or 1");
  if (!(x > 0)) throw InputError("phi_transform_halved: x must be positive");
  detail::check_voronoi_contour(spec.form, spec.sigma);
  if (mt.function().is_zero()) return {};
  const Real u = kPi * kPi * kPi * x;
  MellinNodes nodes = detail::phi_nodes_halved(spec, mt, k, {u * u});
  TransformResult r;
  r.value = 2 * u * kTwoPi * kI * nodes(u * u);
  r.abs_error_estimate = nodes.error_estimate * std::abs(r.value);
  r.evaluations = static_cast<std::int64_t>(nodes.s.size());
  return r;
}

/// Phi_k(x) for many x from one set of line nodes.
class PhiKernel {
 public:
  PhiKernel(const VoronoiKernelSpec& spec, const MellinTable& mt, int k, Real x_min, Real x_max) : zero_(mt.function().is_zero()) {
    if (k != 0 && k != 1) throw InputError("PhiKernel: k must be 0 or 1");
    detail::check_voronoi_contour(spec.form, spec.sigma);
    if (zero_) return;
    const Real pi3 = kPi * kPi * kPi;
    std::vector<Real> probes;
    for (Real x = x_min; x < x_max * 2; x *= 4) probes.push_back(pi3 * x);
    nodes_ = detail::phi_nodes(spec, mt, k, probes);
  }

  Complex operator()(Real x) const {
    if (zero_) return {0, 0};
    return kTwoPi * kI * nodes_(kPi * kPi * kPi * x);
  }

  /// sum_{n >= 1} a[n-1] Phi_k(lambda n).
  Complex sum(const std::vector<Complex>& a, Real lambda) const {
    if (zero_) return {0, 0};
    MellinNodes scaled = nodes_;
    const Real l = std::log(kPi * kPi * kPi * lambda);
    for (std::size_t j = 0; j < scaled.s.size(); ++j) scaled.weight[j] *= std::exp(-scaled.s[j] * l);
    return kTwoPi * kI * scaled.dirichlet_sum(a);
  }

  const MellinNodes& nodes() const { return nodes_; }

 private:
  bool zero_;
  MellinNodes nodes_;
};

/// Phi^0 = Phi_0 + kappa Phi_1 and Phi^1 = Phi_0 - kappa Phi_1 with
/// kappa = pi^{-3} c^3 n / (m1^2 m2 i).
inline Complex combine_phi(int variant, Complex phi0, Complex phi1, i64 c, i64 n, i64 m1, i64 m2) {
  if (variant != 0 && variant != 1) throw InputError("combined_kernel: variant must be 0 or 1");
  const Complex kappa = std::pow(kPi, Real(-3)) * std::pow(static_cast<Real>(c), Real(3)) * static_cast<Real>(n) /
                        (static_cast<Real>(m1) * static_cast<Real>(m1) * static_cast<Real>(m2) * kI);
  return variant == 0 ? phi0 + kappa * phi1 : phi0 - kappa * phi1;
}

inline Complex combined_kernel(const VoronoiKernelSpec& spec, int variant, Real x, i64 c, i64 n, i64 m1, i64 m2) {
  if (c < 1 || n < 1 || m1 < 1 || m2 < 1) throw InputError("combined_kernel: c, n, m1, m2 must be positive");
  MellinTable mt(spec.phi);
  return combine_phi(variant, phi_transform(spec, mt, 0, x).value, phi_transform(spec, mt, 1, x).value, c, n, m1, m2);
}

// ---------------------------------------------------------------------------
// Asymptotics of Phi_0.

/// b_1 in G_0(w) / V(w) = 1 + b_1 / w + O(w^{-2}), with
/// V(w) = (-w) Gamma(3w - 1) / Gamma(3/2 - 3w) 3^{-6w + 5/2}. Found by
/// Richardson extrapolation of w (G_0/V - 1) along Re w = 1/2.
inline Complex lemma_b1(const GL3Form& form) {
  auto q = [&](Real T) {
    Complex w(0.5L, T);
    Complex logV = std::log(-w) + log_gamma(Real(3) * w - Real(1)) - log_gamma(Real(1.5L) - Real(3) * w) +
                   (Real(2.5L) - Real(6) * w) * std::log(Real(3));
    Complex H = std::exp(detail::log_voronoi_gamma_halved(form, w, 0) - logV) - Real(1);
    return w * H;
  };
  Complex a = q(250), b = q(500), c = q(1000);
  // Two Richardson steps in 1/w.
  Complex ab = Real(2) * b - a, bc = Real(2) * c - b;
  return (Real(4) * bc - ab) / Real(3);
}

struct AsymptoticConstants {
  Complex c1, d1, c2, d2;
};

/// c_1 = 0, d_1 = -2/sqrt(3 pi); c_2 = -(2/(3 sqrt(3 pi)))(1 + 3 b_1), d_2 = 0,
/// the second pair derived from b_1.
inline AsymptoticConstants asymptotic_constants(const GL3Form& form) {
  const Real r = std::sqrt(3 * kPi);
  Complex b1 = lemma_b1(form);
  return {Complex(0, 0), Complex(-2 / r, 0), -(Real(2) / (3 * r)) * (Real(1) + Real(3) * b1), Complex(0, 0)};
}

/// 2 pi^4 x i \int psi(y) sum_{j <= K} [c_j cos(6 pi (xy)^{1/3}) + d_j sin(6 pi (xy)^{1/3})] / (pi^3 x y)^{j/3} dy.
inline Complex psi0_asymptotic(const VoronoiKernelSpec& spec, Real x, int K) {
  if (K < 1 || K > 2) throw InputError("psi0_asymptotic: K must be 1 or 2 (higher constants are not available)");
  if (!(x > 0)) throw InputError("psi0_asymptotic: x must be positive");
  if (spec.phi.is_zero()) return {0, 0};
  const Real X = spec.phi.lo;
  if (!(x * X > 1)) throw RegimeError("psi0_asymptotic: needs x X > 1");
  AsymptoticConstants k = asymptotic_constants(spec.form);
  const Real pi3 = kPi * kPi * kPi;
  auto integrand = [&](Real y) {
    Real q = std::cbrt(x * y);
    Real arg = 6 * kPi * q;
    Real base = std::cbrt(pi3 * x * y);
    Complex s = (k.c1 * std::cos(arg) + k.d1 * std::sin(arg)) / base;
    if (K >= 2) s += (k.c2 * std::cos(arg) + k.d2 * std::sin(arg)) / (base * base);
    return spec.phi(y) * s;
  };
  QuadratureOptions o;
  Real periods = 3 * (std::cbrt(x * spec.phi.hi) - std::cbrt(x * spec.phi.lo));
  o.initial_panels = static_cast<int>(std::min<Real>(20000, 8 * periods + 16));
  o.rel_tol = 1e-14L;
  o.abs_tol = 0;
  o.max_panels = 400000;
  Complex I = integrate(integrand, spec.phi.lo, spec.phi.hi, o).value;
  return Real(2) * pi3 * kPi * x * kI * I;
}

// ---------------------------------------------------------------------------
// The summation formula.

struct VoronoiTruncation {
  i64 m2_cutoff = 0;
  Real tail_estimate = 0;
  i64 kernel_nodes = 0;
};

struct VoronoiSides {
  Complex lhs;
  Complex rhs;
  Complex polar{0, 0};  // residue term of a non-cuspidal form, included in rhs
  VoronoiTruncation truncation;

  Real residual() const { return std::abs(lhs - rhs); }
  Real relative_residual() const { return std::abs(lhs - rhs) / std::max(std::abs(lhs), Real(1e-300)); }
};

/// D(s, h/c) = sum_m d_3(m) e(mh/c) m^{-s} = c^{-3s} sum_{a_i mod c} e(h a1 a2 a3 / c) prod zeta(s, a_i/c).
inline Complex d3_twisted_dirichlet(Complex s, i64 h, i64 c) {
  std::vector<Complex> hz(static_cast<std::size_t>(c));
  for (i64 a = 1; a <= c; ++a) hz[a - 1] = hurwitz_zeta(s, static_cast<Real>(a) / static_cast<Real>(c));
  Complex total{0, 0};
  for (i64 a1 = 1; a1 <= c; ++a1)
    for (i64 a2 = 1; a2 <= c; ++a2) {
      Complex pair = hz[a1 - 1] * hz[a2 - 1];
      i64 p = detail::mulmod(mod_reduce(h, c), detail::mulmod(a1, a2, c), c);
      for (i64 a3 = 1; a3 <= c; ++a3) total += e_rational(detail::mulmod(p, a3, c), c) * pair * hz[a3 - 1];
    }
  return total * std::exp(Real(-3) * s * std::log(static_cast<Real>(c)));
}

/// Residue at s = 1 of D(s, h/c) phi~(s): (1/2 pi i) over |s - 1| = 1/2.
inline Complex d3_polar_term(const MellinTable& mt, i64 h, i64 c, Real tol = 1e-14L) {
  if (mt.function().is_zero()) return {0, 0};
  const Real rho = 0.5L;
  auto at = [&](Real theta) {
    Complex z = std::polar(rho, theta);
    return d3_twisted_dirichlet(Real(1) + z, h, c) * mt(Real(1) + z) * z;
  };
  int n = 16;
  Complex prev{0, 0};
  for (int i = 0; i < n; ++i) prev += at(kTwoPi * i / n);
  prev /= Real(n);
  for (;;) {
    Complex odd{0, 0};
    for (int i = 0; i < n; ++i) odd += at(kTwoPi * (i + 0.5L) / n);
    Complex cur = (prev + odd / Real(n)) / Real(2);
    n *= 2;
    if (std::abs(cur - prev) <= tol * std::max(std::abs(cur), Real(1))) return cur;
    prev = cur;
    if (n > (1 << 14)) throw ConvergenceError("d3_polar_term: circle quadrature did not converge");
  }
}

/// Left side sum_m A(n, m) e(m abar / c) phi(m) and the right side
///   (c pi^{-5/2} / 4i) sum_{m1 | cn} sum_{m2 <= cutoff} A(m1, m2)/(m1 m2)
///     [S(na, m2; nc/m1) Phi^0(x) + S(na, -m2; nc/m1) Phi^1(x)],  x = m2 m1^2 / (c^3 n),
/// plus, for the divisor form, the residue at s = 1.
inline VoronoiSides voronoi_sides(const GL3Form& form, i64 n, i64 a, i64 c, const CompactFunction& phi, i64 m2_cutoff,
                                  Real sigma = -0.25L, Real tol = 1e-11L) {
  if (n < 1 || c < 1) throw InputError("voronoi_sides: n and c must be positive");
  if (m2_cutoff < 1) throw InputError("voronoi_sides: m2 cutoff must be positive");
  if (gcd(a, c) != 1) throw InputError("voronoi_sides: need gcd(a, c) = 1");
  if (!form.cuspidal && n != 1) throw InputError("voronoi_sides: the polar term is implemented for n = 1 only");
  const i64 abar = mod_inverse(mod_reduce(a, c), c).value;
  VoronoiSides out;
  out.truncation.m2_cutoff = m2_cutoff;
  if (phi.is_zero()) return out;

  const i64 mlo = static_cast<i64>(std::floor(phi.lo)) + 1, mhi = static_cast<i64>(std::ceil(phi.hi)) - 1;
  const std::vector<i64> m1s = divisors(c * n);
  i64 bound = std::max<i64>(mhi, 2);
  for (i64 m1 : m1s) bound = std::max(bound, m1 * m2_cutoff);
  CoefficientEngine A(form, bound);

  for (i64 m = mlo; m <= mhi; ++m) out.lhs += A(n, m) * e_rational(m * abar, c) * phi(static_cast<Real>(m));

  MellinTable mt(phi);
  if (!form.cuspidal) out.polar = d3_polar_term(mt, abar, c);

  VoronoiKernelSpec spec{form, phi, sigma, tol};
  const Real c3n = std::pow(static_cast<Real>(c), Real(3)) * static_cast<Real>(n);
  Real x_min = 1 / c3n, x_max = 1 / c3n;
  for (i64 m1 : m1s) x_max = std::max(x_max, static_cast<Real>(m2_cutoff) * m1 * m1 / c3n);
  PhiKernel K0(spec, mt, 0, x_min, x_max), K1(spec, mt, 1, x_min, x_max);
  out.truncation.kernel_nodes = static_cast<i64>(K0.nodes().s.size() + K1.nodes().s.size());

  const Complex pref = static_cast<Real>(c) * std::pow(kPi, Real(-2.5L)) / (Real(4) * kI);
  // S+ Phi^0 + S- Phi^1 = (S+ + S-) Phi_0 + kappa (S+ - S-) Phi_1, kappa = pi^{-3} c^3 n / (m1^2 m2 i).
  Complex dual{0, 0}, last_dyad{0, 0};
  const Real pi3 = kPi * kPi * kPi;
  for (i64 m1 : m1s) {
    const i64 modulus = n * c / m1;
    const std::size_t N = static_cast<std::size_t>(m2_cutoff);
    std::vector<Complex> a0(N), a1(N);
    auto coef = parallel_map<std::pair<Complex, Complex>>(N, [&](std::size_t idx) {
      const i64 m2 = static_cast<i64>(idx) + 1;
      const Complex w = A(m1, m2) / (static_cast<Real>(m1) * static_cast<Real>(m2));
      const Complex sp = kloosterman(n * a, m2, modulus), sm = kloosterman(n * a, -m2, modulus);
      const Complex kappa = c3n / (pi3 * static_cast<Real>(m1) * static_cast<Real>(m1) * static_cast<Real>(m2) * kI);
      return std::pair{w * (sp + sm), w * kappa * (sp - sm)};
    });
    for (std::size_t i = 0; i < N; ++i) std::tie(a0[i], a1[i]) = coef[i];
    const Real lambda = static_cast<Real>(m1) * m1 / c3n;
    dual += K0.sum(a0, lambda) + K1.sum(a1, lambda);
    for (std::size_t i = 0; 2 * (i + 1) <= N; ++i) a0[i] = a1[i] = 0;
    last_dyad += K0.sum(a0, lambda) + K1.sum(a1, lambda);
  }
  out.rhs = pref * dual + out.polar;
  out.truncation.tail_estimate = 2 * std::abs(pref * last_dyad);
  return out;
}

}  // namespace kgl3

#pragma once

// Numerical integration: adaptive Gauss-Kronrod, vertical-line Mellin-Barnes
// integrals, oscillatory integrals, stationary phase, smooth bumps and a
// Poisson summation checker.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "kgl3/core.hpp"

namespace kgl3 {

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<Real, 8> kKronrodNodes = {
    0.991455371120812639206854697526329L, 0.949107912342758524526189684047851L,
    0.864864423359769072789712788640926L, 0.741531185599394439863864773280788L,
    0.586087235467691130294144845693013L, 0.405845151377397166906606412076961L,
    0.207784955007898467600689403773245L, 0.0L};
inline constexpr std::array<Real, 8> kKronrodWeights = {
    0.022935322010529224963732008058970L, 0.063092092629978553290700663189204L,
    0.104790010322250183839876322541518L, 0.140653259715525918745189590510238L,
    0.169004726639267902826583426598550L, 0.190350578064785409913256402421014L,
    0.204432940075298892414161999234649L, 0.209482141084727828012999174891714L};
inline constexpr std::array<Real, 4> kGaussWeights = {
    0.129484966168869693270611432679082L, 0.279705391489276667901467771423780L,
    0.381830050505118944950369775488975L, 0.417959183673469387755102040816327L};

inline Complex as_complex(Real x) { return {x, 0}; }
inline Complex as_complex(Complex z) { return z; }

struct Panel {
  Real a, b;
  Complex value;
  Real error;
};

template <class F>
Panel gauss_kronrod_panel(F& f, Real a, Real b) {
  const Real mid = (a + b) / 2, half = (b - a) / 2;
  Complex centre = as_complex(f(mid));
  Complex kronrod = kKronrodWeights[7] * centre;
  Complex gauss = kGaussWeights[3] * centre;
  for (int j = 0; j < 7; ++j) {
    Real dx = half * kKronrodNodes[j];
    Complex pair = as_complex(f(mid - dx)) + as_complex(f(mid + dx));
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

struct QuadratureOptions {
  Real abs_tol = 1e-15L;
  Real rel_tol = 1e-13L;
  int max_panels = 100000;
  int initial_panels = 1;
};

/// Globally adaptive Gauss-Kronrod 7-15 on a finite interval. The error
/// estimate is the raw Kronrod-Gauss difference summed over panels. The
/// refinement order depends only on the integrand, so results are
/// reproducible.
template <class F>
TransformResult integrate(F&& f, Real a, Real b, const QuadratureOptions& opt = {}) {
  TransformResult r;
  if (a == b) return r;
  auto worse = [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; };
  std::priority_queue<detail::Panel, std::vector<detail::Panel>, decltype(worse)> heap(worse);
  const int n0 = std::max(1, opt.initial_panels);
  for (int i = 0; i < n0; ++i) {
    Real lo = a + (b - a) * i / n0, hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
    heap.push(detail::gauss_kronrod_panel(f, lo, hi));
  }
  r.evaluations = 15L * n0;
  auto totals = [&heap]() {
    auto copy = heap;
    Complex v{0, 0};
    Real err = 0;
    // Summation order: heap order is deterministic for a deterministic integrand.
    while (!copy.empty()) {
      v += copy.top().value;
      err += copy.top().error;
      copy.pop();
    }
    return std::pair{v, err};
  };
  Complex value{0, 0};
  Real error = 0;
  int panels = n0;
  std::tie(value, error) = totals();
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) && panels < opt.max_panels) {
    detail::Panel worst = heap.top();
    heap.pop();
    Real mid = (worst.a + worst.b) / 2;
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    auto left = detail::gauss_kronrod_panel(f, worst.a, mid);
    auto right = detail::gauss_kronrod_panel(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    r.evaluations += 30;
    ++panels;
  }
  auto [v, e] = totals();
  r.value = v;
  r.abs_error_estimate = e;
  return r;
}

/// Integral over [a, inf) of an integrand known to decay: panels of growing
/// width until both the panel contribution and the integrand are negligible.
template <class F>
TransformResult integrate_to_infinity(F&& f, Real a, Real first_width, const QuadratureOptions& opt = {},
                                      int max_panels = 400) {
  TransformResult total;
  Real lo = a, width = first_width;
  int quiet = 0;
  for (int i = 0; i < max_panels; ++i) {
    auto part = integrate(f, lo, lo + width, opt);
    total.value += part.value;
    total.abs_error_estimate += part.abs_error_estimate;
    total.evaluations += part.evaluations;
    if (std::abs(part.value) <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value)) * 1e-2)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3) return total;
    lo += width;
    width *= 1.5L;
  }
  throw ConvergenceError("integrate_to_infinity: integrand does not decay");
}

// ---------------------------------------------------------------------------
// Vertical line integrals (1 / 2 pi i) \int_{(sigma)} f(s) ds.

struct LineOptions {
  Real tol = 1e-13L;
  Real initial_step = 0.25L;
  Real initial_height = 8;
  Real edge_factor = 1e-3L;  // height stops once |f| < tol * edge_factor * peak
  Real max_height = 4096;
  Real min_step = 1.0L / 4096;
};

namespace detail {

/// Trapezoid on sigma + iv, v in [-H, H], step h: (h / 2 pi) sum f.
template <class F>
Complex line_trapezoid(F& f, Real sigma, Real H, Real h, bool odd_only, std::int64_t& evals) {
  const auto n = static_cast<std::int64_t>(std::llround(H / h));
  Complex sum{0, 0};
  for (std::int64_t k = -n; k <= n; ++k) {
    if (odd_only && (k % 2 == 0)) continue;
    sum += f(Complex(sigma, k * h));
    ++evals;
  }
  return sum * (h / kTwoPi);
}

}  // namespace detail

/// (1 / 2 pi i) \int_{sigma - iH}^{sigma + iH} f(s) ds with H and the step
/// chosen adaptively. For analytic, rapidly decaying integrands the
/// trapezoid rule converges geometrically in 1 / h.
template <class F>
TransformResult line_integral(F&& f, Real sigma, const LineOptions& opt = {}) {
  TransformResult r;
  std::int64_t evals = 0;
  // Height: double until the integrand at +-H is negligible relative to the
  // largest value seen.
  Real H = opt.initial_height;
  Real peak = std::abs(f(Complex(sigma, 0)));
  for (Real v = 0.5L; v <= H; v += 0.5L) {
    peak = std::max({peak, std::abs(f(Complex(sigma, v))), std::abs(f(Complex(sigma, -v)))});
    evals += 2;
  }
  auto edge = [&](Real h) {
    evals += 2;
    return std::max(std::abs(f(Complex(sigma, h))), std::abs(f(Complex(sigma, -h))));
  };
  Real edge_value = edge(H);
  while (edge_value > opt.tol * std::max(peak, Real(1e-300)) * opt.edge_factor) {
    H *= 2;
    if (H > opt.max_height)
      throw ConvergenceError("line_integral: integrand does not decay on Re s = " + std::to_string((double)sigma));
    for (Real v = H / 2; v <= H; v += std::max<Real>(0.5L, H / 64)) {
      peak = std::max({peak, std::abs(f(Complex(sigma, v))), std::abs(f(Complex(sigma, -v)))});
      evals += 2;
    }
    edge_value = edge(H);
  }
  Real h = opt.initial_step;
  H = std::ceil(H / h) * h;
  Complex coarse = detail::line_trapezoid(f, sigma, H, h, false, evals);
  Real change = 0;
  for (;;) {
    Complex fine = coarse / Real(2) + detail::line_trapezoid(f, sigma, H, h / 2, true, evals);
    change = std::abs(fine - coarse);
    coarse = fine;
    h /= 2;
    // Cancellation below the integrand's own scale cannot be resolved.
    if (change <= opt.tol * std::max({std::abs(fine), peak, Real(1e-300)}) || change < 1e-300L) break;
    if (h < opt.min_step) throw ConvergenceError("line_integral: step refinement did not converge");
  }
  // One more doubling of H as a check on truncation.
  Complex wider = coarse;
  {
    const auto n0 = static_cast<std::int64_t>(std::llround(H / h));
    const auto n1 = 2 * n0;
    Complex extra{0, 0};
    for (std::int64_t k = n0 + 1; k <= n1; ++k) {
      extra += f(Complex(sigma, k * h)) + f(Complex(sigma, -k * h));
      evals += 2;
    }
    wider += extra * (h / kTwoPi);
  }
  r.value = wider;
  r.abs_error_estimate = change + std::abs(wider - coarse);
  r.evaluations = evals;
  return r;
}

/// Mellin-Barnes nodes on a vertical line for integrals of the form
/// (1 / 2 pi i) \int g(s) y^{-s} ds, evaluated at many y. The step and
/// height are fixed once from probe values of y.
struct MellinNodes {
  std::vector<Complex> s;
  std::vector<Complex> weight;  // g(s_k) h / 2 pi
  Real step = 0;
  Real height = 0;
  Real error_estimate = 0;

  Complex operator()(Real y) const {
    if (s.empty()) return {0, 0};
    const Real ly = std::log(y);
    // Nodes are equally spaced: y^{-s_k} advances by y^{-i h}, re-anchored
    // every 256 nodes.
    const Complex step_factor = std::polar(Real(1), -step * ly);
    Complex sum{0, 0}, power{0, 0};
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k % 256 == 0) power = std::exp(-s[k] * ly);
      sum += weight[k] * power;
      power *= step_factor;
    }
    return sum;
  }

  /// sum_{n=1}^{N} a[n-1] K(n), with n^{-s_k} advanced along the nodes by
  /// the constant step factor n^{-i h}.
  Complex dirichlet_sum(const std::vector<Complex>& a) const {
    if (s.empty()) return {0, 0};
    Complex total{0, 0};
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == Complex(0, 0)) continue;
      const Real ln = std::log(static_cast<Real>(i + 1));
      Complex power = std::exp(-s.front() * ln);
      const Complex step_factor = std::polar(Real(1), -step * ln);
      Complex acc{0, 0};
      for (std::size_t k = 0; k < s.size(); ++k) {
        acc += weight[k] * power;
        power *= step_factor;
      }
      total += a[i] * acc;
    }
    return total;
  }

  /// dirichlet_sum in double precision, eight n at a time so the node loop
  /// vectorises. Relative accuracy about 1e-13; for long sweeps where the
  /// long-double loop dominates the cost.
  Complex dirichlet_sum_fast(const std::vector<Complex>& a) const {
    if (s.empty()) return {0, 0};
    constexpr std::size_t B = 8;
    const std::size_t K = s.size();
    std::vector<double> wr(K), wi(K);
    for (std::size_t k = 0; k < K; ++k) {
      wr[k] = static_cast<double>(weight[k].real());
      wi[k] = static_cast<double>(weight[k].imag());
    }
    Complex total{0, 0};
    for (std::size_t i0 = 0; i0 < a.size(); i0 += B) {
      double pr[B], pi[B], rr[B], ri[B], ar[B], ai[B];
      for (std::size_t j = 0; j < B; ++j) {
        ar[j] = ai[j] = 0;
        pr[j] = pi[j] = 0;
        rr[j] = 1;
        ri[j] = 0;
      }
      std::size_t top = std::min(a.size() - i0, B);
      auto anchor = [&](std::size_t k) {
        for (std::size_t j = 0; j < top; ++j) {
          const Real ln = std::log(static_cast<Real>(i0 + j + 1));
          const Complex p = std::exp(-s[k] * ln);
          pr[j] = static_cast<double>(p.real());
          pi[j] = static_cast<double>(p.imag());
        }
      };
      for (std::size_t j = 0; j < top; ++j) {
        const Complex r = std::polar(Real(1), -step * std::log(static_cast<Real>(i0 + j + 1)));
        rr[j] = static_cast<double>(r.real());
        ri[j] = static_cast<double>(r.imag());
      }
      for (std::size_t k0 = 0; k0 < K; k0 += 256) {
        anchor(k0);
        const std::size_t k1 = std::min(K, k0 + 256);
        for (std::size_t k = k0; k < k1; ++k) {
          const double w_r = wr[k], w_i = wi[k];
          for (std::size_t j = 0; j < B; ++j) {
            ar[j] += w_r * pr[j] - w_i * pi[j];
            ai[j] += w_r * pi[j] + w_i * pr[j];
            const double nr = pr[j] * rr[j] - pi[j] * ri[j];
            pi[j] = pr[j] * ri[j] + pi[j] * rr[j];
            pr[j] = nr;
          }
        }
      }
      for (std::size_t j = 0; j < top; ++j) total += a[i0 + j] * Complex(ar[j], ai[j]);
    }
    return total;
  }
};

/// Height H beyond which |g(sigma + iv)| stays below tol * edge_factor times
/// its peak on the line.
template <class G>
Real decay_height(G&& g, Real sigma, const LineOptions& opt = {}) {
  Real peak = 0;
  for (Real v = -opt.initial_height; v <= opt.initial_height; v += 0.25L) peak = std::max(peak, std::abs(g(Complex(sigma, v))));
  Real H = opt.initial_height;
  auto edge = [&](Real h) { return std::max(std::abs(g(Complex(sigma, h))), std::abs(g(Complex(sigma, -h)))); };
  const Real edge_tol = opt.tol * opt.edge_factor;
  while (edge(H) > edge_tol * peak || edge(H * 0.75L) > edge_tol * peak) {
    H *= 1.5L;
    if (H > opt.max_height) throw ConvergenceError("decay_height: integrand does not decay on the line");
    for (Real v = H / 1.5L; v <= H; v += std::max<Real>(0.25L, H / 512))
      peak = std::max({peak, std::abs(g(Complex(sigma, v))), std::abs(g(Complex(sigma, -v)))});
  }
  return H;
}

/// Nodes from a batch evaluator: batch(h, n) returns g(sigma + i k h) for
/// k = -n..n. The step is halved until the probe values settle.
template <class Batch>
MellinNodes build_mellin_nodes_batch(Batch&& batch, Real sigma, Real H, const std::vector<Real>& probes,
                                     const LineOptions& opt = {}) {
  auto assemble = [&](Real h) {
    MellinNodes m;
    const auto n = static_cast<std::int64_t>(std::ceil(H / h));
    std::vector<Complex> values = batch(h, n);
    for (std::int64_t k = -n; k <= n; ++k) {
      m.s.emplace_back(sigma, k * h);
      m.weight.push_back(values[k + n] * (h / kTwoPi));
    }
    m.step = h;
    m.height = n * h;
    return m;
  };
  Real h = opt.initial_step;
  MellinNodes coarse = assemble(h);
  for (;;) {
    MellinNodes fine = assemble(h / 2);
    // Changes are measured against the largest probe value.
    Real worst = 0, scale = 1e-300L;
    for (Real y : probes) {
      Complex a = coarse(y), b = fine(y);
      worst = std::max(worst, std::abs(a - b));
      scale = std::max(scale, std::abs(b));
    }
    worst /= scale;
    // The trapezoid error falls geometrically in 1/h, so a small change
    // certifies the coarser grid already.
    if (worst <= opt.tol) {
      coarse.error_estimate = worst;
      return coarse;
    }
    h /= 2;
    coarse = std::move(fine);
    if (h < opt.min_step) throw ConvergenceError("build_mellin_nodes: step refinement did not converge");
  }
}

/// Nodes for (1 / 2 pi i) \int g(s) y^{-s} ds, evaluated at many y. The
/// height comes from the decay of g, the step from the probe values of y.
template <class G>
MellinNodes build_mellin_nodes(G&& g, Real sigma, const std::vector<Real>& probes, const LineOptions& opt = {}) {
  const Real H = decay_height(g, sigma, opt);
  // Halving h keeps every old node, so values are cached by position.
  std::vector<Complex> cache;
  Real cache_h = 0;
  std::int64_t cache_n = 0;
  auto batch = [&](Real h, std::int64_t n) {
    std::vector<Complex> out(2 * n + 1);
    for (std::int64_t k = -n; k <= n; ++k) {
      if (!cache.empty() && std::abs(cache_h - 2 * h) < 1e-15L * h && k % 2 == 0 && std::abs(k / 2) <= cache_n)
        out[k + n] = cache[k / 2 + cache_n];
      else
        out[k + n] = g(Complex(sigma, k * h));
    }
    cache = out;
    cache_h = h;
    cache_n = n;
    return out;
  };
  return build_mellin_nodes_batch(batch, sigma, H, probes, opt);
}

// ---------------------------------------------------------------------------
// Oscillatory integrals \int amp(x) e(phase(x)) dx.

struct OscillatoryOptions {
  Real tol = 1e-14L;
  int panels_per_period = 8;
  std::int64_t max_panels = 20'000'000;
};

template <class A, class P>
TransformResult oscillatory_integral(A&& amplitude, P&& phase, Real a, Real b, const OscillatoryOptions& opt = {}) {
  if (!(a < b)) throw InputError("oscillatory_integral: empty support");
  TransformResult r;
  auto f = [&](Real x) -> Complex {
    Complex amp = detail::as_complex(amplitude(x));
    if (amp == Complex(0, 0)) return {0, 0};
    return amp * e(phase(x));
  };
  const Real span = b - a;
  auto slope = [&](Real x) {
    Real h = span * 1e-7L;
    Real lo = std::max(a, x - h), hi = std::min(b, x + h);
    Real d = (phase(hi) - phase(lo)) / (hi - lo);
    if (!std::isfinite(d)) throw InputError("oscillatory_integral: phase derivative is not finite");
    return std::abs(d);
  };
  QuadratureOptions qo;
  qo.abs_tol = 0;
  qo.rel_tol = 0;
  Real x = a;
  std::int64_t panels = 0;
  std::vector<detail::Panel> parts;
  Real total_scale = 0;
  while (x < b) {
    Real d = std::max(slope(x), slope(std::min(b, x + span * 1e-4L)));
    Real step = std::min(b - x, span / 64);
    if (d > 0) step = std::min(step, 1 / (opt.panels_per_period * d));
    if (step < span * 1e-15L) throw InputError("oscillatory_integral: phase derivative unbounded on support");
    // Guard against the slope growing inside the panel.
    Real d_end = slope(std::min(b, x + step));
    while (d_end * step > 1.0L / opt.panels_per_period * 1.5L && step > span * 1e-15L) {
      step /= 2;
      d_end = slope(std::min(b, x + step));
    }
    Real hi = (b - x <= step * (1 + 1e-12L)) ? b : x + step;
    parts.push_back(detail::gauss_kronrod_panel(f, x, hi));
    total_scale += std::abs(parts.back().value);
    r.evaluations += 15;
    x = hi;
    if (++panels > opt.max_panels) throw InputError("oscillatory_integral: too many panels; phase derivative too large");
  }
  // Refine panels whose Kronrod-Gauss gap is not negligible.
  for (auto& p : parts) {
    if (p.error <= opt.tol * std::max(total_scale, Real(1e-300)) / parts.size()) {
      r.value += p.value;
      r.abs_error_estimate += p.error;
      continue;
    }
    QuadratureOptions sub;
    sub.abs_tol = opt.tol * std::max(total_scale, Real(1e-300)) / parts.size();
    sub.rel_tol = 0;
    sub.max_panels = 2000;
    auto refined = integrate(f, p.a, p.b, sub);
    r.value += refined.value;
    r.abs_error_estimate += refined.abs_error_estimate;
    r.evaluations += refined.evaluations;
  }
  return r;
}

/// amp(y0) e(phase(y0) + 1/8) / sqrt(phase''(y0)); for phase'' < 0 the
/// conjugate convention e(phase(y0) - 1/8) / sqrt(|phase''(y0)|).
template <class A, class P>
Complex stationary_phase_main_term(A&& amplitude, P&& phase, Real phase_second_derivative, Real stationary_point,
                                   std::optional<std::pair<Real, Real>> support = std::nullopt) {
  if (support && !(stationary_point > support->first && stationary_point < support->second))
    throw InputError("stationary_phase_main_term: stationary point outside the support");
  if (phase_second_derivative == 0 || !std::isfinite(phase_second_derivative))
    throw InputError("stationary_phase_main_term: degenerate second derivative");
  Complex amp = detail::as_complex(amplitude(stationary_point));
  if (amp == Complex(0, 0)) return {0, 0};
  Real shift = phase_second_derivative > 0 ? 0.125L : -0.125L;
  return amp * e(phase(stationary_point) + shift) / std::sqrt(std::abs(phase_second_derivative));
}

// ---------------------------------------------------------------------------
// Smooth bumps and partitions of unity.

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline Real smooth_step(Real x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  Real f0 = std::exp(-1 / x), f1 = std::exp(-1 / (1 - x));
  return f0 / (f0 + f1);
}

struct SmoothBump {
  Real a = 0, b = 1;
  Real plateau_lo = 0, plateau_hi = 1;

  Real operator()(Real x) const {
    if (x <= a || x >= b) return 0;
    if (x < plateau_lo) return smooth_step((x - a) / (plateau_lo - a));
    if (x > plateau_hi) return smooth_step((b - x) / (b - plateau_hi));
    return 1;
  }
};

/// Bump on [a, b] with a centred plateau covering plateau_fraction of the support.
inline SmoothBump smooth_bump(Real a, Real b, Real plateau_fraction) {
  if (!(a < b)) throw InputError("smooth_bump: need a < b");
  if (!(plateau_fraction > 0 && plateau_fraction < 1)) throw InputError("smooth_bump: plateau fraction must be in (0, 1)");
  Real mid = (a + b) / 2, half = (b - a) * plateau_fraction / 2;
  return {a, b, mid - half, mid + half};
}

/// Dyadic partition g(x) = rho(x) - rho(x / 2) with rho rising from 0 to 1 on
/// [1, 2]; g is supported on [1, 4] and sum_u g(x / 2^u) = 1 for x > 0.
inline Real dyadic_piece(Real x) {
  auto rho = [](Real y) { return smooth_step(y - 1); };
  return rho(x) - rho(x / 2);
}

/// sum over all u in Z of g(x / 2^u), summing only the dyads that can contribute.
inline Real dyadic_partition_sum(Real x) {
  if (!(x > 0)) throw InputError("dyadic_partition_sum: x must be positive");
  int top = static_cast<int>(std::floor(std::log2(x)));
  Real s = 0;
  for (int u = top - 2; u <= top + 1; ++u) s += dyadic_piece(std::ldexp(x, -u));
  return s;
}

// ---------------------------------------------------------------------------

/// |sum_n f(n) - sum_{|k| <= k_max} \int f(x) e(-kx) dx| for f supported in [a, b].
template <class F>
Real poisson_residual(F&& f, Real a, Real b, int k_max) {
  if (!(a < b) || k_max < 0) throw InputError("poisson_residual: bad arguments");
  Real lhs = 0;
  for (auto n = static_cast<std::int64_t>(std::ceil(a)); n <= static_cast<std::int64_t>(std::floor(b)); ++n) lhs += f(Real(n));
  Complex rhs{0, 0};
  OscillatoryOptions opt;
  opt.tol = 1e-16L;
  auto amp = [&](Real x) { return f(x); };
  rhs += oscillatory_integral(amp, [](Real) { return Real(0); }, a, b, opt).value;
  for (int k = 1; k <= k_max; ++k) {
    // f real: the +-k terms are conjugate.
    Complex fk = oscillatory_integral(amp, [k](Real x) { return -k * x; }, a, b, opt).value;
    rhs += 2 * fk.real();
  }
  return std::abs(Complex(lhs, 0) - rhs);
}

}  // namespace kgl3

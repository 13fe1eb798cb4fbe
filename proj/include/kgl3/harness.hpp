#pragma once

// Theorem-level quantities: the main term (12/pi^3) L(1,f) L(1,f~) T^2, the
// diagonal double sums evaluated with the spectral weights, the Eisenstein
// integral, and the fixture average that ties them together.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kgl3/afe.hpp"
#include "kgl3/core.hpp"
#include "kgl3/heckegl3.hpp"
#include "kgl3/kuznetsov.hpp"
#include "kgl3/parallel.hpp"
#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"

namespace kgl3 {

// ---------------------------------------------------------------------------
// L(1, f) and the main term.

/// L(1, f) from the degree-three approximate functional equation.
inline Complex l_one(const GL3Form& form, const WeightSpec& spec = {}) {
  if (!form.cuspidal) throw InputError("l_one: " + form.label + " has a pole at s = 1");
  return degree3_afe(form, Complex(1, 0), spec).value;
}

/// prod_{p <= cap} prod_k (1 - beta_{p,k} / p)^{-1}, the partial Euler product at
/// s = 1. Converges slowly (the error behaves like cap^{-1/2}); used only as a
/// cross-check of l_one.
inline Complex euler_product_l_one(const GL3Form& form, i64 prime_cap) {
  if (!form.cuspidal) throw InputError("euler_product_l_one: " + form.label + " has a pole at s = 1");
  if (prime_cap < 2) throw InputError("euler_product_l_one: prime cap must be at least 2");
  // The roots of the Euler factor of sum A(1, n) n^{-s} are the inverses of
  // the stored triple; on the unit circle those are the conjugates.
  Complex log_sum{0, 0};
  for (i64 p : primes_up_to(prime_cap)) {
    const Real inv_p = Real(1) / static_cast<Real>(p);
    for (Complex b : form.satake_at(p)) log_sum -= std::log(Real(1) - inv_p / b);
  }
  return std::exp(log_sum);
}

/// (12 / pi^3) L(1, f) L(1, f~) T^2.
inline Real main_term(const GL3Form& form, Real T, const WeightSpec& spec = {}) {
  if (!(T > 0)) throw InputError("main_term: T must be positive");
  if (!form.cuspidal) throw InputError("main_term: " + form.label + " has L(s, f) with a pole at s = 1 (zeta(1))");
  const Complex l = l_one(form, spec);
  const Complex ld = form.self_dual ? l : l_one(dual_form(form), spec);
  return 12 / (kPi * kPi * kPi) * (l * ld).real() * T * T;
}

// ---------------------------------------------------------------------------
// Smooth cutoffs Omega and k.

/// 0 below 1/2, rising to 1 on [1/2, 1], 1 on [1, X], falling to 0 on [X, 2X].
struct SmoothCutoff {
  Real X = 1;

  Real operator()(Real x) const {
    if (x <= Real(0.5) || x >= 2 * X) return 0;
    if (x < 1) return smooth_step(2 * x - 1);
    if (x <= X) return 1;
    return smooth_step((2 * X - x) / X);
  }
};

// ---------------------------------------------------------------------------
// Diagonal term.

struct DiagonalOptions {
  WeightSpec spec;
  // Omega is 1 on [1, T^{1+eps}], k on [1, T^{3+eps}].
  Real epsilon = 0.1L;
  bool smooth_cutoffs = true;
  // t-integral cut where e^{-t^2/T^2} < e^{-gaussian_exponent}.
  Real gaussian_exponent = 23;
  int gauss_points = 12;
  // Panels [0, .5], [.5, 1], [1, 2], [2, 3], [3, 4], then edges growing by this factor.
  Real panel_growth = 2;
};

/// Largest n and m^2 n the caller is prepared to supply coefficients for.
struct DiagonalCaps {
  i64 n_cap = 1 << 12;
  i64 y_cap = 16'000'000;
};

struct DiagonalReport {
  Real T = 0;
  Real delta1 = 0, delta2 = 0;
  Real total = 0;
  // Closed-form route: 2 L(1,f) L(1,f~) / zeta(2) integrated with the same nodes.
  Real leading = 0;
  // total - leading, the empirical stand-in for the shifted-contour integrals.
  Real correction = 0;
  // (2/pi) \int e^{-t^2/T^2} tanh(pi t) t 2|L L~|/zeta(2) (1+t)^{-1/4} dt
  Real slack = 0;
  i64 n_max = 0, y_max = 0;
  std::size_t t_nodes = 0;
  std::size_t pairs = 0;
};

namespace detail {

struct RealNodes {
  std::vector<Real> x, w;
};

/// Composite Gauss-Legendre on the given panel edges.
inline RealNodes composite_gauss(const std::vector<Real>& edges, int points) {
  static std::mutex m;
  static std::map<int, QuadGaussLegendre> rules;
  const QuadGaussLegendre* g;
  {
    std::lock_guard lock(m);
    g = &rules.try_emplace(points, points).first->second;
  }
  RealNodes out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const Real a = edges[i], b = edges[i + 1], half = (b - a) / 2, mid = (a + b) / 2;
    for (int k = 0; k < points; ++k) {
      out.x.push_back(mid + half * static_cast<Real>(g->x[k]));
      out.w.push_back(half * static_cast<Real>(g->w[k]));
    }
  }
  return out;
}

inline std::vector<Real> diagonal_panels(Real t_max, Real growth) {
  std::vector<Real> e{0};
  for (Real x : {0.5L, 1.0L, 2.0L, 3.0L, 4.0L})
    if (x < t_max) e.push_back(x);
  while (e.back() * growth < t_max) e.push_back(e.back() * growth);
  e.push_back(t_max);
  return e;
}

}  // namespace detail

/// Delta_1 + Delta_2 with Delta_1 = sum A(m,n)/(mn) Omega(n) k(m^2 n) H_1(n, m),
/// Delta_2 the same with A(n, m) and H_2, H_i from theorem_weights. The
/// n, m sums are taken inside the t-integral: for each t node
///   D_i(t) = sum_n Omega(n) U(n, t)/n sum_m k(m^2 n) A(., .)/m V_i(m^2 n, t),
/// and Delta_i = (2/pi) \int_0^inf e^{-t^2/T^2} D_i(t) tanh(pi t) t dt.
inline DiagonalReport diagonal_term_report(const GL3Form& form, Real T, const DiagonalCaps& caps = {},
                                           const DiagonalOptions& opt = {}) {
  if (!(T > 0)) throw InputError("diagonal_term_numeric: T must be positive");
  if (!form.cuspidal) throw InputError("diagonal_term_numeric: " + form.label + " has a pole at s = 1");
  if (opt.gauss_points < 2 || !(opt.panel_growth > 1) || !(opt.gaussian_exponent > 0) || !(opt.epsilon > 0))
    throw InputError("diagonal_term_numeric: bad options");
  const SmoothCutoff omega{std::pow(T, 1 + opt.epsilon)};
  const SmoothCutoff kcut{std::pow(T, 3 + opt.epsilon)};
  const i64 n_max = static_cast<i64>(std::ceil(2 * omega.X));
  const i64 y_max = static_cast<i64>(std::ceil(2 * kcut.X));
  if (n_max > caps.n_cap)
    throw InputError("diagonal_term_numeric: Omega needs n up to " + std::to_string(n_max) + ", cap is " +
                     std::to_string(caps.n_cap));
  if (y_max > caps.y_cap)
    throw InputError("diagonal_term_numeric: k needs m^2 n up to " + std::to_string(y_max) + ", cap is " +
                     std::to_string(caps.y_cap));

  // Coefficient rows: for each n the (m^2 n, c1, c2) with c1 = A(m,n) Omega k / (mn), c2 with A(n,m).
  struct Entry {
    i64 y;
    Complex c1, c2;
  };
  const i64 m_max = static_cast<i64>(std::floor(std::sqrt(static_cast<Real>(y_max))));
  CoefficientEngine A(form, std::max({n_max, m_max, i64{2}}));
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n_max));
  std::size_t pairs = 0;
  for (i64 n = 1; n <= n_max; ++n) {
    const Real on = opt.smooth_cutoffs ? omega(static_cast<Real>(n)) : Real(1);
    if (on == 0) continue;
    for (i64 m = 1; m * m * n < y_max; ++m) {
      const i64 y = m * m * n;
      const Real w = on * (opt.smooth_cutoffs ? kcut(static_cast<Real>(y)) : Real(1)) /
                     (static_cast<Real>(m) * static_cast<Real>(n));
      if (w == 0) continue;
      rows[n - 1].push_back({y, A(m, n) * w, A(n, m) * w});
      ++pairs;
    }
  }

  const Real t_max = T * std::sqrt(opt.gaussian_exponent);
  const auto nodes = detail::composite_gauss(detail::diagonal_panels(t_max, opt.panel_growth), opt.gauss_points);
  SpectralWeightCache cache(form, opt.spec);
  cache.ensure(nodes.x);
  const bool self_dual = form.mu == form.mu_dual;

  struct Pair {
    Complex d1, d2;
  };
  auto D = parallel_map<Pair>(nodes.x.size(), [&](std::size_t i) {
    const Real t = nodes.x[i];
    const MellinNodes& U = cache.U_nodes(t);
    const MellinNodes& V1 = cache.V_nodes(t, VVariant::V1);
    const MellinNodes& V2 = cache.V_nodes(t, VVariant::V2);
    const i64 nU = std::min(n_max, gl2_cutoff(opt.spec, U, t));
    const RsCutoff yc = rs_cutoffs(opt.spec, V1, V2, t);
    const i64 yV = std::min(y_max, std::max(yc.Y1, yc.Y2));
    Pair out{{0, 0}, {0, 0}};
    for (i64 n = 1; n <= nU; ++n) {
      const auto& row = rows[n - 1];
      if (row.empty()) continue;
      Complex s1{0, 0}, s2{0, 0};
      for (const auto& e : row) {
        if (e.y > yV) break;
        const Complex v1 = V1(static_cast<Real>(e.y));
        s1 += e.c1 * v1;
        s2 += e.c2 * (self_dual ? v1 : V2(static_cast<Real>(e.y)));
      }
      const Complex u = U(static_cast<Real>(n));
      out.d1 += u * s1;
      out.d2 += u * s2;
    }
    return out;
  });

  const Complex l = l_one(form, opt.spec);
  const Complex ld = form.self_dual ? l : l_one(dual_form(form), opt.spec);
  const Real lead_density = 2 * (l * ld).real() / (kPi * kPi / 6);

  DiagonalReport rep;
  rep.T = T;
  Complex d1{0, 0}, d2{0, 0};
  Real lead = 0, slack = 0;
  for (std::size_t i = 0; i < nodes.x.size(); ++i) {
    const Real t = nodes.x[i];
    const Real g = nodes.w[i] * std::exp(-(t * t) / (T * T)) * std::tanh(kPi * t) * t;
    d1 += g * D[i].d1;
    d2 += g * D[i].d2;
    lead += g * lead_density;
    slack += g * std::abs(lead_density) * std::pow(1 + t, Real(-0.25));
  }
  rep.delta1 = (2 / kPi * d1).real();
  rep.delta2 = (2 / kPi * d2).real();
  rep.total = rep.delta1 + rep.delta2;
  rep.leading = 2 / kPi * lead;
  rep.correction = rep.total - rep.leading;
  rep.slack = 2 / kPi * slack;
  rep.n_max = n_max;
  rep.y_max = y_max;
  rep.t_nodes = nodes.x.size();
  rep.pairs = pairs;
  return rep;
}

inline Real diagonal_term_numeric(const GL3Form& form, Real T, const DiagonalCaps& caps = {}, const DiagonalOptions& opt = {}) {
  return diagonal_term_report(form, T, caps, opt).total;
}

// ---------------------------------------------------------------------------
// Continuous spectrum.

struct ContinuousOptions {
  WeightSpec spec{16, 0.5L, 1e-9L, 1e-11L};
  int gauss_points = 12;
  Real panel_width = 1;
  // Default r_max = T sqrt(gaussian_exponent).
  Real gaussian_exponent = 12;
  // Double-precision Dirichlet sums (about 1e-13 relative) for the sweep.
  bool fast_sums = true;
};

struct ContinuousResult {
  Complex value{0, 0};
  Real tail_estimate = 0;
  Real r_max = 0;
  std::size_t nodes = 0;
  i64 coefficients = 0;
  Real min_integrand = 0;
};

namespace detail {

/// e^{-t^2/T^2} L(1/2+it, f) L(1/2-it, f) |zeta(1/2+it)|^2 / |zeta(1+2it)|^2 with
/// the L-values from a prebuilt coefficient table. At t = 0 the zeta(1) pole
/// in the denominator makes the value 0.
inline Complex continuous_integrand(const GL3Form& form, Real t, Real T, const Degree3Coefficients& coef, const WeightSpec& spec,
                                    bool use_conjugate, bool fast) {
  if (t == 0) return {0, 0};
  const Real a = std::abs(t);
  auto L = [&](Complex s) {
    auto k = degree3_kernels(form, s, spec, 1);
    // The table is sized from samples along the line; a node that needs more
    // gets its own.
    if (coef.size() < std::max(k.N1, k.N2))
      return degree3_afe_sum(form, s, k, Degree3Coefficients::build(form, std::max(k.N1, k.N2)), fast).value;
    return degree3_afe_sum(form, s, k, coef, fast).value;
  };
  const Complex lp = L(Complex(0.5L, a));
  const Complex lm = use_conjugate ? std::conj(lp) : L(Complex(0.5L, -a));
  const Real z = std::norm(riemann_zeta(Complex(0.5L, a)));
  const Real z1 = std::norm(riemann_zeta(Complex(1, 2 * a)));
  return std::exp(-(t * t) / (T * T)) * lp * lm * z / z1;
}

}  // namespace detail

/// The integrand at one t, both L-values computed independently.
inline Complex continuous_integrand(const GL3Form& form, Real t, Real T, const WeightSpec& spec = ContinuousOptions{}.spec) {
  if (!(T > 0)) throw InputError("continuous_integrand: T must be positive");
  if (t == 0) return {0, 0};
  const i64 N = std::max(degree3_afe_length(form, Complex(0.5L, std::abs(t)), spec),
                         degree3_afe_length(form, Complex(0.5L, -std::abs(t)), spec));
  return detail::continuous_integrand(form, t, T, Degree3Coefficients::build(form, N), spec, false, false);
}

/// \int_R of the integrand above, as 2 \int_0^{r_max} (the integrand is even)
/// by composite Gauss-Legendre. For a self-dual form L(1/2-it, f) is taken as
/// the conjugate of L(1/2+it, f). r_max <= 0 picks T sqrt(gaussian_exponent).
inline ContinuousResult continuous_contribution_result(const GL3Form& form, Real T, Real r_max = 0, const ContinuousOptions& opt = {}) {
  if (!(T > 0)) throw InputError("continuous_contribution: T must be positive");
  if (opt.gauss_points < 2 || !(opt.panel_width > 0)) throw InputError("continuous_contribution: bad options");
  if (r_max <= 0) r_max = T * std::sqrt(opt.gaussian_exponent);
  std::vector<Real> edges;
  const auto panels = static_cast<std::size_t>(std::ceil(r_max / opt.panel_width));
  for (std::size_t i = 0; i <= panels; ++i) edges.push_back(r_max * static_cast<Real>(i) / static_cast<Real>(panels));
  const auto nodes = detail::composite_gauss(edges, opt.gauss_points);
  i64 N = 0;
  for (int i = 0; i <= 8; ++i) {
    const Real t = r_max * static_cast<Real>(i) / 8;
    N = std::max({N, degree3_afe_length(form, Complex(0.5L, t), opt.spec), degree3_afe_length(form, Complex(0.5L, -t), opt.spec)});
  }
  const auto coef = Degree3Coefficients::build(form, N + N / 4);
  const bool conj = form.self_dual;
  auto vals = parallel_map<Complex>(nodes.x.size(), [&](std::size_t i) {
    return detail::continuous_integrand(form, nodes.x[i], T, coef, opt.spec, conj, opt.fast_sums);
  });
  ContinuousResult r;
  r.r_max = r_max;
  r.nodes = nodes.x.size();
  r.coefficients = coef.size();
  r.min_integrand = vals.empty() ? 0 : vals.front().real();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    r.value += 2 * nodes.w[i] * vals[i];
    r.min_integrand = std::min(r.min_integrand, vals[i].real());
  }
  // Gaussian tail past r_max, with the integrand's size at r_max as the scale.
  const Complex edge = detail::continuous_integrand(form, r_max, T, coef, opt.spec, conj, opt.fast_sums);
  r.tail_estimate = 2 * std::abs(edge) * T * T / (2 * r_max);
  return r;
}

inline Real continuous_contribution(const GL3Form& form, Real T, Real r_max = 0, const ContinuousOptions& opt = {}) {
  return continuous_contribution_result(form, T, r_max, opt).value.real();
}

// ---------------------------------------------------------------------------
// Averaged product over fixtures.

struct FixtureTerm {
  Real t = 0;
  bool eisenstein = false;
  Real weight = 0;          // e^{-t^2/T^2}
  Complex rankin_selberg;   // L(1/2, f x u)
  Real gl2 = 0;             // L(1/2, u)
  Complex term;             // weight * product; divided by |zeta(1+2ir)|^2 for surrogates
  std::string status = "ok";
};

struct AverageReport {
  Real T = 0;
  Real main_term = 0;
  Real diagonal_numeric = 0;
  Real continuous_term = 0;
  std::optional<Real> discrete_lhs;
  Real deviation = 0;
  Real ratio_diagonal_main = 0;
  Real ratio_spectral_main = 0;
  // truncation records
  i64 diagonal_n_max = 0, diagonal_y_max = 0;
  std::size_t diagonal_t_nodes = 0;
  Real continuous_r_max = 0;
  std::size_t continuous_nodes = 0;
  std::size_t fixtures_used = 0, fixtures_skipped = 0;
  bool partial_coverage = true;
  std::vector<FixtureTerm> terms;

  Real recomputed_deviation() const { return discrete_lhs.value_or(0) + continuous_term - main_term; }
};

struct AverageOptions {
  WeightSpec fixture_spec;
  DiagonalOptions diagonal;
  DiagonalCaps caps;
  ContinuousOptions continuous;
  Real r_max = 0;
  bool with_diagonal = true;
};

/// One fixture's contribution e^{-t^2/T^2} L(1/2, f x u) L(1/2, u). For an
/// Eisenstein surrogate the Rankin-Selberg value comes from the eta double sums
/// and the term is divided by |zeta(1+2ir)|^2, which makes it the continuous
/// integrand at r.
inline FixtureTerm fixture_term(const GL3Form& form, const MaassFixture& fx, Real T, const WeightSpec& spec = {}) {
  FixtureTerm ft;
  ft.t = fx.t;
  ft.eisenstein = fx.eisenstein_r.has_value();
  ft.weight = std::exp(-(fx.t * fx.t) / (T * T));
  ft.rankin_selberg = ft.eisenstein ? central_value_rs_eisenstein(form, *fx.eisenstein_r, spec) : central_value_rs(form, fx, spec);
  ft.gl2 = central_value_gl2(fx, spec);
  ft.term = ft.weight * ft.rankin_selberg * ft.gl2;
  if (ft.eisenstein) ft.term /= std::norm(riemann_zeta(Complex(1, 2 * *fx.eisenstein_r)));
  return ft;
}

inline AverageReport averaged_product(const GL3Form& form, const std::vector<MaassFixture>& fixtures, Real T,
                                      const AverageOptions& opt = {}) {
  if (!(T > 0)) throw InputError("averaged_product: T must be positive");
  for (const auto& f : fixtures)
    if (f.parity != "even") throw InputError("averaged_product: only even forms enter the average");
  AverageReport rep;
  rep.T = T;
  rep.main_term = main_term(form, T, opt.fixture_spec);
  if (opt.with_diagonal) {
    auto d = diagonal_term_report(form, T, opt.caps, opt.diagonal);
    rep.diagonal_numeric = d.total;
    rep.diagonal_n_max = d.n_max;
    rep.diagonal_y_max = d.y_max;
    rep.diagonal_t_nodes = d.t_nodes;
  }
  auto c = continuous_contribution_result(form, T, opt.r_max, opt.continuous);
  rep.continuous_term = c.value.real();
  rep.continuous_r_max = c.r_max;
  rep.continuous_nodes = c.nodes;

  // Fixtures whose coefficient lists fall short are recorded, not fatal.
  rep.terms = parallel_map<FixtureTerm>(fixtures.size(), [&](std::size_t i) {
    try {
      return fixture_term(form, fixtures[i], T, opt.fixture_spec);
    } catch (const InputError& e) {
      FixtureTerm ft;
      ft.t = fixtures[i].t;
      ft.eisenstein = fixtures[i].eisenstein_r.has_value();
      ft.status = e.what();
      return ft;
    }
  });
  Real discrete = 0, t_top = 0;
  for (const auto& ft : rep.terms) {
    if (ft.status != "ok") {
      ++rep.fixtures_skipped;
      continue;
    }
    if (ft.eisenstein) continue;
    discrete += ft.term.real();
    t_top = std::max(t_top, ft.t);
    ++rep.fixtures_used;
  }
  rep.discrete_lhs = discrete;
  rep.partial_coverage = rep.fixtures_skipped > 0 || t_top < 3 * T;
  rep.deviation = rep.recomputed_deviation();
  rep.ratio_diagonal_main = rep.main_term != 0 ? rep.diagonal_numeric / rep.main_term : 0;
  rep.ratio_spectral_main = rep.main_term != 0 ? (discrete + rep.continuous_term) / rep.main_term : 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence. Reals travel as decimal strings.

inline nlohmann::json to_json(const FixtureTerm& t) {
  return {{"t", to_decimal(t.t)},
          {"eisenstein", t.eisenstein},
          {"weight", to_decimal(t.weight)},
          {"rankin_selberg", {to_decimal(t.rankin_selberg.real()), to_decimal(t.rankin_selberg.imag())}},
          {"gl2", to_decimal(t.gl2)},
          {"term", {to_decimal(t.term.real()), to_decimal(t.term.imag())}},
          {"status", t.status}};
}

inline nlohmann::json to_json(const AverageReport& r) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : r.terms) terms.push_back(to_json(t));
  nlohmann::json j = {{"T", to_decimal(r.T)},
                      {"main_term", to_decimal(r.main_term)},
                      {"diagonal_numeric", to_decimal(r.diagonal_numeric)},
                      {"continuous_term", to_decimal(r.continuous_term)},
                      {"discrete_lhs", r.discrete_lhs ? nlohmann::json(to_decimal(*r.discrete_lhs)) : nlohmann::json(nullptr)},
                      {"deviation", to_decimal(r.deviation)},
                      {"ratio_diagonal_main", to_decimal(r.ratio_diagonal_main)},
                      {"ratio_spectral_main", to_decimal(r.ratio_spectral_main)},
                      {"truncations",
                       {{"diagonal_n_max", r.diagonal_n_max},
                        {"diagonal_y_max", r.diagonal_y_max},
                        {"diagonal_t_nodes", r.diagonal_t_nodes},
                        {"continuous_r_max", to_decimal(r.continuous_r_max)},
                        {"continuous_nodes", r.continuous_nodes},
                        {"fixtures_used", r.fixtures_used},
                        {"fixtures_skipped", r.fixtures_skipped},
                        {"partial_coverage", r.partial_coverage}}},
                      {"terms", terms}};
  return j;
}

inline AverageReport average_report_from_json(const nlohmann::json& j) {
  auto real = [](const nlohmann::json& v) { return parse_decimal(v.get<std::string>()); };
  auto cplx = [&](const nlohmann::json& v) { return Complex(real(v.at(0)), real(v.at(1))); };
  try {
    AverageReport r;
    r.T = real(j.at("T"));
    r.main_term = real(j.at("main_term"));
    r.diagonal_numeric = real(j.at("diagonal_numeric"));
    r.continuous_term = real(j.at("continuous_term"));
    if (!j.at("discrete_lhs").is_null()) r.discrete_lhs = real(j.at("discrete_lhs"));
    r.deviation = real(j.at("deviation"));
    r.ratio_diagonal_main = real(j.at("ratio_diagonal_main"));
    r.ratio_spectral_main = real(j.at("ratio_spectral_main"));
    const auto& tr = j.at("truncations");
    r.diagonal_n_max = tr.at("diagonal_n_max").get<i64>();
    r.diagonal_y_max = tr.at("diagonal_y_max").get<i64>();
    r.diagonal_t_nodes = tr.at("diagonal_t_nodes").get<std::size_t>();
    r.continuous_r_max = real(tr.at("continuous_r_max"));
    r.continuous_nodes = tr.at("continuous_nodes").get<std::size_t>();
    r.fixtures_used = tr.at("fixtures_used").get<std::size_t>();
    r.fixtures_skipped = tr.at("fixtures_skipped").get<std::size_t>();
    r.partial_coverage = tr.at("partial_coverage").get<bool>();
    for (const auto& t : j.at("terms")) {
      FixtureTerm ft;
      ft.t = real(t.at("t"));
      ft.eisenstein = t.at("eisenstein").get<bool>();
      ft.weight = real(t.at("weight"));
      ft.rankin_selberg = cplx(t.at("rankin_selberg"));
      ft.gl2 = real(t.at("gl2"));
      ft.term = cplx(t.at("term"));
      ft.status = t.at("status").get<std::string>();
      r.terms.push_back(ft);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("average report: ") + e.what());
  }
}

/// One-line CSV: T, main, diagonal, continuous, deviation.
inline std::string average_csv_header() { return "T,main,diagonal,continuous,deviation"; }

inline std::string to_csv(const AverageReport& r) {
  return to_decimal(r.T) + "," + to_decimal(r.main_term) + "," + to_decimal(r.diagonal_numeric) + "," +
         to_decimal(r.continuous_term) + "," + to_decimal(r.deviation);
}

}  // namespace kgl3

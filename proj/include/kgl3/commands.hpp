#pragma once

// Command bodies shared by the command-line tool and the acceptance run. Each
// returns a Report; printing and exit codes belong to the caller.

#include <random>

#include "kgl3/exactarith.hpp"
#include "kgl3/harness.hpp"
#include "kgl3/io.hpp"
#include "kgl3/kuznetsov.hpp"
#include "kgl3/quadrature.hpp"
#include "kgl3/special.hpp"
#include "kgl3/voronoi.hpp"

namespace kgl3 {

inline GL3Form make_form(const std::string& name, const RunConfig& cfg) {
  if (name == "d3") return build_d3_form();
  if (name == "sym2") return build_sym_square(cfg.prime_cap);
  throw InputError("unknown form '" + name + "' (expected d3 or sym2)");
}

// ---------------------------------------------------------------------------
// lvalue

struct LvalueArgs {
  std::string form = "sym2";
  std::vector<Real> t{0};
  bool zeta = false;           // also |zeta(1/2+it)|^2 against Euler-Maclaurin
  Real zeta_tol = 1e-6L;
  std::string fixtures;        // optional: L(1/2, u) and L(1/2, f x u) per record
};

inline Report run_lvalue(const RunConfig& cfg, const LvalueArgs& a) {
  Report r;
  r.command = "lvalue";
  r.inputs = {{"form", a.form}, {"fixtures", a.fixtures}, {"zeta", a.zeta}};
  for (Real t : a.t) r.inputs["t"].push_back(to_decimal(t));
  const WeightSpec spec = cfg.weight_spec();
  const GL3Form f = make_form(a.form, cfg);
  auto& vals = r.outputs["values"] = nlohmann::json::array();
  for (Real t : a.t) {
    const Complex s(0.5L, t);
    nlohmann::json row{{"t", to_decimal(t)}};
    if (f.cuspidal) {
      row["L"] = complex_json(gl3_critical_value(f, s, spec));
      row["method"] = "approximate functional equation";
    } else {
      const Complex z = riemann_zeta(s);
      row["L"] = complex_json(z * z * z);
      row["method"] = "zeta cubed";
    }
    if (a.zeta) {
      if (t < 0) throw InputError("lvalue: --zeta needs t >= 0");
      const Real afe = zeta_square_afe(t, spec), ref = zeta_square_oracle(t);
      const Real rel = std::abs(afe - ref) / ref;
      row["zeta_square_afe"] = to_decimal(afe);
      row["zeta_square_reference"] = to_decimal(ref);
      r.residuals["zeta_square_t=" + to_decimal(t)] = to_decimal(rel);
      r.check(rel <= a.zeta_tol, "|zeta|^2 mismatch at t = " + to_decimal(t));
    }
    vals.push_back(row);
  }
  if (!a.fixtures.empty()) {
    auto fx = ingest_fixtures(a.fixtures);
    auto& rows = r.outputs["fixtures"] = nlohmann::json::array();
    for (const auto& u : fx) {
      nlohmann::json row{{"t", to_decimal(u.t)}, {"gl2", to_decimal(central_value_gl2(u, spec))}};
      if (f.cuspidal) row["rankin_selberg"] = complex_json(central_value_rs(f, u, spec));
      rows.push_back(row);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// verify weil: enumeration against the prime-power composition and Weil's bound.

struct WeilArgs {
  int count = 10000;
  i64 c_max = 0;  // 0: take RunConfig::c_max
  i64 n_range = 100000;
  std::uint64_t seed = 1;
  Real tol = 1e-9L;
};

inline Report run_verify_weil(const RunConfig& cfg, const WeilArgs& a) {
  if (a.count < 1) throw InputError("verify weil: count must be positive");
  const i64 c_max = a.c_max > 0 ? a.c_max : cfg.c_max;
  Report r;
  r.command = "verify weil";
  r.inputs = {{"count", a.count}, {"c_max", c_max}, {"n_range", a.n_range}, {"seed", a.seed}, {"tol", to_decimal(a.tol)}};
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<i64> cd(1, c_max), nd(-a.n_range, a.n_range);
  struct Triple {
    i64 n, l, c;
  };
  std::vector<Triple> triples(static_cast<std::size_t>(a.count));
  for (auto& t : triples) t = {nd(rng), nd(rng), cd(rng)};
  struct Out {
    Real gap, ratio;
  };
  auto res = parallel_map<Out>(triples.size(), [&](std::size_t i) {
    const auto& t = triples[i];
    const Complex s = kloosterman(t.n, t.l, t.c);
    return Out{std::abs(s - kloosterman_composed(t.n, t.l, t.c)), std::abs(s) / weil_bound(t.n, t.l, t.c)};
  });
  Real worst_gap = 0, worst_ratio = 0;
  std::size_t violations = 0;
  for (const auto& o : res) {
    worst_gap = std::max(worst_gap, o.gap);
    worst_ratio = std::max(worst_ratio, o.ratio);
    if (o.ratio > 1 + 1e-12L) ++violations;
  }
  r.outputs = {{"triples", a.count}, {"weil_violations", violations}, {"max_weil_ratio", to_decimal(worst_ratio)}};
  r.residuals = {{"max_composition_gap", to_decimal(worst_gap)}};
  r.check(worst_gap <= a.tol, "composition gap above tolerance");
  r.check(violations == 0, "Weil bound violated");
  return r;
}

// ---------------------------------------------------------------------------
// verify identity618: the twisted Kloosterman identity on random admissible tuples.

struct TwistArgs {
  int count = 200;
  i64 cm_max = 200;
  i64 range = 50;
  std::uint64_t seed = 7;
  Real tol = 1e-9L;  // relative to c*m
};

inline Report run_verify_identity(const RunConfig&, const TwistArgs& a) {
  if (a.count < 1 || a.cm_max < 1 || a.range < 1) throw InputError("verify identity618: count, cm-max and range must be positive");
  Report r;
  r.command = "verify identity618";
  r.inputs = {{"count", a.count}, {"cm_max", a.cm_max}, {"range", a.range}, {"seed", a.seed}, {"tol", to_decimal(a.tol)}};
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<i64> cd(1, a.cm_max), vd(-a.range, a.range);
  struct Tuple {
    i64 l, n1, n2, m, c;
  };
  std::vector<Tuple> tuples;
  while (static_cast<int>(tuples.size()) < a.count) {
    const i64 c = cd(rng), m = cd(rng);
    if (c * m > a.cm_max) continue;
    auto ds = divisors(c * m);
    const i64 n1 = ds[std::uniform_int_distribution<std::size_t>(0, ds.size() - 1)(rng)];
    tuples.push_back({vd(rng), n1, vd(rng), m, c});
  }
  auto res = parallel_map<Real>(tuples.size(), [&](std::size_t i) {
    const auto& t = tuples[i];
    return kloosterman_twist_identity_residual(t.l, t.n1, t.n2, t.m, t.c) / static_cast<Real>(t.c * t.m);
  });
  Real worst = 0;
  for (Real x : res) worst = std::max(worst, x);
  r.outputs = {{"tuples", a.count}};
  r.residuals = {{"max_residual_over_cm", to_decimal(worst)}};
  r.check(worst <= a.tol, "twisted identity residual above tolerance");
  return r;
}

// ---------------------------------------------------------------------------
// verify bump: the double Dirichlet series against its zeta closed form.

struct BumpArgs {
  std::string form = "d3";
  Real s = 2, w = 2;
  i64 cutoff = 0;  // 0: RunConfig::coefficient_cap
  Real tol = 1e-4L;
};

inline Report run_verify_bump(const RunConfig& cfg, const BumpArgs& a) {
  const i64 cutoff = a.cutoff > 0 ? a.cutoff : cfg.coefficient_cap;
  Report r;
  r.command = "verify bump";
  r.inputs = {{"form", a.form}, {"s", to_decimal(a.s)}, {"w", to_decimal(a.w)}, {"cutoff", cutoff}, {"tol", to_decimal(a.tol)}};
  const GL3Form f = make_form(a.form, cfg);
  const Complex lhs = bump_double_sum(f, a.s, a.w, cutoff);
  Real rel;
  if (!f.cuspidal) {
    // zeta(s+1)^3 zeta(w+1)^3 / zeta(s+w+2), every zeta by Euler-Maclaurin.
    const Complex rhs = std::pow(riemann_zeta(Complex(a.s + 1, 0)), 3) * std::pow(riemann_zeta(Complex(a.w + 1, 0)), 3) /
                        riemann_zeta(Complex(a.s + a.w + 2, 0));
    r.outputs["rhs"] = complex_json(rhs);
    rel = std::abs(lhs - rhs) / std::abs(rhs);
  } else {
    rel = bump_identity_residual(f, a.s, a.w, cutoff);
  }
  r.outputs["lhs"] = complex_json(lhs);
  r.residuals = {{"relative", to_decimal(rel)}};
  r.check(rel <= a.tol, "bump identity residual above tolerance");
  return r;
}

// ---------------------------------------------------------------------------
// verify voronoi

struct VoronoiArgs {
  std::string form = "d3";
  i64 n = 1, a = 1, c = 3;
  Real lo = 50, hi = 100, plateau = 0.02L;
  i64 cutoff = 0;  // 0: RunConfig::m2_cutoff
  bool halving = true;
  Real tol = 1e-4L;
};

inline Report run_verify_voronoi(const RunConfig& cfg, const VoronoiArgs& v) {
  const i64 cutoff = v.cutoff > 0 ? v.cutoff : cfg.m2_cutoff;
  if (!(v.lo > 0) || !(v.hi > v.lo) || !(v.plateau > 0) || !(v.plateau < 0.5L))
    throw InputError("verify voronoi: need 0 < lo < hi and 0 < plateau < 1/2");
  Report r;
  r.command = "verify voronoi";
  r.inputs = {{"form", v.form}, {"n", v.n}, {"a", v.a}, {"c", v.c}, {"lo", to_decimal(v.lo)}, {"hi", to_decimal(v.hi)},
              {"plateau", to_decimal(v.plateau)}, {"cutoff", cutoff}, {"halving", v.halving}, {"tol", to_decimal(v.tol)}};
  const GL3Form f = make_form(v.form, cfg);
  const CompactFunction phi = bump_function(smooth_bump(v.lo, v.hi, v.plateau));
  const VoronoiSides fine = voronoi_sides(f, v.n, v.a, v.c, phi, cutoff, cfg.voronoi_sigma);
  r.outputs = {{"lhs", complex_json(fine.lhs)}, {"rhs", complex_json(fine.rhs)}, {"polar", complex_json(fine.polar)},
               {"kernel_nodes", fine.truncation.kernel_nodes}};
  r.residuals["relative"] = to_decimal(fine.relative_residual());
  r.check(fine.relative_residual() <= v.tol, "sides differ beyond tolerance");
  if (v.halving) {
    if (cutoff < 2) throw InputError("verify voronoi: halving needs cutoff >= 2");
    const VoronoiSides coarse = voronoi_sides(f, v.n, v.a, v.c, phi, cutoff / 2, cfg.voronoi_sigma);
    r.residuals["relative_at_half_cutoff"] = to_decimal(coarse.relative_residual());
    r.check(fine.relative_residual() <= coarse.relative_residual() / 2, "residual did not halve when the cutoff doubled");
  }
  return r;
}

// ---------------------------------------------------------------------------
// verify kuznetsov

struct KuznetsovArgs {
  i64 n = 1, l = 1;
  Real T = 10;
  std::string fixtures;
  bool symmetry = true;
  Real symmetry_tol = 1e-10L;
};

inline Report run_verify_kuznetsov(const RunConfig& cfg, const KuznetsovArgs& a) {
  if (!(a.T > 0)) throw InputError("verify kuznetsov: T must be positive");
  Report r;
  r.command = "verify kuznetsov";
  r.inputs = {{"n", a.n}, {"l", a.l}, {"T", to_decimal(a.T)}, {"c_max", cfg.c_max}, {"r_max", to_decimal(cfg.r_max)},
              {"fixtures", a.fixtures}, {"test_function", "exp(-t^2/T^2)"}};
  std::vector<MaassFixture> fx;
  if (!a.fixtures.empty()) fx = ingest_fixtures(a.fixtures);
  const auto h = gaussian_test_function(a.T);
  const auto k = kuznetsov_residual(a.n, a.l, h, fx, cfg.c_max, cfg.r_max);
  r.outputs = {{"delta_term", complex_json(k.delta_term)},
               {"kloosterman_term", complex_json(k.kloosterman_term)},
               {"geometric", complex_json(k.geometric())},
               {"continuous_term", complex_json(k.continuous_term)},
               {"discrete_term", k.discrete_term ? complex_json(*k.discrete_term) : nlohmann::json(nullptr)},
               {"spectral_count", k.truncations.spectral_count},
               {"norm_conventions", k.norm_conventions}};
  r.residuals = {{"residual", complex_json(k.residual)},
                 {"tail_estimate", to_decimal(k.tail_estimate)},
                 {"continuous_error", to_decimal(k.continuous_error)}};
  if (a.n == a.l) {
    // The forms not supplied contribute h(t_j)|a_j(n)|^2 >= 0.
    r.check(k.residual.real() >= -k.error_estimate(), "geometric - continuous - discrete is negative beyond the error estimate");
  }
  if (a.symmetry && a.n != a.l) {
    const auto swapped = geometric_side(a.l, a.n, h, cfg.c_max);
    const Real gap = std::abs(swapped.value() - k.geometric());
    r.residuals["symmetry_gap"] = to_decimal(gap);
    r.check(gap <= a.symmetry_tol, "geometric side not symmetric in (n, l)");
  }
  return r;
}

// ---------------------------------------------------------------------------
// verify stirling: log-gamma identities and the leading Stirling quotient.

struct StirlingArgs {
  Real identity_tol = 1e-12L;
  Real leading_tol = 0.02L;
};

inline Report run_verify_stirling(const RunConfig&, const StirlingArgs& a) {
  Report r;
  r.command = "verify stirling";
  r.inputs = {{"identity_tol", to_decimal(a.identity_tol)}, {"leading_tol", to_decimal(a.leading_tol)}};
  Real real_gap = 0;
  for (Real x = -9.75L; x < 30; x += 0.5L) {
    const Real g = std::tgamma(x);
    real_gap = std::max(real_gap, std::abs(std::exp(log_gamma(Complex(x, 0))) - g) / std::abs(g));
  }
  Real rec_gap = 0, refl_gap = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> re(-50, 50), im(-60, 60);
  for (int i = 0; i < 200; ++i) {
    const Complex z(re(rng), im(rng));
    const Complex rhs = z * std::exp(log_gamma(z));
    rec_gap = std::max(rec_gap, std::abs(std::exp(log_gamma(z + Real(1))) - rhs) / std::abs(rhs));
    if (std::abs(z.imag()) < 20) {
      const Complex refl = kPi / std::sin(kPi * z);
      refl_gap = std::max(refl_gap, std::abs(std::exp(log_gamma(z) + log_gamma(Real(1) - z)) - refl) / std::abs(refl));
    }
  }
  Real axis_gap = 0;
  for (Real y : {Real(0.5), Real(3), Real(17), Real(80)})
    axis_gap = std::max(axis_gap, std::abs(2 * log_gamma(Complex(0, y)).real() - std::log(kPi / (y * std::sinh(kPi * y)))));
  auto& lead = r.outputs["leading_term"] = nlohmann::json::array();
  Real worst_lead = 0;
  for (Real t : {Real(100), Real(200), Real(400)}) {
    const Complex u(0.5L, 3);
    const Complex exact = gamma_ratio_gl2(u, t).value;
    const Complex approx = gamma_ratio_gl2(u, t, GammaRegime::stirling_asymptotic).value;
    const Real dev = std::abs(exact - approx) / std::abs(approx);
    worst_lead = std::max(worst_lead, dev);
    lead.push_back({{"t", to_decimal(t)}, {"exact", complex_json(exact)}, {"stirling", complex_json(approx)}, {"relative", to_decimal(dev)}});
  }
  r.residuals = {{"tgamma", to_decimal(real_gap)},
                 {"recurrence", to_decimal(rec_gap)},
                 {"reflection", to_decimal(refl_gap)},
                 {"imaginary_axis", to_decimal(axis_gap)},
                 {"leading_term", to_decimal(worst_lead)}};
  r.check(std::max({real_gap, rec_gap, refl_gap, axis_gap}) <= a.identity_tol, "log-gamma identity gap above tolerance");
  r.check(worst_lead <= a.leading_tol, "leading Stirling quotient off by more than the tolerance");
  return r;
}

// ---------------------------------------------------------------------------
// average

struct AverageArgs {
  std::string form = "sym2";
  std::vector<Real> T{20};
  std::string fixtures;
  bool diagonal = true;
  Real r_max = 0;  // 0: T sqrt(gaussian exponent)
};

inline Report run_average(const RunConfig& cfg, const AverageArgs& a) {
  if (a.T.empty()) throw InputError("average: need at least one T");
  Report r;
  r.command = "average";
  r.inputs = {{"form", a.form}, {"fixtures", a.fixtures}, {"diagonal", a.diagonal}, {"r_max", to_decimal(a.r_max)}};
  for (Real T : a.T) r.inputs["T"].push_back(to_decimal(T));
  std::vector<MaassFixture> fx;
  if (!a.fixtures.empty()) fx = ingest_fixtures(a.fixtures);
  const GL3Form f = make_form(a.form, cfg);
  AverageOptions opt;
  opt.fixture_spec = cfg.weight_spec();
  opt.diagonal.spec = cfg.weight_spec();
  opt.caps = {cfg.diagonal_n_cap, cfg.diagonal_y_cap};
  opt.with_diagonal = a.diagonal;
  opt.r_max = a.r_max;
  auto& reps = r.outputs["reports"] = nlohmann::json::array();
  std::string csv = average_csv_header() + "\n";
  for (Real T : a.T) {
    const AverageReport rep = averaged_product(f, fx, T, opt);
    reps.push_back(to_json(rep));
    csv += to_csv(rep) + "\n";
    r.residuals["deviation_T=" + to_decimal(T)] = to_decimal(rep.deviation);
    r.check(rep.deviation == rep.recomputed_deviation(), "deviation does not match its parts");
  }
  r.csv = csv;
  return r;
}

// ---------------------------------------------------------------------------
// ingest-check

inline Report run_ingest_check(const RunConfig&, const std::string& path) {
  Report r;
  r.command = "ingest-check";
  r.inputs = {{"path", path}};
  const auto fx = ingest_fixtures(path);
  Real t_lo = 0, t_hi = 0;
  std::size_t min_coeffs = 0, max_coeffs = 0;
  std::set<std::string> conventions;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const auto& f = fx[i];
    t_lo = i ? std::min(t_lo, f.t) : f.t;
    t_hi = i ? std::max(t_hi, f.t) : f.t;
    min_coeffs = i ? std::min(min_coeffs, f.coeffs.size()) : f.coeffs.size();
    max_coeffs = std::max(max_coeffs, f.coeffs.size());
    conventions.insert(f.norm_convention);
  }
  r.outputs = {{"records", fx.size()},
               {"t_min", fx.empty() ? nlohmann::json(nullptr) : nlohmann::json(to_decimal(t_lo))},
               {"t_max", fx.empty() ? nlohmann::json(nullptr) : nlohmann::json(to_decimal(t_hi))},
               {"min_coefficients", min_coeffs},
               {"max_coefficients", max_coeffs},
               {"norm_conventions", std::vector<std::string>(conventions.begin(), conventions.end())}};
  return r;
}

}  // namespace kgl3

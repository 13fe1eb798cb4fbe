// kgl3_cli: verification commands and spectral averages.
// Exit status: 0 pass, 1 a check failed, 2 bad input.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "kgl3/commands.hpp"

using namespace kgl3;

namespace {

struct Globals {
  std::string config_path;
  std::string precision;
  int threads = -1;
  std::string out;
  std::string format;
  bool reproducible = false;
};

/// Reals come in as text so that they parse at full precision.
void add_real(CLI::App* app, const std::string& name, Real& target, const std::string& help) {
  app->add_option_function<std::string>(name, [&target](const std::string& s) { target = parse_decimal(s); }, help);
}

void add_reals(CLI::App* app, const std::string& name, std::vector<Real>& target, const std::string& help) {
  app->add_option_function<std::vector<std::string>>(
      name,
      [&target](const std::vector<std::string>& v) {
        target.clear();
        for (const auto& s : v) target.push_back(parse_decimal(s));
      },
      help);
}

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (!g.precision.empty()) c.precision = parse_decimal(g.precision);
  if (g.threads >= 0) c.threads = static_cast<unsigned>(g.threads);
  if (!g.out.empty()) c.out = g.out;
  if (!g.format.empty()) c.format = g.format;
  if (g.reproducible) c.reproducible = true;
  c.validate();
  return c;
}

void emit(const std::string& text, const RunConfig& cfg) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InputError("cannot write '" + cfg.out + "'");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GL(3) x GL(2) moment toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--precision", g.precision, "tail tolerance of the weight kernels");
  app.add_option("--threads", g.threads, "worker threads (0: all cores)");
  app.add_option("--out", g.out, "write the report here instead of stdout");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--reproducible", g.reproducible, "write runtime_ms as null so reports compare byte for byte");

  std::function<Report(const RunConfig&)> action;

  LvalueArgs lv;
  auto* lvalue = app.add_subcommand("lvalue", "central values L(1/2+it, f)");
  lvalue->add_option("--form", lv.form, "d3 or sym2");
  add_reals(lvalue, "--t", lv.t, "heights t (several allowed)");
  lvalue->add_flag("--zeta", lv.zeta, "also compare |zeta(1/2+it)|^2 with Euler-Maclaurin");
  add_real(lvalue, "--zeta-tol", lv.zeta_tol, "relative tolerance for --zeta");
  lvalue->add_option("--fixtures", lv.fixtures, "fixture file: GL(2) and Rankin-Selberg central values");
  lvalue->callback([&] { action = [&](const RunConfig& c) { return run_lvalue(c, lv); }; });

  auto* verify = app.add_subcommand("verify", "identity checks");
  verify->require_subcommand(1);
  verify->fallthrough();

  WeilArgs wa;
  auto* weil = verify->add_subcommand("weil", "Kloosterman enumeration vs composition; Weil bound");
  weil->add_option("--count", wa.count, "random triples");
  weil->add_option("--c-max", wa.c_max, "largest modulus (default: config c_max)");
  weil->add_option("--n-range", wa.n_range, "n and l drawn from [-range, range]");
  weil->add_option("--seed", wa.seed);
  add_real(weil, "--tol", wa.tol, "absolute tolerance");
  weil->callback([&] { action = [&](const RunConfig& c) { return run_verify_weil(c, wa); }; });

  TwistArgs ta;
  auto* ident = verify->add_subcommand("identity618", "twisted Kloosterman sum identity");
  ident->add_option("--count", ta.count, "random admissible tuples");
  ident->add_option("--cm-max", ta.cm_max, "bound on c*m");
  ident->add_option("--range", ta.range, "l and n2 drawn from [-range, range]");
  ident->add_option("--seed", ta.seed);
  add_real(ident, "--tol", ta.tol, "tolerance relative to c*m");
  ident->callback([&] { action = [&](const RunConfig& c) { return run_verify_identity(c, ta); }; });

  BumpArgs ba;
  auto* bump = verify->add_subcommand("bump", "double Dirichlet series against its zeta closed form");
  bump->add_option("--form", ba.form, "d3 or sym2");
  add_real(bump, "--s", ba.s, "s");
  add_real(bump, "--w", ba.w, "w");
  bump->add_option("--cutoff", ba.cutoff, "summation cutoff (default: config coefficient_cap)");
  add_real(bump, "--tol", ba.tol, "relative tolerance");
  bump->callback([&] { action = [&](const RunConfig& c) { return run_verify_bump(c, ba); }; });

  VoronoiArgs va;
  auto* vor = verify->add_subcommand("voronoi", "additively twisted Voronoi summation");
  vor->add_option("--form", va.form, "d3 or sym2");
  vor->add_option("--n", va.n);
  vor->add_option("--a", va.a);
  vor->add_option("--c", va.c);
  add_real(vor, "--lo", va.lo, "bump support start");
  add_real(vor, "--hi", va.hi, "bump support end");
  add_real(vor, "--plateau", va.plateau, "bump transition fraction");
  vor->add_option("--cutoff", va.cutoff, "m2 cutoff (default: config m2_cutoff)");
  vor->add_flag("!--no-halving", va.halving, "skip the run at half the cutoff");
  add_real(vor, "--tol", va.tol, "relative tolerance");
  vor->callback([&] { action = [&](const RunConfig& c) { return run_verify_voronoi(c, va); }; });

  KuznetsovArgs ka;
  auto* kuz = verify->add_subcommand("kuznetsov", "geometric, continuous and discrete sides");
  kuz->add_option("--n", ka.n);
  kuz->add_option("--l", ka.l);
  add_real(kuz, "--T", ka.T, "width of h(t) = exp(-t^2/T^2)");
  kuz->add_option("--fixtures", ka.fixtures, "fixture file for the discrete side");
  kuz->add_flag("!--no-symmetry", ka.symmetry, "skip the (n, l) swap check");
  kuz->callback([&] { action = [&](const RunConfig& c) { return run_verify_kuznetsov(c, ka); }; });

  StirlingArgs sa;
  auto* stir = verify->add_subcommand("stirling", "log-gamma identities and Stirling quotients");
  add_real(stir, "--identity-tol", sa.identity_tol, "relative tolerance of the identities");
  add_real(stir, "--leading-tol", sa.leading_tol, "relative tolerance of the leading quotient");
  stir->callback([&] { action = [&](const RunConfig& c) { return run_verify_stirling(c, sa); }; });

  AverageArgs aa;
  auto* avg = app.add_subcommand("average", "main, diagonal, continuous and discrete terms of the moment");
  avg->add_option("--form", aa.form, "sym2 (cuspidal forms only)");
  add_reals(avg, "--T", aa.T, "spectral widths (several allowed)");
  avg->add_option("--fixtures", aa.fixtures, "fixture file for the discrete side");
  avg->add_flag("!--no-diagonal", aa.diagonal, "skip the diagonal term");
  add_real(avg, "--r-max", aa.r_max, "continuous integral cutoff (default T sqrt(12))");
  avg->callback([&] { action = [&](const RunConfig& c) { return run_average(c, aa); }; });

  std::string ingest_path;
  auto* ingest = app.add_subcommand("ingest-check", "validate a fixture file");
  ingest->add_option("path", ingest_path, "fixture file")->required();
  ingest->callback([&] { action = [&](const RunConfig& c) { return run_ingest_check(c, ingest_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }

  try {
    const RunConfig cfg = resolve_config(g);
    worker_threads() = cfg.threads;
    const auto start = std::chrono::steady_clock::now();
    const Report rep = action(cfg);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    const auto doc = report_document(rep, cfg, cfg.reproducible ? std::nullopt : std::optional<long long>(ms));
    emit(cfg.format == "csv" ? report_csv(rep, doc) : doc.dump(2) + "\n", cfg);
    for (const auto& f : rep.failures) std::cerr << "FAIL: " << f << "\n";
    return rep.pass() ? 0 : 1;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const RegimeError& e) {
    std::cerr << "input error (regime): " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

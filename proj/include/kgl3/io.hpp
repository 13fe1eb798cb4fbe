#pragma once

// Fixture files, run configuration and report documents.

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgl3/afe.hpp"

namespace kgl3 {

// ---------------------------------------------------------------------------
// Fixture files: one JSON object per LF-terminated line.

namespace detail {

inline std::string line_error(const std::string& name, std::size_t line, const std::string& what) {
  return name + ":" + std::to_string(line) + ": " + what;
}

inline const nlohmann::json& required(const nlohmann::json& j, const char* key, const std::string& name, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(line_error(name, line, std::string("missing field '") + key + "'"));
  return *it;
}

inline std::string required_string(const nlohmann::json& j, const char* key, const std::string& name, std::size_t line) {
  const auto& v = required(j, key, name, line);
  if (!v.is_string()) throw InputError(line_error(name, line, std::string("field '") + key + "' must be a string"));
  return v.get<std::string>();
}

inline Real line_decimal(const nlohmann::json& v, const std::string& what, const std::string& name, std::size_t line) {
  if (!v.is_string()) throw InputError(line_error(name, line, what + " must be a decimal string"));
  Real x;
  try {
    x = parse_decimal(v.get<std::string>());
  } catch (const InputError&) {
    throw InputError(line_error(name, line, what + " is not a decimal number: '" + v.get<std::string>() + "'"));
  }
  if (!std::isfinite(x)) throw InputError(line_error(name, line, what + " is not finite"));
  return x;
}

inline MaassFixture parse_fixture_line(std::string_view text, const std::string& name, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(line_error(name, line, std::string("malformed JSON: ") + e.what()));
  }
  if (!j.is_object()) throw InputError(line_error(name, line, "record must be a JSON object"));
  static const std::set<std::string> known{"t", "parity", "norm_convention", "coeffs", "source"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw InputError(line_error(name, line, "unknown field '" + it.key() + "'"));

  MaassFixture f;
  f.parity = required_string(j, "parity", name, line);
  if (f.parity != "even")
    throw InputError(line_error(name, line,
                                "parity '" + f.parity + "' rejected: the spectral average runs over even Maass forms only"));
  f.t = line_decimal(required(j, "t", name, line), "t", name, line);
  if (!(f.t > 0)) throw InputError(line_error(name, line, "t must be positive"));
  f.norm_convention = required_string(j, "norm_convention", name, line);
  f.source = required_string(j, "source", name, line);
  const auto& c = required(j, "coeffs", name, line);
  if (!c.is_array()) throw InputError(line_error(name, line, "coeffs must be an array"));
  if (c.empty()) throw InputError(line_error(name, line, "coeffs must not be empty"));
  f.coeffs.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) f.coeffs.push_back(line_decimal(c[i], "coeffs[" + std::to_string(i) + "]", name, line));
  return f;
}

}  // namespace detail

/// Parses fixture text. Blank lines and CR line endings are errors; a missing
/// LF after the last record is tolerated.
inline std::vector<MaassFixture> parse_fixtures(std::string_view text, const std::string& name = "<fixtures>") {
  std::vector<MaassFixture> out;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    ++line;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    if (!row.empty() && row.back() == '\r') throw InputError(detail::line_error(name, line, "CR line terminator; use LF"));
    if (row.find_first_not_of(" \t") == std::string_view::npos) throw InputError(detail::line_error(name, line, "empty line"));
    out.push_back(detail::parse_fixture_line(row, name, line));
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<MaassFixture> ingest_fixtures(const std::string& path) { return parse_fixtures(read_file(path), path); }

inline std::string fixture_line(const MaassFixture& f) {
  nlohmann::json j;
  j["t"] = to_decimal(f.t);
  j["parity"] = f.parity;
  j["norm_convention"] = f.norm_convention;
  j["source"] = f.source;
  auto& c = j["coeffs"] = nlohmann::json::array();
  for (Real a : f.coeffs) c.push_back(to_decimal(a));
  return j.dump() + "\n";
}

inline void write_fixtures(const std::string& path, const std::vector<MaassFixture>& fixtures) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  for (const auto& f : fixtures) out << fixture_line(f);
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  Real precision = 1e-12L;  // tail tolerance of the weight kernels
  Real sigma_u = 0.5L;
  Real voronoi_sigma = -0.25L;
  int A = 16;
  i64 c_max = 500;
  Real r_max = 60;
  i64 coefficient_cap = 1000000;
  i64 m2_cutoff = 1600;
  i64 prime_cap = 600000;
  i64 diagonal_n_cap = 4096;
  i64 diagonal_y_cap = 16000000;
  unsigned threads = 1;
  std::string out;
  std::string format = "json";
  bool reproducible = false;

  void validate() const {
    if (!(precision > 0) || !(precision < 1)) throw InputError("config: precision must lie in (0, 1)");
    if (!(sigma_u > 0)) throw InputError("config: sigma_u must be positive");
    if (!(voronoi_sigma < 0)) throw InputError("config: voronoi_sigma must be negative");
    if (A < 4 || A % 2) throw InputError("config: A must be an even integer >= 4");
    if (c_max < 1 || !(r_max > 0) || coefficient_cap < 1 || m2_cutoff < 1 || prime_cap < 2 || diagonal_n_cap < 1 ||
        diagonal_y_cap < 1)
      throw InputError("config: all caps must be positive");
    if (format != "json" && format != "csv") throw InputError("config: format must be json or csv");
  }

  WeightSpec weight_spec() const {
    WeightSpec s;
    s.A = A;
    s.sigma_u = sigma_u;
    s.tail_tolerance = precision;
    return s;
  }

  /// Everything that can change a result. The output path does not.
  nlohmann::json to_json() const {
    return {{"precision", to_decimal(precision)},
            {"sigma_u", to_decimal(sigma_u)},
            {"voronoi_sigma", to_decimal(voronoi_sigma)},
            {"A", A},
            {"c_max", c_max},
            {"r_max", to_decimal(r_max)},
            {"coefficient_cap", coefficient_cap},
            {"m2_cutoff", m2_cutoff},
            {"prime_cap", prime_cap},
            {"diagonal_n_cap", diagonal_n_cap},
            {"diagonal_y_cap", diagonal_y_cap},
            {"threads", threads},
            {"format", format},
            {"reproducible", reproducible}};
  }
};

namespace detail {

inline Real config_real(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<Real>();
  if (v.is_string()) return parse_decimal(v.get<std::string>());
  throw InputError("config: '" + key + "' must be a number or decimal string");
}

inline i64 config_int(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<i64>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x == std::floor(x) && std::abs(x) < 9e15) return static_cast<i64>(x);
  }
  throw InputError("config: '" + key + "' must be an integer");
}

}  // namespace detail

/// Reads a JSON config object over the defaults. Unknown keys are errors.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c = {}) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "precision") c.precision = detail::config_real(v, k);
    else if (k == "sigma_u") c.sigma_u = detail::config_real(v, k);
    else if (k == "voronoi_sigma") c.voronoi_sigma = detail::config_real(v, k);
    else if (k == "A") c.A = static_cast<int>(detail::config_int(v, k));
    else if (k == "c_max") c.c_max = detail::config_int(v, k);
    else if (k == "r_max") c.r_max = detail::config_real(v, k);
    else if (k == "coefficient_cap") c.coefficient_cap = detail::config_int(v, k);
    else if (k == "m2_cutoff") c.m2_cutoff = detail::config_int(v, k);
    else if (k == "prime_cap") c.prime_cap = detail::config_int(v, k);
    else if (k == "diagonal_n_cap") c.diagonal_n_cap = detail::config_int(v, k);
    else if (k == "diagonal_y_cap") c.diagonal_y_cap = detail::config_int(v, k);
    else if (k == "threads") {
      i64 t = detail::config_int(v, k);
      if (t < 0) throw InputError("config: threads must be >= 0");
      c.threads = static_cast<unsigned>(t);
    } else if (k == "out" || k == "format") {
      if (!v.is_string()) throw InputError("config: '" + k + "' must be a string");
      (k == "out" ? c.out : c.format) = v.get<std::string>();
    } else if (k == "reproducible") {
      if (!v.is_boolean()) throw InputError("config: 'reproducible' must be true or false");
      c.reproducible = v.get<bool>();
    } else
      throw InputError("config: unknown key '" + k + "'");
  }
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

/// Git blob id of the text: sha1("blob <len>\0" + text), lower-case hex.
inline std::string git_blob_hash(const std::string& text) {
  const std::string header = "blob " + std::to_string(text.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 || EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, text.data(), text.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

/// Hash of the canonical (sorted-key, compact) config document.
inline std::string config_hash(const RunConfig& c) { return git_blob_hash(c.to_json().dump() + "\n"); }

// ---------------------------------------------------------------------------
// Reports.

struct Report {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json residuals = nlohmann::json::object();
  std::vector<std::string> failures;
  std::optional<std::string> csv;  // set by commands with their own flat layout

  bool pass() const { return failures.empty(); }
  /// Records a check; the report fails if any check does.
  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

inline nlohmann::json complex_json(Complex z) { return {{"re", to_decimal(z.real())}, {"im", to_decimal(z.imag())}}; }

inline nlohmann::json report_document(const Report& r, const RunConfig& c, std::optional<long long> runtime_ms) {
  nlohmann::json out = r.outputs;
  out["pass"] = r.pass();
  out["failures"] = r.failures;
  nlohmann::json j{{"command", r.command},
                   {"config_hash", config_hash(c)},
                   {"inputs", r.inputs},
                   {"outputs", out},
                   {"residuals", r.residuals}};
  j["runtime_ms"] = runtime_ms ? nlohmann::json(*runtime_ms) : nlohmann::json(nullptr);
  return j;
}

namespace detail {

inline void flatten(const nlohmann::json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), rows);
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

/// The command's own CSV if it has one, else key,value rows of the document.
inline std::string report_csv(const Report& r, const nlohmann::json& doc) {
  if (r.csv) return *r.csv;
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten(doc, "", rows);
  std::string s = "key,value\n";
  for (const auto& [k, v] : rows) s += detail::csv_field(k) + "," + detail::csv_field(v) + "\n";
  return s;
}

}  // namespace kgl3

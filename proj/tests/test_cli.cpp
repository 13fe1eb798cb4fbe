#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>

#include "kgl3/commands.hpp"

using namespace kgl3;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("kgl3_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string write_text(const std::string& name, const std::string& text) {
  fs::path p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

/// Runs the tool; returns its exit status. Output goes to `out` when given.
int run_cli(const std::string& args, const std::string& out = "") {
  std::string cmd = std::string(KGL3_CLI_PATH) + " " + args + " > " + (out.empty() ? "/dev/null" : out) + " 2>/dev/null";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* kRecord = R"({"t":"9.53369526135355755434","parity":"even","norm_convention":"a(1)=1","coeffs":["1","-1.068333551","-0.456197355"],"source":"table"})";

}  // namespace

TEST(Ingest, EmptyFileIsEmptySequence) {
  EXPECT_TRUE(ingest_fixtures(write_text("empty.jsonl", "")).empty());
  EXPECT_TRUE(parse_fixtures("").empty());
}

TEST(Ingest, SingleRecord) {
  auto fx = parse_fixtures(std::string(kRecord) + "\n");
  ASSERT_EQ(fx.size(), 1u);
  EXPECT_EQ(fx[0].t, parse_decimal("9.53369526135355755434"));
  EXPECT_EQ(fx[0].parity, "even");
  EXPECT_EQ(fx[0].norm_convention, "a(1)=1");
  EXPECT_EQ(fx[0].source, "table");
  ASSERT_EQ(fx[0].coeffs.size(), 3u);
  EXPECT_EQ(fx[0].coeffs[1], parse_decimal("-1.068333551"));
  // Last line without LF is accepted.
  EXPECT_EQ(parse_fixtures(kRecord).size(), 1u);
}

TEST(Ingest, RoundTripIsExact) {
  MaassFixture f;
  f.t = 13.779751351890738L;
  f.norm_convention = "a(1)=1";
  f.source = "round trip";
  for (int n = 1; n <= 50; ++n) f.coeffs.push_back(std::sin(Real(n)) / 3);
  const std::string path = (scratch_dir() / "rt.jsonl").string();
  write_fixtures(path, {f, f});
  auto back = ingest_fixtures(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].t, f.t);
  EXPECT_EQ(back[1].coeffs, f.coeffs);
  EXPECT_EQ(fixture_line(back[0]), fixture_line(f));
}

TEST(Ingest, OddParityRejectedWithLineNumber) {
  std::string odd = kRecord;
  odd.replace(odd.find("\"even\""), 6, "\"odd\"");
  const std::string msg = message_of([&] { parse_fixtures(std::string(kRecord) + "\n" + odd + "\n", "f.jsonl"); });
  EXPECT_NE(msg.find("f.jsonl:2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("even"), std::string::npos) << msg;
  EXPECT_NE(msg.find("odd"), std::string::npos) << msg;
}

TEST(Ingest, MalformedLineNamed) {
  const std::string msg = message_of([&] { parse_fixtures(std::string(kRecord) + "\n" + kRecord + "\n{\"t\": \"1\",\n", "f.jsonl"); });
  EXPECT_NE(msg.find("f.jsonl:3:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("malformed"), std::string::npos) << msg;
}

TEST(Ingest, InvariantViolations) {
  auto bad = [](const std::string& from, const std::string& to) {
    std::string r = kRecord;
    r.replace(r.find(from), from.size(), to);
    return message_of([&] { parse_fixtures(r + "\n"); });
  };
  EXPECT_NE(bad("\"9.53369526135355755434\"", "\"-1\"").find("positive"), std::string::npos);
  EXPECT_NE(bad("\"9.53369526135355755434\"", "9.5").find("decimal string"), std::string::npos);
  EXPECT_NE(bad("[\"1\",\"-1.068333551\",\"-0.456197355\"]", "[]").find("empty"), std::string::npos);
  EXPECT_NE(bad("\"-1.068333551\"", "\"-1.06x\"").find("coeffs[1]"), std::string::npos);
  EXPECT_NE(bad("\"source\"", "\"origin\"").find("unknown field"), std::string::npos);
  EXPECT_NE(bad(",\"source\":\"table\"", "").find("missing field 'source'"), std::string::npos);
  EXPECT_NE(message_of([] { parse_fixtures(std::string(kRecord) + "\r\n"); }).find("CR"), std::string::npos);
  EXPECT_NE(message_of([] { parse_fixtures(std::string(kRecord) + "\n\n" + kRecord); }).find(":2:"), std::string::npos);
  EXPECT_THROW(ingest_fixtures((scratch_dir() / "missing.jsonl").string()), InputError);
}

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.weight_spec().A, 16);
}

TEST(Config, GitBlobHash) {
  // Same ids as `git hash-object`.
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Config, HashTracksResultsNotOutputPath) {
  RunConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.out = "/tmp/elsewhere.json";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.A = 8;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.c_max = 499;
  EXPECT_NE(config_hash(a), config_hash(b));
  // Reading a config back gives the same hash.
  EXPECT_EQ(config_hash(run_config_from_json(a.to_json())), config_hash(a));
}

TEST(Config, Validation) {
  using J = nlohmann::json;
  EXPECT_THROW(run_config_from_json(J{{"A", 7}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"A", 2}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"c_max", 0}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"r_max", "-1"}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"coefficient_cap", -5}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"m2_cutoff", 1.5}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"threads", -1}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"format", "xml"}}), InputError);
  EXPECT_THROW(run_config_from_json(J{{"cmax", 10}}), InputError);
  EXPECT_THROW(run_config_from_json(J::array()), InputError);
  RunConfig c = run_config_from_json(J{{"precision", "1e-10"}, {"r_max", 40}, {"A", 8}, {"threads", 2}});
  EXPECT_EQ(c.precision, parse_decimal("1e-10"));
  EXPECT_EQ(c.r_max, 40);
  EXPECT_EQ(c.A, 8);
  EXPECT_EQ(c.threads, 2u);
}

TEST(Report, DocumentLayout) {
  Report r;
  r.command = "x";
  r.outputs["v"] = "1";
  r.check(false, "broken, badly");
  RunConfig c;
  auto doc = report_document(r, c, std::nullopt);
  std::vector<std::string> keys;
  for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"command", "config_hash", "inputs", "outputs", "residuals", "runtime_ms"}));
  EXPECT_TRUE(doc["runtime_ms"].is_null());
  EXPECT_EQ(doc["config_hash"], config_hash(c));
  EXPECT_FALSE(doc["outputs"]["pass"].get<bool>());
  const std::string csv = report_csv(r, doc);
  EXPECT_NE(csv.find("outputs.failures.0,\"broken, badly\""), std::string::npos) << csv;
  EXPECT_EQ(report_document(r, c, 12)["runtime_ms"], 12);
}

TEST(Commands, ComposedKloostermanMatchesEnumeration) {
  for (i64 c : {1, 2, 8, 9, 12, 60, 97, 360, 500})
    for (i64 n : {-7, 0, 1, 15})
      for (i64 l : {0, 3, 10})
        EXPECT_LT(std::abs(kloosterman(n, l, c) - kloosterman_composed(n, l, c)), 1e-12L) << n << " " << l << " " << c;
}

TEST(Commands, VerifyReportsPassAndFail) {
  RunConfig c;
  WeilArgs w;
  w.count = 300;
  EXPECT_TRUE(run_verify_weil(c, w).pass());
  BumpArgs b;
  b.cutoff = 2000;
  b.tol = 1e-12L;
  EXPECT_FALSE(run_verify_bump(c, b).pass());
  EXPECT_TRUE(run_verify_stirling(c, {}).pass());
  EXPECT_THROW(run_verify_bump(c, BumpArgs{"gl4"}), InputError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("verify identity618 --count 50"), 0);
  EXPECT_EQ(run_cli("verify bump --cutoff 2000 --tol 1e-12"), 1);
  EXPECT_EQ(run_cli("ingest-check " + write_text("cli_ok.jsonl", std::string(kRecord) + "\n")), 0);
  std::string odd = kRecord;
  odd.replace(odd.find("\"even\""), 6, "\"odd\"");
  EXPECT_EQ(run_cli("ingest-check " + write_text("cli_odd.jsonl", odd + "\n")), 2);
  EXPECT_EQ(run_cli("--config " + write_text("oddA.json", "{\"A\": 7}") + " verify stirling"), 2);
  EXPECT_EQ(run_cli("verify nonsense"), 2);
  EXPECT_EQ(run_cli("verify bump --form gl4"), 2);
  EXPECT_EQ(run_cli("--format yaml verify stirling"), 2);
}

TEST(Cli, ByteIdenticalReports) {
  const std::string a = (scratch_dir() / "a.json").string(), b = (scratch_dir() / "b.json").string();
  ASSERT_EQ(run_cli("--reproducible verify weil --count 400 --out " + a), 0);
  ASSERT_EQ(run_cli("--reproducible verify weil --count 400 --out " + b), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  // Different thread count: same numbers, different config hash.
  ASSERT_EQ(run_cli("--reproducible --threads 2 verify weil --count 400", b), 0);
  auto ja = nlohmann::json::parse(read_file(a)), jb = nlohmann::json::parse(read_file(b));
  EXPECT_EQ(ja["residuals"], jb["residuals"]);
  EXPECT_NE(ja["config_hash"], jb["config_hash"]);
}

TEST(Cli, AverageCsv) {
  const std::string out = (scratch_dir() / "avg.csv").string();
  ASSERT_EQ(run_cli("--format csv average --T 2 --no-diagonal", out), 0);
  const std::string csv = read_file(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), average_csv_header());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "caldera/cmat.hpp"
#include "caldera/errors.hpp"
#include "caldera/ldlq.hpp"
#include "commands.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "report.hpp"

using namespace caldera;
using namespace caldera::cli;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("caldera_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(CALDERA_CLI_PATH) + " " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

template <typename F>
int code_of(F&& f) {
  try {
    f();
  } catch (...) {
    return exit_code_for_current_exception();
  }
  return kExitOk;
}

// W (n x d), X (m x d) and H written by cmd_hessian.
void write_problem(const TempDir& dir, Index n, Index d, Index m, std::uint64_t seed) {
  SynthOptions s;
  s.n = n;
  s.d = d;
  s.seed = seed;
  cmd_synth(s, dir / "W.cmat");
  std::mt19937_64 gen(seed);
  write_cmat(dir / "X.cmat", oracle::gaussian(m, d, gen));
  cmd_hessian(dir / "X.cmat", std::nullopt, dir / "H.cmat");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(gen) * std::pow(10.0, double(i % 40 - 20));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("exit code taxonomy") {
  CHECK(code_of([] { throw FormatError("x", 3); }) == kExitFormat);
  CHECK(code_of([] { throw ShapeError("x"); }) == kExitShape);
  CHECK(code_of([] { throw RegimeError("x"); }) == kExitRegime);
  CHECK(code_of([] { throw DomainError("x"); }) == kExitDomain);
  CHECK(code_of([] { throw FactorizationError("x", 2); }) == kExitFactorization);
  CHECK(code_of([] { throw IoError("x"); }) == kExitIo);
  CHECK(code_of([] { throw std::runtime_error("x"); }) == kExitInternal);
  CHECK(code_of([] {}) == kExitOk);
}

TEST_CASE("synth files are deterministic and carry the spectrum") {
  TempDir dir;
  SynthOptions s;
  s.n = 8;
  s.d = 8;
  s.seed = 42;
  cmd_synth(s, dir / "a.cmat");
  cmd_synth(s, dir / "b.cmat");
  CHECK(slurp(dir / "a.cmat") == slurp(dir / "b.cmat"));
  auto sv = oracle::singular_values(read_cmat(dir / "a.cmat"));
  for (Index i = 0; i < 8; ++i) CHECK(std::abs(sv(i) - 1.0 / double(i + 1)) <= 1e-8);
}

TEST_CASE("hessian of the identity") {
  TempDir dir;
  write_cmat(dir / "X.cmat", Matrix::Identity(5, 5));
  auto ctx = cmd_hessian(dir / "X.cmat", 0.0, dir / "H.cmat");
  Matrix H = read_cmat(dir / "H.cmat");
  CHECK(H == Matrix::Identity(5, 5) / 5.0);
  CHECK(H == ctx.H);
  CHECK(read_cmat(hessian_factor_path(dir / "H.cmat")) == ctx.M);
  auto meta = read_json(hessian_meta_path(dir / "H.cmat"));
  CHECK(meta.at("m").get<Index>() == 5);
  CHECK(meta.at("D").size() == 5);
}

TEST_CASE("hessian round trip is bit exact") {
  TempDir dir;
  std::mt19937_64 gen(3);
  Matrix X = oracle::gaussian(20, 7, gen);
  write_cmat(dir / "X.cmat", X);
  auto ctx = cmd_hessian(dir / "X.cmat", 1e-3, dir / "H.cmat");
  CHECK(read_cmat(dir / "H.cmat") == compute_hessian(X, 1e-3).H);
  CHECK(load_hessian(dir / "H.cmat", {}).H == ctx.H);
}

TEST_CASE("malformed magic is a format error naming offset 0") {
  TempDir dir;
  std::string bytes = encode_cmat(Matrix::Ones(3, 3));
  bytes[0] = 'X';
  write_text(dir / "X.cmat", bytes);
  try {
    cmd_hessian(dir / "X.cmat", std::nullopt, dir / "H.cmat");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("config JSON round trip and validation") {
  DecompositionConfig c;
  c.rank = 5;
  c.range_l = 2.5;
  c.update_order = UpdateOrder::lr_first;
  c.adaptive_factor_ranges = true;
  c.seed = 1234567890123ULL;
  auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"rnak", 3}}), DomainError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"rank", "three"}}), DomainError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"factor_ranges", "wild"}}), DomainError);
}

TEST_CASE("decompose with k = 0 reproduces LDLQ") {
  TempDir dir;
  write_problem(dir, 10, 12, 30, 4);
  write_text(dir / "cfg.json", R"({"rank": 0, "bits_q": 2, "seed": 9})");
  auto out = cmd_decompose(dir / "W.cmat", dir / "H.cmat", dir / "cfg.json", dir / "out");
  Matrix W = read_cmat(dir / "W.cmat");
  auto ctx = load_hessian(dir / "H.cmat", {});
  auto direct = ldlq_quantize(W, ctx, default_backbone_quantizer(W, 2), phase_stream(9, 1, Phase::backbone));
  CHECK(read_cmat(dir / "out" / "Q.cmat") == direct.Q);
  CHECK(read_cmat(dir / "out" / "W_hat.cmat") == direct.Q);
  CHECK(out.report.at("best_error").get<double>() == direct.proxy_error);
}

TEST_CASE("decompose reruns are byte identical") {
  TempDir dir;
  write_problem(dir, 12, 16, 32, 5);
  write_text(dir / "cfg.json", R"({"rank": 3, "outer_iterations": 3, "inner_iterations": 2, "seed": 1})");
  Overrides o;
  o.rht = true;
  cmd_decompose(dir / "W.cmat", dir / "H.cmat", dir / "cfg.json", dir / "a", o);
  cmd_decompose(dir / "W.cmat", dir / "H.cmat", dir / "cfg.json", dir / "b", o);
  for (const char* f : {"Q.cmat", "L.cmat", "R.cmat", "W_hat.cmat", "report.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  auto report = read_json(dir / "a" / "report.json");
  CHECK(report.at("schema_version") == kReportSchemaVersion);
  CHECK(report.at("config").at("rht") == true);
  CHECK(report.at("error_trace").size() == 3);
  const auto& b = report.at("bounds");
  for (const char* key : {"quip_trace_bound", "caldera_bound_exact", "caldera_bound_mp", "epsilon"}) {
    CHECK(b.at(key).get<double>() >= 0.0);
  }
  if (!b.at("recommended_B_L").is_null()) CHECK(b.at("recommended_B_L").get<int>() >= 1);
  if (!b.at("recommended_B_R").is_null()) CHECK(b.at("recommended_B_R").get<int>() >= 1);
}

TEST_CASE("sweep: schema, ordering and agreement with decompose") {
  TempDir dir;
  write_problem(dir, 12, 16, 32, 6);
  write_text(dir / "grid.json",
             R"({"base": {"outer_iterations": 2, "inner_iterations": 2}, "rank": [4, 0], "bits_q": [2],
                 "seeds": [3, 1]})");
  cmd_sweep(dir / "W.cmat", dir / "H.cmat", dir / "grid.json", dir / "s.csv", 2);
  auto rows = read_csv(dir / "s.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == sweep_columns());
  for (const auto& r : rows) CHECK(r.size() == sweep_columns().size());
  CHECK(rows[1][0] == "0");
  CHECK(rows[1][4] == "1");
  CHECK(rows[2][4] == "3");
  CHECK(rows[4][0] == "4");

  write_text(dir / "cfg.json", R"({"outer_iterations": 2, "inner_iterations": 2, "rank": 4, "seed": 3})");
  auto single = cmd_decompose(dir / "W.cmat", dir / "H.cmat", dir / "cfg.json", dir / "one");
  CHECK(std::stod(rows[4][5]) == single.report.at("best_error").get<double>());
  CHECK(std::stod(rows[4][7]) == single.report.at("bounds").at("quip_trace_bound").get<double>());

  cmd_sweep(dir / "W.cmat", dir / "H.cmat", dir / "grid.json", dir / "t.csv", 1);
  CHECK(slurp(dir / "s.csv") == slurp(dir / "t.csv"));
}

TEST_CASE("sweep: averaged error falls with rank on a decaying spectrum") {
  TempDir dir;
  write_problem(dir, 32, 32, 64, 7);
  write_text(dir / "grid.json",
             R"({"base": {"outer_iterations": 3, "inner_iterations": 3, "factor_ranges": "adaptive"},
                 "rank": [0, 4, 8, 16], "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]})");
  cmd_sweep(dir / "W.cmat", dir / "H.cmat", dir / "grid.json", dir / "s.csv", 2);
  auto rows = read_csv(dir / "s.csv");
  std::map<int, double> mean;
  for (std::size_t i = 1; i < rows.size(); ++i) mean[std::stoi(rows[i][0])] += std::stod(rows[i][5]) / 10.0;
  REQUIRE(mean.size() == 4);
  double prev = mean.begin()->second;
  for (const auto& [k, e] : mean) {
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("binary: end to end and exit codes") {
  TempDir dir;
  const std::string d = dir.path.string();
  CHECK(run_cli("synth --n 8 --d 12 --seed 3 --out " + d + "/W.cmat") == kExitOk);
  std::mt19937_64 gen(1);
  write_cmat(dir / "X.cmat", oracle::gaussian(24, 12, gen));
  CHECK(run_cli("hessian --x " + d + "/X.cmat --delta auto --out " + d + "/H.cmat") == kExitOk);
  write_text(dir / "cfg.json", R"({"rank": 2, "outer_iterations": 2, "inner_iterations": 2})");
  const std::string dec = "decompose --weights " + d + "/W.cmat --hessian " + d + "/H.cmat --config " + d + "/cfg.json";
  CHECK(run_cli(dec + " --seed 5 --out-dir " + d + "/a") == kExitOk);
  CHECK(run_cli(dec + " --seed 5 --out-dir " + d + "/b") == kExitOk);
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "Q.cmat") == slurp(dir / "b" / "Q.cmat"));
  CHECK(read_json(dir / "a" / "report.json").at("seed") == 5);
  CHECK(fs::exists(dir / "a" / "timings.json"));

  CHECK(run_cli(dec + " --update-order lr_first --hessian-update --strict-fallback --out-dir " + d + "/c") == kExitOk);

  // Corrupted header.
  std::string bytes = slurp(dir / "W.cmat");
  bytes[2] = '?';
  write_text(dir / "bad.cmat", bytes);
  CHECK(run_cli("decompose --weights " + d + "/bad.cmat --hessian " + d + "/H.cmat --out-dir " + d + "/x") == kExitFormat);

  // Shape mismatch: W with 8 columns against a 12x12 H.
  CHECK(run_cli("synth --n 8 --d 8 --out " + d + "/W8.cmat") == kExitOk);
  CHECK(run_cli("decompose --weights " + d + "/W8.cmat --hessian " + d + "/H.cmat --out-dir " + d + "/x") == kExitShape);

  write_text(dir / "bad.json", R"({"rank": 2, "nonsense": 1})");
  CHECK(run_cli("decompose --weights " + d + "/W.cmat --hessian " + d + "/H.cmat --config " + d + "/bad.json --out-dir " + d +
                "/x") == kExitDomain);
  write_text(dir / "broken.json", R"({"rank": )");
  CHECK(run_cli("decompose --weights " + d + "/W.cmat --hessian " + d + "/H.cmat --config " + d + "/broken.json --out-dir " + d +
                "/x") == kExitFormat);
  CHECK(run_cli("decompose --weights " + d + "/missing.cmat --hessian " + d + "/H.cmat --out-dir " + d + "/x") == kExitIo);
  CHECK(run_cli("frobnicate") == kExitUsage);
  CHECK(run_cli("hessian --x " + d + "/X.cmat --delta lots --out " + d + "/H2.cmat") == kExitUsage);
  CHECK(run_cli("--help") == kExitOk);
}

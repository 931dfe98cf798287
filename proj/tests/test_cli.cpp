#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "hcf/cli.hpp"

using namespace hcf;
using namespace hcf::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("hcf_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  ::unsetenv("HCF_OUT");
  args.insert(args.begin(), "hcf");
  std::ostringstream out, err;
  const int code = run_main(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("initial form specs") {
  CHECK(parse_initial_form("identity").kind == InitialFormSpec::Kind::Identity);
  const auto d = parse_initial_form("diag:1,1,2");
  CHECK(d.kind == InitialFormSpec::Kind::Diagonal);
  CHECK(d.values == std::vector<double>{1, 1, 2});
  const auto s = parse_initial_form("scalar:0.5");
  CHECK(resolve_initial_form(s, 3, 0).matrix().isApprox(0.5 * CMatrix::Identity(3, 3)));
  const auto r = parse_initial_form("random_pd(7,2.5)");
  CHECK(r.kind == InitialFormSpec::Kind::RandomPd);
  CHECK(r.seed == 7u);
  CHECK(r.scale == 2.5);
  for (const char* text : {"identity", "scalar:0.5", "diag:1,1,2", "random_pd", "random_pd(7)",
                           "random_pd(7,2.5)", "random_diag(3)"}) {
    CHECK(parse_initial_form(text).to_string() == text);
  }

  // Seeded forms are reproducible; the run seed is the fallback.
  const auto a = resolve_initial_form(parse_initial_form("random_pd"), 4, 11);
  const auto b = resolve_initial_form(parse_initial_form("random_pd"), 4, 11);
  const auto c = resolve_initial_form(parse_initial_form("random_pd"), 4, 12);
  const auto e = resolve_initial_form(parse_initial_form("random_pd(11)"), 4, 99);
  CHECK(a.matrix() == b.matrix());
  CHECK(a.matrix() != c.matrix());
  CHECK(a.matrix() == e.matrix());
  CHECK(forms::positivity(a).status == forms::Positivity::PositiveDefinite);
  const auto rd = resolve_initial_form(parse_initial_form("random_diag"), 5, 3);
  CHECK((rd.matrix() - CMatrix(rd.matrix().diagonal().asDiagonal())).norm() == 0.0);

  CHECK_THROWS_AS(parse_initial_form("diag:1,x"), ParseError);
  CHECK_THROWS_AS(parse_initial_form("bogus"), ParseError);
  CHECK_THROWS(resolve_initial_form(parse_initial_form("diag:1,2"), 3, 0));
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(u(rng), static_cast<int>(u(rng)));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("run config JSON") {
  RunConfig cfg;
  cfg.algebra = lie::AlgebraSpec::borel(3);
  cfg.h0 = parse_initial_form("random_pd(5,2)");
  cfg.integrator = default_cli_integrator();
  cfg.integrator.t_end = 7.5;
  cfg.seed = 42;
  cfg.name = "x";
  const auto back = run_config_from_json(to_json(cfg));
  CHECK(back.algebra.to_string() == "borel:3");
  CHECK(back.h0.to_string() == "random_pd(5,2)");
  CHECK(back.integrator.t_end == 7.5);
  CHECK(back.seed == 42u);
  CHECK(back.name == "x");
  const auto d = default_cli_integrator();
  CHECK(d.t_end == 100.0);
  CHECK(d.sample_interval == doctest::Approx(0.1));
  CHECK(d.record_steps);
}

TEST_CASE("exit codes") {
  TempDir tmp("codes");
  CHECK(run({"flow", "--algebra", "nonsense", "--out", tmp.str()}).code == kExitConfig);
  CHECK(run({"flow", "--algebra", "su2c", "--h0", "diag:1,2", "--out", tmp.str()}).code == kExitConfig);
  CHECK(run({"flow", "--no-such-flag"}).code == kExitConfig);
  CHECK(run({"report", tmp.str()}).code == kExitNoData);
  CHECK(run({"report", (tmp.path / "missing").string()}).code == kExitNoData);
  CHECK(run({"verify", "--model", "hopf_sl2", "--trials", "10"}).code == kExitOk);
  CHECK(run({"verify", "--model", "heisenberg_left", "--trials", "10"}).code == kExitOk);
  CHECK(run({"verify"}).code == kExitConfig);
  CHECK(run({"classify", "su2c"}).code == kExitOk);
  CHECK(run({"--version"}).code == 0);
  // Step underflow is an integration failure.
  const auto r = run({"flow", "--algebra", "su2c", "--t-end", "5", "--min-step", "0.5", "--out", tmp.str()});
  CHECK(r.code == kExitIntegration);
}

TEST_CASE("flow writes its files deterministically") {
  TempDir tmp("flow");
  const auto r = run({"flow", "--algebra", "strict_upper:3", "--h0", "diag:1,2,3", "--t-end", "10", "--out",
                      tmp.str(), "--name", "heis"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("Polynomial") != std::string::npos);
  const fs::path csv = tmp.path / "heis.csv";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(tmp.path / "heis.run.json"));
  REQUIRE(fs::exists(tmp.path / "heis.gp"));
  const std::string first = slurp(csv);
  CHECK(first.rfind("t,re_0_0,im_0_0", 0) == 0);
  CHECK(slurp(tmp.path / "heis.gp").find("heis.csv") != std::string::npos);

  const auto rec = nlohmann::json::parse(slurp(tmp.path / "heis.run.json"));
  CHECK(rec["termination"] == "ReachedTEnd");
  CHECK(rec["config"]["algebra_text"] == "strict_upper:3");

  REQUIRE(run({"flow", "--algebra", "strict_upper:3", "--h0", "diag:1,2,3", "--t-end", "10", "--out",
               tmp.str(), "--name", "heis"})
              .code == kExitOk);
  CHECK(slurp(csv) == first);

  // The environment variable overrides --out.
  TempDir env("env");
  ::setenv("HCF_OUT", env.str().c_str(), 1);
  std::ostringstream out, err;
  const int code = run_main({"hcf", "flow", "--algebra", "su2c", "--out", tmp.str(), "--name", "e"}, out, err);
  ::unsetenv("HCF_OUT");
  CHECK(code == kExitOk);
  CHECK(fs::exists(env.path / "e.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "e.csv"));
}

TEST_CASE("flow from a JSON config") {
  TempDir tmp("config");
  const fs::path cfg = tmp.path / "run.json";
  std::ofstream(cfg) << R"({"algebra":"borel:2","h0":"identity","integrator":{"t_end":5},"name":"b"})";
  const auto r = run({"flow", "--config", cfg.string(), "--out", tmp.str()});
  REQUIRE(r.code == kExitOk);
  const auto rec = nlohmann::json::parse(slurp(tmp.path / "b.run.json"));
  CHECK(rec["config"]["algebra_text"] == "borel:2");
  CHECK(rec["t_last"].get<double>() == 5.0);
}

TEST_CASE("sweep is independent of the worker count") {
  TempDir a("sweep1"), b("sweep4");
  SweepConfig cfg;
  cfg.base.algebra = lie::AlgebraSpec::su2c();
  cfg.base.h0 = parse_initial_form("random_pd");
  cfg.base.integrator = default_cli_integrator();
  cfg.base.seed = 100;
  cfg.base.name = "s";
  cfg.count = 6;
  cfg.base.out_dir = a.str();
  cfg.jobs = 1;
  const auto r1 = run_sweep(cfg);
  cfg.base.out_dir = b.str();
  cfg.jobs = 4;
  const auto r4 = run_sweep(cfg);
  REQUIRE(r1.runs.size() == 6);
  for (int i = 0; i < 6; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "s_%04d.csv", i);
    CHECK(slurp(a.path / stem) == slurp(b.path / stem));
    CHECK(r1.runs[i].config.seed == 100u + static_cast<unsigned>(i));
    CHECK(r1.runs[i].termination == flow::Termination::BlowupDetected);
  }
  CHECK(r1.summary["regime_counts"]["FiniteTimeBlowup"] == 6);
  CHECK(fs::exists(a.path / "s_summary.json"));
  CHECK(r1.exit_code == kExitOk);

  // Report over the sweep directory, sorted by seed.
  const auto rep = run({"report", a.str()});
  REQUIRE(rep.code == kExitOk);
  CHECK(fs::exists(a.path / "report.md"));
  std::size_t last = 0;
  for (int i = 0; i < 6; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "| s_%04d |", i);
    const auto pos = rep.out.find(stem);
    REQUIRE(pos != std::string::npos);
    CHECK(pos >= last);
    last = pos;
  }
}

TEST_CASE("report orders by algebra then seed and skips corrupt records") {
  TempDir tmp("report");
  for (const auto& [alg, seed, name] : std::vector<std::tuple<std::string, int, std::string>>{
           {"strict_upper:3", 2, "c"}, {"borel:2", 9, "b"}, {"borel:2", 1, "a"}}) {
    REQUIRE(run({"flow", "--algebra", alg, "--h0", "random_pd", "--seed", std::to_string(seed), "--t-end", "3",
                 "--out", tmp.str(), "--name", name})
                .code == kExitOk);
  }
  fs::create_directories(tmp.path / "nested");
  std::ofstream(tmp.path / "nested" / "junk.run.json") << "{not json";
  const auto r = run({"report", tmp.str()});
  REQUIRE(r.code == kExitOk);
  const auto pa = r.out.find("| a |");
  const auto pb = r.out.find("| b |");
  const auto pc = r.out.find("| c |");
  REQUIRE(pa != std::string::npos);
  REQUIRE(pb != std::string::npos);
  REQUIRE(pc != std::string::npos);
  CHECK(pa < pb);
  CHECK(pb < pc);
  CHECK(r.err.find("junk.run.json") != std::string::npos);
}

TEST_CASE("classify output") {
  const auto n = run({"classify", "strict_upper:4"});
  REQUIRE(n.code == kExitOk);
  const auto j = nlohmann::json::parse(n.out);
  CHECK(j["dim"] == 6);
  CHECK(n.out.find("ilpotent") != std::string::npos);
  const auto s = nlohmann::json::parse(run({"classify", "su2c"}).out);
  CHECK(s["dim"] == 3);
  CHECK(run({"classify", "nope"}).code == kExitConfig);
}

TEST_CASE("verify report") {
  VerifyConfig cfg;
  cfg.model = geometry::parse_model_spec("hopf_sl2");
  cfg.trials = 20;
  const auto rep = run_verify(cfg);
  CHECK(rep.passed);
  CHECK(rep.sign_convention == -1);
  CHECK(rep.max_analytic < 1e-10);
  CHECK(rep.max_fd < 1e-5);
  CHECK(rep.max_push < 1e-10);
  cfg.model = geometry::parse_model_spec("translations:2");
  const auto tr = run_verify(cfg);
  CHECK(tr.passed);
  CHECK(tr.max_point_variation == 0.0);
}

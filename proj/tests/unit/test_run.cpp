#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dunkl/run.hpp"
#include "test_util.hpp"

namespace dunkl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::error_code_of;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("dunkl_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  // Runs the CLI; stderr lands in err_.
  int cli(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + DUNKL_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    err_ = slurp(err);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
  std::string err_;
};

constexpr const char* kSimulate = R"({
  "model": {"preset": "dyson", "d": 3, "k": 2.0},
  "scheme": {"n_steps": 64, "horizon": 1.0},
  "mc": {"seed": 11},
  "simulate": {"paths": 2}
})";

TEST_F(Cli, SimulateWritesPathsAndManifest) {
  const auto cfg = write_config("sim.json", kSimulate);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "out").string()), 0) << err_;
  const auto csv = slurp(dir_ / "out" / "path_0.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,x3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 66);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "path_1.csv"));
  const json manifest = json::parse(slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["mc"]["seed"], 11);
  EXPECT_EQ(manifest["model"]["x0"], json::array({1.0, 0.0, -1.0}));
  EXPECT_FALSE(manifest.contains("output"));
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  const auto cfg = write_config("sim.json", kSimulate);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "a").string() + " --threads 1"), 0);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "b").string() + " --threads 3"), 0);
  for (const char* f : {"path_0.csv", "path_1.csv", "manifest.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(Cli, SeedOverrideChangesPaths) {
  const auto cfg = write_config("sim.json", kSimulate);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "a").string()), 0);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "b").string() + " --seed 12"), 0);
  EXPECT_NE(slurp(dir_ / "a" / "path_0.csv"), slurp(dir_ / "b" / "path_0.csv"));
  EXPECT_EQ(json::parse(slurp(dir_ / "b" / "manifest.json"))["mc"]["seed"], 12);
}

TEST_F(Cli, ManifestReproducesItself) {
  const auto cfg = write_config("sim.json", kSimulate);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "a").string()), 0);
  ASSERT_EQ(cli("simulate --config " + (dir_ / "a" / "manifest.json").string() + " --output " + (dir_ / "b").string()),
            0)
      << err_;
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.json"), slurp(dir_ / "b" / "manifest.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "path_0.csv"), slurp(dir_ / "b" / "path_0.csv"));
}

TEST_F(Cli, WishartWritesSquaredPaths) {
  const auto cfg = write_config("w.json", R"({"model": {"preset": "wishart", "d": 2, "k": 5, "r": 1},
    "scheme": {"n_steps": 32}})");
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "out").string()), 0) << err_;
  const auto csv = slurp(dir_ / "out" / "path_0_squared.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2");
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 6), "0,4,1\n");
}

TEST_F(Cli, SchemaErrorsExitTwoWithLocation) {
  const auto unknown = write_config("u.json", "{\"model\": {\"preset\": \"dyson\"},\n  \"scheme\": {\"n_stepz\": 4}\n}");
  EXPECT_EQ(cli("simulate --config " + unknown.string()), 2);
  EXPECT_NE(err_.find("/scheme/n_stepz"), std::string::npos) << err_;
  EXPECT_NE(err_.find("line 2"), std::string::npos) << err_;

  const auto type = write_config("t.json", R"({"model": {"preset": "dyson", "k": "two"}})");
  EXPECT_EQ(cli("simulate --config " + type.string()), 2);
  EXPECT_NE(err_.find("/model/k"), std::string::npos) << err_;

  const auto syntax = write_config("s.json", "{\n  \"model\": {\n    \"preset\": \"dyson\",,\n  }\n}");
  EXPECT_EQ(cli("simulate --config " + syntax.string()), 2);
  EXPECT_NE(err_.find("line 3"), std::string::npos) << err_;

  EXPECT_EQ(cli("simulate"), 2);  // --config is required
  EXPECT_EQ(cli("frobnicate --config " + syntax.string()), 2);
}

TEST_F(Cli, PreconditionViolationsExitThree) {
  const auto zero = write_config("z.json", R"({"model": {"preset": "dyson"}, "scheme": {"n_steps": 0}})");
  EXPECT_EQ(cli("simulate --config " + zero.string() + " --output " + (dir_ / "o").string()), 3);

  const auto contract = write_config("c.json", R"({"model": {"preset": "bessel"},
    "scheme": {"variant": "truncated", "n_steps": 4, "eps_rule": {"kind": "fixed", "value": 0.1}}})");
  EXPECT_EQ(cli("simulate --config " + contract.string() + " --output " + (dir_ / "o").string()), 3);
  EXPECT_NE(err_.find("eps^2/L_k"), std::string::npos) << err_;

  const auto study = write_config("m.json", R"({"model": {"preset": "bessel"}, "mc": {"M": 10, "n_values": [4, 8], "n_ref": 64}})");
  EXPECT_EQ(cli("converge --config " + study.string() + " --output " + (dir_ / "o").string()), 3);
}

TEST_F(Cli, InvariantsOnTypeA) {
  const auto cfg = write_config("i.json", R"({"model": {"preset": "dyson", "d": 3, "k": 1.5},
    "invariants": {"points": 200}})");
  ASSERT_EQ(cli("invariants --config " + cfg.string() + " --output " + (dir_ / "out").string()), 0) << err_;
  const json j = json::parse(slurp(dir_ / "out" / "invariants.json"));
  EXPECT_EQ(j["passed"], true);
  EXPECT_EQ(j["root_system"], "A");
  EXPECT_GE(j["properties"].size(), 10u);
}

TEST_F(Cli, ConvergeIsThreadIndependent) {
  const auto cfg = write_config("c.json", R"({"model": {"preset": "bessel", "k": 4},
    "mc": {"M": 100, "n_values": [4, 8, 16], "n_ref": 128, "seed": 3}})");
  ASSERT_EQ(cli("converge --config " + cfg.string() + " --output " + (dir_ / "a").string() + " --threads 1"), 0)
      << err_;
  ASSERT_EQ(cli("converge --config " + cfg.string() + " --output " + (dir_ / "b").string() + " --threads 4"), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "convergence.csv"), slurp(dir_ / "b" / "convergence.csv"));
  const json summary = json::parse(slurp(dir_ / "a" / "convergence.json"));
  EXPECT_TRUE(summary.contains("slope"));
  EXPECT_EQ(summary["n_values"].size(), 3u);
}

TEST_F(Cli, GirsanovAndMoments) {
  const auto cfg = write_config("g.json", R"({"model": {"preset": "bessel", "k": 1.5},
    "scheme": {"n_steps": 64}, "mc": {"M": 2000, "seed": 2}, "moments": {"q": [0, 1]}})");
  ASSERT_EQ(cli("girsanov --config " + cfg.string() + " --output " + (dir_ / "g").string()), 0) << err_;
  const auto csv = slurp(dir_ / "g" / "girsanov.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "estimator,mean,std_error");
  ASSERT_EQ(cli("moments --config " + cfg.string() + " --output " + (dir_ / "m").string()), 0) << err_;
  EXPECT_TRUE(fs::exists(dir_ / "m" / "moments.csv"));
}

TEST_F(Cli, CustomRootSystemRelativeToConfig) {
  write_config("a2.json", R"({"dim": 2, "positive_roots": [[1, -1]], "multiplicities": [1.5]})");
  const auto cfg = write_config("c.json", R"({"model": {"custom": "a2.json", "x0": [1, 0]},
    "scheme": {"n_steps": 8}})");
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " --output " + (dir_ / "out").string()), 0) << err_;
  const auto missing = write_config("m.json", R"({"model": {"custom": "nope.json"}})");
  EXPECT_EQ(cli("simulate --config " + missing.string() + " --output " + (dir_ / "out").string()), 2);
}

TEST(RunConfig, DefaultsAndStrictness) {
  EXPECT_EQ(error_code_of([] { parse_run_config(json::object()); }), ErrorCode::schema);  // model is required
  const RunConfig c = parse_run_config(json{{"model", {{"preset", "dyson"}}}});
  EXPECT_FALSE(c.command);
  EXPECT_EQ(c.scheme.n_steps, 1024);
  EXPECT_EQ(c.mc.n_ref, 4096);
  EXPECT_EQ(c.mc.n_values, (std::vector<std::int64_t>{16, 32, 64, 128, 256}));
  EXPECT_EQ(error_code_of([] { parse_run_config(json{{"bogus", 1}}); }), ErrorCode::schema);
  EXPECT_EQ(error_code_of([] { parse_run_config(json{{"scheme", {{"variant", "explicit"}}}}); }), ErrorCode::schema);
  EXPECT_EQ(error_code_of([] { parse_run_config(json{{"model", {{"preset", "dyson"}, {"custom", "x.json"}}}}); }),
            ErrorCode::schema);
  EXPECT_EQ(error_code_of([] { parse_run_config(json{{"mc", {{"M", 1.5}}}}); }), ErrorCode::schema);
  const RunConfig t = parse_run_config(
      json{{"command", "converge"}, {"model", {{"preset", "bessel"}}}, {"scheme", {{"variant", "truncated"}, {"eps_rule", {{"kind", "fixed"}, {"value", 0.3}}}}}});
  EXPECT_EQ(t.command, Command::converge);
  EXPECT_EQ(t.scheme.eps_rule.kind, EpsRule::Kind::fixed);
  EXPECT_EQ(t.scheme.eps_rule.value, 0.3);
}

TEST(RunConfig, Commands) {
  for (Command c : {Command::simulate, Command::converge, Command::girsanov, Command::moments, Command::invariants})
    EXPECT_EQ(parse_command(to_string(c)), c);
  EXPECT_FALSE(parse_command("simulat"));
}

TEST(Run, MissingConfigIsReported) {
  const RunOutcome o = run("/nonexistent/dir/config.json", {.command = Command::simulate});
  EXPECT_NE(o.exit_code, exit_ok);
  EXPECT_FALSE(o.message.empty());
}

}  // namespace
}  // namespace dunkl

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "wasslearn/harness/cli.hpp"

using namespace wasslearn;
using namespace wasslearn::harness;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "wasslearn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "wasslearn_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

const char* kSmallBounds = R"({"experiment": "bounds", "seed": 3,
  "bounds": {"eps_grid": [0.2], "n_grid": [1000, 100000], "covering": 4}})";

Report sample_report() {
  Report r;
  r.kind = "sample";
  r.metadata["seed"] = 7;
  r.metadata["alpha"] = 0.1;
  r.metadata["tag"] = "x";
  r.columns = {"a", "b"};
  r.add_row({1.0, 0.1});
  r.add_row({NAN, INFINITY});
  return r;
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config_text(R"({"seed": 1})");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.replications, 100);
  EXPECT_EQ(c.pi_hat_size, 4096);
  EXPECT_EQ(c.format, "csv");
  EXPECT_EQ(c.target.family, "identity");
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("{"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"replications": 3})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "bogus": 2})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "delta": 1.5})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "target": {"family": "cubic"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "target": {"family": "affine", "slope": 2}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "class": {"kind": "constants", "y_lo": 1, "y_hi": 0}})"),
               ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": 1, "output": {"format": "xml"}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": "one"})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = parse_config_text(R"({"seed": 1})");
  const auto b = parse_config_text(R"({"seed": 1, "replications": 100})");
  const auto c = parse_config_text(R"({"seed": 2})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(WASSLEARN_CONFIG_DIR)) {
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
  }
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  Report r;
  r.columns = tail_columns();
  EXPECT_EQ(to_csv(r), "n,eps,trials,exceedances,empirical_freq,theoretical_bound,bound_valid\n");
}

TEST(Report, CsvFormatting) {
  EXPECT_EQ(to_csv(sample_report()),
            "# kind=sample\n# alpha=0.10000000000000001\n# seed=7\n# tag=x\na,b\n1,0.10000000000000001\nnan,inf\n");
}

TEST(Report, JsonRoundTrip) {
  const auto r = sample_report();
  const auto back = report_from_json(json::parse(to_json_text(r)));
  EXPECT_TRUE(back == r);
  EXPECT_EQ(to_json_text(back), to_json_text(r));
}

TEST(Report, RowWidthChecked) {
  Report r;
  r.columns = {"a"};
  EXPECT_THROW(r.add_row({1.0, 2.0}), DomainError);
  EXPECT_THROW(r.column("b"), DomainError);
}

TEST(Report, TailRowFrequency) {
  Report r;
  r.columns = tail_columns();
  add_tail_row(r, {100, 0.1, 50, 5, 0.3, true});
  EXPECT_EQ(r.at(0, "empirical_freq"), 0.1);
  EXPECT_EQ(r.at(0, "bound_valid"), 1.0);
  EXPECT_THROW(add_tail_row(r, {100, 0.1, 5, 6, 0.3, true}), DomainError);
}

TEST(Report, WriteFailureIsIoError) {
  EXPECT_THROW(write_report(sample_report(), "/nonexistent/dir/out.csv", "csv"), IoError);
}

TEST(Cli, BoundsToStdout) {
  const auto r = run({"bounds", "--config", write_file("b.json", kSmallBounds)});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("# kind=bounds"), std::string::npos);
  EXPECT_NE(r.out.find("single_h_bound"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesConfig) {
  const auto r = run({"bounds", "--config", write_file("b.json", kSmallBounds), "--seed", "99"});
  EXPECT_NE(r.out.find("# seed=99"), std::string::npos);
}

TEST(Cli, JsonFormatAndOutPath) {
  const std::string out = (temp_dir() / "bounds.json").string();
  const auto r = run({"bounds", "--config", write_file("b.json", kSmallBounds), "--format", "json", "--out", out});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto rep = read_json_report(out);
  EXPECT_EQ(rep.kind, "bounds");
  EXPECT_EQ(rep.rows.size(), 2u);
}

TEST(Cli, ByteIdenticalReruns) {
  const std::string cfg = write_file("b.json", kSmallBounds);
  EXPECT_EQ(run({"bounds", "--config", cfg}).out, run({"bounds", "--config", cfg}).out);
  const std::string lemma = write_file("l.json", R"({"seed": 1, "pi_hat_size": 64, "lemma": {"probes": 4}})");
  EXPECT_EQ(run({"lemma-check", "--config", lemma}).out, run({"lemma-check", "--config", lemma}).out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"bounds", "--config", write_file("bad.json", R"({"seed": 1, "nope": 0})")}).code, kExitConfig);
  EXPECT_EQ(run({"bounds", "--config", write_file("bad2.json", "not json")}).code, kExitConfig);
  EXPECT_EQ(run({"asem", "--config", write_file("b.json", kSmallBounds)}).code, kExitConfig);
  EXPECT_EQ(run({"bounds", "--format", "xml"}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"bounds", "--config", "/nonexistent/c.json"}).code, kExitIo);
  EXPECT_EQ(run({"bounds", "--config", write_file("b.json", kSmallBounds), "--out", "/nonexistent/d/o.csv"}).code,
            kExitIo);
}

TEST(Cli, ViolationMapsToExitTwo) {
  Report r;
  EXPECT_EQ(exit_code(r), kExitOk);
  r.violations.push_back("x");
  EXPECT_EQ(exit_code(r), kExitViolation);
}

TEST(Cli, RelativeOnZeroErrorClassIsConfigError) {
  const auto cfg = write_file("rel.json", R"({"experiment": "relative", "seed": 1, "replications": 2,
    "class": {"kind": "lipschitz", "y_lo": 0, "y_hi": 1, "lip": 1}, "net_radius": 0.5,
    "n_grid": [100], "eps_grid": [0.3], "pi_hat_size": 64})");
  const auto r = run({"relative", "--config", cfg});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST(Cli, EverySubcommandRegistered) {
  for (const char* name : {"audit-contraction", "concentration", "asem", "relative", "scaling", "bounds",
                           "poisson-check", "lemma-check"}) {
    EXPECT_TRUE(subcommands().count(name)) << name;
  }
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "ringlaw/cli.hpp"

using namespace ringlaw;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ringlaw");
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("ringlaw_cli_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const json& j) {
    const auto p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
};

const json two_point_measure = {{"atoms", {1.0, 2.0}}, {"weights", {0.5, 0.5}}};

json local_law_config(std::uint64_t seed = 5) {
  return {{"command", "local-law"},
          {"seed", seed},
          {"measure", two_point_measure},
          {"ensemble", {{"symmetry", "unitary"}, {"N", {16, 24, 32}}, {"trials", 2}}},
          {"grid", {{"w", {{1.4, 0.0}}}, {"eta_max", 1.0}, {"gamma", 0.3}}}};
}

}  // namespace

TEST_F(Cli, RadiiPrintsBothRadii) {
  const auto r = run({"radii", "--config", write("c.json", {{"measure", two_point_measure}})});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream is(r.out);
  double lo = 0, hi = 0;
  is >> lo >> hi;
  EXPECT_NEAR(lo, std::sqrt(1.6), 1e-12);
  EXPECT_NEAR(hi, std::sqrt(2.5), 1e-12);
}

TEST_F(Cli, CertificateJson) {
  const auto r = run({"certificate", "--config",
                      write("c.json", {{"measure", two_point_measure}, {"grid", {{"r", 1.4}, {"points", 8}}}})});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["s_minus"].get<double>(), std::sqrt(2.5), 1e-10);
  EXPECT_NEAR(j["b_minus"].get<double>(), 0.36 / 1.96, 1e-10);
}

TEST_F(Cli, MissingWeightsNamesPath) {
  const auto r = run({"radii", "--config", write("c.json", {{"measure", {{"atoms", {1.0, 2.0}}}}})});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("/measure/weights"), std::string::npos) << r.err;
}

TEST_F(Cli, WeightsMustSumToOne) {
  const auto r =
      run({"radii", "--config", write("c.json", {{"measure", {{"atoms", {1.0, 2.0}}, {"weights", {0.5, 0.6}}}}})});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("/measure"), std::string::npos) << r.err;
}

TEST_F(Cli, EmptyAnnulusCitesRingBounds) {
  auto cfg = local_law_config();
  cfg["ensemble"]["tau"] = 0.5;
  const auto r = run({"local-law", "--config", write("c.json", cfg), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("1.26491"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("1.58113"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownCommandIsUsageError) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
}

TEST_F(Cli, CommandMismatchRejected) {
  const auto r = run({"block-law", "--config", write("c.json", local_law_config()), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST_F(Cli, OverwriteRequiredForNonEmptyOut) {
  const auto cfg = write("c.json", local_law_config());
  const auto out = (dir / "o").string();
  ASSERT_EQ(run({"local-law", "--config", cfg, "--out", out}).code, cli::kExitOk);
  const auto again = run({"local-law", "--config", cfg, "--out", out});
  EXPECT_EQ(again.code, cli::kExitValidation);
  EXPECT_NE(again.err.find("--overwrite"), std::string::npos) << again.err;
  EXPECT_EQ(run({"local-law", "--config", cfg, "--out", out, "--overwrite"}).code, cli::kExitOk);
}

TEST_F(Cli, ManifestRecordsConfigAndSeed) {
  const auto out = dir / "o";
  ASSERT_EQ(run({"local-law", "--config", write("c.json", local_law_config()), "--out", out.string(), "--seed", "99"})
                .code,
            cli::kExitOk);
  const auto m = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["seed"], 99);
  EXPECT_EQ(m["config"]["seed"], 99);
  EXPECT_EQ(m["config_hash"], config_hash(m["config"]));
  EXPECT_EQ(m["command"], "local-law");
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 64u);
}

TEST_F(Cli, SeedOverrideChangesOutput) {
  const auto cfg = write("c.json", local_law_config());
  ASSERT_EQ(run({"local-law", "--config", cfg, "--out", (dir / "a").string()}).code, cli::kExitOk);
  ASSERT_EQ(run({"local-law", "--config", cfg, "--out", (dir / "b").string(), "--seed", "6"}).code, cli::kExitOk);
  EXPECT_NE(slurp(dir / "a" / "local_law.csv"), slurp(dir / "b" / "local_law.csv"));
}

TEST_F(Cli, ManifestRerunIsByteIdentical) {
  ASSERT_EQ(run({"local-law", "--config", write("c.json", local_law_config()), "--out", (dir / "a").string()}).code,
            cli::kExitOk);
  ASSERT_EQ(
      run({"local-law", "--config", (dir / "a" / "manifest.json").string(), "--out", (dir / "b").string()}).code,
      cli::kExitOk);
  const auto a = slurp(dir / "a" / "local_law.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "local_law.csv"));
}

TEST_F(Cli, TamperedManifestRejected) {
  ASSERT_EQ(run({"local-law", "--config", write("c.json", local_law_config()), "--out", (dir / "a").string()}).code,
            cli::kExitOk);
  auto m = json::parse(slurp(dir / "a" / "manifest.json"));
  m["config"]["seed"] = 1234;
  const auto r = run({"local-law", "--config", write("m.json", m), "--out", (dir / "b").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST_F(Cli, ThreadsEnvironmentDoesNotChangeOutput) {
  const auto cfg = write("c.json", local_law_config());
  ::setenv("RINGLAW_THREADS", "3", 1);
  const auto r = run({"local-law", "--config", cfg, "--out", (dir / "a").string()});
  ::unsetenv("RINGLAW_THREADS");
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(json::parse(slurp(dir / "a" / "manifest.json"))["threads"], 3);
  ASSERT_EQ(run({"local-law", "--config", cfg, "--out", (dir / "b").string(), "--threads", "1"}).code, cli::kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "local_law.csv"), slurp(dir / "b" / "local_law.csv"));
}

TEST_F(Cli, ReportFitsThreeN) {
  std::vector<std::string> args{"report"};
  for (std::uint64_t s : {1u, 2u}) {
    const auto out = (dir / ("r" + std::to_string(s))).string();
    ASSERT_EQ(run({"local-law", "--config", write("c.json", local_law_config(s)), "--out", out, "--overwrite"}).code,
              cli::kExitOk);
    args.push_back(out);
  }
  args.insert(args.end(), {"--out", (dir / "rep").string()});
  const auto r = run(args);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rep" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "rep" / "summary.dat"));
  const auto fit = slurp(dir / "rep" / "fit.csv");
  EXPECT_EQ(std::count(fit.begin(), fit.end(), '\n'), 2);
  const auto summary = slurp(dir / "rep" / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 4);
}

TEST_F(Cli, ReportSingleNHasNoFit) {
  auto cfg = local_law_config();
  cfg["ensemble"]["N"] = 16;
  const auto out = (dir / "r").string();
  ASSERT_EQ(run({"local-law", "--config", write("c.json", cfg), "--out", out}).code, cli::kExitOk);
  const auto r = run({"report", out, "--out", (dir / "rep").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rep" / "summary.csv"));
  EXPECT_FALSE(fs::exists(dir / "rep" / "fit.csv"));
}

TEST_F(Cli, ReportRejectsEmptyAndMixedInput) {
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run({"report", (dir / "empty").string(), "--out", (dir / "rep").string()}).code, cli::kExitValidation);
  const json block = {{"command", "block-law"},
                      {"seed", 3},
                      {"target", "arcsine"},
                      {"ensemble",
                       {{"N", 16},
                        {"trials", 1},
                        {"sigma_profile", {{"atoms", {-1.0, 1.0}}, {"weights", {0.5, 0.5}}}},
                        {"xi_profile", {{"atoms", {-1.0, 1.0}}, {"weights", {0.5, 0.5}}}}}},
                      {"grid", {{"E", {0.0}}, {"gamma", 0.3}}}};
  ASSERT_EQ(run({"block-law", "--config", write("b.json", block), "--out", (dir / "b").string()}).code, cli::kExitOk);
  ASSERT_EQ(run({"local-law", "--config", write("c.json", local_law_config()), "--out", (dir / "l").string()}).code,
            cli::kExitOk);
  EXPECT_EQ(run({"report", (dir / "b").string(), (dir / "l").string(), "--out", (dir / "rep2").string()}).code,
            cli::kExitValidation);
}

TEST_F(Cli, ValidatePrintsEmptyErrorList) {
  const auto r = run({"validate", "--config", write("c.json", local_law_config())});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["command"], "local-law");
  EXPECT_TRUE(j["errors"].empty());
}

TEST_F(Cli, ShippedConfigsValidate) {
  for (const auto& entry : fs::directory_iterator(RINGLAW_CONFIG_DIR)) {
    const auto r = run({"validate", "--config", entry.path().string()});
    EXPECT_EQ(r.code, cli::kExitOk) << entry.path() << ": " << r.out << r.err;
  }
}

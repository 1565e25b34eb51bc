#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LEAFAVG_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("leafavg_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LEAFAVG_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string cfg(const char* name) { return "--config " + (kConfigs / name).string(); }

}  // namespace

TEST(Cli, AverageWritesPassingCertificate) {
  const auto d = scratch("avg");
  ASSERT_EQ(run("avg " + cfg("c4.json") + " --out " + d.string()), 0);
  const auto j = nlohmann::json::parse(slurp(d / "average_certificate.json"));
  EXPECT_EQ(j["task"], "avg");
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Cli, GeneratorsAreByteIdenticalAcrossRuns) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const char* c : {"hopf.json", "b3.json"}) {
    ASSERT_EQ(run(std::string("generators ") + cfg(c) + " --out " + a.string()), 0);
    ASSERT_EQ(run(std::string("generators ") + cfg(c) + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "generators.json"), slurp(b / "generators.json")) << c;
  }
  ASSERT_EQ(run("separate " + cfg("hopf.json") + " --out " + a.string()), 0);
  ASSERT_EQ(run("separate " + cfg("hopf.json") + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "separation_certificate.json"), slurp(b / "separation_certificate.json"));
}

TEST(Cli, CorruptedGeneratorFileFailsVerification) {
  const auto d = scratch("corrupt");
  ASSERT_EQ(run("generators " + cfg("t2.json") + " --out " + d.string()), 0);
  auto j = nlohmann::ordered_json::parse(slurp(d / "generators.json"));
  j["generators"][0] = "x1^2 + x3^2";
  write(d / "bad.json", j.dump(2));
  EXPECT_EQ(run("verify " + cfg("t2.json") + " --out " + d.string() + " --generators " + (d / "bad.json").string()),
            2);
  const auto rep = nlohmann::json::parse(slurp(d / "verify_report.json"));
  EXPECT_NE(rep.dump().find("IdentityViolation"), std::string::npos);
}

TEST(Cli, RadiusOnlyGeneratorsFailSeparation) {
  const auto d = scratch("radius");
  write(d / "r2.json", R"({"generators": ["x1^2 + x2^2 + x3^2 + x4^2"]})");
  EXPECT_EQ(run("separate " + cfg("t2.json") + " --out " + d.string() + " --generators " + (d / "r2.json").string()),
            2);
  const auto j = nlohmann::json::parse(slurp(d / "separation_certificate.json"));
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_GT(j["failure_count"].get<int>(), 0);
}

TEST(Cli, ConfigErrorsExitOne) {
  const auto d = scratch("errors");
  EXPECT_EQ(run("avg --config " + (d / "missing.json").string()), 1);
  write(d / "broken.json", "{\n  \"model\": {,\n}");
  EXPECT_EQ(run("avg --config " + (d / "broken.json").string() + " --out " + d.string()), 1);
  write(d / "sabotage.json", R"({"model": {"id": "s", "kind": "isoparametric", "dim": 3, "g": 2, "F": "x1^2"},
                                 "seed": 1})");
  EXPECT_EQ(run("avg --config " + (d / "sabotage.json").string() + " --out " + d.string()), 1);
  write(d / "noseed.json", R"({"model": {"id": "s", "kind": "torus", "weights": [[1]], "n_fix": 0}})");
  EXPECT_EQ(run("separate --config " + (d / "noseed.json").string() + " --out " + d.string()), 1);
  EXPECT_EQ(run("selftest --config " + (d / "nothing_here").string()), 1);
}

TEST(Cli, ExportWritesCsv) {
  const auto d = scratch("export");
  ASSERT_EQ(run("export " + cfg("hopf.json") + " --out " + d.string()), 0);
  const auto csv = slurp(d / "quotient_image.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,x2,x3,x4,rho1,rho2,rho3,rho4,radius1,radius2");
}

TEST(Cli, SelftestPassesAndSabotagedToleranceFails) {
  EXPECT_EQ(run("selftest"), 0);
  EXPECT_EQ(run("selftest --tol-rank 1e2"), 2);
}

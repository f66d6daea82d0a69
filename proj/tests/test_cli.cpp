// Drives the installed binary (PHYLONET_CLI) and the in-process entry point.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "phylonet/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string binary() {
  const char* p = std::getenv("PHYLONET_CLI");
  return p ? p : "";
}

Result shell(const std::string& args, const std::string& env = "") {
  Result r;
  std::string cmd = env + " '" + binary() + "' " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  int status = pclose(f);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Result in_process(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = phylonet::cli::run(args, out, err);
  r.out = out.str();
  return r;
}

fs::path temp_dir() {
  fs::path d = fs::temp_directory_path() / ("phylonet_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

class Binary : public ::testing::Test {
 protected:
  void SetUp() override {
    if (binary().empty()) GTEST_SKIP() << "PHYLONET_CLI not set";
  }
};

}  // namespace

TEST_F(Binary, AnalyzeUnitRates) {
  Result r = shell("analyze --samples 5000");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["header"]["command"], "analyze");
  EXPECT_FALSE(j["header"]["config"].contains("workers"));
  EXPECT_NEAR(j["expected_M"]["value"].get<double>(), 0.7182818, 1e-7);
  EXPECT_EQ(j["extinction_probability"]["value"], 1.0);
  EXPECT_LT(j["lambda"]["value"].get<double>(), 0.0);
  for (const char* k : {"EUstar", "ell", "C"}) {
    EXPECT_TRUE(j["crt"][k].contains("method"));
    EXPECT_EQ(j["crt"][k]["n_samples"], 5000);
    EXPECT_TRUE(j["crt"][k].contains("error"));
  }
}

TEST_F(Binary, AnalyzeFifthRates) {
  Result r = shell("analyze --alpha 0.2 --beta 0.2 --mu 0.2 --samples 2000");
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_NEAR(j["expected_M"]["value"].get<double>(), 5.6965, 1e-4);
  double p = j["extinction_probability"]["value"];
  EXPECT_GE(p, 0.23852);
  EXPECT_LE(p, 0.34);
  EXPECT_GT(j["lambda"]["value"].get<double>(), 0.0);
}

TEST_F(Binary, ExitCodes) {
  EXPECT_EQ(shell("--help").code, 0);
  EXPECT_EQ(shell("").code, 2);
  EXPECT_EQ(shell("verify nonsense").code, 2);
  EXPECT_EQ(shell("analyze --alpha -1").code, 2);
  EXPECT_EQ(shell("analyze --format newick").code, 2);
  EXPECT_EQ(shell("simulate --n 200 --method direct --max-retries 5").code, 3);
  EXPECT_EQ(shell("verify analytics").code, 0);
  EXPECT_EQ(shell("verify local --samples 20000 --n 200 --replicates 100").code, 0);
}

TEST_F(Binary, GfunTableCsv) {
  Result r = shell("gfun-table --format csv --depths 1 2 20");
  ASSERT_EQ(r.code, 0);
  std::istringstream s(r.out);
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "depth,z,lower,upper,sup_gap,bound");
  int rows = 0;
  while (std::getline(s, line)) ++rows;
  EXPECT_EQ(rows, 3 * 11);
}

TEST_F(Binary, SimulateFormats) {
  Result j = shell("simulate --n 10 --seed 3");
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(json::parse(j.out)["network"]["tree"]["outdegrees"].size(), 10u);
  Result c = shell("simulate --n 10 --seed 3 --format csv");
  EXPECT_EQ(c.out.rfind("edge,u,v,weight,time_u,time_v\n", 0), 0u);
  Result nw = shell("simulate --n 10 --seed 3 --format newick");
  EXPECT_NE(nw.out.find("root;"), std::string::npos);
  Result t = shell("simulate --trajectory --x0 3 --seed 1");
  json tj = json::parse(t.out);
  EXPECT_EQ(tj["trajectory"]["initial_state"], 3);
}

TEST_F(Binary, OutputDirectoryAndConfigFile) {
  fs::path d = temp_dir();
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "alpha=0.2\nbeta=0.2\nmu=0.2\nseed=9\n";
  }
  Result r = shell("contour --n 30 --grid-size 64 --config '" + (d / "run.cfg").string() +
                       "' --seed 10 --out h.json",
                   "PHYLONET_OUT_DIR='" + d.string() + "'");
  ASSERT_EQ(r.code, 0);
  std::ifstream f(d / "h.json");
  json j = json::parse(f);
  EXPECT_EQ(j["header"]["config"]["alpha"], 0.2);
  EXPECT_EQ(j["header"]["config"]["seed"], 10);
  EXPECT_EQ(j["h"].size(), 64u);
  fs::remove_all(d);
}

TEST_F(Binary, DeterministicAcrossWorkers) {
  for (const char* cmd : {"analyze --samples 4000", "contour --n 50 --grid-size 128",
                          "local-ball --r 3 --seed 2", "verify model --samples 3000"}) {
    Result a = shell(std::string(cmd) + " --workers 1");
    Result b = shell(std::string(cmd) + " --workers 3");
    EXPECT_EQ(a.code, b.code) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
    EXPECT_FALSE(a.out.empty());
  }
}

TEST(InProcess, MatchesBinaryContract) {
  Result r = in_process({"gfun-table", "--depths", "5"});
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_EQ(j["depths"].size(), 1u);
  EXPECT_LE(j["depths"][0]["sup_gap"].get<double>(), j["depths"][0]["bound"].get<double>());
  EXPECT_EQ(in_process({"verify"}).code, 2);
}

TEST(InProcess, SeedChangesOutput) {
  Result a = in_process({"simulate", "--n", "20", "--seed", "1"});
  Result b = in_process({"simulate", "--n", "20", "--seed", "2"});
  EXPECT_NE(a.out, b.out);
}

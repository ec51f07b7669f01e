#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(LOOPCUT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  for (std::string line; std::getline(f, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("loopcut_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, BenchCsvHasFixedColumns) {
  const auto out = dir / "cmp.csv";
  ASSERT_EQ(run("bench --fixture virtual-loop --D 2 --d 2 --schemes tebd,eat,zmt1,zmt3 --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 5u);
  const std::vector<std::string> head = {"iteration", "bond", "scheme", "f_initial_rel", "f_final_rel",
                                         "loopiness", "chi",  "beta",   "delta",         "wall_time_ms"};
  ASSERT_GE(rows[0].size(), head.size());
  for (std::size_t k = 0; k < head.size(); ++k) EXPECT_EQ(rows[0][k], head[k]);
  EXPECT_EQ(rows[1][2], "tebd");
  EXPECT_EQ(rows[3][2], "zmt1");
  EXPECT_LE(std::stod(rows[3][3]), 1e-12);
  EXPECT_GT(std::stod(rows[2][3]), 1e-3);
}

TEST_F(Cli, SameSeedGivesIdenticalNumbers) {
  const auto a = dir / "a.csv", b = dir / "b.csv";
  const std::string args = "bench --fixture loopy-env --D 3 --seed 9 --schemes eat,zmt1,zmt2,zmt3,zmt4 --out ";
  ASSERT_EQ(run(args + a.string()), 0);
  ASSERT_EQ(run(args + b.string()), 0);
  auto ra = read_csv(a), rb = read_csv(b);
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ASSERT_EQ(ra[i].size(), rb[i].size());
    for (std::size_t k = 0; k < ra[i].size(); ++k)
      if (ra[0][k] != "wall_time_ms") EXPECT_EQ(ra[i][k], rb[i][k]) << ra[0][k];
  }
}

TEST_F(Cli, TrgJsonReport) {
  const auto out = dir / "run.json";
  ASSERT_EQ(run("trg --beta 0.3 --chi 4 --iters 3 --scheme zmt2 --compare tebd,eat --quiet --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["config"]["scheme"], "zmt2");
  EXPECT_EQ(j["rows"].size(), 9u);
  EXPECT_EQ(j["rows"][0]["scheme"], "zmt2");
  EXPECT_EQ(j["rows"][1]["scheme"], "tebd");
  EXPECT_TRUE(j["rows"][0].contains("free_energy"));
  EXPECT_TRUE(j["rows"][0].contains("onsager"));
  EXPECT_LT(j["summary"]["relative_error"].get<double>(), 1e-3);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = dir / "run.cfg", out = dir / "run.json";
  std::ofstream(cfg) << "beta = 0.3\nchi = 4\niters = 2\nquiet = true\n";
  ASSERT_EQ(run("trg --config " + cfg.string() + " --chi 3 --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_DOUBLE_EQ(j["config"]["beta"].get<double>(), 0.3);
  EXPECT_EQ(j["config"]["chi"], 3);
  EXPECT_EQ(j["rows"].size(), 2u);
}

TEST_F(Cli, SchemeListWritesOneFilePerRun) {
  const auto out = dir / "sweep.csv";
  ASSERT_EQ(run("trg --beta 0.3 --chi 3 --iters 2 --scheme tebd,zmt1 --quiet --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "sweep.tebd.csv"));
  EXPECT_TRUE(fs::exists(dir / "sweep.zmt1.csv"));
}

TEST_F(Cli, ExitCodes) {
  const auto cfg = dir / "bad.cfg";
  std::ofstream(cfg) << "bogus = 1\n";
  EXPECT_EQ(run("trg --config " + cfg.string()), 2);
  EXPECT_EQ(run("trg --chi 1"), 2);
  EXPECT_EQ(run("trg --scheme nope"), 2);
  EXPECT_EQ(run("trg --iters 1 --out " + (dir / "missing" / "x.json").string()), 2);
  EXPECT_EQ(run("bench --fixture product-env --schemes tebd"), 2);
  EXPECT_EQ(run("fixture --kind toy-pair"), 0);
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(FRACTAL_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fractal_cli_test_" + name);
}

}  // namespace

TEST(CliCurve, HilbertCsvEndpoints) {
  const auto r = run("curve --kind hilbert --depth 3 --direction 1 --format csv");
  ASSERT_EQ(r.exit_code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 65u);
  EXPECT_EQ(rows[0], "index,row,col");
  EXPECT_EQ(rows[1], "0,0,0");
  EXPECT_EQ(rows[64], "63,7,0");
}

TEST(CliCurve, JsonEchoesShift) {
  const auto r = run("curve --kind hilbert --depth 3 --shift 1 --format json");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["shift"], 1);
  EXPECT_EQ(j["forward"].size(), 64u);
}

TEST(CliCurve, UsageAndRuntimeErrors) {
  EXPECT_EQ(run("curve --direction 5").exit_code, 2);
  EXPECT_EQ(run("curve --kind spiral").exit_code, 2);
  EXPECT_EQ(run("curve --bogus").exit_code, 2);
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("curve --depth 3 --rows 4").exit_code, 2);
  EXPECT_EQ(run("curve --kind morton --rows 6").exit_code, 1);
  EXPECT_EQ(run("curve --kind raster --direction 2").exit_code, 1);
  EXPECT_EQ(run("curve --depth 3 --shift 8").exit_code, 1);
}

TEST(CliCurve, WritesSvgToFile) {
  const auto path = temp_path("curve.svg");
  ASSERT_EQ(run("curve --rows 14 --format svg --out " + path.string()).exit_code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("viewBox=\"0 0 14 14\""), std::string::npos);
  std::filesystem::remove(path);
}

TEST(CliMetrics, FourSpecs) {
  const auto r = run("metrics --spec hilbert --spec raster --spec boustrophedon --spec morton");
  ASSERT_EQ(r.exit_code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].rfind("hilbert,1,0,1,", 0), 0u) << rows[1];
}

TEST(CliMetrics, RasterContinuity) {
  const auto r = run("metrics --spec raster --rows 8 --cols 8");
  ASSERT_EQ(r.exit_code, 0);
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  std::istringstream fields(rows[1]);
  std::vector<std::string> cols;
  for (std::string f; std::getline(fields, f, ',');) cols.push_back(f);
  ASSERT_EQ(cols.size(), 7u);
  EXPECT_DOUBLE_EQ(std::stod(cols[3]), 56.0 / 63.0);
}

TEST(CliMetrics, Errors) {
  EXPECT_EQ(run("metrics").exit_code, 2);
  EXPECT_EQ(run("metrics --spec hexagon").exit_code, 2);
  EXPECT_EQ(run("metrics --spec raster --spec raster@4x4").exit_code, 1);
}

TEST(CliMetrics, JsonMirror) {
  const auto r = run("metrics --spec hilbert:2 --format json");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["direction"], 2);
  EXPECT_EQ(j[0]["continuityFraction"], 1.0);
}

TEST(CliKernel, ExplicitParameters) {
  const auto r = run("kernel --a 0 --b 0.5 --c 1 --delta 1 --length 3 --rule euler");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "k0,k1,k2\n0.5,0.5,0.5\n");
  const auto zoh = run("kernel --a 0 --b 2 --c 1 --delta 0.3 --length 2");
  EXPECT_EQ(zoh.out, "k0,k1\n0.6,0.6\n");
  EXPECT_EQ(run("kernel --a -1 --b 1 --c 1 --delta 0").exit_code, 1);
  EXPECT_EQ(run("kernel --a -1,-2 --b 1 --c 1").exit_code, 1);
}

TEST(CliBlock, IdentityReproducesInputGrid) {
  const auto in = temp_path("grid.json");
  {
    std::ofstream f(in);
    f << R"({"rows":2,"cols":3,"channels":1,"data":[0.5,-1,2,3.25,0,7]})";
  }
  const auto r = run("block --identity --merge mean --in " + in.string());
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["data"], nlohmann::json::parse("[0.5,-1,2,3.25,0,7]"));
  std::filesystem::remove(in);
}

TEST(CliBlock, OpcountAndBadInput) {
  const auto r = run("block --rows 8 --cols 8 --opcount");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_GT(std::stoull(r.out), 0u);
  EXPECT_EQ(run("block --in /nonexistent/grid.json").exit_code, 1);
  EXPECT_EQ(run("block --merge median").exit_code, 2);
}

TEST(CliVerify, SuitesPass) {
  for (const std::string suite : {"curves", "ssm", "block"}) {
    const auto r = run("verify --suite " + suite + " --seed 7");
    EXPECT_EQ(r.exit_code, 0) << suite;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["suites"][0]["suite"], suite);
  }
}

TEST(CliConfig, FlagsThenFileThenEnvironment) {
  const auto cfg = temp_path("config.toml");
  {
    std::ofstream f(cfg);
    f << "[curve]\nformat = \"csv\"\ndepth = 1\n";
  }
  const std::string with_cfg = "--config " + cfg.string() + " curve";
  // The file supplies format and depth.
  EXPECT_EQ(lines(run(with_cfg).out).size(), 5u);
  // A flag beats the file.
  EXPECT_EQ(lines(run(with_cfg + " --depth 2").out).size(), 17u);
  // The file beats the environment.
  EXPECT_EQ(run(with_cfg, "FRACTAL_FORMAT=svg").out.rfind("index,row,col", 0), 0u);
  // The environment fills what neither flags nor file set.
  EXPECT_EQ(run("curve --depth 1", "FRACTAL_FORMAT=csv").out.rfind("index,row,col", 0), 0u);
  EXPECT_EQ(run("curve --depth 1").out.front(), '{');
  std::filesystem::remove(cfg);
}

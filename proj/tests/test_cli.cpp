#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <regex>
#include <string>
#include <sys/wait.h>

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(PROBSYM_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string write_program(const std::string& name, const std::string& text) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << text;
  return path;
}

std::string gender_height() { return std::string(PROBSYM_PROGRAMS_DIR) + "/gender_height.prob"; }

nlohmann::json run_json(const std::string& args) {
  const auto r = run_cli("run " + args + " --format json");
  EXPECT_EQ(r.status, 0) << r.out;
  return nlohmann::json::parse(r.out);
}

std::string strip_elapsed(const std::string& s) {
  return std::regex_replace(s, std::regex("\"elapsed_ms\": [0-9.e+-]+"), "\"elapsed_ms\": 0");
}

}  // namespace

TEST(Cli, GenderHeightTable) {
  const auto r = run_cli("run " + gender_height());
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("{gender ↦ 1, height ↦ z0 * sqrt(72) + 175}"), std::string::npos);
  EXPECT_NE(r.out.find("y0 < 0.51 ∧ 1 != 1"), std::string::npos);
  EXPECT_NE(r.out.find("Actual"), std::string::npos);
  EXPECT_NE(r.out.find("Discarded"), std::string::npos);
  EXPECT_NE(r.out.find("Samples"), std::string::npos);
  EXPECT_NE(r.out.find("Time"), std::string::npos);
}

TEST(Cli, GenderHeightJson) {
  const auto j = run_json(gender_height() + " --query 'gender = 1'");
  EXPECT_EQ(j["schema"], 1);
  ASSERT_EQ(j["paths"].size(), 4u);
  EXPECT_EQ(j["paths"][0]["sigma"]["height"], "z0 * sqrt(72) + 175");
  EXPECT_EQ(j["paths"][0]["k_y"], 1);
  EXPECT_EQ(j["paths"][0]["k_z"], 1);
  EXPECT_EQ(j["paths"][0]["prior"]["value"], "0.51000000000000001");
  EXPECT_EQ(j["paths"][1]["feasibility"], "infeasible_pc");
  EXPECT_EQ(j["paths"][2]["feasibility"], "infeasible_pc");
  EXPECT_EQ(j["summary"]["infeasible_pc"], 2);
  EXPECT_EQ(j["summary"]["feasible"], 2);
  EXPECT_EQ(j["summary"]["samples"], 2);
  EXPECT_NEAR(std::stod(j["summary"]["evidence"]["value"].get<std::string>()), 0.00082014699818340653, 1e-15);
  EXPECT_NEAR(std::stod(j["summary"]["posterior"]["value"].get<std::string>()), 0.99998960661817308077, 1e-12);
}

TEST(Cli, SkipProgram) {
  const auto j = run_json(write_program("skip.prob", "skip\n"));
  ASSERT_EQ(j["paths"].size(), 1u);
  EXPECT_EQ(j["paths"][0]["prior"]["value"], "1");
  EXPECT_EQ(j["summary"]["evidence"]["value"], "1");
}

TEST(Cli, TwoCoins) {
  const std::string path =
      write_program("two_coins.prob", "a ~ bern(0.5);\nb ~ bern(0.5);\nobserve (a = 1 || b = 1);\n");
  const auto both = run_json(path + " --query 'a = 1 && b = 1'");
  EXPECT_EQ(both["summary"]["paths"], 4);
  EXPECT_EQ(both["summary"]["feasible"], 3);
  EXPECT_EQ(both["summary"]["discarded"], 1);
  EXPECT_EQ(both["summary"]["posterior"]["value"], "0.33333333333333331");
  const auto first = run_json(path + " --query 'a = 1'");
  EXPECT_EQ(first["summary"]["posterior"]["value"], "0.66666666666666663");
}

TEST(Cli, CountsSumToPaths) {
  const std::string path = write_program("loop.prob", "x ~ rnd; while (x < 0.5) { x ~ rnd }\nobserve (x > 0.9)\n");
  const auto j = run_json(path + " --unroll 2");
  const auto& s = j["summary"];
  EXPECT_EQ(s["feasible"].get<int>() + s["discarded"].get<int>() + s["infeasible_pc"].get<int>() +
                s["unroll_exhausted"].get<int>(),
            s["paths"].get<int>());
  EXPECT_EQ(s["unroll_exhausted"], 1);
  EXPECT_EQ(s["samples"], 3);
}

TEST(Cli, DeterministicJsonAcrossRunsAndThreads) {
  const std::string path = write_program(
      "mc.prob", "x ~ rnd; y ~ stdnorm; if (x * y > 0.2) { z := 1 } else { z := 0 }\nobserve (x + y > 0)\n");
  const std::string args = "run " + path + " --format json --query 'z = 1' --mc-trials 20000 --seed 5";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  const auto c = run_cli(args + " --threads 4");
  ASSERT_EQ(a.status, 0) << a.out;
  EXPECT_EQ(strip_elapsed(a.out), strip_elapsed(b.out));
  auto jc = nlohmann::json::parse(c.out);
  auto ja = nlohmann::json::parse(a.out);
  jc["summary"].erase("elapsed_ms");
  ja["summary"].erase("elapsed_ms");
  jc["config"].erase("threads");
  ja["config"].erase("threads");
  EXPECT_EQ(ja, jc);
  EXPECT_EQ(ja["summary"]["evidence"]["method"], "monte_carlo");
}

TEST(Cli, MeasureFlag) {
  const std::string path = write_program("input.prob", "observe (x < 0.25)\n");
  const auto j = run_json(path + " --measure x=uniform01");
  EXPECT_EQ(j["config"]["measure"]["x"], "uniform01");
  EXPECT_EQ(j["summary"]["evidence"]["value"], "0.25");
  const auto k = run_json(path + " --measure x=point:0.1");
  EXPECT_EQ(k["summary"]["evidence"]["value"], "1");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("run " + write_program("bad.prob", "x := 1 +")).status, 1);
  EXPECT_EQ(run_cli("run /nonexistent/file.prob").status, 1);
  EXPECT_EQ(run_cli("run " + write_program("dist.prob", "x ~ poisson(2)")).status, 1);
  EXPECT_EQ(run_cli("run " + gender_height() + " --query 'weight > 1'").status, 1);
  EXPECT_EQ(run_cli("run " + gender_height() + " --max-paths 2").status, 2);
  EXPECT_EQ(run_cli("run " + gender_height() + " --bogus").status, 1);
  EXPECT_EQ(run_cli("--help").status, 0);
}

TEST(Cli, ParseErrorNamesThePosition) {
  const auto r = run_cli("run " + write_program("bad2.prob", "x := 1;\ny := x *;\n"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("line 2, column 9"), std::string::npos) << r.out;
}

TEST(Cli, MissingSolverIsAWarning) {
  const auto r = run_cli("run " + gender_height() + " --solver-cmd /nonexistent/solver --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["warnings"].empty());
  EXPECT_EQ(j["paths"][1]["feasibility"], "unknown");
  EXPECT_NEAR(std::stod(j["summary"]["evidence"]["value"].get<std::string>()), 0.00082014699818340653, 1e-15);
}

// probsym run <file> [options]: bounded symbolic execution of a
// probabilistic program with per-path probability masses.

#include "probsym/report.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Symbolic execution of probabilistic programs"};
  app.require_subcommand(1);

  probsym::RunConfig cfg;
  std::string format = "table";
  std::string solver_cmd;
  std::string query;

  auto* run = app.add_subcommand("run", "Explore a program and report its paths");
  run->add_option("file", cfg.input_path, "Program source")->required();
  run->add_option("--unroll", cfg.unroll, "Loop iterations explored per loop entry")
      ->capture_default_str();
  run->add_option("--mc-trials", cfg.mc_trials, "Monte Carlo trials per non-separable mass")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", cfg.seed, "Seed for Monte Carlo estimates")->capture_default_str();
  run->add_option("--solver-cmd", solver_cmd,
                  "SMT solver command line (default: $PROBSYM_SOLVER or 'z3 -in')");
  run->add_option("--timeout-ms", cfg.timeout_ms, "Per-query solver timeout")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  run->add_option("--query", query, "Event A over program variables, e.g. 'gender = 1'");
  run->add_option("--measure", cfg.measure, "Input distribution: VAR=point:V|uniform01|stdnormal")
      ->take_all();
  run->add_option("--format", format, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "json"}));
  run->add_option("--threads", cfg.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--max-paths", cfg.max_paths, "Fail with exit code 2 beyond this many paths")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->count("--solver-cmd")) cfg.solver_cmd = solver_cmd;
  if (run->count("--query")) cfg.query = query;
  cfg.format = format == "json" ? probsym::RunConfig::Format::Json : probsym::RunConfig::Format::Table;

  try {
    const auto report = probsym::run(cfg);
    std::cout << (cfg.format == probsym::RunConfig::Format::Json ? probsym::render_json(report)
                                                                 : probsym::render_table(report));
    return 0;
  } catch (const probsym::BudgetError& e) {
    std::cerr << "probsym: budget exceeded: " << e.what() << '\n';
    return 2;
  } catch (const probsym::ParseError& e) {
    std::cerr << cfg.input_path << ": parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "probsym: " << e.what() << '\n';
    return 1;
  }
}

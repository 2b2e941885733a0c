#pragma once

// End-to-end driver behind `probsym run`: parse, desugar, explore,
// classify, quantify, and render the result as a table or as JSON.

#include "probsym/ast.hpp"
#include "probsym/desugar.hpp"
#include "probsym/errors.hpp"
#include "probsym/measure.hpp"
#include "probsym/parser.hpp"
#include "probsym/print.hpp"
#include "probsym/rational.hpp"
#include "probsym/solver.hpp"
#include "probsym/symexec.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace probsym {

struct RunConfig {
  std::string input_path;
  /// Program text; read from `input_path` when absent.
  std::optional<std::string> source;
  std::size_t unroll = 4;
  std::size_t mc_trials = 100'000;
  std::uint64_t seed = 0;
  /// Whitespace-separated solver command line; PROBSYM_SOLVER or `z3 -in`
  /// when absent.
  std::optional<std::string> solver_cmd;
  int timeout_ms = 10'000;
  std::optional<std::string> query;
  /// Entries of the form VAR=point:V, VAR=uniform01 or VAR=stdnormal.
  /// Unlisted variables are point masses at 0.
  std::vector<std::string> measure;
  enum class Format { Table, Json } format = Format::Table;
  unsigned threads = 1;
  std::size_t max_paths = 1'000'000;
};

struct PathRecord {
  std::string choices;
  PathStatus status = PathStatus::Final;
  Feasibility feasibility = Feasibility::Unknown;
  /// (variable, term) in declaration order.
  std::vector<std::pair<std::string, std::string>> sigma;
  std::size_t ky = 0;
  std::size_t kz = 0;
  std::vector<std::string> pc;
  std::vector<std::string> po;
  std::string pc_report;
  std::string po_report;
  MassEstimate prior;
  MassEstimate joint;
  std::optional<MassEstimate> query;
};

struct RunSummary {
  std::size_t paths = 0;
  std::size_t feasible = 0;
  std::size_t infeasible_pc = 0;
  std::size_t discarded = 0;
  std::size_t unroll_exhausted = 0;
  /// Outcomes the solver could not decide (counted as feasible or exhausted).
  std::size_t unknown = 0;
  /// max over paths of k_y + k_z.
  std::size_t samples = 0;
  double elapsed_ms = 0.0;
  /// Path-mass sum with A = true: the unnormalised mass of accepted runs.
  MassEstimate evidence;
  /// Path-mass sum for the query event.
  std::optional<MassEstimate> query_mass;
  std::optional<PosteriorEstimate> posterior;
  MassEstimate truncation_bound;
};

struct RunReport {
  std::string program;
  std::vector<std::string> vars;
  RunConfig config;
  std::string solver;
  std::vector<std::string> measure;
  std::vector<PathRecord> paths;
  RunSummary summary;
  std::vector<std::string> warnings;
};

/// Parses one --measure entry against the program's variables.
inline std::pair<std::size_t, MeasureSpec::Component> parse_measure_entry(
    const std::string& entry, const std::vector<std::string>& vars) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos) throw Error("--measure '" + entry + "': expected VAR=SPEC");
  const std::string name = entry.substr(0, eq);
  const std::string spec = entry.substr(eq + 1);
  std::size_t index = vars.size();
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == name) index = i;
  if (index == vars.size()) throw Error("--measure: unknown variable '" + name + "'");
  if (spec == "uniform01") return {index, {MeasureSpec::Kind::Uniform01, 0.0}};
  if (spec == "stdnormal") return {index, {MeasureSpec::Kind::StdNormal, 0.0}};
  if (spec.rfind("point:", 0) == 0) {
    std::string v = spec.substr(6);
    const bool neg = !v.empty() && v[0] == '-';
    if (neg) v.erase(0, 1);
    try {
      const double x = to_double(parse_decimal(v));
      return {index, {MeasureSpec::Kind::Point, neg ? -x : x}};
    } catch (const std::exception&) {
      throw Error("--measure '" + entry + "': bad point value");
    }
  }
  throw Error("--measure '" + entry + "': expected point:V, uniform01 or stdnormal");
}

inline std::string measure_label(const MeasureSpec::Component& c) {
  switch (c.kind) {
    case MeasureSpec::Kind::Uniform01: return "uniform01";
    case MeasureSpec::Kind::StdNormal: return "stdnormal";
    case MeasureSpec::Kind::Point: break;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "point:%.17g", c.value);
  return buf;
}

/// Runs the whole pipeline. Throws ParseError and Error on bad input and
/// BudgetError when exploration exceeds the path cap.
inline RunReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.program = config.input_path;

  std::string text;
  if (config.source) {
    text = *config.source;
  } else {
    std::ifstream in(config.input_path, std::ios::binary);
    if (!in) throw Error("cannot read '" + config.input_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  if (config.mc_trials == 0) throw Error("--mc-trials must be at least 1");

  const Program program = parse(text);
  report.vars = program.vars;

  MeasureSpec mu = MeasureSpec::point(program.n());
  for (const auto& entry : config.measure) {
    auto [i, c] = parse_measure_entry(entry, program.vars);
    mu.components[i] = c;
  }
  for (const auto& c : mu.components) report.measure.push_back(measure_label(c));

  std::optional<BoolExpr> query;
  if (config.query) query = parse_bool_expr(*config.query, program.vars);

  const Program core = desugar(program);
  auto outcomes = explore(core, ExploreOptions{config.unroll, config.max_paths});

  SolverConfig solver;
  if (config.solver_cmd) {
    std::istringstream words(*config.solver_cmd);
    solver.command.clear();
    for (std::string w; words >> w;) solver.command.push_back(w);
  }
  solver.timeout_ms = config.timeout_ms;
  for (const auto& w : solver.command) report.solver += (report.solver.empty() ? "" : " ") + w;
  try {
    classify_all(outcomes, solver, config.threads);
  } catch (const SolverUnavailable& e) {
    for (auto& o : outcomes) o.feasibility = Feasibility::Unknown;
    report.warnings.push_back(std::string("solver unavailable, no pruning: ") + e.what());
  }

  const MassOptions mass{config.mc_trials, config.seed, config.threads};
  const PathSumResult t2 = quantify(outcomes, mu, query, mass);

  RunSummary& s = report.summary;
  s.paths = outcomes.size();
  bool zero_equality = false;
  bool monte_carlo = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const PathOutcome& o = outcomes[i];
    const PathMassReport& m = t2.paths[i];
    PathRecord r;
    r.choices = o.choices;
    r.status = o.status;
    r.feasibility = o.feasibility;
    for (std::size_t v = 0; v < program.n(); ++v)
      r.sigma.emplace_back(program.vars[v], to_string(o.cfg.sigma[v], program.vars));
    r.ky = o.cfg.ky;
    r.kz = o.cfg.kz;
    for (const auto& a : o.cfg.pc) r.pc.push_back(to_string(a, program.vars));
    for (const auto& a : o.cfg.po) r.po.push_back(to_string(a, program.vars));
    r.pc_report = conjunction_to_string(o.cfg.pc, program.vars);
    r.po_report = conjunction_to_string(o.cfg.po, program.vars);
    r.prior = m.prior;
    r.joint = m.joint;
    r.query = m.query;
    for (const auto* e : {&m.prior, &m.joint}) {
      zero_equality = zero_equality || e->measure_zero_equality;
      monte_carlo = monte_carlo || e->method == MassMethod::MonteCarlo;
    }
    report.paths.push_back(std::move(r));

    s.samples = std::max(s.samples, o.cfg.ky + o.cfg.kz);
    if (o.feasibility == Feasibility::Unknown) ++s.unknown;
    if (o.feasibility == Feasibility::InfeasiblePC)
      ++s.infeasible_pc;
    else if (o.status == PathStatus::UnrollExhausted)
      ++s.unroll_exhausted;
    else if (o.feasibility == Feasibility::Discarded)
      ++s.discarded;
    else
      ++s.feasible;
  }

  s.evidence = t2.evidence;
  s.truncation_bound = t2.truncation_bound;
  if (query) {
    s.query_mass = t2.total;
    try {
      s.posterior = posterior_from(t2);
    } catch (const ZeroEvidence& e) {
      report.warnings.push_back(std::string("posterior undefined: ") + e.what());
    }
  }
  if (zero_equality)
    report.warnings.push_back("equality on a continuous variable was given mass zero");
  if (monte_carlo)
    report.warnings.push_back("some path masses are Monte Carlo estimates");
  if (s.unroll_exhausted > 0)
    report.warnings.push_back("unroll budget reached on " + std::to_string(s.unroll_exhausted) +
                              " path(s); the sums exclude their mass");
  if (s.unknown > 0)
    report.warnings.push_back(std::to_string(s.unknown) +
                              " path(s) could not be decided by the solver and are kept");

  s.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline const char* feasibility_name(Feasibility f) {
  switch (f) {
    case Feasibility::Unknown: return "unknown";
    case Feasibility::Feasible: return "feasible";
    case Feasibility::InfeasiblePC: return "infeasible_pc";
    case Feasibility::Discarded: return "discarded";
  }
  return "unknown";
}

inline const char* status_name(PathStatus s) {
  return s == PathStatus::Final ? "final" : "unroll_exhausted";
}

inline std::string format_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

namespace detail {

inline std::string short_mass(const MassEstimate& m) {
  char buf[64];
  if (m.method == MassMethod::Exact)
    std::snprintf(buf, sizeof buf, "%.10g (exact)", m.value);
  else
    std::snprintf(buf, sizeof buf, "%.6g ± %.2g (mc)", m.value, m.std_error);
  return buf;
}

inline std::string long_mass(const MassEstimate& m) {
  if (m.method == MassMethod::Exact) return format_probability(m.value) + " (exact)";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2g", m.std_error);
  return format_probability(m.value) + " ± " + buf + " (mc)";
}

inline nlohmann::ordered_json mass_json(const MassEstimate& m) {
  nlohmann::ordered_json j;
  j["value"] = format_probability(m.value);
  j["method"] = m.method == MassMethod::Exact ? "exact" : "monte_carlo";
  j["stderr"] = format_probability(m.std_error);
  j["samples_used"] = m.samples_used;
  return j;
}

}  // namespace detail

/// Per-path detail followed by a summary whose columns follow the
/// Actual / Discarded / Samples / Time layout.
inline std::string render_table(const RunReport& r) {
  std::ostringstream os;
  os << "program: " << r.program << "\nvariables:";
  for (std::size_t i = 0; i < r.vars.size(); ++i) os << ' ' << r.vars[i] << '~' << r.measure[i];
  os << "\n\n";
  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    const PathRecord& p = r.paths[i];
    os << "path " << i + 1 << " [" << p.choices << "] " << status_name(p.status) << ", "
       << feasibility_name(p.feasibility) << '\n';
    os << "  sigma  {";
    for (std::size_t v = 0; v < p.sigma.size(); ++v)
      os << (v ? ", " : "") << p.sigma[v].first << " ↦ " << p.sigma[v].second;
    os << "}\n";
    os << "  k_y " << p.ky << ", k_z " << p.kz << '\n';
    os << "  pc     " << p.pc_report << '\n';
    os << "  po     " << p.po_report << '\n';
    os << "  prior  " << detail::short_mass(p.prior) << '\n';
    os << "  joint  " << detail::short_mass(p.joint) << '\n';
    if (p.query) os << "  query  " << detail::short_mass(*p.query) << '\n';
    os << '\n';
  }

  const RunSummary& s = r.summary;
  char time[32];
  std::snprintf(time, sizeof time, "%.3fs", s.elapsed_ms / 1000.0);
  os << std::left << std::setw(8) << "Paths" << std::setw(8) << "Actual" << std::setw(11)
     << "Discarded" << std::setw(12) << "Infeasible" << std::setw(11) << "Exhausted" << std::setw(9)
     << "Samples" << "Time\n";
  os << std::setw(8) << s.paths << std::setw(8) << s.feasible << std::setw(11) << s.discarded
     << std::setw(12) << s.infeasible_pc << std::setw(11) << s.unroll_exhausted << std::setw(9)
     << s.samples << time << "\n\n";
  os << "evidence (A = true)  " << detail::long_mass(s.evidence) << '\n';
  if (s.query_mass) os << "mass of A            " << detail::long_mass(*s.query_mass) << '\n';
  if (s.posterior) {
    os << "posterior P(A | obs) " << format_probability(s.posterior->value);
    if (s.posterior->method == MassMethod::MonteCarlo) os << " ± " << s.posterior->std_error;
    os << '\n';
  }
  if (s.unroll_exhausted > 0)
    os << "truncated mass       " << format_probability(s.truncation_bound.value) << '\n';
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

/// Schema version 1; see docs/report-schema.json.
inline std::string render_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = 1;
  j["program"] = r.program;
  j["variables"] = r.vars;
  ordered_json cfg;
  cfg["unroll"] = r.config.unroll;
  cfg["mc_trials"] = r.config.mc_trials;
  cfg["seed"] = r.config.seed;
  cfg["solver"] = r.solver;
  cfg["timeout_ms"] = r.config.timeout_ms;
  cfg["query"] = r.config.query ? ordered_json(*r.config.query) : ordered_json(nullptr);
  ordered_json measure = ordered_json::object();
  for (std::size_t i = 0; i < r.vars.size(); ++i) measure[r.vars[i]] = r.measure[i];
  cfg["measure"] = measure;
  cfg["threads"] = r.config.threads;
  j["config"] = cfg;

  ordered_json paths = ordered_json::array();
  for (const auto& p : r.paths) {
    ordered_json e;
    e["choices"] = p.choices;
    e["status"] = status_name(p.status);
    e["feasibility"] = feasibility_name(p.feasibility);
    ordered_json sigma = ordered_json::object();
    for (const auto& [name, term] : p.sigma) sigma[name] = term;
    e["sigma"] = sigma;
    e["k_y"] = p.ky;
    e["k_z"] = p.kz;
    e["pc"] = p.pc;
    e["po"] = p.po;
    e["prior"] = detail::mass_json(p.prior);
    e["joint"] = detail::mass_json(p.joint);
    e["query"] = p.query ? detail::mass_json(*p.query) : ordered_json(nullptr);
    paths.push_back(e);
  }
  j["paths"] = paths;

  const RunSummary& s = r.summary;
  ordered_json sum;
  sum["paths"] = s.paths;
  sum["feasible"] = s.feasible;
  sum["discarded"] = s.discarded;
  sum["infeasible_pc"] = s.infeasible_pc;
  sum["unroll_exhausted"] = s.unroll_exhausted;
  sum["unknown_verdicts"] = s.unknown;
  sum["samples"] = s.samples;
  sum["evidence"] = detail::mass_json(s.evidence);
  sum["query_mass"] = s.query_mass ? detail::mass_json(*s.query_mass) : ordered_json(nullptr);
  if (s.posterior) {
    ordered_json post;
    post["value"] = format_probability(s.posterior->value);
    post["method"] = s.posterior->method == MassMethod::Exact ? "exact" : "monte_carlo";
    post["stderr"] = format_probability(s.posterior->std_error);
    sum["posterior"] = post;
  } else {
    sum["posterior"] = nullptr;
  }
  sum["truncation_bound"] = detail::mass_json(s.truncation_bound);
  sum["elapsed_ms"] = s.elapsed_ms;
  j["summary"] = sum;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

}  // namespace probsym

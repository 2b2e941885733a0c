#pragma once

// Feasibility of path conditions by an external SMT solver speaking
// SMT-LIB 2 on stdin (z3 -in by default). Constraints are sent as QF_NRA:
// uniform samples get their [0,1] support, normal samples are unbounded
// reals, and every distinct sqrt(e) becomes an auxiliary s with s*s = e
// and s >= 0.

#include "probsym/ast.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/parallel.hpp"
#include "probsym/rational.hpp"
#include "probsym/symexec.hpp"
#include "probsym/valuation.hpp"

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

namespace probsym {

/// Solver variable name -> value. Names: v<i> program variables, u<k>
/// uniform samples, g<k> normal samples, s<j> sqrt auxiliaries.
using Model = std::map<std::string, Rational>;

struct SatVerdict {
  enum class Kind { Sat, Unsat, Unknown };
  Kind kind = Kind::Unknown;
  /// Present for Sat when every value is a rational numeral.
  std::optional<Model> model;
  /// Why the verdict is Unknown.
  std::string reason;
};

/// Command line from PROBSYM_SOLVER (split on whitespace), else `z3 -in`.
inline std::vector<std::string> default_solver_command() {
  if (const char* env = std::getenv("PROBSYM_SOLVER"); env && *env) {
    std::istringstream in(env);
    std::vector<std::string> argv;
    for (std::string w; in >> w;) argv.push_back(w);
    if (!argv.empty()) return argv;
  }
  return {"z3", "-in"};
}

struct SolverConfig {
  std::vector<std::string> command = default_solver_command();
  int timeout_ms = 10'000;
};

namespace detail {

class SmtWriter {
 public:
  std::string term(const SymExpr& t) {
    switch (t.kind()) {
      case SymExpr::Kind::Const: return numeral(t.rational());
      case SymExpr::Kind::Var: return declare('v', t.index());
      case SymExpr::Kind::Sample:
        return declare(t.dist() == SampleDist::Uniform ? 'u' : 'g', t.index());
      case SymExpr::Kind::Op: break;
    }
    const auto args = t.args();
    switch (t.op_kind()) {
      case OpKind::Add: return "(+ " + term(args[0]) + " " + term(args[1]) + ")";
      case OpKind::Sub: return "(- " + term(args[0]) + " " + term(args[1]) + ")";
      case OpKind::Mul: return "(* " + term(args[0]) + " " + term(args[1]) + ")";
      case OpKind::Neg: return "(- " + term(args[0]) + ")";
      case OpKind::Sqrt: {
        const std::string arg = term(args[0]);
        auto [it, fresh] = sqrt_aux_.try_emplace(arg, "s" + std::to_string(sqrt_aux_.size()));
        if (fresh) {
          aux_decls_ += "(declare-fun " + it->second + " () Real)\n";
          aux_decls_ += "(assert (>= " + it->second + " 0))\n";
          aux_decls_ += "(assert (= (* " + it->second + " " + it->second + ") " + arg + "))\n";
        }
        return it->second;
      }
    }
    throw std::logic_error("smt: unknown operator");
  }

  std::string formula(const SymBool& f) {
    switch (f.kind()) {
      case SymBool::Kind::True: return "true";
      case SymBool::Kind::False: return "false";
      case SymBool::Kind::Not: return "(not " + formula(f.operands()[0]) + ")";
      case SymBool::Kind::And:
        return "(and " + formula(f.operands()[0]) + " " + formula(f.operands()[1]) + ")";
      case SymBool::Kind::Or:
        return "(or " + formula(f.operands()[0]) + " " + formula(f.operands()[1]) + ")";
      case SymBool::Kind::Cmp: break;
    }
    const std::string l = term(f.lhs());
    const std::string r = term(f.rhs());
    switch (f.rel()) {
      case Rel::Lt: return "(< " + l + " " + r + ")";
      case Rel::Le: return "(<= " + l + " " + r + ")";
      case Rel::Eq: return "(= " + l + " " + r + ")";
      case Rel::Ne: return "(distinct " + l + " " + r + ")";
      case Rel::Ge: return "(>= " + l + " " + r + ")";
      case Rel::Gt: return "(> " + l + " " + r + ")";
    }
    throw std::logic_error("smt: unknown relation");
  }

  std::string declarations() const {
    std::string out;
    for (const auto& [prefix, index] : vars_) {
      const std::string name = prefix + std::to_string(index);
      out += "(declare-fun " + name + " () Real)\n";
      if (prefix == 'u') out += "(assert (<= 0 " + name + "))\n(assert (<= " + name + " 1))\n";
    }
    return out + aux_decls_;
  }

  static std::string numeral(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    const std::string mag = (num < 0 ? BigInt(-num) : num).str();
    const std::string body = den == 1 ? mag : "(/ " + mag + " " + den.str() + ")";
    return num < 0 ? "(- " + body + ")" : body;
  }

 private:
  std::string declare(char prefix, std::size_t index) {
    vars_.emplace(prefix, index);
    return prefix + std::to_string(index);
  }

  // Sorted by prefix then index: g*, u*, v*.
  std::set<std::pair<char, std::size_t>> vars_;
  std::map<std::string, std::string> sqrt_aux_;
  std::string aux_decls_;
};

}  // namespace detail

/// SMT-LIB 2 script asserting the conjunction. Literal `true` atoms are
/// dropped.
inline std::string emit_smt(std::span<const SymBool> constraints) {
  detail::SmtWriter w;
  std::string asserts;
  for (const auto& c : constraints) {
    if (c.kind() == SymBool::Kind::True) continue;
    asserts += "(assert " + w.formula(c) + ")\n";
  }
  return "(set-option :produce-models true)\n(set-logic QF_NRA)\n" + w.declarations() + asserts +
         "(check-sat)\n(get-model)\n(exit)\n";
}

namespace detail {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : s_(text) {}

  std::optional<SExpr> next() {
    skip();
    if (pos_ >= s_.size()) return std::nullopt;
    if (s_[pos_] == ')') {
      ++pos_;
      return std::nullopt;
    }
    if (s_[pos_] == '(') {
      ++pos_;
      SExpr e;
      e.is_list = true;
      while (auto child = next()) e.list.push_back(std::move(*child));
      return e;
    }
    SExpr e;
    if (s_[pos_] == '"' || s_[pos_] == '|') {
      const char close = s_[pos_];
      const std::size_t end = s_.find(close, pos_ + 1);
      const std::size_t stop = end == std::string_view::npos ? s_.size() : end + 1;
      e.atom = std::string(s_.substr(pos_, stop - pos_));
      pos_ = stop;
      return e;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')')
      ++pos_;
    e.atom = std::string(s_.substr(start, pos_ - start));
    return e;
  }

  bool done() {
    skip();
    return pos_ >= s_.size();
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline std::optional<Rational> model_value(const SExpr& e) {
  if (!e.is_list) {
    if (e.atom.empty() || !(std::isdigit(static_cast<unsigned char>(e.atom[0])))) return std::nullopt;
    try {
      return parse_decimal(e.atom);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (e.list.empty() || e.list[0].is_list) return std::nullopt;
  const std::string& head = e.list[0].atom;
  if (head == "-" && e.list.size() == 2) {
    auto v = model_value(e.list[1]);
    if (v) return Rational(-*v);
  } else if (head == "/" && e.list.size() == 3) {
    auto a = model_value(e.list[1]);
    auto b = model_value(e.list[2]);
    if (a && b && *b != 0) return Rational(*a / *b);
  }
  return std::nullopt;
}

// The (define-fun name () Real value) entries of a get-model response, or
// nullopt if any value is not a rational numeral.
inline std::optional<Model> parse_model(const SExpr& e) {
  if (!e.is_list) return std::nullopt;
  Model m;
  for (const auto& d : e.list) {
    if (!d.is_list) continue;  // older z3 prints a leading `model` atom
    if (d.list.size() != 5 || d.list[0].atom != "define-fun") return std::nullopt;
    auto v = model_value(d.list[4]);
    if (!v) return std::nullopt;
    m.emplace(d.list[1].atom, std::move(*v));
  }
  return m;
}

struct ProcessResult {
  bool started = false;
  bool timed_out = false;
  std::string output;
  std::string error;
};

inline void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

/// Runs argv with `input` on stdin and returns its stdout. All descriptors
/// are close-on-exec so concurrent children never inherit each other's
/// pipes.
inline ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                                 int timeout_ms) {
  ProcessResult res;
  if (argv.empty()) {
    res.error = "empty solver command";
    return res;
  }
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  int in[2] = {-1, -1};    // socket pair so a dead child yields EPIPE, not SIGPIPE
  int out[2] = {-1, -1};
  int status_pipe[2] = {-1, -1};
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in) != 0 ||
      ::pipe2(out, O_CLOEXEC) != 0 || ::pipe2(status_pipe, O_CLOEXEC) != 0) {
    res.error = std::string("pipe: ") + std::strerror(errno);
    for (int* fd : {&in[0], &in[1], &out[0], &out[1], &status_pipe[0], &status_pipe[1]}) close_fd(*fd);
    return res;
  }
  const int devnull = ::open("/dev/null", O_WRONLY | O_CLOEXEC);

  const pid_t pid = ::fork();
  if (pid == 0) {
    ::dup2(in[1], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::execvp(cargv[0], cargv.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  close_fd(in[1]);
  close_fd(out[1]);
  close_fd(status_pipe[1]);
  if (devnull >= 0) ::close(devnull);
  if (pid < 0) {
    res.error = std::string("fork: ") + std::strerror(errno);
    close_fd(in[0]);
    close_fd(out[0]);
    close_fd(status_pipe[0]);
    return res;
  }

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(status_pipe[0], &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  close_fd(status_pipe[0]);
  if (got > 0) {
    ::waitpid(pid, nullptr, 0);
    close_fd(in[0]);
    close_fd(out[0]);
    res.error = argv[0] + ": " + std::strerror(exec_errno);
    return res;
  }
  res.started = true;

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  std::size_t written = 0;
  char buf[4096];
  while (out[0] >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) {
      res.timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = pollfd{out[0], POLLIN, 0};
    if (in[0] >= 0) fds[nfds++] = pollfd{in[0], POLLOUT, 0};
    const int ready = ::poll(fds, nfds, static_cast<int>(left));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (nfds == 2 && fds[1].revents) {
      const ssize_t n =
          ::send(in[0], input.data() + written, input.size() - written, MSG_NOSIGNAL | MSG_DONTWAIT);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      if (written >= input.size()) {
        ::shutdown(in[0], SHUT_WR);
        close_fd(in[0]);
      }
    }
    if (fds[0].revents) {
      const ssize_t n = ::read(out[0], buf, sizeof buf);
      if (n > 0) {
        res.output.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        close_fd(out[0]);
      }
    }
  }
  close_fd(in[0]);
  close_fd(out[0]);
  if (res.timed_out) ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
  return res;
}

}  // namespace detail

/// Satisfiability of a conjunction over the reals (samples restricted to
/// their support). Atoms that fold to constants are decided without the
/// solver. Throws SolverUnavailable when the solver cannot be started.
inline SatVerdict check(std::span<const SymBool> constraints, const SolverConfig& config = {}) {
  std::vector<SymBool> open;
  for (const auto& c : constraints) {
    const auto v = constant_truth(c);
    if (v && !*v) return SatVerdict{SatVerdict::Kind::Unsat, std::nullopt, {}};
    if (!v) open.push_back(c);
  }
  if (open.empty()) return SatVerdict{SatVerdict::Kind::Sat, Model{}, {}};

  const auto proc = detail::run_process(config.command, emit_smt(open), config.timeout_ms);
  if (!proc.started) throw SolverUnavailable(proc.error);
  if (proc.timed_out) return SatVerdict{SatVerdict::Kind::Unknown, std::nullopt, "timeout"};

  detail::SExprReader reader(proc.output);
  const auto head = reader.next();
  if (!head || head->is_list) return SatVerdict{SatVerdict::Kind::Unknown, std::nullopt, "no answer from solver"};
  if (head->atom == "unsat") return SatVerdict{SatVerdict::Kind::Unsat, std::nullopt, {}};
  if (head->atom == "sat") {
    std::optional<Model> model;
    if (auto m = reader.next()) model = detail::parse_model(*m);
    return SatVerdict{SatVerdict::Kind::Sat, std::move(model), {}};
  }
  if (head->atom == "unknown") return SatVerdict{SatVerdict::Kind::Unknown, std::nullopt, "solver returned unknown"};
  return SatVerdict{SatVerdict::Kind::Unknown, std::nullopt, "unexpected solver output: " + head->atom};
}

/// Evaluates the constraints at a model; unnamed variables read as 0.
inline bool model_satisfies(std::span<const SymBool> constraints, const Model& m, std::size_t n) {
  auto value = [&](const std::string& name) {
    auto it = m.find(name);
    return it == m.end() ? 0.0 : to_double(it->second);
  };
  SampleBounds b;
  for (const auto& c : constraints) collect_bounds(c, b);
  std::vector<double> vars(n), uni(b.uniform), nrm(b.normal);
  for (std::size_t i = 0; i < n; ++i) vars[i] = value("v" + std::to_string(i));
  for (std::size_t i = 0; i < b.uniform; ++i) uni[i] = value("u" + std::to_string(i));
  for (std::size_t i = 0; i < b.normal; ++i) nrm[i] = value("g" + std::to_string(i));
  const Valuation rho(std::move(vars), std::move(uni), std::move(nrm));
  try {
    return eval_conjunction(constraints, rho);
  } catch (const DomainError&) {
    return false;
  }
}

/// InfeasiblePC when pc is unsatisfiable, Discarded when pc holds somewhere
/// but pc ∧ po does not, Feasible when pc ∧ po is satisfiable. Outcomes cut
/// by the unroll budget are judged on pc alone. Any Unknown verdict leaves
/// the outcome Unknown, which callers treat as feasible.
inline Feasibility classify(const PathOutcome& o, const SolverConfig& config = {}) {
  const auto pc = check(o.cfg.pc, config);
  if (pc.kind == SatVerdict::Kind::Unsat) return Feasibility::InfeasiblePC;
  if (o.status == PathStatus::UnrollExhausted)
    return pc.kind == SatVerdict::Kind::Sat ? Feasibility::Feasible : Feasibility::Unknown;
  std::vector<SymBool> joint = o.cfg.pc;
  joint.insert(joint.end(), o.cfg.po.begin(), o.cfg.po.end());
  const auto both = o.cfg.po.empty() ? pc : check(joint, config);
  if (both.kind == SatVerdict::Kind::Unsat) return Feasibility::Discarded;
  if (both.kind == SatVerdict::Kind::Sat) return Feasibility::Feasible;
  return Feasibility::Unknown;
}

/// Classifies every outcome in place, in parallel.
inline void classify_all(std::vector<PathOutcome>& outcomes, const SolverConfig& config = {},
                         unsigned threads = 1) {
  parallel_for(outcomes.size(), threads,
               [&](std::size_t i) { outcomes[i].feasibility = classify(outcomes[i], config); });
}

/// True when the configured solver can be started.
inline bool solver_available(const SolverConfig& config = {}) {
  try {
    const SymBool probe = SymBool::compare(Rel::Lt, SymExpr::sample(SampleDist::Uniform, 0),
                                           SymExpr::constant(Rational(1, 2)));
    check(std::span(&probe, 1), config);
    return true;
  } catch (const SolverUnavailable&) {
    return false;
  }
}

}  // namespace probsym

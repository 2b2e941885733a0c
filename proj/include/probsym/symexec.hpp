#pragma once

// Symbolic execution: the small-step transition rules over symbolic states
// (program, σ, k_y, k_z, pc, po) and bounded depth-first enumeration of the
// final configurations they reach.

#include "probsym/ast.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace probsym {

/// (σ, k_y, k_z, pc, po). Path condition and observation are conjunction
/// lists; the empty list stands for `true`.
struct Configuration {
  Substitution sigma;
  std::size_t ky = 0;
  std::size_t kz = 0;
  std::vector<SymBool> pc;
  std::vector<SymBool> po;

  /// (σ0, 0, 0, true, true).
  static Configuration initial(std::size_t n) {
    Configuration c;
    c.sigma = Substitution::identity(n);
    return c;
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Every y_i in the configuration has i < k_y, and every z_i has i < k_z.
inline bool indices_consistent(const Configuration& c) {
  SampleBounds b;
  for (const auto& t : c.sigma.terms()) collect_bounds(t, b);
  for (const auto& a : c.pc) collect_bounds(a, b);
  for (const auto& a : c.po) collect_bounds(a, b);
  return b.uniform <= c.ky && b.normal <= c.kz;
}

struct SymState {
  Stmt prog;
  Configuration cfg;
  /// One 'T' or 'F' per if/while rule applied, in order.
  std::string choices;

  bool is_final() const noexcept { return prog.is_skip(); }
};

/// The statement the next transition rewrites: the leftmost non-sequence
/// statement, or the sequence itself when its head is `skip` (rule seq-0).
inline const Stmt& redex(const Stmt& s) {
  const Stmt* cur = &s;
  while (cur->kind() == Stmt::Kind::Seq && !cur->first().is_skip()) cur = &cur->first();
  return *cur;
}

/// One transition. Two successors (true branch first) for if/while, one
/// otherwise. Requires a non-final state over core syntax.
inline std::vector<SymState> step(const SymState& s) {
  using K = Stmt::Kind;
  const Stmt& p = s.prog;
  const Configuration& c = s.cfg;
  switch (p.kind()) {
    case K::Skip: throw std::logic_error("step: skip has no transition");
    case K::SampleBern:
    case K::SampleNorm: throw std::invalid_argument("step: program is not desugared");
    case K::Assign: {
      SymState n{Stmt::skip(), c, s.choices};
      n.cfg.sigma = c.sigma.updated(p.var(), apply_subst(c.sigma, p.expr()));
      return {std::move(n)};
    }
    case K::SampleUniform: {
      SymState n{Stmt::skip(), c, s.choices};
      n.cfg.sigma = c.sigma.updated(p.var(), SymExpr::sample(SampleDist::Uniform, c.ky));
      n.cfg.ky = c.ky + 1;
      return {std::move(n)};
    }
    case K::SampleStdNormal: {
      SymState n{Stmt::skip(), c, s.choices};
      n.cfg.sigma = c.sigma.updated(p.var(), SymExpr::sample(SampleDist::StdNormal, c.kz));
      n.cfg.kz = c.kz + 1;
      return {std::move(n)};
    }
    case K::Observe: {
      SymState n{Stmt::skip(), c, s.choices};
      n.cfg.po.push_back(apply_subst_bool(c.sigma, p.cond()));
      return {std::move(n)};
    }
    case K::Seq: {
      if (p.first().is_skip()) return {SymState{p.second(), c, s.choices}};
      auto inner = step(SymState{p.first(), c, s.choices});
      for (auto& n : inner) n.prog = Stmt::seq(std::move(n.prog), p.second());
      return inner;
    }
    case K::If: {
      const SymBool guard = apply_subst_bool(c.sigma, p.cond());
      SymState t{p.first(), c, s.choices + 'T'};
      t.cfg.pc.push_back(guard);
      SymState f{p.second(), c, s.choices + 'F'};
      f.cfg.pc.push_back(SymBool::negation(guard));
      return {std::move(t), std::move(f)};
    }
    case K::While: {
      const SymBool guard = apply_subst_bool(c.sigma, p.cond());
      SymState t{Stmt::seq(p.body(), p), c, s.choices + 'T'};
      t.cfg.pc.push_back(guard);
      SymState f{Stmt::skip(), c, s.choices + 'F'};
      f.cfg.pc.push_back(SymBool::negation(guard));
      return {std::move(t), std::move(f)};
    }
  }
  throw std::logic_error("step: unknown statement");
}

enum class PathStatus { Final, UnrollExhausted };

/// Filled in by the solver; Unknown until then and whenever the solver
/// cannot decide.
enum class Feasibility { Unknown, Feasible, InfeasiblePC, Discarded };

struct PathOutcome {
  Configuration cfg;
  PathStatus status = PathStatus::Final;
  std::string choices;
  Feasibility feasibility = Feasibility::Unknown;
  /// Program left to run; skip for final outcomes.
  Stmt residual;
};

struct ExploreOptions {
  /// Maximum iter-T firings of one while loop per entry along a path.
  std::size_t unroll = 4;
  /// Exploration fails with BudgetError beyond this many outcomes.
  std::size_t max_paths = 1'000'000;
};

/// Depth-first enumeration from `start`, true branches first, so outcomes
/// come out ordered lexicographically by choices with T before F.
///
/// A while loop may take its true branch `unroll` times per entry; a path
/// that would take it once more is cut and reported as UnrollExhausted with
/// the guard conjoined to its path condition. Together with the final
/// outcomes these path conditions still partition the input space.
inline std::vector<PathOutcome> explore_from(const Stmt& body, const Configuration& start,
                                             const ExploreOptions& options = {}) {
  if (!is_core(body)) throw std::invalid_argument("explore: program is not desugared");

  struct Frame {
    SymState state;
    std::vector<std::pair<const void*, std::size_t>> unrolls;
  };
  std::vector<PathOutcome> outcomes;
  std::vector<Frame> stack;
  stack.push_back(Frame{SymState{body, start, {}}, {}});

  auto emit = [&](PathOutcome o) {
    if (outcomes.size() >= options.max_paths)
      throw BudgetError("path count exceeds the cap of " + std::to_string(options.max_paths));
    outcomes.push_back(std::move(o));
  };

  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    if (frame.state.is_final()) {
      emit(PathOutcome{std::move(frame.state.cfg), PathStatus::Final,
                       std::move(frame.state.choices), Feasibility::Unknown, Stmt::skip()});
      continue;
    }
    const Stmt& r = redex(frame.state.prog);
    auto next = step(frame.state);
    if (r.kind() != Stmt::Kind::While) {
      for (auto it = next.rbegin(); it != next.rend(); ++it)
        stack.push_back(Frame{std::move(*it), frame.unrolls});
      continue;
    }

    const void* loop = r.id();
    auto counter = std::find_if(frame.unrolls.begin(), frame.unrolls.end(),
                                [&](const auto& e) { return e.first == loop; });
    const std::size_t taken = counter == frame.unrolls.end() ? 0 : counter->second;

    // iter-F leaves the loop: the next entry starts counting afresh.
    Frame exit{std::move(next[1]), frame.unrolls};
    std::erase_if(exit.unrolls, [&](const auto& e) { return e.first == loop; });
    stack.push_back(std::move(exit));

    if (taken >= options.unroll) {
      SymState& cut = next[0];
      emit(PathOutcome{std::move(cut.cfg), PathStatus::UnrollExhausted, std::move(cut.choices),
                       Feasibility::Unknown, std::move(cut.prog)});
      continue;
    }
    Frame again{std::move(next[0]), std::move(frame.unrolls)};
    auto it = std::find_if(again.unrolls.begin(), again.unrolls.end(),
                           [&](const auto& e) { return e.first == loop; });
    if (it == again.unrolls.end())
      again.unrolls.emplace_back(loop, 1);
    else
      ++it->second;
    stack.push_back(std::move(again));
  }
  return outcomes;
}

/// Γ_p, bounded: all outcomes from the initial configuration.
inline std::vector<PathOutcome> explore(const Program& p, const ExploreOptions& options = {}) {
  return explore_from(p.body, Configuration::initial(p.n()), options);
}

}  // namespace probsym

#pragma once

// Exact output distribution of loop-free programs whose only randomness is
// Bernoulli draws, by weighted forking on each coin. Independent of the
// symbolic executor, so it serves as a reference for path summation.

#include "probsym/ast.hpp"
#include "probsym/concrete.hpp"
#include "probsym/desugar.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/valuation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace probsym {

struct DiscreteOutcome {
  std::vector<double> vals;
  double mass = 0.0;
};

struct DiscreteDistribution {
  /// Terminal valuations in lexicographic order, each with its mass.
  std::vector<DiscreteOutcome> terminal;
  /// Mass of runs rejected by an observe.
  double aborted = 0.0;

  double terminated_mass() const {
    double m = 0.0;
    for (const auto& o : terminal) m += o.mass;
    return m;
  }

  double mass_of(const BoolExpr& a) const {
    double m = 0.0;
    for (const auto& o : terminal)
      if (eval_bool(a, o.vals)) m += o.mass;
    return m;
  }
};

namespace detail {

// Recognises `if (x < t) { x := 1 } else { x := 0 }` with t free of x and
// returns t.
inline const Expr* bern_threshold(const Stmt& s, std::size_t x) {
  if (s.kind() != Stmt::Kind::If) return nullptr;
  const BoolExpr& c = s.cond();
  if (c.kind() != BoolExpr::Kind::Cmp || c.rel() != Rel::Lt) return nullptr;
  if (c.lhs().kind() != Expr::Kind::Var || c.lhs().index() != x) return nullptr;
  auto sets = [&](const Stmt& b, long long v) {
    return b.kind() == Stmt::Kind::Assign && b.var() == x && b.expr() == Expr::constant(v);
  };
  if (!sets(s.first(), 1) || !sets(s.second(), 0)) return nullptr;
  auto mentions = [&](auto&& self, const Expr& e) -> bool {
    if (e.kind() == Expr::Kind::Var) return e.index() == x;
    if (e.kind() != Expr::Kind::Op) return false;
    for (const auto& a : e.args())
      if (self(self, a)) return true;
    return false;
  };
  if (mentions(mentions, c.rhs())) return nullptr;
  return &c.rhs();
}

struct Leaf {
  double weight;
  std::vector<double> uniforms;
};

class CoinEnumerator {
 public:
  explicit CoinEnumerator(std::vector<Leaf>& leaves) : leaves_(leaves) {}

  void run(std::vector<Stmt> work, std::vector<double> vals, double weight,
           std::vector<double> uniforms) {
    using K = Stmt::Kind;
    while (!work.empty()) {
      Stmt s = std::move(work.back());
      work.pop_back();
      switch (s.kind()) {
        case K::Skip: break;
        case K::Seq:
          work.push_back(s.second());
          work.push_back(s.first());
          break;
        case K::Assign: vals[s.var()] = eval_expr(s.expr(), vals); break;
        case K::Observe:
          if (!eval_bool(s.cond(), vals)) {
            leaves_.push_back(Leaf{weight, std::move(uniforms)});
            return;
          }
          break;
        case K::If: work.push_back(eval_bool(s.cond(), vals) ? s.first() : s.second()); break;
        case K::SampleUniform: {
          const std::size_t x = s.var();
          while (!work.empty() && work.back().kind() == K::Seq) {
            Stmt seq = std::move(work.back());
            work.pop_back();
            work.push_back(seq.second());
            work.push_back(seq.first());
          }
          const Expr* t = work.empty() ? nullptr : bern_threshold(work.back(), x);
          if (!t) throw NotDiscrete("uniform draw not used as a Bernoulli coin");
          work.pop_back();
          const double p = std::clamp(eval_expr(*t, vals), 0.0, 1.0);
          // Representative stream values: any y < p takes the first branch.
          if (p > 0.0) {
            auto v = vals;
            v[x] = 1.0;
            auto u = uniforms;
            u.push_back(p / 2.0);
            run(work, std::move(v), weight * p, std::move(u));
          }
          if (p < 1.0) {
            vals[x] = 0.0;
            uniforms.push_back((1.0 + p) / 2.0);
            weight *= 1.0 - p;
            break;
          }
          return;
        }
        case K::SampleStdNormal: throw NotDiscrete("program draws from a continuous distribution");
        case K::While: throw NotDiscrete("program contains a loop");
        case K::SampleBern:
        case K::SampleNorm: throw std::logic_error("enumerate_discrete_oracle: sugar survived desugaring");
      }
    }
    leaves_.push_back(Leaf{weight, std::move(uniforms)});
  }

 private:
  std::vector<Leaf>& leaves_;
};

}  // namespace detail

/// Exact distribution of a loop-free Bernoulli-only program under a point
/// input measure. Each enumerated branch is replayed through the concrete
/// semantics on a representative stream, which fixes the terminal
/// valuation. Throws NotDiscrete outside this fragment.
inline DiscreteDistribution enumerate_discrete_oracle(const Program& p, const MeasureSpec& mu) {
  if (!mu.is_discrete()) throw NotDiscrete("input measure is not a point mass");
  if (mu.size() != p.n()) throw std::invalid_argument("enumerate_discrete_oracle: measure arity mismatch");
  const Stmt core = desugar(p.body);
  std::vector<double> init;
  for (const auto& c : mu.components) init.push_back(c.value);

  std::vector<detail::Leaf> leaves;
  detail::CoinEnumerator(leaves).run({core}, init, 1.0, {});

  DiscreteDistribution out;
  std::map<std::vector<double>, double> masses;
  for (auto& leaf : leaves) {
    if (leaf.weight == 0.0) continue;
    const Valuation rho(init, std::move(leaf.uniforms), {});
    const RunResult r = run_concrete(core, rho, 0);
    if (const auto* t = std::get_if<Terminated>(&r))
      masses[t->vals] += leaf.weight;
    else if (std::holds_alternative<Aborted>(r))
      out.aborted += leaf.weight;
    else
      throw std::logic_error("enumerate_discrete_oracle: replay did not terminate");
  }
  for (auto& [vals, m] : masses) out.terminal.push_back(DiscreteOutcome{vals, m});
  return out;
}

}  // namespace probsym

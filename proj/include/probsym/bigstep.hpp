#pragma once

// Compositional (big-step) symbolic semantics for loop-free programs.
//
// Each element (F, B, O) is kept symbolically as a Configuration: F is
// ⟨σ⟩ at (k_y, k_z), B is ⟨pc⟩ and O is ⟨po⟩. Sequencing composes the two
// halves by substituting the first σ into the second element's terms and
// shifting its sample symbols; preimages F1^{-1}[B2] become that same
// substitution applied to B2. This never runs the transition system, which
// makes it an independent check on `explore`.

#include "probsym/ast.hpp"
#include "probsym/desugar.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/symexec.hpp"

#include <vector>

namespace probsym {

namespace detail {

inline Configuration compose(const Configuration& first, const Configuration& second) {
  Configuration out;
  std::vector<SymExpr> terms;
  terms.reserve(second.sigma.size());
  for (const auto& t : second.sigma.terms())
    terms.push_back(compose_after(first.sigma, first.ky, first.kz, t));
  out.sigma = Substitution(std::move(terms));
  out.ky = first.ky + second.ky;
  out.kz = first.kz + second.kz;
  out.pc = first.pc;
  for (const auto& a : second.pc) out.pc.push_back(compose_after(first.sigma, first.ky, first.kz, a));
  out.po = first.po;
  for (const auto& a : second.po) out.po.push_back(compose_after(first.sigma, first.ky, first.kz, a));
  return out;
}

inline std::vector<Configuration> bigstep(const Stmt& s, std::size_t n) {
  using K = Stmt::Kind;
  const Configuration id = Configuration::initial(n);
  switch (s.kind()) {
    case K::Skip: return {id};
    case K::Assign: {
      Configuration c = id;
      c.sigma = id.sigma.updated(s.var(), lift(s.expr()));
      return {c};
    }
    case K::SampleUniform: {
      Configuration c = id;
      c.sigma = id.sigma.updated(s.var(), SymExpr::sample(SampleDist::Uniform, 0));
      c.ky = 1;
      return {c};
    }
    case K::SampleStdNormal: {
      Configuration c = id;
      c.sigma = id.sigma.updated(s.var(), SymExpr::sample(SampleDist::StdNormal, 0));
      c.kz = 1;
      return {c};
    }
    case K::Observe: {
      Configuration c = id;
      c.po.push_back(lift(s.cond()));
      return {c};
    }
    case K::Seq: {
      const auto first = bigstep(s.first(), n);
      const auto second = bigstep(s.second(), n);
      std::vector<Configuration> out;
      out.reserve(first.size() * second.size());
      for (const auto& a : first)
        for (const auto& b : second) out.push_back(compose(a, b));
      return out;
    }
    case K::If: {
      const SymBool guard = lift(s.cond());
      std::vector<Configuration> out;
      for (auto c : bigstep(s.first(), n)) {
        c.pc.insert(c.pc.begin(), guard);
        out.push_back(std::move(c));
      }
      for (auto c : bigstep(s.second(), n)) {
        c.pc.insert(c.pc.begin(), SymBool::negation(guard));
        out.push_back(std::move(c));
      }
      return out;
    }
    case K::While: throw UnsupportedLoop();
    case K::SampleBern:
    case K::SampleNorm: break;
  }
  throw std::logic_error("bigstep: unexpected sugar");
}

}  // namespace detail

/// F_p for a loop-free program, one Configuration per element, in the same
/// branch order as `explore`.
inline std::vector<Configuration> bigstep_enumerate(const Program& p) {
  const Stmt core = desugar(p.body);
  if (contains_loop(core)) throw UnsupportedLoop();
  return detail::bigstep(core, p.n());
}

}  // namespace probsym

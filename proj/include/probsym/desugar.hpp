#pragma once

#include "probsym/ast.hpp"

namespace probsym {

/// Rewrites parameterised sampling into the two primitive distributions:
///
///   x ~ bern(t)      =>  x ~ rnd; if (x < t) { x := 1 } else { x := 0 }
///   x ~ norm(m, v)   =>  x ~ stdnorm; x := x * sqrt(v) + m
///
/// The parameters are evaluated after the primitive draw, so a parameter
/// that mentions `x` itself sees the fresh sample.
inline Stmt desugar(const Stmt& s) {
  using K = Stmt::Kind;
  switch (s.kind()) {
    case K::SampleBern: {
      const std::size_t x = s.var();
      return Stmt::seq(
          Stmt::sample_uniform(x),
          Stmt::if_(BoolExpr::compare(Rel::Lt, Expr::variable(x), s.expr()),
                    Stmt::assign(x, Expr::constant(1)), Stmt::assign(x, Expr::constant(0))));
    }
    case K::SampleNorm: {
      const std::size_t x = s.var();
      return Stmt::seq(Stmt::sample_std_normal(x),
                       Stmt::assign(x, Expr::variable(x) * sqrt(s.expr2()) + s.expr()));
    }
    case K::Seq: {
      Stmt a = desugar(s.first());
      Stmt b = desugar(s.second());
      if (a.id() == s.first().id() && b.id() == s.second().id()) return s;
      return Stmt::seq(std::move(a), std::move(b));
    }
    case K::If: {
      Stmt a = desugar(s.first());
      Stmt b = desugar(s.second());
      if (a.id() == s.first().id() && b.id() == s.second().id()) return s;
      return Stmt::if_(s.cond(), std::move(a), std::move(b));
    }
    case K::While: {
      Stmt body = desugar(s.body());
      if (body.id() == s.body().id()) return s;
      return Stmt::while_(s.cond(), std::move(body));
    }
    default: return s;
  }
}

inline Program desugar(const Program& p) { return Program{p.vars, desugar(p.body)}; }

}  // namespace probsym

#pragma once

// Abstract syntax shared by programs and their symbolic images.
//
// Program expressions (`Expr`, `BoolExpr`) and symbolic expressions
// (`SymExpr`, `SymBool`) are one template instantiated over a tag; only the
// symbolic instantiation admits sample-variable leaves. All nodes are
// immutable and shared, so copies are cheap and trees can be handed across
// threads freely.

#include "probsym/errors.hpp"
#include "probsym/rational.hpp"

#include <cassert>
#include <concepts>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace probsym {

enum class OpKind { Add, Sub, Mul, Neg, Sqrt };

constexpr std::size_t arity(OpKind op) noexcept {
  switch (op) {
    case OpKind::Neg:
    case OpKind::Sqrt:
      return 1;
    default:
      return 2;
  }
}

/// Primitive distributions: uniform on [0,1] (symbols y_k) and the standard
/// normal (symbols z_k).
enum class SampleDist { Uniform, StdNormal };

enum class Rel { Lt, Le, Eq, Ne, Ge, Gt };

constexpr Rel negate(Rel r) noexcept {
  switch (r) {
    case Rel::Lt: return Rel::Ge;
    case Rel::Le: return Rel::Gt;
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Ge: return Rel::Lt;
    case Rel::Gt: return Rel::Le;
  }
  return r;
}

/// `a rel b` rewritten as `b rel' a`.
constexpr Rel mirror(Rel r) noexcept {
  switch (r) {
    case Rel::Lt: return Rel::Gt;
    case Rel::Le: return Rel::Ge;
    case Rel::Ge: return Rel::Le;
    case Rel::Gt: return Rel::Lt;
    default: return r;
  }
}

constexpr bool holds(Rel r, double a, double b) noexcept {
  switch (r) {
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Eq: return a == b;
    case Rel::Ne: return a != b;
    case Rel::Ge: return a >= b;
    case Rel::Gt: return a > b;
  }
  return false;
}

struct ProgramTerms {};
struct SymbolicTerms {};

template <class Tag>
class Term {
 public:
  enum class Kind { Const, Var, Sample, Op };

  static Term constant(Rational q) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = to_double(q);
    n->q = std::move(q);
    return Term(std::move(n));
  }
  static Term constant(long long v) { return constant(Rational(v)); }

  static Term variable(std::size_t index) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->index = index;
    return Term(std::move(n));
  }

  static Term sample(SampleDist dist, std::size_t index)
    requires std::same_as<Tag, SymbolicTerms>
  {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Sample;
    n->dist = dist;
    n->index = index;
    return Term(std::move(n));
  }

  static Term op(OpKind op, std::vector<Term> args) {
    if (args.size() != arity(op)) throw std::invalid_argument("operator arity mismatch");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Op;
    n->op = op;
    n->args = std::move(args);
    return Term(std::move(n));
  }

  Kind kind() const noexcept { return node_->kind; }
  bool is_const() const noexcept { return kind() == Kind::Const; }
  const Rational& rational() const { return node_->q; }
  /// Constant value rounded to double once, at construction.
  double value() const noexcept { return node_->value; }
  std::size_t index() const noexcept { return node_->index; }
  SampleDist dist() const noexcept { return node_->dist; }
  OpKind op_kind() const noexcept { return node_->op; }
  std::span<const Term> args() const noexcept { return node_->args; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Const: return a.rational() == b.rational();
      case Kind::Var: return a.index() == b.index();
      case Kind::Sample: return a.dist() == b.dist() && a.index() == b.index();
      case Kind::Op:
        if (a.op_kind() != b.op_kind()) return false;
        for (std::size_t i = 0; i < a.args().size(); ++i)
          if (!(a.args()[i] == b.args()[i])) return false;
        return true;
    }
    return false;
  }

  friend Term operator+(Term a, Term b) { return op(OpKind::Add, {std::move(a), std::move(b)}); }
  friend Term operator-(Term a, Term b) { return op(OpKind::Sub, {std::move(a), std::move(b)}); }
  friend Term operator*(Term a, Term b) { return op(OpKind::Mul, {std::move(a), std::move(b)}); }
  friend Term operator-(Term a) { return op(OpKind::Neg, {std::move(a)}); }
  friend Term sqrt(Term a) { return op(OpKind::Sqrt, {std::move(a)}); }

 private:
  struct Node {
    Kind kind = Kind::Const;
    Rational q;
    double value = 0.0;
    std::size_t index = 0;
    SampleDist dist = SampleDist::Uniform;
    OpKind op = OpKind::Add;
    std::vector<Term> args;
  };

  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

template <class Tag>
class Formula {
 public:
  enum class Kind { True, False, Cmp, And, Or, Not };
  using TermT = Term<Tag>;

  static Formula truth(bool v) {
    static const Formula t(make(Kind::True));
    static const Formula f(make(Kind::False));
    return v ? t : f;
  }
  static Formula compare(Rel rel, TermT lhs, TermT rhs) {
    auto n = make(Kind::Cmp);
    n->rel = rel;
    n->terms.emplace_back(std::move(lhs));
    n->terms.emplace_back(std::move(rhs));
    return Formula(std::move(n));
  }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula negation(Formula a) {
    auto n = make(Kind::Not);
    n->sub.push_back(std::move(a));
    return Formula(std::move(n));
  }

  Kind kind() const noexcept { return node_->kind; }
  Rel rel() const noexcept { return node_->rel; }
  const TermT& lhs() const noexcept { return node_->terms[0]; }
  const TermT& rhs() const noexcept { return node_->terms[1]; }
  /// Operands of And/Or (two) or Not (one).
  std::span<const Formula> operands() const noexcept { return node_->sub; }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::True:
      case Kind::False: return true;
      case Kind::Cmp: return a.rel() == b.rel() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
      default:
        for (std::size_t i = 0; i < a.operands().size(); ++i)
          if (!(a.operands()[i] == b.operands()[i])) return false;
        return true;
    }
  }

 private:
  struct Node {
    Kind kind = Kind::True;
    Rel rel = Rel::Eq;
    std::vector<TermT> terms;  // {lhs, rhs} for Cmp
    std::vector<Formula> sub;
  };

  static std::shared_ptr<Node> make(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }
  static Formula binary(Kind k, Formula a, Formula b) {
    auto n = make(k);
    n->sub.push_back(std::move(a));
    n->sub.push_back(std::move(b));
    return Formula(std::move(n));
  }

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

using Expr = Term<ProgramTerms>;
using SymExpr = Term<SymbolicTerms>;
using BoolExpr = Formula<ProgramTerms>;
using SymBool = Formula<SymbolicTerms>;

/// A statement. `SampleBern` and `SampleNorm` are surface sugar removed by
/// `desugar`; a program free of them is called core.
class Stmt {
 public:
  enum class Kind {
    Skip,
    Assign,
    SampleUniform,
    SampleStdNormal,
    SampleBern,
    SampleNorm,
    Observe,
    Seq,
    If,
    While
  };

  Stmt() : Stmt(skip()) {}

  static Stmt skip() {
    static const Stmt s(make(Kind::Skip));
    return s;
  }
  static Stmt assign(std::size_t var, Expr e) {
    auto n = make(Kind::Assign);
    n->var = var;
    n->exprs.push_back(std::move(e));
    return Stmt(std::move(n));
  }
  static Stmt sample_uniform(std::size_t var) { return sample(Kind::SampleUniform, var); }
  static Stmt sample_std_normal(std::size_t var) { return sample(Kind::SampleStdNormal, var); }
  static Stmt sample_bern(std::size_t var, Expr bias) {
    auto n = make(Kind::SampleBern);
    n->var = var;
    n->exprs.push_back(std::move(bias));
    return Stmt(std::move(n));
  }
  static Stmt sample_norm(std::size_t var, Expr mean, Expr variance) {
    auto n = make(Kind::SampleNorm);
    n->var = var;
    n->exprs.push_back(std::move(mean));
    n->exprs.push_back(std::move(variance));
    return Stmt(std::move(n));
  }
  static Stmt observe(BoolExpr b) {
    auto n = make(Kind::Observe);
    n->cond.push_back(std::move(b));
    return Stmt(std::move(n));
  }
  static Stmt seq(Stmt first, Stmt second) {
    auto n = make(Kind::Seq);
    n->stmts.push_back(std::move(first));
    n->stmts.push_back(std::move(second));
    return Stmt(std::move(n));
  }
  static Stmt if_(BoolExpr b, Stmt then_branch, Stmt else_branch) {
    auto n = make(Kind::If);
    n->cond.push_back(std::move(b));
    n->stmts.push_back(std::move(then_branch));
    n->stmts.push_back(std::move(else_branch));
    return Stmt(std::move(n));
  }
  static Stmt while_(BoolExpr b, Stmt body) {
    auto n = make(Kind::While);
    n->cond.push_back(std::move(b));
    n->stmts.push_back(std::move(body));
    return Stmt(std::move(n));
  }

  /// Right-nested sequence of `parts`; skip when empty.
  static Stmt sequence(std::vector<Stmt> parts) {
    if (parts.empty()) return skip();
    Stmt out = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) out = seq(parts[i], out);
    return out;
  }

  Kind kind() const noexcept { return node_->kind; }
  bool is_skip() const noexcept { return kind() == Kind::Skip; }
  std::size_t var() const noexcept { return node_->var; }
  /// Assign: rhs. SampleBern: bias. SampleNorm: mean.
  const Expr& expr() const noexcept { return node_->exprs[0]; }
  /// SampleNorm: variance.
  const Expr& expr2() const noexcept { return node_->exprs[1]; }
  const BoolExpr& cond() const noexcept { return node_->cond[0]; }
  /// Seq: first. If: then-branch. While: body.
  const Stmt& first() const noexcept { return node_->stmts[0]; }
  /// Seq: second. If: else-branch.
  const Stmt& second() const noexcept { return node_->stmts[1]; }
  const Stmt& body() const noexcept { return node_->stmts[0]; }

  /// Identity of this node; stable across copies of the handle.
  const void* id() const noexcept { return node_.get(); }

  friend bool operator==(const Stmt& a, const Stmt& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.node_->var != b.node_->var) return false;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.exprs.size() != y.exprs.size() || x.cond.size() != y.cond.size() ||
        x.stmts.size() != y.stmts.size())
      return false;
    for (std::size_t i = 0; i < x.exprs.size(); ++i)
      if (!(x.exprs[i] == y.exprs[i])) return false;
    for (std::size_t i = 0; i < x.cond.size(); ++i)
      if (!(x.cond[i] == y.cond[i])) return false;
    for (std::size_t i = 0; i < x.stmts.size(); ++i)
      if (!(x.stmts[i] == y.stmts[i])) return false;
    return true;
  }

 private:
  struct Node {
    Kind kind = Kind::Skip;
    std::size_t var = 0;
    std::vector<Expr> exprs;
    std::vector<BoolExpr> cond;
    std::vector<Stmt> stmts;
  };

  static std::shared_ptr<Node> make(Kind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }
  static Stmt sample(Kind k, std::size_t var) {
    auto n = make(k);
    n->var = var;
    return Stmt(std::move(n));
  }

  explicit Stmt(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

struct Program {
  std::vector<std::string> vars;
  Stmt body;

  std::size_t n() const noexcept { return vars.size(); }

  friend bool operator==(const Program&, const Program&) = default;
};

/// True when the statement contains no `bern`/`norm` sugar.
inline bool is_core(const Stmt& s) {
  switch (s.kind()) {
    case Stmt::Kind::SampleBern:
    case Stmt::Kind::SampleNorm: return false;
    case Stmt::Kind::Seq:
    case Stmt::Kind::If: return is_core(s.first()) && is_core(s.second());
    case Stmt::Kind::While: return is_core(s.body());
    default: return true;
  }
}

inline bool contains_loop(const Stmt& s) {
  switch (s.kind()) {
    case Stmt::Kind::While: return true;
    case Stmt::Kind::Seq:
    case Stmt::Kind::If: return contains_loop(s.first()) || contains_loop(s.second());
    default: return false;
  }
}

}  // namespace probsym

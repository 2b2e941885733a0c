#pragma once

// Interpretation of program and symbolic expressions, and substitutions.
//
// Program and symbolic terms are evaluated by the same routine, so a
// sample-free symbolic term and the program expression it came from give
// bit-identical doubles.

#include "probsym/ast.hpp"
#include "probsym/errors.hpp"
#include "probsym/valuation.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace probsym {

inline double apply_op(OpKind op, double a, double b = 0.0) {
  switch (op) {
    case OpKind::Add: return a + b;
    case OpKind::Sub: return a - b;
    case OpKind::Mul: return a * b;
    case OpKind::Neg: return -a;
    case OpKind::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative value " + std::to_string(a));
      return std::sqrt(a);
  }
  return 0.0;
}

/// Structural evaluation; `leaf` resolves Var and Sample nodes.
template <class Tag, class Leaf>
double evaluate(const Term<Tag>& t, const Leaf& leaf) {
  using K = typename Term<Tag>::Kind;
  switch (t.kind()) {
    case K::Const: return t.value();
    case K::Var:
    case K::Sample: return leaf(t);
    case K::Op: {
      const auto args = t.args();
      if (args.size() == 1) return apply_op(t.op_kind(), evaluate(args[0], leaf));
      const double a = evaluate(args[0], leaf);
      const double b = evaluate(args[1], leaf);
      return apply_op(t.op_kind(), a, b);
    }
  }
  return 0.0;
}

template <class Tag, class Leaf>
bool evaluate(const Formula<Tag>& f, const Leaf& leaf) {
  using K = typename Formula<Tag>::Kind;
  switch (f.kind()) {
    case K::True: return true;
    case K::False: return false;
    case K::Cmp: {
      const double a = evaluate(f.lhs(), leaf);
      const double b = evaluate(f.rhs(), leaf);
      return holds(f.rel(), a, b);
    }
    case K::And: return evaluate(f.operands()[0], leaf) && evaluate(f.operands()[1], leaf);
    case K::Or: return evaluate(f.operands()[0], leaf) || evaluate(f.operands()[1], leaf);
    case K::Not: return !evaluate(f.operands()[0], leaf);
  }
  return false;
}

inline double eval_expr(const Expr& e, std::span<const double> vals) {
  return evaluate(e, [&](const Expr& leaf) { return vals[leaf.index()]; });
}

inline bool eval_bool(const BoolExpr& b, std::span<const double> vals) {
  return evaluate(b, [&](const Expr& leaf) { return vals[leaf.index()]; });
}

namespace detail {
struct ValuationLeaf {
  const Valuation& rho;
  double operator()(const SymExpr& leaf) const {
    if (leaf.kind() == SymExpr::Kind::Var) return rho.vars()[leaf.index()];
    return rho.sample(leaf.dist(), leaf.index());
  }
};
}  // namespace detail

inline double eval_sym_expr(const SymExpr& e, const Valuation& rho) {
  return evaluate(e, detail::ValuationLeaf{rho});
}

inline bool eval_sym_bool(const SymBool& b, const Valuation& rho) {
  return evaluate(b, detail::ValuationLeaf{rho});
}

/// Membership of ρ in the intersection of `atoms`.
inline bool eval_conjunction(std::span<const SymBool> atoms, const Valuation& rho) {
  for (const auto& a : atoms)
    if (!eval_sym_bool(a, rho)) return false;
  return true;
}

/// Embedding of program syntax into symbolic syntax.
inline SymExpr lift(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Const: return SymExpr::constant(e.rational());
    case Expr::Kind::Var: return SymExpr::variable(e.index());
    default: break;
  }
  std::vector<SymExpr> args;
  for (const auto& a : e.args()) args.push_back(lift(a));
  return SymExpr::op(e.op_kind(), std::move(args));
}

template <class Tag, class MapTerm>
Formula<SymbolicTerms> map_formula(const Formula<Tag>& f, const MapTerm& map_term) {
  using K = typename Formula<Tag>::Kind;
  switch (f.kind()) {
    case K::True: return SymBool::truth(true);
    case K::False: return SymBool::truth(false);
    case K::Cmp: return SymBool::compare(f.rel(), map_term(f.lhs()), map_term(f.rhs()));
    case K::And:
      return SymBool::conj(map_formula(f.operands()[0], map_term),
                           map_formula(f.operands()[1], map_term));
    case K::Or:
      return SymBool::disj(map_formula(f.operands()[0], map_term),
                           map_formula(f.operands()[1], map_term));
    case K::Not: return SymBool::negation(map_formula(f.operands()[0], map_term));
  }
  return SymBool::truth(false);
}

inline SymBool lift(const BoolExpr& b) {
  return map_formula(b, [](const Expr& e) { return lift(e); });
}

/// Total map from program variables to symbolic expressions.
class Substitution {
 public:
  Substitution() = default;
  explicit Substitution(std::vector<SymExpr> terms) : terms_(std::move(terms)) {}

  /// σ0 : x_i ↦ x_i.
  static Substitution identity(std::size_t n) {
    std::vector<SymExpr> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back(SymExpr::variable(i));
    return Substitution(std::move(t));
  }

  std::size_t size() const noexcept { return terms_.size(); }
  const SymExpr& operator[](std::size_t i) const { return terms_.at(i); }
  std::span<const SymExpr> terms() const noexcept { return terms_; }

  /// σ[x_i ↦ e].
  Substitution updated(std::size_t i, SymExpr e) const {
    Substitution s = *this;
    s.terms_.at(i) = std::move(e);
    return s;
  }

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  std::vector<SymExpr> terms_;
};

namespace detail {
template <class Tag>
SymExpr substitute(const Substitution& sigma, const Term<Tag>& e, std::size_t shift_y,
                   std::size_t shift_z) {
  using K = typename Term<Tag>::Kind;
  switch (e.kind()) {
    case K::Const: return SymExpr::constant(e.rational());
    case K::Var: return sigma[e.index()];
    case K::Sample:
      if constexpr (std::same_as<Tag, SymbolicTerms>) {
        if (shift_y == 0 && shift_z == 0) return e;
        const std::size_t k = e.index() + (e.dist() == SampleDist::Uniform ? shift_y : shift_z);
        return SymExpr::sample(e.dist(), k);
      }
      break;
    case K::Op: break;
  }
  std::vector<SymExpr> args;
  for (const auto& a : e.args()) args.push_back(substitute(sigma, a, shift_y, shift_z));
  return SymExpr::op(e.op_kind(), std::move(args));
}
}  // namespace detail

/// σ(e): homomorphic replacement of x_i by σ(x_i); sample symbols are kept.
inline SymExpr apply_subst(const Substitution& sigma, const Expr& e) {
  return detail::substitute(sigma, e, 0, 0);
}
inline SymExpr apply_subst(const Substitution& sigma, const SymExpr& e) {
  return detail::substitute(sigma, e, 0, 0);
}
inline SymBool apply_subst_bool(const Substitution& sigma, const BoolExpr& b) {
  return map_formula(b, [&](const Expr& e) { return apply_subst(sigma, e); });
}
inline SymBool apply_subst_bool(const Substitution& sigma, const SymBool& b) {
  return map_formula(b, [&](const SymExpr& e) { return apply_subst(sigma, e); });
}

/// Symbolic pre-composition: the term whose interpretation at ρ equals the
/// interpretation of `later` at ⟨σ⟩_k(ρ). Variables are replaced by σ and
/// sample symbols are shifted past the k_y / k_z samples σ already drew.
inline SymExpr compose_after(const Substitution& sigma, std::size_t ky, std::size_t kz,
                             const SymExpr& later) {
  return detail::substitute(sigma, later, ky, kz);
}
inline SymBool compose_after(const Substitution& sigma, std::size_t ky, std::size_t kz,
                             const SymBool& later) {
  return map_formula(later, [&](const SymExpr& e) { return compose_after(sigma, ky, kz, e); });
}

/// ⟨σ⟩ at sampling indices (k_y, k_z): variables are the interpreted terms,
/// each stream is left-shifted by its index.
inline Valuation interpret_subst(const Substitution& sigma, std::size_t ky, std::size_t kz,
                                 const Valuation& rho) {
  std::vector<double> vars;
  vars.reserve(sigma.size());
  for (const auto& t : sigma.terms()) vars.push_back(eval_sym_expr(t, rho));
  return rho.with_vars(std::move(vars)).shifted(ky, kz);
}

template <class Tag>
bool has_leaves(const Term<Tag>& t) {
  using K = typename Term<Tag>::Kind;
  switch (t.kind()) {
    case K::Const: return false;
    case K::Var:
    case K::Sample: return true;
    case K::Op:
      for (const auto& a : t.args())
        if (has_leaves(a)) return true;
      return false;
  }
  return false;
}

template <class Tag>
bool has_leaves(const Formula<Tag>& f) {
  using K = typename Formula<Tag>::Kind;
  switch (f.kind()) {
    case K::True:
    case K::False: return false;
    case K::Cmp: return has_leaves(f.lhs()) || has_leaves(f.rhs());
    default:
      for (const auto& o : f.operands())
        if (has_leaves(o)) return true;
      return false;
  }
}

/// Truth value of a variable-free formula; nullopt when it mentions a
/// variable or its evaluation leaves the operator domain.
inline std::optional<bool> constant_truth(const SymBool& f) {
  if (has_leaves(f)) return std::nullopt;
  try {
    return evaluate(f, [](const SymExpr&) { return 0.0; });
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

/// Largest sample index + 1 per distribution occurring in a term.
struct SampleBounds {
  std::size_t uniform = 0;
  std::size_t normal = 0;

  void include(const SampleBounds& o) noexcept {
    if (o.uniform > uniform) uniform = o.uniform;
    if (o.normal > normal) normal = o.normal;
  }
};

inline void collect_bounds(const SymExpr& t, SampleBounds& out) {
  switch (t.kind()) {
    case SymExpr::Kind::Sample:
      if (t.dist() == SampleDist::Uniform) {
        if (t.index() + 1 > out.uniform) out.uniform = t.index() + 1;
      } else if (t.index() + 1 > out.normal) {
        out.normal = t.index() + 1;
      }
      return;
    case SymExpr::Kind::Op:
      for (const auto& a : t.args()) collect_bounds(a, out);
      return;
    default: return;
  }
}

inline void collect_bounds(const SymBool& f, SampleBounds& out) {
  if (f.kind() == SymBool::Kind::Cmp) {
    collect_bounds(f.lhs(), out);
    collect_bounds(f.rhs(), out);
    return;
  }
  for (const auto& o : f.operands()) collect_bounds(o, out);
}

}  // namespace probsym

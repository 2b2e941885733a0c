#pragma once

// Pretty-printers. Program text is printed in canonical ASCII form that the
// parser reads back to the same tree; symbolic terms are printed for reports
// using y_k / z_k for samples and the program's variable names.

#include "probsym/ast.hpp"

#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace probsym {

inline const char* rel_symbol(Rel r) noexcept {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

namespace detail {

inline std::string var_name(std::span<const std::string> names, std::size_t i) {
  if (i < names.size()) return names[i];
  return "x" + std::to_string(i);
}

// Binding strength: 1 additive, 2 multiplicative, 3 prefix minus, 4 primary.
template <class Tag>
void print_term(std::ostream& os, const Term<Tag>& t, std::span<const std::string> names,
                int context) {
  using K = typename Term<Tag>::Kind;
  switch (t.kind()) {
    case K::Const: {
      const bool neg = t.rational() < 0;
      if (neg) os << '(';
      os << to_decimal_string(t.rational());
      if (neg) os << ')';
      return;
    }
    case K::Var: os << var_name(names, t.index()); return;
    case K::Sample:
      os << (t.dist() == SampleDist::Uniform ? 'y' : 'z') << t.index();
      return;
    case K::Op: break;
  }
  const auto args = t.args();
  int self = 4;
  switch (t.op_kind()) {
    case OpKind::Add:
    case OpKind::Sub: self = 1; break;
    case OpKind::Mul: self = 2; break;
    case OpKind::Neg: self = 3; break;
    case OpKind::Sqrt: self = 4; break;
  }
  const bool paren = context > self;
  if (paren) os << '(';
  switch (t.op_kind()) {
    case OpKind::Add:
    case OpKind::Sub:
      print_term(os, args[0], names, 1);
      os << (t.op_kind() == OpKind::Add ? " + " : " - ");
      print_term(os, args[1], names, 2);
      break;
    case OpKind::Mul:
      print_term(os, args[0], names, 2);
      os << " * ";
      print_term(os, args[1], names, 3);
      break;
    case OpKind::Neg:
      os << '-';
      // -(2) is a negation node; -2 would read back as a constant.
      if (args[0].kind() == K::Const && args[0].rational() >= 0) {
        os << '(';
        print_term(os, args[0], names, 0);
        os << ')';
      } else {
        print_term(os, args[0], names, 4);
      }
      break;
    case OpKind::Sqrt:
      os << "sqrt(";
      print_term(os, args[0], names, 0);
      os << ')';
      break;
  }
  if (paren) os << ')';
}

struct FormulaStyle {
  const char* and_op;
  const char* or_op;
  const char* not_op;
  bool fold_negated_comparisons;
};

inline constexpr FormulaStyle kSourceStyle{" && ", " || ", "!", false};
inline constexpr FormulaStyle kReportStyle{" ∧ ", " ∨ ", "¬", true};

// Binding strength: 1 or, 2 and, 3 not, 4 atom.
template <class Tag>
void print_formula(std::ostream& os, const Formula<Tag>& f, std::span<const std::string> names,
                   int context, const FormulaStyle& style) {
  using K = typename Formula<Tag>::Kind;
  switch (f.kind()) {
    case K::True: os << "true"; return;
    case K::False: os << "false"; return;
    case K::Cmp:
      print_term(os, f.lhs(), names, 0);
      os << ' ' << rel_symbol(f.rel()) << ' ';
      print_term(os, f.rhs(), names, 0);
      return;
    case K::Not: {
      const auto& inner = f.operands()[0];
      if (style.fold_negated_comparisons && inner.kind() == K::Cmp) {
        print_formula(os, Formula<Tag>::compare(negate(inner.rel()), inner.lhs(), inner.rhs()),
                      names, context, style);
        return;
      }
      os << style.not_op;
      const bool paren = inner.kind() != K::True && inner.kind() != K::False;
      if (paren) os << '(';
      print_formula(os, inner, names, 0, style);
      if (paren) os << ')';
      return;
    }
    case K::And:
    case K::Or: {
      const bool is_and = f.kind() == K::And;
      const int self = is_and ? 2 : 1;
      const bool paren = context > self;
      if (paren) os << '(';
      print_formula(os, f.operands()[0], names, self, style);
      os << (is_and ? style.and_op : style.or_op);
      print_formula(os, f.operands()[1], names, self + 1, style);
      if (paren) os << ')';
      return;
    }
  }
}

inline void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

inline void print_stmt(std::ostream& os, const Stmt& s, std::span<const std::string> names,
                       int depth);

inline void print_block(std::ostream& os, const Stmt& s, std::span<const std::string> names,
                        int depth) {
  os << "{\n";
  print_stmt(os, s, names, depth + 1);
  indent(os, depth);
  os << '}';
}

inline void print_stmt(std::ostream& os, const Stmt& s, std::span<const std::string> names,
                       int depth) {
  using K = Stmt::Kind;
  if (s.kind() == K::Seq) {
    print_stmt(os, s.first(), names, depth);
    print_stmt(os, s.second(), names, depth);
    return;
  }
  indent(os, depth);
  switch (s.kind()) {
    case K::Skip: os << "skip;"; break;
    case K::Assign:
      os << var_name(names, s.var()) << " := ";
      print_term(os, s.expr(), names, 0);
      os << ';';
      break;
    case K::SampleUniform: os << var_name(names, s.var()) << " ~ rnd;"; break;
    case K::SampleStdNormal: os << var_name(names, s.var()) << " ~ stdnorm;"; break;
    case K::SampleBern:
      os << var_name(names, s.var()) << " ~ bern(";
      print_term(os, s.expr(), names, 0);
      os << ");";
      break;
    case K::SampleNorm:
      os << var_name(names, s.var()) << " ~ norm(";
      print_term(os, s.expr(), names, 0);
      os << ", ";
      print_term(os, s.expr2(), names, 0);
      os << ");";
      break;
    case K::Observe:
      os << "observe (";
      print_formula(os, s.cond(), names, 0, kSourceStyle);
      os << ");";
      break;
    case K::If:
      os << "if (";
      print_formula(os, s.cond(), names, 0, kSourceStyle);
      os << ") ";
      print_block(os, s.first(), names, depth);
      os << " else ";
      print_block(os, s.second(), names, depth);
      break;
    case K::While:
      os << "while (";
      print_formula(os, s.cond(), names, 0, kSourceStyle);
      os << ") ";
      print_block(os, s.body(), names, depth);
      break;
    case K::Seq: break;
  }
  os << '\n';
}

}  // namespace detail

template <class Tag>
std::string to_string(const Term<Tag>& t, std::span<const std::string> names = {}) {
  std::ostringstream os;
  detail::print_term(os, t, names, 0);
  return os.str();
}

/// Source-syntax rendering (`&&`, `||`, `!`).
template <class Tag>
std::string to_string(const Formula<Tag>& f, std::span<const std::string> names = {}) {
  std::ostringstream os;
  detail::print_formula(os, f, names, 0, detail::kSourceStyle);
  return os.str();
}

/// Report rendering: logical symbols, and negated comparisons shown as the
/// complementary relation (`¬(y0 < 0.51)` prints as `y0 >= 0.51`).
inline std::string to_report_string(const SymBool& f, std::span<const std::string> names = {}) {
  std::ostringstream os;
  detail::print_formula(os, f, names, 0, detail::kReportStyle);
  return os.str();
}

/// A conjunction list as an ∧-chain; the empty list is `true`.
inline std::string conjunction_to_string(std::span<const SymBool> atoms,
                                         std::span<const std::string> names = {}) {
  if (atoms.empty()) return "true";
  std::ostringstream os;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) os << detail::kReportStyle.and_op;
    detail::print_formula(os, atoms[i], names, 3, detail::kReportStyle);
  }
  return os.str();
}

/// Canonical program text.
inline std::string to_source(const Program& p) {
  std::ostringstream os;
  detail::print_stmt(os, p.body, p.vars, 0);
  return os.str();
}

inline std::string to_source(const Stmt& s, std::span<const std::string> names = {}) {
  std::ostringstream os;
  detail::print_stmt(os, s, names, 0);
  return os.str();
}

}  // namespace probsym

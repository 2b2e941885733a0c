#pragma once

// Recursive-descent parser for the surface language. See docs/grammar.md.
//
// Variables are declared implicitly and numbered in order of first
// appearance. Numeric literals are decimal and become exact rationals.

#include "probsym/ast.hpp"
#include "probsym/errors.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace probsym {

namespace detail {

enum class Tok {
  End,
  Ident,
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Semi,
  Comma,
  Assign,  // :=
  Tilde,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Eq,
  Ne,
  Ge,
  Gt,
  AndAnd,
  OrOr,
  Bang,
  // keywords
  KwSkip,
  KwObserve,
  KwIf,
  KwElse,
  KwWhile,
  KwTrue,
  KwFalse,
  KwSqrt,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

inline std::string describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::Assign: return "':='";
    case Tok::Tilde: return "'~'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Eq: return "'='";
    case Tok::Ne: return "'!='";
    case Tok::Ge: return "'>='";
    case Tok::Gt: return "'>'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Bang: return "'!'";
    case Tok::KwSkip: return "'skip'";
    case Tok::KwObserve: return "'observe'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwSqrt: return "'sqrt'";
  }
  return "?";
}

inline std::vector<Token> tokenize(std::string_view src) {
  static const std::unordered_map<std::string_view, Tok> keywords = {
      {"skip", Tok::KwSkip},   {"observe", Tok::KwObserve}, {"if", Tok::KwIf},
      {"else", Tok::KwElse},   {"while", Tok::KwWhile},     {"true", Tok::KwTrue},
      {"false", Tok::KwFalse}, {"sqrt", Tok::KwSqrt},
  };
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.text = std::string(src.substr(i, j - i));
      auto kw = keywords.find(t.text);
      t.kind = kw == keywords.end() ? Tok::Ident : kw->second;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    std::size_t len = 1;
    if (two(':', '=')) {
      t.kind = Tok::Assign;
      len = 2;
    } else if (two('<', '=')) {
      t.kind = Tok::Le;
      len = 2;
    } else if (two('>', '=')) {
      t.kind = Tok::Ge;
      len = 2;
    } else if (two('!', '=')) {
      t.kind = Tok::Ne;
      len = 2;
    } else if (two('=', '=')) {
      t.kind = Tok::Eq;
      len = 2;
    } else if (two('&', '&')) {
      t.kind = Tok::AndAnd;
      len = 2;
    } else if (two('|', '|')) {
      t.kind = Tok::OrOr;
      len = 2;
    } else {
      switch (c) {
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '{': t.kind = Tok::LBrace; break;
        case '}': t.kind = Tok::RBrace; break;
        case ';': t.kind = Tok::Semi; break;
        case ',': t.kind = Tok::Comma; break;
        case '~': t.kind = Tok::Tilde; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case '<': t.kind = Tok::Lt; break;
        case '>': t.kind = Tok::Gt; break;
        case '=': t.kind = Tok::Eq; break;
        case '!': t.kind = Tok::Bang; break;
        default:
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      }
    }
    t.text = std::string(src.substr(i, len));
    advance(len);
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<std::string> vars, bool allow_new_vars)
      : tokens_(tokenize(src)), vars_(std::move(vars)), allow_new_vars_(allow_new_vars) {
    for (std::size_t i = 0; i < vars_.size(); ++i) index_.emplace(vars_[i], i);
  }

  Program program() {
    Stmt body = statements(Tok::End);
    expect(Tok::End);
    return Program{vars_, body};
  }

  BoolExpr bool_expr_only() {
    BoolExpr b = bool_expr();
    expect(Tok::End);
    return b;
  }

  Expr expr_only() {
    Expr e = expr();
    expect(Tok::End);
    return e;
  }

  const std::vector<std::string>& vars() const { return vars_; }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool at(Tok t) const { return peek().kind == t; }
  const Token& next() { return tokens_[pos_++]; }

  [[noreturn]] void fail(std::vector<Tok> expected) const {
    std::vector<std::string> names;
    for (Tok t : expected) names.push_back(describe(t));
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, std::move(names), std::move(found));
  }

  const Token& expect(Tok t) {
    if (!at(t)) fail({t});
    return next();
  }

  std::size_t variable(const Token& t) {
    auto it = index_.find(t.text);
    if (it != index_.end()) return it->second;
    if (!allow_new_vars_)
      throw ParseError(t.line, t.column, "unknown variable '" + t.text + "'");
    const std::size_t i = vars_.size();
    vars_.push_back(t.text);
    index_.emplace(t.text, i);
    return i;
  }

  static bool is_compound(const Stmt& s) {
    return s.kind() == Stmt::Kind::If || s.kind() == Stmt::Kind::While;
  }

  // stmts := { stmt [';'] }, where ';' is mandatory between a simple
  // statement and whatever follows it.
  Stmt statements(Tok terminator) {
    std::vector<Stmt> parts;
    while (!at(terminator)) {
      Stmt s = statement();
      const bool compound = is_compound(s);
      parts.push_back(std::move(s));
      if (at(Tok::Semi)) {
        next();
      } else if (!compound && !at(terminator)) {
        fail({Tok::Semi, terminator});
      }
    }
    return Stmt::sequence(std::move(parts));
  }

  Stmt block() {
    expect(Tok::LBrace);
    Stmt s = statements(Tok::RBrace);
    expect(Tok::RBrace);
    return s;
  }

  Stmt statement() {
    switch (peek().kind) {
      case Tok::KwSkip: next(); return Stmt::skip();
      case Tok::KwObserve: {
        next();
        return Stmt::observe(bool_expr());
      }
      case Tok::KwIf: return if_statement();
      case Tok::KwWhile: {
        next();
        BoolExpr b = bool_expr();
        Stmt body = block();
        return Stmt::while_(std::move(b), std::move(body));
      }
      case Tok::Ident: {
        const Token& name = next();
        const std::size_t var = variable(name);
        if (at(Tok::Assign)) {
          next();
          return Stmt::assign(var, expr());
        }
        if (at(Tok::Tilde)) {
          next();
          return distribution(var);
        }
        fail({Tok::Assign, Tok::Tilde});
      }
      default:
        fail({Tok::KwSkip, Tok::Ident, Tok::KwObserve, Tok::KwIf, Tok::KwWhile});
    }
  }

  Stmt if_statement() {
    expect(Tok::KwIf);
    BoolExpr b = bool_expr();
    Stmt then_branch = block();
    Stmt else_branch = Stmt::skip();
    if (at(Tok::KwElse)) {
      next();
      else_branch = at(Tok::KwIf) ? if_statement() : block();
    }
    return Stmt::if_(std::move(b), std::move(then_branch), std::move(else_branch));
  }

  void optional_empty_parens() {
    if (at(Tok::LParen)) {
      next();
      expect(Tok::RParen);
    }
  }

  Stmt distribution(std::size_t var) {
    if (!at(Tok::Ident)) fail({Tok::Ident});
    const Token& d = next();
    if (d.text == "rnd") {
      optional_empty_parens();
      return Stmt::sample_uniform(var);
    }
    if (d.text == "stdnorm") {
      optional_empty_parens();
      return Stmt::sample_std_normal(var);
    }
    if (d.text == "bern") {
      expect(Tok::LParen);
      Expr bias = expr();
      expect(Tok::RParen);
      return Stmt::sample_bern(var, std::move(bias));
    }
    if (d.text == "norm") {
      expect(Tok::LParen);
      Expr mean = expr();
      expect(Tok::Comma);
      Expr variance = expr();
      expect(Tok::RParen);
      return Stmt::sample_norm(var, std::move(mean), std::move(variance));
    }
    throw UnknownDistribution(d.line, d.column, d.text);
  }

  BoolExpr bool_expr() {
    BoolExpr lhs = conjunction();
    while (at(Tok::OrOr)) {
      next();
      lhs = BoolExpr::disj(std::move(lhs), conjunction());
    }
    return lhs;
  }

  BoolExpr conjunction() {
    BoolExpr lhs = negation();
    while (at(Tok::AndAnd)) {
      next();
      lhs = BoolExpr::conj(std::move(lhs), negation());
    }
    return lhs;
  }

  BoolExpr negation() {
    if (at(Tok::Bang)) {
      next();
      return BoolExpr::negation(negation());
    }
    return bool_atom();
  }

  static std::optional<Rel> relation(Tok t) {
    switch (t) {
      case Tok::Lt: return Rel::Lt;
      case Tok::Le: return Rel::Le;
      case Tok::Eq: return Rel::Eq;
      case Tok::Ne: return Rel::Ne;
      case Tok::Ge: return Rel::Ge;
      case Tok::Gt: return Rel::Gt;
      default: return std::nullopt;
    }
  }

  BoolExpr comparison() {
    Expr lhs = expr();
    auto rel = relation(peek().kind);
    if (!rel) fail({Tok::Lt, Tok::Le, Tok::Eq, Tok::Ne, Tok::Ge, Tok::Gt});
    next();
    Expr rhs = expr();
    return BoolExpr::compare(*rel, std::move(lhs), std::move(rhs));
  }

  BoolExpr bool_atom() {
    if (at(Tok::KwTrue)) {
      next();
      return BoolExpr::truth(true);
    }
    if (at(Tok::KwFalse)) {
      next();
      return BoolExpr::truth(false);
    }
    if (!at(Tok::LParen)) return comparison();
    // '(' opens either an arithmetic operand of a comparison or a
    // parenthesised Boolean expression; try the former first.
    const std::size_t start = pos_;
    const std::size_t var_count = vars_.size();
    try {
      return comparison();
    } catch (const ParseError&) {
      pos_ = start;
      rollback_vars(var_count);
    }
    next();
    BoolExpr inner = bool_expr();
    expect(Tok::RParen);
    return inner;
  }

  void rollback_vars(std::size_t count) {
    while (vars_.size() > count) {
      index_.erase(vars_.back());
      vars_.pop_back();
    }
  }

  Expr expr() {
    Expr lhs = product();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const bool plus = next().kind == Tok::Plus;
      Expr rhs = product();
      lhs = plus ? std::move(lhs) + std::move(rhs) : std::move(lhs) - std::move(rhs);
    }
    return lhs;
  }

  Expr product() {
    Expr lhs = unary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      if (at(Tok::Slash))
        throw ParseError(peek().line, peek().column, "division is not supported");
      next();
      lhs = std::move(lhs) * unary();
    }
    return lhs;
  }

  Expr unary() {
    if (at(Tok::Minus)) {
      next();
      // A minus sign directly on a literal is part of the constant.
      if (at(Tok::Number)) return Expr::constant(Rational(-parse_decimal(next().text)));
      return -unary();
    }
    return primary();
  }

  Expr primary() {
    switch (peek().kind) {
      case Tok::Number: return Expr::constant(parse_decimal(next().text));
      case Tok::Ident: return Expr::variable(variable(next()));
      case Tok::KwSqrt: {
        next();
        expect(Tok::LParen);
        Expr arg = expr();
        expect(Tok::RParen);
        return sqrt(std::move(arg));
      }
      case Tok::LParen: {
        next();
        Expr inner = expr();
        expect(Tok::RParen);
        return inner;
      }
      default: fail({Tok::Number, Tok::Ident, Tok::LParen, Tok::Minus, Tok::KwSqrt});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<std::string> vars_;
  std::unordered_map<std::string, std::size_t> index_;
  bool allow_new_vars_;
};

}  // namespace detail

/// Parses a whole program. Throws ParseError or UnknownDistribution.
inline Program parse(std::string_view source) {
  return detail::Parser(source, {}, true).program();
}

/// Parses a Boolean expression over an existing variable list (used for
/// query events). Unknown identifiers are rejected.
inline BoolExpr parse_bool_expr(std::string_view source, const std::vector<std::string>& vars) {
  return detail::Parser(source, vars, false).bool_expr_only();
}

inline Expr parse_expr(std::string_view source, const std::vector<std::string>& vars) {
  return detail::Parser(source, vars, false).expr_only();
}

}  // namespace probsym

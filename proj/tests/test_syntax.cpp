#include "probsym/desugar.hpp"
#include "probsym/parser.hpp"
#include "probsym/print.hpp"
#include "probsym/symexec.hpp"
#include "support/random_programs.hpp"

#include <gtest/gtest.h>

using namespace probsym;

namespace {

const char* kGenderHeight = R"(
  gender ~ bern(0.51);
  if (gender = 1) {
    height ~ norm(175,72);
  } else {
    height ~ norm(161,50);
  }
  observe (height >= 200);
)";

Expr c(const char* s) { return Expr::constant(parse_decimal(s)); }

std::size_t count_kind(const Stmt& s, Stmt::Kind k) {
  std::size_t n = s.kind() == k;
  switch (s.kind()) {
    case Stmt::Kind::Seq:
    case Stmt::Kind::If: return n + count_kind(s.first(), k) + count_kind(s.second(), k);
    case Stmt::Kind::While: return n + count_kind(s.body(), k);
    default: return n;
  }
}

}  // namespace

TEST(Parse, Skip) {
  const Program p = parse("skip");
  EXPECT_TRUE(p.vars.empty());
  EXPECT_EQ(p.body, Stmt::skip());
}

TEST(Parse, GenderHeightListing) {
  const Program p = parse(kGenderHeight);
  ASSERT_EQ(p.vars, (std::vector<std::string>{"gender", "height"}));
  const Expr g = Expr::variable(0);
  const Expr h = Expr::variable(1);
  const Stmt expected = Stmt::seq(
      Stmt::sample_bern(0, c("0.51")),
      Stmt::seq(Stmt::if_(BoolExpr::compare(Rel::Eq, g, c("1")), Stmt::sample_norm(1, c("175"), c("72")),
                          Stmt::sample_norm(1, c("161"), c("50"))),
                Stmt::observe(BoolExpr::compare(Rel::Ge, h, c("200")))));
  EXPECT_EQ(p.body, expected);
}

TEST(Parse, ConstantsAreExact) {
  const Program p = parse("x := 0.1");
  EXPECT_EQ(p.body.expr().rational(), Rational(1, 10));
}

TEST(Parse, DanglingOperator) {
  try {
    parse("x := 1 +");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 9u);
    EXPECT_EQ(e.found(), "end of input");
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Parse, ErrorPositionOnLaterLine) {
  try {
    parse("x := 1;\ny := x *;\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 9u);
  }
}

TEST(Parse, UnknownDistribution) {
  try {
    parse("x ~ poisson(3)");
    FAIL() << "expected UnknownDistribution";
  } catch (const UnknownDistribution& e) {
    EXPECT_EQ(e.name(), "poisson");
    EXPECT_EQ(e.column(), 5u);
  }
}

TEST(Parse, DivisionRejected) { EXPECT_THROW(parse("x := 1 / 2"), ParseError); }

TEST(Parse, MissingSemicolon) { EXPECT_THROW(parse("x := 1 y := 2"), ParseError); }

TEST(Parse, CompoundStatementsNeedNoSemicolon) {
  const Program p = parse("x ~ rnd; if (x < 0.5) { x := 1 } else { x := 0 } observe(x = 1)");
  EXPECT_EQ(count_kind(p.body, Stmt::Kind::If), 1u);
  EXPECT_EQ(count_kind(p.body, Stmt::Kind::Observe), 1u);
}

TEST(Parse, PrimitiveDistributionsWithOptionalParens) {
  const Program p = parse("a ~ rnd(); b ~ stdnorm; c ~ rnd");
  EXPECT_EQ(count_kind(p.body, Stmt::Kind::SampleUniform), 2u);
  EXPECT_EQ(count_kind(p.body, Stmt::Kind::SampleStdNormal), 1u);
}

TEST(Parse, ElseIfChain) {
  const Program p = parse("x ~ rnd; if (x < 0.2) { y := 1 } else if (x < 0.6) { y := 2 } else { y := 3 }");
  EXPECT_EQ(count_kind(p.body, Stmt::Kind::If), 2u);
}

TEST(Parse, ParenthesisedBooleanAndArithmetic) {
  const Program p = parse("x := 1; observe((x + 1) * 2 > 3 && !(x = 0 || false))");
  const BoolExpr& b = p.body.second().cond();
  ASSERT_EQ(b.kind(), BoolExpr::Kind::And);
  EXPECT_EQ(b.operands()[0].kind(), BoolExpr::Kind::Cmp);
  EXPECT_EQ(b.operands()[1].kind(), BoolExpr::Kind::Not);
}

TEST(Parse, CommentsAndVariableOrder) {
  const Program p = parse("// header\nb := 1; // trailing\na := b + c\n");
  EXPECT_EQ(p.vars, (std::vector<std::string>{"b", "a", "c"}));
}

TEST(Parse, NegativeLiteralIsAConstant) {
  const Program p = parse("x := -2.5");
  ASSERT_TRUE(p.body.expr().is_const());
  EXPECT_EQ(p.body.expr().rational(), Rational(-5, 2));
}

TEST(Parse, QueryAgainstKnownVariables) {
  const std::vector<std::string> vars{"gender", "height"};
  const BoolExpr q = parse_bool_expr("gender = 1", vars);
  EXPECT_EQ(q, BoolExpr::compare(Rel::Eq, Expr::variable(0), c("1")));
  EXPECT_THROW(parse_bool_expr("weight > 1", vars), ParseError);
}

TEST(Print, CanonicalForm) {
  const Program p = parse(kGenderHeight);
  EXPECT_EQ(to_source(p),
            "gender ~ bern(0.51);\n"
            "if (gender = 1) {\n"
            "  height ~ norm(175, 72);\n"
            "} else {\n"
            "  height ~ norm(161, 50);\n"
            "}\n"
            "observe (height >= 200);\n");
}

TEST(Print, NegationOfLiteralSurvivesRoundTrip) {
  const Program p{{"x"}, Stmt::assign(0, -Expr::constant(2))};
  EXPECT_EQ(parse(to_source(p)), p);
  const Program q{{"x"}, Stmt::assign(0, Expr::constant(-2) * Expr::variable(0))};
  EXPECT_EQ(parse(to_source(q)), q);
}

TEST(Print, RoundTripRandomPrograms) {
  for (auto flavor : {testgen::Flavor::General, testgen::Flavor::WithLoops, testgen::Flavor::BernOnly,
                      testgen::Flavor::Separable}) {
    testgen::ProgramGen gen(17 + static_cast<int>(flavor), {.flavor = flavor});
    for (int i = 0; i < 300; ++i) {
      const Program p = gen.program();
      const std::string text = to_source(p);
      const Program back = parse(text);
      ASSERT_EQ(back, p) << text;
      ASSERT_EQ(to_source(back), text);
    }
  }
}

TEST(Desugar, Bern) {
  const Stmt s = desugar(Stmt::sample_bern(0, c("0.51")));
  const Stmt expected = Stmt::seq(
      Stmt::sample_uniform(0),
      Stmt::if_(BoolExpr::compare(Rel::Lt, Expr::variable(0), c("0.51")), Stmt::assign(0, c("1")),
                Stmt::assign(0, c("0"))));
  EXPECT_EQ(s, expected);
}

TEST(Desugar, Norm) {
  const Stmt s = desugar(Stmt::sample_norm(1, c("175"), c("72")));
  const Stmt expected =
      Stmt::seq(Stmt::sample_std_normal(1), Stmt::assign(1, Expr::variable(1) * sqrt(c("72")) + c("175")));
  EXPECT_EQ(s, expected);
}

TEST(Desugar, SkipIsFixpoint) { EXPECT_EQ(desugar(Stmt::skip()), Stmt::skip()); }

TEST(Desugar, IdempotentCoreAndVariablePreserving) {
  testgen::ProgramGen gen(5, {.flavor = testgen::Flavor::WithLoops});
  for (int i = 0; i < 300; ++i) {
    const Program p = gen.program();
    const Program d = desugar(p);
    EXPECT_TRUE(is_core(d.body));
    EXPECT_EQ(desugar(d), d);
    EXPECT_EQ(d.vars, p.vars);
    EXPECT_EQ(count_kind(d.body, Stmt::Kind::While), count_kind(p.body, Stmt::Kind::While));
    EXPECT_EQ(count_kind(d.body, Stmt::Kind::If),
              count_kind(p.body, Stmt::Kind::If) + count_kind(p.body, Stmt::Kind::SampleBern));
  }
}

TEST(Desugar, BernDrawsGiveTwoToTheBPaths) {
  for (int b = 0; b <= 6; ++b) {
    std::string src;
    for (int i = 0; i < b; ++i) src += "c" + std::to_string(i) + " ~ bern(0.3);\n";
    if (src.empty()) src = "skip";
    const auto outcomes = explore(desugar(parse(src)));
    EXPECT_EQ(outcomes.size(), std::size_t{1} << b);
  }
}

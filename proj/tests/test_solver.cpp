#include "probsym/desugar.hpp"
#include "probsym/parser.hpp"
#include "probsym/report.hpp"
#include "probsym/solver.hpp"
#include "support/random_programs.hpp"

#include <gtest/gtest.h>

using namespace probsym;

namespace {

const char* kGenderHeight = R"(
  gender ~ bern(0.51);
  if (gender = 1) { height ~ norm(175,72); } else { height ~ norm(161,50); }
  observe (height >= 200);
)";

SymExpr y(std::size_t k) { return SymExpr::sample(SampleDist::Uniform, k); }
SymExpr z(std::size_t k) { return SymExpr::sample(SampleDist::StdNormal, k); }
SymExpr k(int v) { return SymExpr::constant(v); }
SymExpr k(const char* s) { return SymExpr::constant(parse_decimal(s)); }
SymBool cmp(Rel r, SymExpr a, SymExpr b) { return SymBool::compare(r, std::move(a), std::move(b)); }

bool contains(const std::string& text, const std::string& piece) { return text.find(piece) != std::string::npos; }

class Solver : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!solver_available()) GTEST_SKIP() << "no SMT solver on PATH";
  }
};

}  // namespace

TEST(EmitSmt, UniformThreshold) {
  const std::vector<SymBool> c{cmp(Rel::Lt, y(0), k("0.51"))};
  const std::string smt = emit_smt(c);
  EXPECT_TRUE(contains(smt, "(set-logic QF_NRA)"));
  EXPECT_TRUE(contains(smt, "(declare-fun u0 () Real)"));
  EXPECT_TRUE(contains(smt, "(assert (<= 0 u0))"));
  EXPECT_TRUE(contains(smt, "(assert (<= u0 1))"));
  EXPECT_TRUE(contains(smt, "(assert (< u0 (/ 51 100)))"));
  EXPECT_TRUE(contains(smt, "(check-sat)"));
}

TEST(EmitSmt, TrueHasNoAssertions) {
  const std::vector<SymBool> c{SymBool::truth(true)};
  EXPECT_FALSE(contains(emit_smt(c), "(assert"));
}

TEST(EmitSmt, SqrtBecomesAnAuxiliarySquare) {
  const std::vector<SymBool> c{cmp(Rel::Ge, z(0) * sqrt(k(72)) + k(175), k(200))};
  const std::string smt = emit_smt(c);
  EXPECT_TRUE(contains(smt, "(declare-fun g0 () Real)"));
  EXPECT_TRUE(contains(smt, "(declare-fun s0 () Real)"));
  EXPECT_TRUE(contains(smt, "(assert (>= s0 0))"));
  EXPECT_TRUE(contains(smt, "(assert (= (* s0 s0) 72))"));
  EXPECT_TRUE(contains(smt, "(assert (>= (+ (* g0 s0) 175) 200))"));
  EXPECT_FALSE(contains(smt, "(<= 0 g0)"));
}

TEST(EmitSmt, RepeatedSqrtSharesOneSymbol) {
  const std::vector<SymBool> c{cmp(Rel::Lt, sqrt(k(2)), z(0)), cmp(Rel::Gt, sqrt(k(2)) + sqrt(k(3)), z(1))};
  const std::string smt = emit_smt(c);
  EXPECT_TRUE(contains(smt, "s1"));
  EXPECT_FALSE(contains(smt, "s2"));
}

TEST(EmitSmt, NegativeConstantsAndProgramVariables) {
  const std::vector<SymBool> c{cmp(Rel::Ne, SymExpr::variable(1), SymExpr::constant(Rational(-5, 2)))};
  const std::string smt = emit_smt(c);
  EXPECT_TRUE(contains(smt, "(declare-fun v1 () Real)"));
  EXPECT_TRUE(contains(smt, "(assert (distinct v1 (- (/ 5 2))))"));
}

TEST(EmitSmt, Deterministic) {
  testgen::ProgramGen gen(4);
  for (int i = 0; i < 50; ++i) {
    const auto outcomes = explore(desugar(gen.program()));
    for (const auto& o : outcomes) EXPECT_EQ(emit_smt(o.cfg.pc), emit_smt(o.cfg.pc));
  }
}

TEST(Check, ConstantAtomsNeedNoProcess) {
  const SolverConfig missing{{"/nonexistent/solver"}, 1000};
  const std::vector<SymBool> cfg2{cmp(Rel::Lt, y(0), k("0.51")), cmp(Rel::Ne, k(1), k(1))};
  EXPECT_EQ(check(cfg2, missing).kind, SatVerdict::Kind::Unsat);
  const std::vector<SymBool> t{SymBool::truth(true)};
  EXPECT_EQ(check(t, missing).kind, SatVerdict::Kind::Sat);
}

TEST(Check, MissingSolverIsReported) {
  const SolverConfig missing{{"/nonexistent/solver"}, 1000};
  const std::vector<SymBool> c{cmp(Rel::Lt, y(0), k("0.51"))};
  EXPECT_THROW(check(c, missing), SolverUnavailable);
  EXPECT_FALSE(solver_available(missing));
}

TEST(Check, TimeoutIsUnknown) {
  const SolverConfig slow{{"sleep", "5"}, 200};
  const std::vector<SymBool> c{cmp(Rel::Lt, y(0), k("0.51"))};
  const auto v = check(c, slow);
  EXPECT_EQ(v.kind, SatVerdict::Kind::Unknown);
  EXPECT_EQ(v.reason, "timeout");
}

TEST_F(Solver, NormalTailIsSatisfiable) {
  const std::vector<SymBool> c{cmp(Rel::Ge, z(0) * sqrt(k(72)) + k(175), k(200))};
  const auto v = check(c);
  ASSERT_EQ(v.kind, SatVerdict::Kind::Sat);
  if (v.model) {
    ASSERT_TRUE(v.model->count("g0"));
    EXPECT_TRUE(model_satisfies(c, *v.model, 0));
  }
}

TEST_F(Solver, UniformBoundsAreKnown) {
  const std::vector<SymBool> c{cmp(Rel::Gt, y(0), k(1))};
  EXPECT_EQ(check(c).kind, SatVerdict::Kind::Unsat);
  const std::vector<SymBool> d{cmp(Rel::Lt, y(0), k("0.2")), cmp(Rel::Gt, y(0), k("0.3"))};
  EXPECT_EQ(check(d).kind, SatVerdict::Kind::Unsat);
}

TEST_F(Solver, ClassifyGenderHeight) {
  const auto outcomes = explore(desugar(parse(kGenderHeight)));
  EXPECT_EQ(classify(outcomes[0]), Feasibility::Feasible);
  EXPECT_EQ(classify(outcomes[1]), Feasibility::InfeasiblePC);
  EXPECT_EQ(classify(outcomes[2]), Feasibility::InfeasiblePC);
  EXPECT_EQ(classify(outcomes[3]), Feasibility::Feasible);
}

TEST_F(Solver, ClassifyDiscarded) {
  PathOutcome o;
  o.cfg = Configuration::initial(0);
  o.cfg.po.push_back(cmp(Rel::Eq, k(1), k(0)));
  EXPECT_EQ(classify(o), Feasibility::Discarded);
  o.cfg.po = {cmp(Rel::Lt, y(0), k("0.2")), cmp(Rel::Gt, y(0), k("0.3"))};
  EXPECT_EQ(classify(o), Feasibility::Discarded);
}

TEST_F(Solver, ModelsSatisfyTheConstraints) {
  testgen::ProgramGen gen(51);
  std::size_t checked = 0;
  for (int i = 0; i < 12; ++i) {
    const Program p = desugar(gen.program());
    for (const auto& o : explore(p)) {
      const auto v = check(o.cfg.pc);
      if (v.kind == SatVerdict::Kind::Sat && v.model && !o.cfg.pc.empty()) {
        EXPECT_TRUE(model_satisfies(o.cfg.pc, *v.model, p.n())) << conjunction_to_string(o.cfg.pc, p.vars);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10u);
}

TEST_F(Solver, NeverPrunesAWitnessedPath) {
  testgen::ProgramGen gen(61);
  std::size_t witnessed = 0;
  std::uint64_t seed = 0;
  while (witnessed < 1000) {
    const Program p = desugar(gen.program());
    for (const auto& o : explore(p)) {
      std::size_t hits = 0;
      for (int r = 0; r < 200; ++r) {
        const Valuation rho = testgen::random_valuation(p.n(), seed++);
        try {
          hits += eval_conjunction(o.cfg.pc, rho);
        } catch (const DomainError&) {
        }
      }
      if (hits == 0) continue;
      witnessed += hits;
      EXPECT_NE(check(o.cfg.pc).kind, SatVerdict::Kind::Unsat) << conjunction_to_string(o.cfg.pc, p.vars);
    }
  }
}

TEST_F(Solver, DisablingTheSolverOnlyChangesFlags) {
  RunConfig with;
  with.source = kGenderHeight;
  with.query = "gender = 1";
  RunConfig without = with;
  without.solver_cmd = "/nonexistent/solver";
  const RunReport a = run(with);
  const RunReport b = run(without);
  ASSERT_EQ(a.paths.size(), b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i) {
    EXPECT_EQ(a.paths[i].joint.value, b.paths[i].joint.value);
    EXPECT_EQ(b.paths[i].feasibility, Feasibility::Unknown);
  }
  EXPECT_EQ(a.summary.evidence.value, b.summary.evidence.value);
  EXPECT_EQ(a.summary.posterior->value, b.summary.posterior->value);
  EXPECT_EQ(a.summary.infeasible_pc, 2u);
  EXPECT_EQ(b.summary.infeasible_pc, 0u);
  EXPECT_FALSE(b.warnings.empty());
}

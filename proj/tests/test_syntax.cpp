#include <gtest/gtest.h>

#include "satlab/error.hpp"
#include "satlab/syntax.hpp"
#include "support.hpp"

using namespace satlab;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

Formula P(const std::string& s) { return parse_formula(s); }

}  // namespace

TEST(Parse, Basics) {
  Formula f = P("(or (= 0 0) (= 0 1))");
  ASSERT_EQ(f->kind, FK::Or);
  EXPECT_EQ(f->a, f_eq(t_zero(), t_zero()));
  EXPECT_EQ(f->b, f_eq(t_zero(), t_one()));
  Formula g = P("(exists v0 (= v0 (+ v1 1)))");
  EXPECT_EQ(g, f_exists(0, f_eq(t_var(0), t_plus(t_var(1), t_one()))));
  EXPECT_EQ(code_of([] { P("(or (= 0 0)"); }), "syntax");
}

TEST(Parse, LessThanDesugars) {
  Formula f = P("(< v0 v1)");
  EXPECT_TRUE(is_quant(f));
  GapUniverse u = GapUniverse::make({"g1"});
  EXPECT_TRUE(eval_bounded(u, f, {{0, std_num(1)}, {1, std_num(3)}}));
  EXPECT_FALSE(eval_bounded(u, f, {{0, std_num(3)}, {1, std_num(3)}}));
}

TEST(Complexity, Recursion) {
  EXPECT_EQ(complexity(P("(= 0 0)")), 0);
  EXPECT_EQ(complexity(P("(not (exists v0 (= v0 0)))")), 2);
  Formula three = P("(not (not (not (= 0 0))))");
  Formula five = P("(not (not (not (not (not (= 0 0))))))");
  EXPECT_EQ(complexity(f_or(three, five)), 6);
}

TEST(Assignments, CheckAndRestrict) {
  Formula f = P("(= v0 v1)");
  EXPECT_TRUE(asn_check(f, {{0, std_num(1)}, {1, std_num(2)}}));
  EXPECT_FALSE(asn_check(P("(= 0 0)"), {{0, std_num(1)}}));
  EXPECT_TRUE(asn_check(P("(= 0 0)"), {}));
  Assignment a{{0, std_num(1)}, {1, std_num(2)}};
  EXPECT_EQ(restrict_assignment(a, P("(= v0 0)")), (Assignment{{0, std_num(1)}}));
  EXPECT_TRUE(restrict_assignment({}, f).empty());
  EXPECT_TRUE(restrict_assignment({{0, std_num(1)}}, P("(= v1 v1)")).empty());
}

TEST(EvalTerm, ShiftsAndProducts) {
  GapNumber g1{1, 0}, g2{2, 0};
  EXPECT_EQ(eval_term(parse_term("(+ (+ v0 1) 1)"), {{0, g1}}), (GapNumber{1, 2}));
  EXPECT_EQ(code_of([&] { eval_term(parse_term("(* v0 v1)"), {{0, g1}, {1, g2}}); }), "unrepresentable");
  EXPECT_EQ(eval_term(parse_term("(* (+ 1 1) (+ 1 1))"), {}), std_num(4));
}

TEST(Substitute, WorkedExample) {
  Formula f = P("(or (exists v0 (= v0 v1)) (= (+ v0 1) v2))");
  Formula g = substitute_assignment(f, {{0, std_num(3)}, {1, std_num(1)}});
  EXPECT_EQ(g, P("(or (exists v0 (= v0 (+ 0 1))) (= (+ (+ (+ (+ 0 1) 1) 1) 1) v2))"));
  EXPECT_EQ(substitute(f, {}), f);
  EXPECT_EQ(substitute(P("(= v0 v0)"), {{0, t_one()}}), P("(= 1 1)"));
}

TEST(Substitute, CaptureDetected) {
  Formula f = P("(exists v0 (= v0 v1))");
  EXPECT_EQ(code_of([&] { substitute(f, {{1, t_var(0)}}, false); }), "capture");
  Formula g = substitute(f, {{1, t_var(0)}});
  EXPECT_EQ(free_vars(g), std::vector<int>{0});
  EXPECT_TRUE(is_quant(g));
}

TEST(Numeral, LeftNested) {
  EXPECT_EQ(numeral(std_num(3)), parse_term("(+ (+ (+ 0 1) 1) 1)"));
  EXPECT_EQ(numeral(std_num(0)), t_zero());
  EXPECT_EQ(code_of([] { numeral(GapNumber{1, 0}); }), "nonstandard");
}

TEST(BigOr, Association) {
  Formula a = P("(= 0 0)"), b = P("(= 0 1)"), c = P("(= 1 1)");
  EXPECT_EQ(big_or({a}), a);
  EXPECT_EQ(big_or({a, b, c}), f_or(f_or(a, b), c));
  EXPECT_EQ(big_and({a, b, c}), f_and(f_and(a, b), c));
  EXPECT_EQ(code_of([] { big_or({}); }), "empty");
}

TEST(Printing, Infix) {
  EXPECT_EQ(to_infix(P("(or (= v0 v1) (= v2 v3))")), "v0=v1 ∨ v2=v3");
  EXPECT_EQ(to_infix(P("(exists v0 (= (+ v0 v1) v2))")), "∃v0(v0+v1=v2)");
}

// Properties over random formulas.

TEST(SyntaxProperties, ParsePrintRoundTrip) {
  gen::Rng r(3);
  for (int i = 0; i < 3000; ++i) {
    Formula f = gen::random_formula(r, gen::uniform(r, 0, 5), 3);
    EXPECT_EQ(parse_formula(to_sexpr(f)), f) << to_sexpr(f);
  }
}

TEST(SyntaxProperties, ComplexityEquations) {
  gen::Rng r(5);
  for (int i = 0; i < 3000; ++i) {
    Formula f = gen::random_formula(r, gen::uniform(r, 0, 5), 3);
    std::int64_t c = complexity(f);
    switch (f->kind) {
      case FK::Eq: EXPECT_EQ(c, 0); break;
      case FK::Not:
      case FK::Exists:
      case FK::Forall: EXPECT_EQ(c, complexity(f->a) + 1); break;
      default: EXPECT_EQ(c, std::max(complexity(f->a), complexity(f->b)) + 1);
    }
  }
}

TEST(SyntaxProperties, RestrictionPassesAsnCheck) {
  gen::Rng r(9);
  for (int i = 0; i < 2000; ++i) {
    Formula f = gen::random_formula(r, 3, 4);
    Assignment a;
    for (int v = 0; v < 10; ++v) a[v] = std_num(gen::uniform(r, 0, 5));
    EXPECT_TRUE(asn_check(f, restrict_assignment(a, f)));
  }
}

TEST(SyntaxProperties, SubstitutionComposes) {
  // Substituting closed terms for disjoint variables composes.
  gen::Rng r(13);
  for (int i = 0; i < 2000; ++i) {
    Formula f = gen::random_formula(r, 3, 4);
    TermSubst g1{{0, gen::random_term(r, 2, 0)}, {1, gen::random_term(r, 2, 0)}};
    TermSubst g2{{2, gen::random_term(r, 2, 0)}, {3, gen::random_term(r, 2, 0)}};
    TermSubst both = g1;
    both.insert(g2.begin(), g2.end());
    EXPECT_EQ(substitute(substitute(f, g1), g2), substitute(f, both));
  }
}

// Quantifier-free, so the bounded semantics is exact.
TEST(SyntaxProperties, NumeralSubstitutionPreservesTruth) {
  GapUniverse u = GapUniverse::make({"g1"});
  gen::Rng r(17);
  for (int i = 0; i < 1500; ++i) {
    Formula f = gen::random_formula(r, 3, 2, false);
    Assignment a;
    for (int v : free_vars(f)) a[v] = std_num(gen::uniform(r, 0, 3));
    Formula g = substitute_assignment(f, a);
    EXPECT_TRUE(is_sentence(g));
    EXPECT_EQ(eval_bounded(u, f, a), eval_bounded(u, g, {}));
  }
}

#include <gtest/gtest.h>

#include "satlab/error.hpp"
#include "satlab/satclass.hpp"
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

OpPtr op(const std::string& t, std::optional<std::string> theta = std::nullopt) {
  std::optional<Formula> th;
  if (theta) th = P(*theta);
  return Operator::create("F", Template::parse(t), th);
}

GapUniverse U3() { return GapUniverse::make({"g1", "g2", "g3"}); }

bool has_clause(const VerificationReport& r, const std::string& c) {
  for (const auto& v : r.violations)
    if (v.clause == c) return true;
  return false;
}

RayKey root_ray(const Operator& f, Formula base, int gap) { return RayKey{f.id(), base, 0, gap, false}; }

}  // namespace

TEST(VerifyComp, ExplicitClauses) {
  GapUniverse u = U3();
  Formula a = P("(= 0 0)"), b = P("(= 0 1)"), d = f_or(a, b);
  SatClass s(u);
  s.domain() = cl(std::vector<Formula>{d});
  s.set(a, {}, true);
  s.set(b, {}, false);
  s.set(d, {}, true);
  EXPECT_TRUE(verify_comp(s).ok);
  s.set(d, {}, false);
  VerificationReport r = verify_comp(s);
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_clause(r, "CS2"));
  s.set(d, {}, true);
  s.set(b, {}, true);
  EXPECT_TRUE(has_clause(verify_comp(s), "CS1"));
}

TEST(VerifyComp, Quantifiers) {
  GapUniverse u = U3();
  Formula ex = P("(exists v0 (= v0 (+ 1 1)))");
  SatClass s = semantic_class({ex, P("(forall v0 (= v0 v0))")}, u);
  EXPECT_TRUE(verify_comp(s).ok);
  EXPECT_EQ(s.truth(ex), true);
  s.set(ex, {}, false);
  EXPECT_FALSE(verify_comp(s).ok);
}

TEST(VerifyComp, RayBoundary) {
  GapUniverse u = U3();
  auto f = op("(or q p)", "(= 0 1)");
  SatClass s(u);
  s.domain() = cl(std::vector<Formula>{iterate(*f, GapNumber{1, 0})}, f.get());
  s.set(f->theta(), {}, false);
  // Root true at even offsets, false at odd ones: the q-child at x is the root at x-1.
  s.set_ray(root_ray(*f, f->theta(), 1), RayValue{true, false});
  VerificationReport r = verify_comp(s);
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_clause(r, "CS2"));
  s.set_ray(root_ray(*f, f->theta(), 1), RayValue::uniform(true));
  EXPECT_TRUE(verify_comp(s).ok);
}

TEST(UniquePathological, ReferenceInstance) {
  GapUniverse u = U3();
  auto f = op("(or q p)", "(= 0 1)");
  SatClass s = build_unique_pathological(*f, {1}, {2}, u);
  EXPECT_TRUE(verify_comp(s).ok);
  EXPECT_EQ(s.truth(iterate(*f, GapNumber{1, 0})), true);
  EXPECT_EQ(s.truth(iterate(*f, GapNumber{1, -40})), true);
  EXPECT_EQ(s.truth(iterate(*f, GapNumber{2, 0})), false);
  EXPECT_EQ(s.truth(f->theta()), false);
  EXPECT_EQ(code_of([&] { build_unique_pathological(*f, {1}, {1}, u); }), "overlap");
  EXPECT_EQ(code_of([&] { build_unique_pathological(*f, {0}, {}, u); }), "standard");
}

TEST(UniquePathological, OracleFindsExactlyOne) {
  GapUniverse u = U3();
  auto f = op("(or q p)", "(= 0 1)");
  SatClass s = build_unique_pathological(*f, {1}, {2}, u);
  ConstraintTheory th;
  th.fixed = {{iterate(*f, GapNumber{1, 0}), true}, {iterate(*f, GapNumber{2, 0}), false}};
  OracleResult o = brute_force_oracle(s.domain(), th, u);
  EXPECT_EQ(o.solutions, 1u);
  ASSERT_EQ(o.kept.size(), 1u);
  EXPECT_TRUE(same_values(o.kept[0], s));
}

TEST(Oracle, Trivial) {
  GapUniverse u = U3();
  ClosedSet one = cl(std::vector<Formula>{P("(= 0 0)")});
  EXPECT_EQ(brute_force_oracle(one, {}, u).solutions, 1u);
  auto f = op("(or q p)");
  Formula base = P("(= 0 1)");
  ClosedSet d = cl(std::vector<Formula>{iterate(*f, GapNumber{1, 0}, base)}, f.get());
  ConstraintTheory th;
  th.fixed = {{iterate(*f, GapNumber{1, 0}, base), true}, {iterate(*f, GapNumber{1, -2}, base), false}};
  EXPECT_EQ(brute_force_oracle(d, th, u).solutions, 0u);
  OracleOptions tiny;
  tiny.max_candidates = 1;
  EXPECT_EQ(code_of([&] { brute_force_oracle(d, {}, u, tiny); }), "space_too_large");
}

TEST(Constraints, TrivialAboveCorrectBelow) {
  GapUniverse u = U3();
  auto f = op("(or p q)");
  Formula base = P("(= 0 1)");
  ConstraintTheory th;
  th.op = f;
  th.cut = CutSpec::below_gap(2);
  ClosedSet c = cl(std::vector<Formula>{iterate(*f, GapNumber{2, 0}, base), iterate(*f, GapNumber{1, 0}, base)}, f.get());
  BuildResult br = extend_with_constraints(th, c, u);
  ASSERT_TRUE(br.ok) << to_json(br.report).dump();
  EXPECT_EQ(br.cls->truth(iterate(*f, GapNumber{2, 0}, base)), true);
  EXPECT_EQ(br.cls->truth(iterate(*f, GapNumber{1, 0}, base)), false);
  EXPECT_TRUE(verify_comp(*br.cls).ok);
}

TEST(Constraints, ConflictReportsCore) {
  GapUniverse u = U3();
  auto f = op("(or p q)");
  Formula base = P("(= 0 1)");
  ConstraintTheory th;
  th.op = f;
  th.cut = CutSpec::below_gap(2);
  Formula high = iterate(*f, GapNumber{2, 0}, base);
  th.fixed = {{high, false}};
  BuildResult br = extend_with_constraints(th, cl(std::vector<Formula>{high}, f.get()), u);
  EXPECT_FALSE(br.ok);
  EXPECT_FALSE(br.core.empty());
}

TEST(BreakCorrectness, ReferenceInstance) {
  GapUniverse u = U3();
  auto f = op("(or q q)");
  SatClass s = semantic_class({P("(= 0 0)")}, u);
  BreakResult br = extend_break_correctness(*f, s, s.domain(), P("(= 0 0)"), CutSpec::below_gap(3));
  EXPECT_TRUE(br.report.ok) << to_json(br.report).dump();
  EXPECT_EQ(br.d0.gap, 1);
  EXPECT_EQ(br.d1.gap, 2);
  EXPECT_TRUE(verify_comp(br.cls).ok);
  EXPECT_TRUE(check_correct_below(br.cls, *f, br.d0).ok);
  EXPECT_NE(br.cls.truth(br.theta), br.cls.truth(br.witness));
  EXPECT_EQ(br.cls.truth(br.witness), true);
  EXPECT_EQ(br.cls.truth(br.theta), false);
  GapUniverse one = GapUniverse::make({"g1"});
  SatClass s1 = semantic_class({P("(= 0 0)")}, one);
  EXPECT_EQ(code_of([&] { extend_break_correctness(*f, s1, s1.domain(), P("(= 0 0)"), CutSpec::below_gap(1)); }),
            "no_admissible_gaps");
}

TEST(DoubleNegation, IncorrectAboveCut) {
  GapUniverse u = U3();
  auto f = op("(not (not q))");
  Formula t = P("(= 0 0)");
  ConstraintTheory th;
  th.op = f;
  th.cut = CutSpec::below_gap(2);
  th.base = semantic_class({t}, u);
  th.preserve = th.base->domain();
  Formula hi = iterate(*f, GapNumber{2, 0}, t), lo = iterate(*f, GapNumber{1, 0}, t);
  Formula hin = iterate(*f, GapNumber{2, 0}, f_not(t));
  BuildResult br = extend_double_negation(th, cl(std::vector<Formula>{hi, lo, hin, f_not(t)}, f.get()), u);
  ASSERT_TRUE(br.ok) << to_json(br.report).dump();
  EXPECT_EQ(br.cls->truth(hi), false);
  EXPECT_EQ(br.cls->truth(lo), true);
  EXPECT_EQ(br.cls->truth(hin), true);
  EXPECT_TRUE(check_complementarity(*br.cls).ok);
  EXPECT_TRUE(verify_comp(*br.cls).ok);
}

TEST(CorrectnessSets, Pathology) {
  GapUniverse u = U3();
  auto f = op("(or q p)", "(= 0 1)");
  SatClass s = build_unique_pathological(*f, {1}, {2}, u, 4);
  CorrectnessReport rep = correctness_sets(s, *f);
  ASSERT_FALSE(rep.sets.empty());
  const CorrectnessSet& idc = rep.sets[0];
  EXPECT_EQ(idc.name, "IDC^theta");
  EXPECT_EQ(idc.gaps.at("g1"), "out");
  EXPECT_EQ(idc.gaps.at("g2"), "in");
  EXPECT_EQ(idc.gaps.at("g3"), "vacuous");
  for (std::int64_t n = 1; n <= 4; ++n) EXPECT_EQ(idc.standard.at(n), "in");
  EXPECT_EQ(idc.initial_segment, "standard");
  SatClass empty(u);
  CorrectnessReport none = correctness_sets(empty, *f);
  for (const auto& [g, st] : none.sets[0].gaps) EXPECT_EQ(st, "vacuous");
}

TEST(SatClassJson, RoundTrip) {
  GapUniverse u = U3();
  auto f = op("(or q p)", "(= 0 1)");
  SatClass s = build_unique_pathological(*f, {1}, {2}, u, 2);
  SatClass t = satclass_from_json(to_json(s), u);
  EXPECT_TRUE(same_values(s, t));
  EXPECT_EQ(s.domain(), t.domain());
  EXPECT_EQ(to_json(s).dump(), to_json(t).dump());
}

// Builder outputs: gap constancy and standard forcing.

TEST(SatClassProperties, GapConstancyAndStandardForcing) {
  GapUniverse u = U3();
  for (const char* t : {"(or q p)", "(and q p)", "(not (not q))", "(exists y q)"}) {
    for (const char* th : {"(= 0 1)", "(= 0 0)", "(not (= 0 0))"}) {
      OpPtr f;
      try {
        f = op(t, th);
      } catch (const Error&) {
        continue;
      }
      SatClass s = build_unique_pathological(*f, {1, 3}, {2}, u, 5);
      ASSERT_TRUE(verify_comp(s).ok) << t << " " << th;
      for (int g = 1; g <= 3; ++g)
        for (std::int64_t k = -5; k < 5; ++k)
          EXPECT_EQ(s.truth(iterate(*f, GapNumber{g, k})), s.truth(iterate(*f, GapNumber{g, k + 1})));
      for (std::int64_t n = 0; n <= 5; ++n) EXPECT_EQ(s.truth(iterate(*f, n)), s.truth(f->theta()));
    }
  }
}

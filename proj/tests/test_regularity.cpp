#include <gtest/gtest.h>

#include "satlab/error.hpp"
#include "satlab/regularity.hpp"
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

OpPtr op(const std::string& t, const std::string& theta) {
  return Operator::create("F", Template::parse(t), P(theta));
}

}  // namespace

TEST(Template, WorkedExamples) {
  const StructuralTemplate& a = structural_template(P("(or (= 0 0) (= 0 0))"));
  EXPECT_EQ(to_infix(a.tmpl), "v0=v1 ∨ v2=v3");
  ASSERT_EQ(a.gamma.size(), 4u);
  for (const auto& [v, t] : a.gamma) EXPECT_EQ(t, t_zero());
  const StructuralTemplate& b = structural_template(P("(exists v2 (= (+ v2 1) (+ (+ v1 1) 1)))"));
  EXPECT_EQ(to_infix(b.tmpl), "∃v0(v0+v1=v2)");
  EXPECT_EQ(b.gamma.at(1), t_one());
  EXPECT_EQ(b.gamma.at(2), parse_term("(+ (+ v1 1) 1)"));
  const StructuralTemplate& c = structural_template(P("(= v0 v1)"));
  EXPECT_EQ(c.tmpl, P("(= v0 v1)"));
  EXPECT_EQ(c.gamma.at(0), t_var(0));
  EXPECT_EQ(c.gamma.at(1), t_var(1));
}

TEST(Similarity, Examples) {
  EXPECT_TRUE(structurally_similar(P("(or (forall v0 (= v0 (+ v1 1))) (not (= v1 (+ v0 1))))"),
                                   P("(or (forall v3 (= v3 (+ (+ v2 1) 1))) (not (= (+ v2 1) v0)))")));
  EXPECT_FALSE(structurally_similar(P("(= 0 0)"), P("(or (= 0 0) (= 0 0))")));
  Formula f = P("(exists v1 (= v1 v0))");
  EXPECT_TRUE(structurally_similar(f, f));
}

TEST(HatAssignment, Examples) {
  Formula f = P("(or (= 0 0) (= 0 0))");
  Assignment h = hat_assignment(f, {});
  ASSERT_EQ(h.size(), 4u);
  for (const auto& [v, x] : h) EXPECT_EQ(x, std_num(0));
  auto op1 = op("(and q p)", "(= (+ 1 1) (+ 1 1))");
  Assignment hp = hat_assignment(iterate(*op1, GapNumber{1, 0}), {});
  ASSERT_FALSE(hp.empty());
  for (const auto& [v, x] : hp) EXPECT_EQ(x, std_num(2));
  Formula g = P("(= v0 (+ v1 1))");
  Assignment hg = hat_assignment(g, {{0, std_num(0)}, {1, GapNumber{1, 0}}});
  EXPECT_EQ(hg.at(1), (GapNumber{1, 1}));
}

TEST(IsRegular, TemplatePairs) {
  GapUniverse u = GapUniverse::make({"g1"});
  Formula f = P("(or (= 0 0) (= 0 0))");
  Formula h = structural_template(f).tmpl;
  Assignment zero{{0, std_num(0)}, {1, std_num(0)}, {2, std_num(0)}, {3, std_num(0)}};
  SatClass s(u);
  s.set(f, {}, true);
  s.set(h, zero, true);
  EXPECT_TRUE(is_regular(s).ok);
  s.set(h, zero, false);
  EXPECT_FALSE(is_regular(s).ok);
}

TEST(XSatisfies, Examples) {
  GapUniverse u = GapUniverse::make({"g1", "g2"});
  auto f = op("(and q p)", "(= 0 0)");
  Formula x1 = iterate(*f, GapNumber{1, 0});
  GapSet xs{2};
  EXPECT_FALSE(x_satisfies(*f, x1, {}, xs, GapNumber{1, 0}, u));
  Formula x2 = iterate(*f, GapNumber{2, 3});
  EXPECT_TRUE(x_satisfies(*f, x2, {}, xs, GapNumber{2, 3}, u));
  // Same answer from a lower x of the same gap.
  EXPECT_TRUE(x_satisfies(*f, x2, {}, xs, GapNumber{2, 0}, u));
  EXPECT_FALSE(x_satisfies(*f, f_not(x2), {}, xs, GapNumber{2, 1}, u));
  EXPECT_EQ(code_of([&] { x_satisfies(*f, x2, {}, xs, GapNumber{2, -1000}, u); }), "nonstandard");
}

TEST(RegularBuilder, GapSetsDecideIterates) {
  GapUniverse u = GapUniverse::make({"g1", "g2"});
  auto f = op("(and q p)", "(= 0 0)");
  std::vector<Formula> fg{iterate(*f, GapNumber{1, 0}), iterate(*f, GapNumber{2, 0}), iterate(*f, 3)};
  RegularResult r = build_regular_class(*f, GapSet{2}, fg, nullptr, u);
  EXPECT_TRUE(r.report.ok) << to_json(r.report).dump();
  EXPECT_EQ(r.cls.truth(fg[0]), false);
  EXPECT_EQ(r.cls.truth(fg[1]), true);
  EXPECT_EQ(r.cls.truth(fg[2]), true);
  EXPECT_TRUE(verify_comp(r.cls).ok);
  EXPECT_TRUE(is_regular(r.cls).ok);
}

TEST(RegularBuilder, PreservationConflict) {
  GapUniverse u = GapUniverse::make({"g1", "g2"});
  auto f = op("(and q p)", "(= 0 0)");
  Formula x = iterate(*f, GapNumber{1, 0});
  SatClass base(u);
  base.set_ray(RayKey{f->id(), f->theta(), 0, 1, false}, RayValue::uniform(true));
  EXPECT_EQ(code_of([&] { build_regular_class(*f, GapSet{2}, {x}, &base, u); }), "preservation");
  EXPECT_EQ(code_of([&] { build_regular_class(*op("(or q p)", "(= 0 1)"), GapSet{}, {x}, nullptr, u); }),
            "invalid_theta");
}

// Properties on random formulas.

namespace {
bool recovers(Formula f) {
  const StructuralTemplate& st = structural_template(f);
  return alpha_equal(substitute(st.tmpl, st.gamma), f);
}
}  // namespace

TEST(RegularityProperties, IdempotentAndRecoverable) {
  gen::Rng r(43);
  for (int i = 0; i < 3000; ++i) {
    Formula f = gen::random_formula(r, gen::uniform(r, 0, 4), 3);
    Formula t = structural_template(f).tmpl;
    EXPECT_EQ(structural_template(t).tmpl, t) << to_sexpr(f);
    EXPECT_TRUE(recovers(f)) << to_sexpr(f);
  }
}

TEST(RegularityProperties, SimilarityIsAnEquivalence) {
  gen::Rng r(47);
  std::vector<Formula> fs;
  for (int i = 0; i < 150; ++i) fs.push_back(gen::random_formula(r, 2, 2));
  for (Formula a : fs) {
    EXPECT_TRUE(structurally_similar(a, a));
    for (Formula b : fs) {
      EXPECT_EQ(structurally_similar(a, b), structurally_similar(b, a));
      if (!structurally_similar(a, b)) continue;
      for (Formula c : fs)
        if (structurally_similar(b, c)) EXPECT_TRUE(structurally_similar(a, c));
    }
  }
}

TEST(RegularityProperties, XIndependence) {
  GapUniverse u = GapUniverse::make({"g1", "g2"});
  for (const char* t : {"(and q p)", "(or q p)", "(not (not q))"}) {
    for (const char* th : {"(= 0 0)", "(not (= 0 0))"}) {
      OpPtr f;
      try {
        f = op(t, th);
      } catch (const Error&) {
        continue;
      }
      for (GapSet xs : {GapSet{}, GapSet{1}, GapSet{2}, GapSet{1, 2}})
        for (int g = 1; g <= 2; ++g) {
          Formula top = iterate(*f, GapNumber{g, 5});
          for (Formula phi : {top, f_not(top), f_or(top, P("(= 0 1)"))}) {
            bool first = x_satisfies(*f, phi, {}, xs, GapNumber{g, 5}, u);
            for (std::int64_t k = 4; k >= -10; --k) EXPECT_EQ(x_satisfies(*f, phi, {}, xs, GapNumber{g, k}, u), first);
          }
        }
    }
  }
}

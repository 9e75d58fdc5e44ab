#include <gtest/gtest.h>

#include "satlab/closure.hpp"
#include "satlab/error.hpp"
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

// Explicit elements and rays of a closed set as a comparable value.
std::pair<std::vector<Formula>, std::vector<std::tuple<int, int, int, std::int64_t>>> shape(const ClosedSet& c) {
  std::vector<Formula> e(c.explicit_elements().begin(), c.explicit_elements().end());
  std::vector<std::tuple<int, int, int, std::int64_t>> r;
  for (const auto& [k, m] : c.rays()) r.emplace_back(k.op, k.pos, k.gap, m);
  return {e, r};
}

}  // namespace

TEST(Immediate, ConcreteAndSymbolic) {
  Formula a = P("(= 0 0)"), b = P("(= 0 1)");
  EXPECT_EQ(immediate_subformulas(f_or(a, b)), (std::vector<Formula>{a, b}));
  EXPECT_TRUE(immediate_subformulas(a).empty());
  auto f = op("(or q p)", "(= 0 1)");
  Formula x = iterate(*f, GapNumber{1, 0});
  auto kids = immediate_subformulas(x);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0], iterate(*f, GapNumber{1, -1}));
  EXPECT_EQ(kids[1], f->theta());
}

TEST(Cl, Examples) {
  Formula d = P("(or (= 0 0) (= 0 1))");
  ClosedSet c = cl(std::vector<Formula>{d});
  EXPECT_EQ(c.explicit_elements().size(), 3u);
  EXPECT_TRUE(c.contains(P("(= 0 0)")));
  EXPECT_TRUE(cl(std::vector<Formula>{}).empty());
  auto f = op("(or q p)", "(= 0 1)");
  ClosedSet s = cl(std::vector<Formula>{iterate(*f, GapNumber{1, 0})}, f.get());
  EXPECT_TRUE(s.contains(f->theta()));
  EXPECT_TRUE(s.contains(iterate(*f, GapNumber{1, -7})));
  EXPECT_FALSE(s.contains(iterate(*f, GapNumber{1, 1})));
  EXPECT_EQ(s.rays().size(), 1u);
}

TEST(Rank, Examples) {
  Formula a = P("(= 0 0)"), b = P("(= 0 1)");
  FormulaSet c{a, f_or(a, b), b};
  RankFunction r = rank(c);
  EXPECT_EQ(r[a], 0);
  EXPECT_EQ(r[b], 0);
  EXPECT_EQ(r[f_or(a, b)], 1);
  auto f = op("(or q q)");
  Formula phi = P("(= 1 1)");
  Formula x5 = iterate(*f, 5, phi);
  RankFunction r2 = rank(FormulaSet{x5, phi}, f.get());
  EXPECT_LT(r2[phi], r2[x5]);
  EXPECT_EQ(rank(FormulaSet{a})[a], 0);
}

TEST(DClosure, Examples) {
  auto f = op("(or q q)");
  Formula phi = P("(= 0 0)");
  ClosedSet z;
  z.insert(iterate(*f, 3, phi));
  ClosedSet zd = d_closure(z, std_num(1), *f);
  EXPECT_EQ(zd.explicit_elements(), (FormulaSet{iterate(*f, 2, phi), iterate(*f, 1, phi), phi}));
  EXPECT_TRUE(d_closure(zd, std_num(1), *f).subset_of(zd));
  auto g = op("(or q p)");
  ClosedSet w;
  w.insert(iterate(*g, 2, phi));
  EXPECT_EQ(d_closure(w, std_num(1), *g), cl(w, g.get()));
}

TEST(DClosure, NonstandardLengths) {
  auto f = op("(or q q)");
  Formula phi = P("(= 0 0)");
  ClosedSet z;
  z.insert(iterate(*f, GapNumber{2, 0}, phi));
  ClosedSet zd = d_closure(z, GapNumber{1, 0}, *f);
  EXPECT_TRUE(zd.contains(iterate(*f, GapNumber{2, -1}, phi)));
  EXPECT_FALSE(zd.contains(iterate(*f, GapNumber{2, 0}, phi)));
  EXPECT_EQ(code_of([&] { d_closure(z, GapNumber{2, 0}, *f); }), "unrepresentable");
  EXPECT_TRUE(d_closure(z, std_num(0), *f).empty());
}

TEST(ClosedSetJson, RoundTrip) {
  GapUniverse u = GapUniverse::make({"g1", "g2"});
  auto f = op("(or q p)", "(= 0 1)");
  ClosedSet s = cl(std::vector<Formula>{iterate(*f, GapNumber{2, 0}), P("(not (= 1 1))")}, f.get());
  ClosedSet t = closed_set_from_json(to_json(s, &u), &u);
  EXPECT_EQ(s, t);
  EXPECT_NE(to_dot(s, f.get(), &u).find("digraph"), std::string::npos);
}

// Properties over random generators.

namespace {

std::vector<Formula> random_generators(gen::Rng& r, const Operator& f, int n) {
  std::vector<Formula> out;
  for (int i = 0; i < n; ++i) {
    Formula base = gen::random_formula(r, 2, 0);
    int kind = gen::uniform(r, 0, 2);
    if (kind == 0) out.push_back(base);
    else if (kind == 1) out.push_back(iterate(f, gen::uniform(r, 0, 5), base));
    else out.push_back(iterate(f, GapNumber{gen::uniform(r, 1, 2), gen::uniform(r, -3, 3)}, base));
  }
  return out;
}

}  // namespace

TEST(ClosureProperties, IdempotentAndMonotone) {
  gen::Rng r(31);
  for (const char* t : {"(or q p)", "(or q q)", "(and q p)", "(not (not q))"}) {
    auto f = op(t);
    for (int i = 0; i < 60; ++i) {
      auto xs = random_generators(r, *f, 3);
      auto ys = xs;
      for (Formula g : random_generators(r, *f, 2)) ys.push_back(g);
      ClosedSet cx = cl(xs, f.get());
      EXPECT_EQ(shape(cl(cx, f.get())), shape(cx));
      EXPECT_TRUE(cx.subset_of(cl(ys, f.get())));
    }
  }
}

TEST(ClosureProperties, ElementsReachableFromGenerators) {
  gen::Rng r(37);
  auto f = op("(or q q)");
  for (int i = 0; i < 60; ++i) {
    auto xs = random_generators(r, *f, 3);
    ClosedSet c = cl(xs, f.get());
    // Forward search along the successor relation; rays are followed a few
    // steps down, far enough to reach every explicit child.
    std::set<Formula> seen(xs.begin(), xs.end());
    std::vector<Formula> todo(xs.begin(), xs.end());
    while (!todo.empty()) {
      Formula g = todo.back();
      todo.pop_back();
      std::vector<Formula> next = immediate_subformulas(g);
      if (auto root = f_root_edge(*f, g)) next.push_back(*root);
      for (Formula h : next) {
        if (is_piece(h) && !h->index.standard() && h->index.offset < -10) continue;
        if (seen.insert(h).second) todo.push_back(h);
      }
    }
    for (Formula e : c.explicit_elements()) EXPECT_TRUE(seen.count(e)) << to_sexpr(e);
  }
}

TEST(ClosureProperties, DClosureLaws) {
  gen::Rng r(41);
  int checked = 0;
  for (const char* t : {"(or q q)", "(not (not q))", "(forall y q)", "(and q q)"}) {
    auto f = op(t);
    for (int i = 0; i < 60; ++i) {
      auto zs = random_generators(r, *f, 3);
      auto ws = random_generators(r, *f, 3);
      ClosedSet z = cl(zs, f.get()), w = cl(ws, f.get());
      GapNumber d = gen::coin(r, 0.7) ? std_num(gen::uniform(r, 1, 3)) : GapNumber{1, 0};
      try {
        ClosedSet zd = d_closure(z, d, *f);
        EXPECT_TRUE(d_closure(zd, d, *f).subset_of(zd));
        EXPECT_EQ(shape(d_closure(z.united(w), d, *f)), shape(d_closure(z, d, *f).united(d_closure(w, d, *f))));
        ++checked;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), "unrepresentable");
      }
    }
  }
  EXPECT_GT(checked, 100);
}

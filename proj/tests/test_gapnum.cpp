#include <gtest/gtest.h>

#include "satlab/error.hpp"
#include "satlab/gapnum.hpp"
#include "satlab/json_io.hpp"
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

GapUniverse two() { return GapUniverse::make({"g1", "g2"}); }

}  // namespace

TEST(GapUniverse, OrdersStandardBelowGaps) {
  GapUniverse u = two();
  EXPECT_EQ(u.size(), 2);
  EXPECT_EQ(compare(u, std_num(1000000), u.num("g1", -1000000)), Ord::lt);
  EXPECT_EQ(compare(u, u.num("g1", 4), u.num("g1", 4)), Ord::eq);
  EXPECT_EQ(compare(u, u.num("g1", 7), u.num("g2", -9)), Ord::lt);
}

TEST(GapUniverse, RejectsDuplicateLabels) {
  EXPECT_EQ(code_of([] { GapUniverse::make({"g1", "g1"}); }), "duplicate");
}

TEST(GapUniverse, DeclaredHalfMap) {
  GapUniverse u = GapUniverse::make({"a", "b"}, {{"half", {{"b", "a"}}}});
  EXPECT_EQ(u.apply_map("half", u.gap_index("b")), u.gap_index("a"));
  EXPECT_FALSE(u.apply_map("half", u.gap_index("a")).has_value());
  EXPECT_EQ(code_of([] { GapUniverse::make({"a", "b"}, {{"half", {{"a", "b"}, {"b", "a"}}}}); }),
            "order_incompatible");
}

TEST(GapUniverse, ParseFormatRoundTrip) {
  GapUniverse u = two();
  for (const char* s : {"0", "17", "g1", "g1+3", "g2-5"}) EXPECT_EQ(u.format(u.parse(s)), s);
  EXPECT_EQ(code_of([&] { u.parse("g9"); }), "unknown_gap");
  EXPECT_EQ(code_of([&] { u.parse("g1*2"); }), "parse");
}

TEST(Step, ShiftsWithinGap) {
  GapUniverse u = two();
  EXPECT_EQ(step(u.num("g1", 0), -3), u.num("g1", -3));
  EXPECT_EQ(code_of([] { step(std_num(2), -3); }), "underflow");
}

TEST(GapDiff, SameGapOnly) {
  GapUniverse u = two();
  EXPECT_EQ(gap_diff(u.num("g1", 5), u.num("g1", 2)), 3);
  EXPECT_FALSE(gap_diff(u.num("g1", 0), u.num("g2", 0)).has_value());
  EXPECT_EQ(gap_diff(std_num(4), std_num(9)), -5);
}

TEST(GapNumberJson, ObjectEncoding) {
  GapUniverse u = two();
  GapNumber x = u.num("g2", -4);
  nlohmann::json j = gap_to_json(x, u);
  EXPECT_EQ(j.dump(), R"({"gap":"g2","offset":-4})");
  EXPECT_EQ(gap_from_json(j, u), x);
  EXPECT_EQ(gap_from_json(nlohmann::json{{"gap", "standard"}, {"offset", 3}}, u), std_num(3));
  GapUniverse v = universe_from_json(universe_to_json(GapUniverse::make({"a", "b"}, {{"half", {{"b", "a"}}}}, 6)));
  EXPECT_EQ(v.labels(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(v.std_cap(), 6);
  EXPECT_EQ(v.apply_map("half", 2), 1);
}

TEST(CutSpec, GapInside) {
  CutSpec c = CutSpec::below_gap(2);
  EXPECT_TRUE(c.contains(GapNumber{1, 99}));
  EXPECT_FALSE(c.contains(GapNumber{2, -99}));
  CutSpec d = CutSpec::below(GapNumber{1, 3});
  EXPECT_TRUE(d.contains(GapNumber{1, 2}));
  EXPECT_FALSE(d.contains(GapNumber{1, 3}));
  EXPECT_FALSE(d.gap_inside(1).has_value());
  EXPECT_TRUE(*d.gap_inside(0));
  EXPECT_FALSE(*d.gap_inside(2));
}

// Properties over random numbers of a three-gap universe.

namespace {
GapNumber random_num(gen::Rng& r) {
  int g = gen::uniform(r, 0, 3);
  std::int64_t off = g == 0 ? gen::uniform(r, 0, 50) : gen::uniform(r, -50, 50);
  return GapNumber{g, off};
}
}  // namespace

TEST(GapProperties, OrderTotalityAndShiftAction) {
  GapUniverse u = GapUniverse::make({"g1", "g2", "g3"});
  gen::Rng r(7);
  for (int i = 0; i < 2000; ++i) {
    GapNumber x = random_num(r), y = random_num(r);
    int n = (compare(u, x, y) == Ord::lt) + (compare(u, x, y) == Ord::eq) + (compare(u, x, y) == Ord::gt);
    EXPECT_EQ(n, 1);
    EXPECT_EQ(compare(u, x, y) == Ord::lt, compare(u, y, x) == Ord::gt);
    EXPECT_EQ(gap_diff(x, y).has_value(), x.gap == y.gap);
    if (!x.standard()) {
      std::int64_t a = gen::uniform(r, -20, 20), b = gen::uniform(r, -20, 20);
      EXPECT_EQ(step(x, a + b), step(step(x, a), b));
      EXPECT_EQ(step(step(x, 5), -5), x);
      if (a > 0) EXPECT_EQ(compare(u, x, step(x, a)), Ord::lt);
    }
  }
}

TEST(GapProperties, CutsAreDownwardClosed) {
  gen::Rng r(11);
  for (int i = 0; i < 500; ++i) {
    CutSpec c = gen::coin(r) ? CutSpec::below_gap(gen::uniform(r, 1, 3)) : CutSpec::below(random_num(r));
    GapNumber x = random_num(r), y = random_num(r);
    if (c.contains(x) && y < x) EXPECT_TRUE(c.contains(y));
    if (c.contains(x) && !x.standard()) EXPECT_TRUE(c.contains(step(x, -1)));
    if (c.contains(x) && x.standard() && x.offset > 0) EXPECT_TRUE(c.contains(step(x, -1)));
  }
}

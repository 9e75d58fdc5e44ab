#include <benchmark/benchmark.h>

#include "satlab/closure.hpp"
#include "satlab/regularity.hpp"
#include "satlab/satclass.hpp"

using namespace satlab;

namespace {

OpPtr or_op() {
  static OpPtr f = Operator::create("F", Template::parse("(or q p)"));
  return f;
}

OpPtr local_or() {
  static OpPtr f = Operator::create("G", Template::parse("(or q p)"), parse_formula("(= 0 1)"));
  return f;
}

GapUniverse three_gaps() { return GapUniverse::make({"g1", "g2", "g3"}); }

}  // namespace

// Standard iterates are hash-consed, so repeated builds mostly hit the table.
static void BM_IterateStandard(benchmark::State& st) {
  Formula phi = parse_formula("(= v0 (+ 1 1))");
  auto x = static_cast<std::int64_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(iterate(*or_op(), x, phi));
}
BENCHMARK(BM_IterateStandard)->Arg(4)->Arg(16);

static void BM_ClosureSymbolic(benchmark::State& st) {
  OpPtr f = or_op();
  std::vector<Formula> gens;
  for (int g = 1; g <= 3; ++g) gens.push_back(iterate(*f, GapNumber{g, 2}, parse_formula("(exists v0 (= v0 1))")));
  for (auto _ : st) benchmark::DoNotOptimize(cl(gens, f.get()));
}
BENCHMARK(BM_ClosureSymbolic);

static void BM_OracleUnique(benchmark::State& st) {
  GapUniverse u = three_gaps();
  OpPtr f = local_or();
  SatClass s = build_unique_pathological(*f, {1}, {2, 3}, u, st.range(0));
  ConstraintTheory th;
  for (int g = 1; g <= 3; ++g) th.fixed.push_back({iterate(*f, GapNumber{g, 0}), g == 1});
  for (auto _ : st) benchmark::DoNotOptimize(brute_force_oracle(s.domain(), th, u).solutions);
}
BENCHMARK(BM_OracleUnique)->Arg(0)->Arg(4);

static void BM_BuildUnique(benchmark::State& st) {
  GapUniverse u = three_gaps();
  for (auto _ : st) benchmark::DoNotOptimize(build_unique_pathological(*local_or(), {1}, {2}, u, 8));
}
BENCHMARK(BM_BuildUnique);

// Templates are cached per formula; cycling through 64 formulas keeps most rounds on the cache.
static void BM_StructuralTemplate(benchmark::State& st) {
  std::int64_t n = 0;
  for (auto _ : st) {
    Formula f = f_exists(2, f_or(f_eq(t_plus(t_var(2), numeral(std_num(n % 64))), t_var(1)), f_eq(t_one(), t_zero())));
    benchmark::DoNotOptimize(structural_template(f).tmpl);
    n += 1;
  }
}
BENCHMARK(BM_StructuralTemplate);
BENCHMARK_MAIN();

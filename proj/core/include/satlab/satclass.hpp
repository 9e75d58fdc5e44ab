#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/closure.hpp"

namespace satlab {

// Value of a ray, by parity of the offset. Iterates of idempotent templates
// are constant along a gap; negation towers alternate.
struct RayValue {
  bool even = false;
  bool odd = false;
  static RayValue uniform(bool v) { return {v, v}; }
  bool at(std::int64_t offset) const { return (offset % 2 == 0) ? even : odd; }
  bool operator==(const RayValue&) const = default;
};

// Ray entries of sentences have an empty assignment; hat rays are valued
// under a constant assignment whose value is part of the key.
struct RayValKey {
  RayKey ray;
  GapNumber value{};
  bool operator==(const RayValKey& o) const { return ray == o.ray && value == o.value; }
};
struct RayValKeyLess {
  bool operator()(const RayValKey& a, const RayValKey& b) const {
    int c = cmp_ray_key(a.ray, b.ray);
    if (c != 0) return c < 0;
    return a.value < b.value;
  }
};

struct EntryLess {
  bool operator()(const std::pair<Formula, Assignment>& a,
                  const std::pair<Formula, Assignment>& b) const {
    int c = cmp_formula(a.first, b.first);
    if (c != 0) return c < 0;
    return cmp_assignment(a.second, b.second) < 0;
  }
};

using ExplicitTable = std::map<std::pair<Formula, Assignment>, bool, EntryLess>;
using RayTable = std::map<RayValKey, RayValue, RayValKeyLess>;

class SatClass {
 public:
  SatClass() = default;
  explicit SatClass(GapUniverse u) : universe_(std::move(u)) {}

  const GapUniverse& universe() const { return universe_; }
  ClosedSet& domain() { return domain_; }
  const ClosedSet& domain() const { return domain_; }

  // Stores under the assignment restricted to the free variables.
  void set(Formula f, const Assignment& a, bool v);
  void set_ray(const RayKey& k, RayValue v, GapNumber hat_value = {});
  std::optional<bool> get(Formula f, const Assignment& a = {}) const;
  std::optional<RayValue> get_ray(const RayKey& k, GapNumber hat_value = {}) const;
  std::optional<bool> truth(Formula f) const { return get(f, {}); }

  const ExplicitTable& table() const { return table_; }
  const RayTable& ray_table() const { return rays_; }
  ExplicitTable& mutable_table() { return table_; }
  RayTable& mutable_ray_table() { return rays_; }

 private:
  GapUniverse universe_;
  ClosedSet domain_;
  ExplicitTable table_;
  RayTable rays_;
};

// Connective view of a node; symbolic nodes take the kind of their template
// position, and template quantifiers over symbolic nodes bind nothing.
struct NodeShape {
  FK kind;
  std::vector<Formula> kids;
  int var = -1;
  bool transparent = false;
};
NodeShape node_shape(Formula f);
bool combine_values(FK kind, const std::vector<bool>& v);

// Constant value of an assignment on a formula's free variables (hat pieces).
std::optional<GapNumber> constant_value(Formula f, const Assignment& a);

struct Violation {
  std::string clause;  // CS1..CS4, missing, closure, instance, fixed, ...
  std::string formula;
  nlohmann::json assignment;
  std::string detail;
};

struct VerificationReport {
  bool ok = true;
  std::vector<Violation> violations;
  void add(Violation v) {
    ok = false;
    violations.push_back(std::move(v));
  }
  void merge(const VerificationReport& o) {
    for (const auto& v : o.violations) add(v);
  }
};

// Compositional clauses over the elements of c (defaults to the class domain).
VerificationReport verify_comp(const SatClass& s, const ClosedSet* c = nullptr);

// --------------------------------------------------------- constraints

enum class AboveMode { TrivialAbove, IncorrectAbove };

struct ConstraintTheory {
  std::optional<SatClass> base;   // class to preserve on `preserve`
  ClosedSet preserve;             // X
  OpPtr op;                       // may be null: no correctness/triviality instances
  std::optional<CutSpec> cut;     // correctness below, triviality/incorrectness above
  AboveMode mode = AboveMode::TrivialAbove;
  std::vector<std::pair<Formula, bool>> fixed;  // boundary literals T(phi) = b
};

// One correctness/triviality instance: T(psi) against T(root) or a constant.
struct Instance {
  Formula psi;
  Formula root;
  GapNumber length;
  bool below = true;
};
// Instances over the sentences of d (ray nodes at two consecutive offsets).
std::vector<Instance> constraint_instances(const ConstraintTheory& th, const ClosedSet& d);
VerificationReport check_constraints(const SatClass& s, const ConstraintTheory& th,
                                     const ClosedSet& d);

struct BuildResult {
  bool ok = false;
  std::optional<SatClass> cls;
  VerificationReport report;
  std::vector<std::string> core;  // minimal conflicting preserved/fixed items
};

BuildResult extend_with_constraints(const ConstraintTheory& th, const ClosedSet& c,
                                    const GapUniverse& u);

// Standard iterates F(1..standard_upto) join the domain when requested.
SatClass build_unique_pathological(const Operator& f, const std::vector<int>& j0,
                                   const std::vector<int>& j1, const GapUniverse& u,
                                   std::int64_t standard_upto = 0);

struct BreakResult {
  SatClass cls;
  GapNumber d0;
  GapNumber d1;
  Formula theta;
  Formula witness;  // F(d1, theta)
  VerificationReport report;
};
// `below` is the cut I the thresholds must clear; `d` bounds them from above.
BreakResult extend_break_correctness(const Operator& f, const SatClass& s, const ClosedSet& x,
                                     Formula phi_tilde, const CutSpec& d,
                                     const CutSpec& below = CutSpec::below_gap(1));
// F-correctness on [0, d0): every same-root pair whose length difference is
// below d0 gets equal values.
VerificationReport check_correct_below(const SatClass& s, const Operator& f, const GapNumber& d0);

BuildResult extend_double_negation(const ConstraintTheory& th, const ClosedSet& c,
                                   const GapUniverse& u);
VerificationReport check_complementarity(const SatClass& s);

// ----------------------------------------------------------------- oracle

struct OracleOptions {
  std::uint64_t max_candidates = 1ull << 24;  // SATLAB_ORACLE_BOUND overrides
  std::size_t keep = 16;                      // solutions retained
  bool parity_rays = false;                   // two bits per ray instead of one
};
struct OracleResult {
  std::uint64_t candidates = 0;
  std::uint64_t solutions = 0;
  std::vector<SatClass> kept;
};
OracleOptions oracle_options_from_env();
// Entries a class on d must carry: sentences at the empty assignment plus the
// assignments the quantifier clauses consult.
std::vector<std::pair<Formula, Assignment>> required_entries(
    const ClosedSet& d, const GapUniverse& u,
    const std::vector<std::pair<Formula, Assignment>>& seeds = {});
OracleResult brute_force_oracle(const ClosedSet& d, const ConstraintTheory& th,
                                const GapUniverse& u, const OracleOptions& opt = {});
bool same_values(const SatClass& a, const SatClass& b);

// ----------------------------------------------------- correctness sets

struct CorrectnessSet {
  std::string name;
  std::map<std::int64_t, std::string> standard;  // x -> in | out
  std::map<std::string, std::string> gaps;       // label -> in | out | vacuous
  std::string initial_segment;
};
struct CorrectnessReport {
  std::vector<CorrectnessSet> sets;
};
CorrectnessReport correctness_sets(const SatClass& s, const Operator& f);
std::string correctness_name(const Operator& f);

// Concrete class on the closure of concrete sentences, valued by semantics.
SatClass semantic_class(const std::vector<Formula>& sentences, const GapUniverse& u);

nlohmann::json to_json(const SatClass& s);
SatClass satclass_from_json(const nlohmann::json& j, const GapUniverse& u);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const CorrectnessReport& r);
nlohmann::json assignment_to_json(const Assignment& a, const GapUniverse* u);
Assignment assignment_from_json(const nlohmann::json& j, const GapUniverse& u);

}  // namespace satlab

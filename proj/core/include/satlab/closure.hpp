#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/operators.hpp"

namespace satlab {

// A downward ray of symbolic nodes inside one gap: all Piece(op, pos, (gap, k), base)
// with k <= max_off. kFullGap stands for the whole gap.
constexpr std::int64_t kFullGap = std::numeric_limits<std::int64_t>::max();

struct RayKey {
  int op = -1;
  Formula base = nullptr;
  int pos = 0;
  int gap = 1;
  bool hat = false;
  bool operator==(const RayKey& o) const {
    return op == o.op && base == o.base && pos == o.pos && gap == o.gap && hat == o.hat;
  }
};
int cmp_ray_key(const RayKey& a, const RayKey& b);
struct RayKeyLess {
  bool operator()(const RayKey& a, const RayKey& b) const { return cmp_ray_key(a, b) < 0; }
};
using RayMap = std::map<RayKey, std::int64_t, RayKeyLess>;

RayKey ray_key_of(Formula piece);
// Node of the ray at a given offset (offset must not exceed max_off).
Formula ray_member(const RayKey& k, std::int64_t offset);
// A representative offset: max_off itself, or 0 for a full gap.
std::int64_t ray_rep(std::int64_t max_off);
std::int64_t ray_pred(std::int64_t max_off);  // max_off - 1, full stays full

using FormulaSet = std::set<Formula, FormulaLess>;

class ClosedSet {
 public:
  bool contains(Formula f) const;
  bool contains_ray(const RayKey& k, std::int64_t max_off) const;
  // Raw insertion; closure is the caller's business (see cl()).
  void insert(Formula f);
  void insert_ray(const RayKey& k, std::int64_t max_off);

  const FormulaSet& explicit_elements() const { return explicit_; }
  const RayMap& rays() const { return rays_; }
  const std::vector<Formula>& generators() const { return generators_; }
  void add_generator(Formula f) { generators_.push_back(f); }
  int op() const { return op_; }
  void set_op(int op) { op_ = op; }

  bool empty() const { return explicit_.empty() && rays_.empty(); }
  std::size_t size() const { return explicit_.size() + rays_.size(); }
  bool subset_of(const ClosedSet& o) const;
  bool operator==(const ClosedSet& o) const {
    return explicit_ == o.explicit_ && rays_ == o.rays_;
  }
  ClosedSet united(const ClosedSet& o) const;
  ClosedSet intersected(const ClosedSet& o) const;

 private:
  FormulaSet explicit_;
  RayMap rays_;
  std::vector<Formula> generators_;
  int op_ = -1;
};

std::vector<Formula> immediate_subformulas(Formula f);
// One ⊳-step from a ray: explicit children and child rays at the same or
// preceding offsets.
void ray_subformulas(const RayKey& k, std::int64_t max_off, std::vector<Formula>& out,
                     std::vector<std::pair<RayKey, std::int64_t>>& out_rays);
// F-root of f when it differs from f.
std::optional<Formula> f_root_edge(const Operator& f, Formula psi);

ClosedSet cl(const std::vector<Formula>& xs, const Operator* f = nullptr);
ClosedSet cl(const ClosedSet& x, const Operator* f = nullptr);

using RankFunction = std::map<Formula, int, FormulaLess>;
RankFunction rank(const FormulaSet& c, const Operator* f = nullptr);

// Z_d for additive F. Differences a - c are bounded by n*d for standard n;
// distinct gaps are taken to be further apart than any standard multiple of a
// lower gap, so only same-gap differences survive when d sits below a.
ClosedSet d_closure(const ClosedSet& z, const GapNumber& d, const Operator& f);

nlohmann::json to_json(const ClosedSet& s, const GapUniverse* u = nullptr);
ClosedSet closed_set_from_json(const nlohmann::json& j, const GapUniverse* u = nullptr);
std::string to_dot(const ClosedSet& s, const Operator* f = nullptr, const GapUniverse* u = nullptr);
std::string ray_to_string(const RayKey& k, std::int64_t max_off, const GapUniverse* u = nullptr);

}  // namespace satlab

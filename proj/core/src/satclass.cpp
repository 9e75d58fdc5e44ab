#include "satlab/satclass.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <set>

#include "satlab/error.hpp"
#include "satlab/json_io.hpp"

namespace satlab {

namespace {

bool nonstandard_piece(Formula f) { return is_piece(f) && !f->index.standard(); }

Assignment constant_assignment(Formula f, const GapNumber& v) {
  Assignment a;
  for (int x : f->fv) a[x] = v;
  return a;
}

}  // namespace

// ------------------------------------------------------------ SatClass

std::optional<GapNumber> constant_value(Formula f, const Assignment& a) {
  std::optional<GapNumber> c;
  for (int v : f->fv) {
    auto it = a.find(v);
    if (it == a.end()) return std::nullopt;
    if (c && *c != it->second) return std::nullopt;
    c = it->second;
  }
  return c ? c : GapNumber{};
}

void SatClass::set(Formula f, const Assignment& a, bool v) {
  if (nonstandard_piece(f)) fail("internal", "ray members are valued through set_ray");
  if (!asn_check(f, a)) fail("assignment", "assignment does not cover " + to_sexpr(f, &universe_));
  table_[{f, restrict_assignment(a, f)}] = v;
}

void SatClass::set_ray(const RayKey& k, RayValue v, GapNumber hat_value) {
  rays_[RayValKey{k, k.hat ? hat_value : GapNumber{}}] = v;
}

std::optional<RayValue> SatClass::get_ray(const RayKey& k, GapNumber hat_value) const {
  auto it = rays_.find(RayValKey{k, k.hat ? hat_value : GapNumber{}});
  if (it == rays_.end()) return std::nullopt;
  return it->second;
}

std::optional<bool> SatClass::get(Formula f, const Assignment& a) const {
  if (nonstandard_piece(f)) {
    RayKey k = ray_key_of(f);
    GapNumber hv{};
    if (k.hat) {
      auto c = constant_value(f, a);
      if (!c) return std::nullopt;
      hv = *c;
    } else if (!f->fv.empty()) {
      return std::nullopt;
    }
    auto r = get_ray(k, hv);
    if (!r) return std::nullopt;
    return r->at(f->index.offset);
  }
  for (int v : f->fv)
    if (!a.count(v)) return std::nullopt;
  auto it = table_.find({f, restrict_assignment(a, f)});
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

// ------------------------------------------------------------- shapes

namespace {

using Shape = NodeShape;

}  // namespace

NodeShape node_shape(Formula f) {
  if (!is_piece(f)) return {f->kind, children(f), f->var, false};
  auto op = Operator::by_id(f->op);
  Shape s;
  switch (op->tmpl().node(f->pos).kind) {
    case TNodeKind::Not: s.kind = FK::Not; break;
    case TNodeKind::Or: s.kind = FK::Or; break;
    case TNodeKind::And: s.kind = FK::And; break;
    case TNodeKind::Exists: s.kind = FK::Exists; s.transparent = true; break;
    case TNodeKind::Forall: s.kind = FK::Forall; s.transparent = true; break;
    default: fail("internal", "leaf position has no shape");
  }
  s.kids = piece_children(f);
  return s;
}

bool combine_values(FK kind, const std::vector<bool>& v) {
  switch (kind) {
    case FK::Not: return !v[0];
    case FK::Or: return v[0] || v[1];
    case FK::And: return v[0] && v[1];
    default: return v[0];
  }
}

namespace {

Shape shape_of(Formula f) { return node_shape(f); }
bool combine(FK kind, const std::vector<bool>& v) { return combine_values(kind, v); }

std::string clause_of(FK k) {
  switch (k) {
    case FK::Eq: return "CS1";
    case FK::Or:
    case FK::And: return "CS2";
    case FK::Not: return "CS3";
    default: return "CS4";
  }
}

class Verifier {
 public:
  Verifier(const SatClass& s, const ClosedSet& c, bool stop) : s_(s), c_(c), stop_(stop) {
    for (const auto& [key, v] : s.table()) by_formula_[key.first].push_back(&key.second);
  }

  VerificationReport run() {
    for (Formula f : c_.explicit_elements()) {
      if (is_sentence(f) && !s_.get(f, {}))
        if (!add("missing", f, {}, "sentence has no value")) return rep_;
      for (Formula k : is_piece(f) ? piece_children(f) : children(f))
        if (!c_.contains(k)) {
          if (!add("closure", f, {}, "immediate subformula outside the domain: " + to_sexpr(k, &u())))
            return rep_;
        }
    }
    for (const auto& [key, v] : s_.table()) {
      if (!c_.contains(key.first)) continue;
      if (!check(key.first, key.second, v)) return rep_;
    }
    for (const auto& [k, m] : c_.rays())
      if (!check_ray(k, m)) return rep_;
    return rep_;
  }

 private:
  const SatClass& s_;
  const ClosedSet& c_;
  bool stop_;
  VerificationReport rep_;
  std::map<Formula, std::vector<const Assignment*>, FormulaLess> by_formula_;

  const GapUniverse& u() const { return s_.universe(); }

  bool add(const std::string& clause, Formula f, const Assignment& a, const std::string& detail) {
    rep_.add({clause, to_sexpr(f, &u()), assignment_to_json(a, &u()), detail});
    return !stop_;
  }

  std::optional<bool> child(Formula k, const Assignment& a, Formula parent, bool& go_on) {
    auto v = s_.get(k, a);
    if (!v) go_on = add("missing", parent, a, "no value for " + to_sexpr(k, &u()));
    return v;
  }

  bool check(Formula f, const Assignment& a, bool v) {
    Shape sh = shape_of(f);
    bool go_on = true;
    if (sh.kind == FK::Eq) {
      bool truth;
      try {
        truth = eval_term(f->s, a) == eval_term(f->t, a);
      } catch (const Error& e) {
        return add("CS1", f, a, std::string("term not evaluable: ") + e.what());
      }
      if (truth != v) return add("CS1", f, a, "atomic value disagrees with arithmetic");
      return true;
    }
    if ((sh.kind == FK::Exists || sh.kind == FK::Forall) && !sh.transparent)
      return check_quantifier(f, a, v);
    std::vector<bool> vals;
    for (Formula k : sh.kids) {
      auto cv = child(k, a, f, go_on);
      if (!cv) return go_on;
      vals.push_back(*cv);
    }
    if (combine(sh.kind, vals) != v)
      return add(clause_of(sh.kind), f, a, "value disagrees with the immediate subformulas");
    return true;
  }

  bool check_quantifier(Formula f, const Assignment& a, bool v) {
    Formula body = f->a;
    int x = f->var;
    bool ex = f->kind == FK::Exists;
    std::string clause = "CS4";
    if (!std::binary_search(body->fv.begin(), body->fv.end(), x)) {
      bool go_on = true;
      auto cv = child(body, a, f, go_on);
      if (!cv) return go_on;
      if (*cv != v) return add(clause, f, a, "vacuous quantifier disagrees with its body");
      return true;
    }
    std::set<GapNumber> cand;
    for (const auto& w : witness_range(u(), f, a)) cand.insert(w);
    auto it = by_formula_.find(body);
    if (it != by_formula_.end())
      for (const Assignment* b : it->second) {
        bool agree = true;
        for (int y : body->fv) {
          if (y == x) continue;
          auto ai = a.find(y);
          auto bi = b->find(y);
          if (ai == a.end() || bi == b->end() || ai->second != bi->second) {
            agree = false;
            break;
          }
        }
        if (agree && b->count(x)) cand.insert(b->at(x));
      }
    bool any_present = false;
    bool witness = false;  // an instance with value == ex
    for (const auto& c : cand) {
      Assignment b = a;
      b[x] = c;
      auto cv = s_.get(body, b);
      if (!cv) continue;
      any_present = true;
      if (*cv == ex) witness = true;
    }
    if (!any_present) return add("missing", f, a, "no instance of the body is valued");
    bool expected = ex ? witness : !witness;
    if (expected != v)
      return add(clause, f, a, ex ? "existential disagrees with its instances"
                                  : "universal disagrees with its instances");
    return true;
  }

  bool check_ray(const RayKey& k, std::int64_t m) {
    std::vector<std::pair<GapNumber, RayValue>> vals;
    if (k.hat) {
      for (const auto& [rk, rv] : s_.ray_table())
        if (rk.ray == k) vals.push_back({rk.value, rv});
    } else if (auto rv = s_.get_ray(k)) {
      vals.push_back({GapNumber{}, *rv});
    }
    Formula rep = ray_member(k, ray_rep(m));
    if (vals.empty()) return add("missing", rep, {}, "ray has no value");
    if (!k.hat && !k.base->fv.empty())
      return add("symbolic", rep, {}, "ray over a base with free variables");
    for (std::int64_t o : {ray_rep(m), ray_rep(m) - 1}) {
      Formula mem = ray_member(k, o);
      Shape sh = shape_of(mem);
      for (const auto& [hv, rv] : vals) {
        Assignment a = k.hat ? constant_assignment(mem, hv) : Assignment{};
        bool go_on = true;
        std::vector<bool> cvals;
        bool ok = true;
        for (Formula kid : sh.kids) {
          if (!c_.contains(kid)) {
            if (!add("closure", mem, a, "ray child outside the domain: " + to_sexpr(kid, &u()))) return false;
            ok = false;
            break;
          }
          auto cv = child(kid, a, mem, go_on);
          if (!cv) {
            if (!go_on) return false;
            ok = false;
            break;
          }
          cvals.push_back(*cv);
        }
        if (!ok) continue;
        if (combine(sh.kind, cvals) != rv.at(o))
          if (!add(clause_of(sh.kind), mem, a, "ray value disagrees with its template children at " +
                                                   u().format(mem->index)))
            return false;
      }
    }
    return true;
  }
};

bool comp_ok(const SatClass& s, const ClosedSet& c) { return Verifier(s, c, true).run().ok; }

}  // namespace

VerificationReport verify_comp(const SatClass& s, const ClosedSet* c) {
  return Verifier(s, c ? *c : s.domain(), false).run();
}

// --------------------------------------------------------- constraints

namespace {

// Sentences of d as (formula, is ray member, ray key, max) tuples.
struct SentenceRef {
  Formula f;
  bool ray = false;
};

std::vector<SentenceRef> sentences_of(const ClosedSet& d) {
  std::vector<SentenceRef> out;
  for (Formula f : d.explicit_elements())
    if (is_sentence(f)) out.push_back({f, false});
  for (const auto& [k, m] : d.rays()) {
    if (k.hat || !k.base->fv.empty()) continue;
    out.push_back({ray_member(k, ray_rep(m)), true});
    out.push_back({ray_member(k, ray_rep(m) - 1), true});
  }
  return out;
}

}  // namespace

std::vector<Instance> constraint_instances(const ConstraintTheory& th, const ClosedSet& d) {
  std::vector<Instance> out;
  if (!th.op || !th.cut) return out;
  const Operator& f = *th.op;
  for (const auto& r : sentences_of(d)) {
    LengthRoot lr;
    try {
      lr = f_length_root(f, r.f);
    } catch (const Error&) {
      continue;
    }
    if (!(std_num(0) < lr.length)) continue;
    bool below = th.cut->contains(lr.length);
    if (r.ray && !th.cut->gap_inside(lr.length.gap)) {
      // A ray reaches arbitrarily far down its gap: it must sit wholly below.
      RayKey k = ray_key_of(r.f);
      std::int64_t m = d.rays().at(k);
      if (m == kFullGap || !below)
        fail("straddle", "a ray straddles the threshold " + to_sexpr(r.f));
    }
    out.push_back({r.f, lr.root, lr.length, below});
  }
  return out;
}

namespace {

bool instance_holds(const SatClass& s, const ConstraintTheory& th, const Instance& in,
                    std::string& why) {
  auto v = s.truth(in.psi);
  if (!v) {
    why = "instance sentence has no value";
    return false;
  }
  bool expected;
  if (in.below || th.mode == AboveMode::IncorrectAbove) {
    auto r = s.truth(in.root);
    if (!r) {
      why = "root has no value";
      return false;
    }
    expected = in.below ? *r : !*r;
  } else {
    expected = th.op->q_monotone();
  }
  if (*v != expected) {
    why = in.below ? "F-correctness fails" : (th.mode == AboveMode::IncorrectAbove ? "F-incorrectness fails"
                                                                              : "F-triviality fails");
    return false;
  }
  return true;
}

bool preservation_holds(const SatClass& s, const ConstraintTheory& th, const ClosedSet& d,
                        VerificationReport* rep) {
  if (!th.base) return true;
  bool ok = true;
  for (const auto& [key, v] : th.base->table()) {
    if (!th.preserve.contains(key.first) || !d.contains(key.first)) continue;
    auto w = s.get(key.first, key.second);
    if (w && *w == v) continue;
    ok = false;
    if (!rep) return false;
    rep->add({"preservation", to_sexpr(key.first, &s.universe()),
              assignment_to_json(key.second, &s.universe()), "value differs from the base class"});
  }
  for (const auto& [rk, rv] : th.base->ray_table()) {
    auto it = d.rays().find(rk.ray);
    if (it == d.rays().end()) continue;
    if (!th.preserve.contains_ray(rk.ray, it->second)) continue;
    auto w = s.get_ray(rk.ray, rk.value);
    if (w && *w == rv) continue;
    ok = false;
    if (!rep) return false;
    rep->add({"preservation", ray_to_string(rk.ray, it->second, &s.universe()), nlohmann::json::object(),
              "ray value differs from the base class"});
  }
  return ok;
}

bool fixed_holds(const SatClass& s, const ConstraintTheory& th, VerificationReport* rep) {
  bool ok = true;
  for (const auto& [f, b] : th.fixed) {
    auto v = s.truth(f);
    if (v && *v == b) continue;
    ok = false;
    if (!rep) return false;
    rep->add({"fixed", to_sexpr(f, &s.universe()), nlohmann::json::object(),
              v ? "boundary literal violated" : "boundary literal has no value"});
  }
  return ok;
}

bool constraints_ok(const SatClass& s, const ConstraintTheory& th, const std::vector<Instance>& inst,
                    const ClosedSet& d) {
  std::string why;
  for (const auto& in : inst)
    if (!instance_holds(s, th, in, why)) return false;
  return preservation_holds(s, th, d, nullptr) && fixed_holds(s, th, nullptr);
}

}  // namespace

VerificationReport check_constraints(const SatClass& s, const ConstraintTheory& th, const ClosedSet& d) {
  VerificationReport rep;
  std::string why;
  for (const auto& in : constraint_instances(th, d))
    if (!instance_holds(s, th, in, why))
      rep.add({"instance", to_sexpr(in.psi, &s.universe()), nlohmann::json::object(),
               why + " (length " + s.universe().format(in.length) + ")"});
  preservation_holds(s, th, d, &rep);
  fixed_holds(s, th, &rep);
  return rep;
}

// ------------------------------------------------------- assignments

std::vector<std::pair<Formula, Assignment>> required_entries(
    const ClosedSet& d, const GapUniverse& u, const std::vector<std::pair<Formula, Assignment>>& seeds) {
  std::set<std::pair<Formula, Assignment>, EntryLess> seen;
  std::deque<std::pair<Formula, Assignment>> todo;
  auto push = [&](Formula f, const Assignment& a) {
    if (nonstandard_piece(f) || !d.contains(f)) return;
    auto key = std::make_pair(f, restrict_assignment(a, f));
    if (seen.insert(key).second) todo.push_back(key);
  };
  for (Formula f : d.explicit_elements())
    if (is_sentence(f)) push(f, {});
  for (const auto& [k, m] : d.rays()) {
    if (k.hat) continue;
    std::vector<Formula> kids;
    std::vector<std::pair<RayKey, std::int64_t>> kr;
    ray_subformulas(k, m, kids, kr);
    for (Formula c : kids) push(c, {});
  }
  for (const auto& [f, a] : seeds) push(f, a);
  while (!todo.empty()) {
    auto [f, a] = todo.front();
    todo.pop_front();
    if (f->kind == FK::Eq) continue;
    Shape sh = shape_of(f);
    if ((sh.kind == FK::Exists || sh.kind == FK::Forall) && !sh.transparent &&
        std::binary_search(f->a->fv.begin(), f->a->fv.end(), f->var)) {
      for (const auto& w : witness_range(u, f, a)) {
        Assignment b = a;
        b[f->var] = w;
        push(f->a, b);
      }
      continue;
    }
    for (Formula k : sh.kids) push(k, a);
  }
  return {seen.begin(), seen.end()};
}

// --------------------------------------------------------------- engine

namespace {

// Rank-ordered valuation shared by the builders. Preservation wins, atomic
// formulas follow arithmetic, compound formulas follow their immediate
// subformulas, and iterate rays follow the cluster rule.
class Engine {
 public:
  Engine(const GapUniverse& u, const ConstraintTheory& th, const ClosedSet& d)
      : u_(u), th_(th), d_(d) {}

  std::function<std::optional<RayValue>(const RayKey&)> ray_override;
  bool use_preserved_explicit = true;
  std::vector<bool> drop_preserved;  // indices into preserved_items()
  std::vector<bool> drop_fixed;

  bool value(Formula f, const Assignment& a0) {
    if (nonstandard_piece(f)) return ray_value(ray_key_of(f)).at(f->index.offset);
    Assignment a = restrict_assignment(a0, f);
    auto key = std::make_pair(f, a);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool v = compute(f, a);
    memo_[key] = v;
    return v;
  }

  RayValue ray_value(const RayKey& k) {
    auto it = ray_memo_.find(k);
    if (it != ray_memo_.end()) return it->second;
    RayValue v = compute_ray(k);
    ray_memo_[k] = v;
    return v;
  }

  SatClass assemble() {
    SatClass out(u_);
    out.domain() = d_;
    for (const auto& [f, a] : required_entries(d_, u_)) out.set(f, a, value(f, a));
    for (const auto& [k, m] : d_.rays())
      if (!k.hat) out.set_ray(k, ray_value(k));
    return out;
  }

 private:
  const GapUniverse& u_;
  const ConstraintTheory& th_;
  const ClosedSet& d_;
  std::map<std::pair<Formula, Assignment>, bool, EntryLess> memo_;
  std::map<RayKey, RayValue, RayKeyLess> ray_memo_;

  std::optional<bool> preserved(Formula f, const Assignment& a) {
    if (!th_.base || !use_preserved_explicit || !th_.preserve.contains(f)) return std::nullopt;
    auto& t = th_.base->table();
    auto it = t.find({f, a});
    if (it == t.end()) return std::nullopt;
    if (!drop_preserved.empty()) {
      auto idx = static_cast<std::size_t>(std::distance(t.begin(), it));
      if (drop_preserved[idx]) return std::nullopt;
    }
    return it->second;
  }

  std::optional<RayValue> preserved_ray(const RayKey& k) {
    if (!th_.base) return std::nullopt;
    auto it = d_.rays().find(k);
    if (it == d_.rays().end() || !th_.preserve.contains_ray(k, it->second)) return std::nullopt;
    auto& t = th_.base->ray_table();
    auto jt = t.find(RayValKey{k, {}});
    if (jt == t.end()) return std::nullopt;
    if (!drop_preserved.empty()) {
      auto idx = th_.base->table().size() + static_cast<std::size_t>(std::distance(t.begin(), jt));
      if (drop_preserved[idx]) return std::nullopt;
    }
    return jt->second;
  }

  std::optional<bool> fixed_for(Formula f) {
    for (std::size_t i = 0; i < th_.fixed.size(); ++i) {
      if (!drop_fixed.empty() && drop_fixed[i]) continue;
      if (th_.fixed[i].first == f) return th_.fixed[i].second;
    }
    return std::nullopt;
  }

  bool compute(Formula f, const Assignment& a) {
    if (auto p = preserved(f, a)) return *p;
    if (f->kind == FK::Eq) return eval_term(f->s, a) == eval_term(f->t, a);
    Shape sh = shape_of(f);
    if ((sh.kind == FK::Exists || sh.kind == FK::Forall) && !sh.transparent &&
        std::binary_search(f->a->fv.begin(), f->a->fv.end(), f->var)) {
      bool ex = sh.kind == FK::Exists;
      for (const auto& w : witness_range(u_, f, a)) {
        Assignment b = a;
        b[f->var] = w;
        if (value(f->a, b) == ex) return ex;
      }
      return !ex;
    }
    std::vector<bool> vals;
    for (Formula k : sh.kids) vals.push_back(value(k, a));
    return combine(sh.kind, vals);
  }

  // Literal on any member of the cluster (op, base, gap) translated to the root value.
  std::optional<bool> fixed_cluster_root(const RayKey& k, const std::vector<PosClass>& cls) {
    for (std::size_t i = 0; i < th_.fixed.size(); ++i) {
      if (!drop_fixed.empty() && drop_fixed[i]) continue;
      Formula g = th_.fixed[i].first;
      if (!nonstandard_piece(g) || is_hat_piece(g)) continue;
      if (g->op != k.op || g->a != k.base || g->index.gap != k.gap) continue;
      PosClass c = cls[static_cast<std::size_t>(g->pos)];
      if (c == PosClass::Q) return th_.fixed[i].second;
      if (c == PosClass::NotQ) return !th_.fixed[i].second;
    }
    return std::nullopt;
  }

  RayValue compute_ray(const RayKey& k) {
    if (k.hat) fail("unsupported", "template rays are valued by the regular builder");
    if (auto p = preserved_ray(k)) return *p;
    if (ray_override)
      if (auto o = ray_override(k)) return *o;
    auto op = Operator::by_id(k.op);
    if (!k.base->fv.empty()) fail("symbolic", "iterate over a base with free variables");
    if (th_.op && k.op == th_.op->id()) {
      bool pb = op->tmpl().has_p() ? value(k.base, {}) : false;
      auto cls = classify_positions_at(op->tmpl(), pb);
      std::optional<bool> r = fixed_cluster_root(k, cls);
      if (!r) r = root_rule(*op, k);
      switch (cls[static_cast<std::size_t>(k.pos)]) {
        case PosClass::Q: return RayValue::uniform(*r);
        case PosClass::NotQ: return RayValue::uniform(!*r);
        case PosClass::Top: return RayValue::uniform(true);
        case PosClass::Bot: return RayValue::uniform(false);
      }
    }
    if (op->tmpl().size() == 2 && op->tmpl().node(0).kind == TNodeKind::Not) {
      // Negation tower: parity of the offset decides.
      bool even = value(k.base, {});
      for (std::size_t i = 0; i < th_.fixed.size(); ++i) {
        if (!drop_fixed.empty() && drop_fixed[i]) continue;
        Formula g = th_.fixed[i].first;
        if (nonstandard_piece(g) && ray_key_of(g) == k) {
          bool at = th_.fixed[i].second;
          even = (g->index.offset % 2 == 0) ? at : !at;
        }
      }
      return {even, !even};
    }
    if (auto fx = fixed_for(ray_member(k, 0))) return RayValue::uniform(*fx);
    fail("unsupported", "no valuation rule for rays of operator '" + op->name() + "'");
  }

  bool root_rule(const Operator& f, const RayKey& k) {
    Formula m0 = ray_member(RayKey{k.op, k.base, 0, k.gap, false}, 0);
    LengthRoot lr = f_length_root(f, m0);
    bool below = !th_.cut || th_.cut->contains(lr.length);
    if (below) return value(lr.root, {});
    if (th_.mode == AboveMode::IncorrectAbove) return !value(lr.root, {});
    return f.q_monotone();
  }
};

std::vector<std::string> soft_items(const ConstraintTheory& th, const GapUniverse& u) {
  std::vector<std::string> out;
  if (th.base) {
    for (const auto& [key, v] : th.base->table())
      out.push_back("preserve " + to_sexpr(key.first, &u) + " " +
                    assignment_to_json(key.second, &u).dump() + " = " + (v ? "T" : "F"));
    for (const auto& [rk, rv] : th.base->ray_table())
      out.push_back("preserve " + ray_to_string(rk.ray, kFullGap, &u) + " = " + (rv.even ? "T" : "F") +
                    "/" + (rv.odd ? "T" : "F"));
  }
  for (const auto& [f, b] : th.fixed) out.push_back("fixed " + to_sexpr(f, &u) + " = " + (b ? "T" : "F"));
  return out;
}

}  // namespace

BuildResult extend_with_constraints(const ConstraintTheory& th, const ClosedSet& c, const GapUniverse& u) {
  ClosedSet d = cl(c, th.op.get());
  BuildResult res;
  auto attempt = [&](const std::vector<bool>& dp, const std::vector<bool>& df,
                     VerificationReport* rep) -> std::optional<SatClass> {
    ConstraintTheory t2 = th;
    if (!dp.empty() && th.base) {
      // Dropped preserved items vanish from the theory, not just from the engine.
      SatClass b2(th.base->universe());
      std::size_t i = 0;
      for (const auto& [key, v] : th.base->table())
        if (!dp[i++]) b2.mutable_table()[key] = v;
      for (const auto& [rk, rv] : th.base->ray_table())
        if (!dp[i++]) b2.mutable_ray_table()[rk] = rv;
      t2.base = b2;
    }
    if (!df.empty()) {
      t2.fixed.clear();
      for (std::size_t i = 0; i < th.fixed.size(); ++i)
        if (!df[i]) t2.fixed.push_back(th.fixed[i]);
    }
    Engine e(u, t2, d);
    SatClass s = e.assemble();
    VerificationReport r = verify_comp(s, &d);
    r.merge(check_constraints(s, t2, d));
    if (rep) *rep = r;
    if (!r.ok) return std::nullopt;
    return s;
  };
  auto full = attempt({}, {}, &res.report);
  if (full) {
    res.ok = true;
    res.cls = std::move(full);
    return res;
  }
  // Greedy deletion over preserved entries and boundary literals.
  std::size_t np = th.base ? th.base->table().size() + th.base->ray_table().size() : 0;
  std::size_t nf = th.fixed.size();
  std::vector<bool> dp(np, false), df(nf, false);
  if (np + nf <= 64) {
    for (std::size_t i = 0; i < np + nf; ++i) {
      if (i < np) dp[i] = true;
      else df[i - np] = true;
      if (attempt(dp, df, nullptr)) {
        if (i < np) dp[i] = false;
        else df[i - np] = false;
      }
    }
  } else {
    std::fill(dp.begin(), dp.end(), false);
  }
  auto names = soft_items(th, u);
  for (std::size_t i = 0; i < np; ++i)
    if (!dp[i]) res.core.push_back(names[i]);
  for (std::size_t i = 0; i < nf; ++i)
    if (!df[i]) res.core.push_back(names[np + i]);
  return res;
}

// --------------------------------------------------- unique pathological

SatClass build_unique_pathological(const Operator& f, const std::vector<int>& j0, const std::vector<int>& j1,
                                   const GapUniverse& u, std::int64_t standard_upto) {
  if (!f.local()) fail("nonlocal", "the pathological class needs a local operator");
  std::set<int> s0(j0.begin(), j0.end()), s1(j1.begin(), j1.end());
  for (int g : s0)
    if (s1.count(g)) fail("overlap", "gap " + u.label(g) + " is in both J0 and J1");
  for (int g : s0) {
    if (g == 0) fail("standard", "the standard segment cannot be a pathological gap");
    if (!u.has_gap(g)) fail("unknown_gap", "gap outside the universe");
  }
  for (int g : s1) {
    if (g == 0) fail("standard", "the standard segment cannot be a pathological gap");
    if (!u.has_gap(g)) fail("unknown_gap", "gap outside the universe");
  }
  ClosedSet seed;
  for (int g : s0) seed.insert_ray(RayKey{f.id(), f.theta(), 0, g, false}, kFullGap);
  for (int g : s1) seed.insert_ray(RayKey{f.id(), f.theta(), 0, g, false}, kFullGap);
  for (const auto& [k, m] : seed.rays()) {
    (void)m;
    seed.add_generator(ray_member(k, 0));
  }
  for (std::int64_t n = 1; n <= standard_upto; ++n) {
    Formula g = iterate(f, n);
    seed.insert(g);
    seed.add_generator(g);
  }
  ClosedSet d = cl(seed, &f);
  auto cls = classify_positions(f);
  ConstraintTheory none;
  Engine e(u, none, d);
  e.ray_override = [&](const RayKey& k) -> std::optional<RayValue> {
    if (k.op != f.id()) return std::nullopt;
    switch (cls[static_cast<std::size_t>(k.pos)]) {
      case PosClass::Q: return RayValue::uniform(s0.count(k.gap) > 0);
      case PosClass::NotQ: return RayValue::uniform(s1.count(k.gap) > 0);
      case PosClass::Top: return RayValue::uniform(true);
      case PosClass::Bot: return RayValue::uniform(false);
    }
    return std::nullopt;
  };
  return e.assemble();
}

// ---------------------------------------------------- break correctness

namespace {

struct Valued {
  Formula f;
  GapNumber length;
  Formula root;
  bool value;
};

std::vector<Valued> valued_lengths(const SatClass& s, const Operator& f) {
  std::vector<Valued> out;
  for (const auto& r : sentences_of(s.domain())) {
    auto v = s.truth(r.f);
    if (!v) continue;
    try {
      LengthRoot lr = f_length_root(f, r.f);
      out.push_back({r.f, lr.length, lr.root, *v});
    } catch (const Error&) {
    }
  }
  return out;
}

// Whether hi - lo < d0; nullopt when the gap model cannot decide.
std::optional<bool> diff_below(const GapNumber& hi, const GapNumber& lo, const GapNumber& d0) {
  if (hi.gap == lo.gap) {
    std::int64_t diff = hi.offset - lo.offset;
    if (!d0.standard()) return true;
    return diff < d0.offset;
  }
  // Different gaps: the difference lives in hi's gap.
  if (hi.gap < d0.gap) return true;
  if (hi.gap > d0.gap) return false;
  if (lo.standard()) return hi.offset - lo.offset < d0.offset;
  return std::nullopt;
}

}  // namespace

VerificationReport check_correct_below(const SatClass& s, const Operator& f, const GapNumber& d0) {
  VerificationReport rep;
  auto vs = valued_lengths(s, f);
  for (const auto& a : vs)
    for (const auto& b : vs) {
      if (a.root != b.root || !(b.length < a.length)) continue;
      auto below = diff_below(a.length, b.length, d0);
      if (!below || !*below) continue;
      if (a.value != b.value)
        rep.add({"F-correctness", to_sexpr(a.f, &s.universe()), nlohmann::json::object(),
                 "differs from " + to_sexpr(b.f, &s.universe()) + " with length difference below " +
                     s.universe().format(d0)});
    }
  return rep;
}

namespace {

int max_piece_gap(Formula f) {
  if (is_piece(f)) return std::max(f->index.gap, max_piece_gap(f->a));
  int g = 0;
  for (Formula c : children(f)) g = std::max(g, max_piece_gap(c));
  return g;
}

}  // namespace

BreakResult extend_break_correctness(const Operator& f, const SatClass& s, const ClosedSet& x,
                                     Formula phi_tilde, const CutSpec& d, const CutSpec& below) {
  const GapUniverse& u = s.universe();
  std::vector<int> gaps;
  for (int g = 1; g <= u.size(); ++g) {
    auto above_i = below.gap_inside(g);
    auto under_d = d.gap_inside(g);
    if (above_i.has_value() && !*above_i && under_d.has_value() && *under_d) gaps.push_back(g);
  }
  if (gaps.size() < 2)
    fail("no_admissible_gaps", "need two nonstandard gaps strictly between the cut and d");
  int ga = gaps[0], gb = gaps[1];
  for (Formula e : x.explicit_elements())
    if (max_piece_gap(e) >= ga) fail("complexity", "X reaches the gap of the deep negation");
  for (const auto& [k, m] : x.rays()) {
    (void)m;
    if (k.gap >= ga) fail("complexity", "X reaches the gap of the deep negation");
  }
  if (max_piece_gap(phi_tilde) >= ga) fail("complexity", "the new formula reaches the gap of the deep negation");
  if (!is_sentence(phi_tilde)) fail("sentence", "the new formula must be a sentence");

  auto neg = Operator::negation();
  Formula zero_eq = f_eq(t_zero(), t_zero());
  // An even tower is true; q-monotone operators make F(d1, theta) true, so the
  // witness then takes the odd tower.
  GapNumber d0{ga, 0}, d1{gb, 0};
  Formula theta = mk_piece(*neg, 0, GapNumber{ga, f.q_monotone() ? 1 : 0}, zero_eq);
  Formula witness = mk_piece(f, 0, d1, theta);

  ClosedSet seed = x;
  seed.insert(witness);
  seed.add_generator(witness);
  ClosedSet y = cl(seed, &f);
  ClosedSet yd = d_closure(y, d0, f);
  ClosedSet c = y.united(yd);
  c.insert(phi_tilde);
  ClosedSet dom = cl(c, &f);

  ConstraintTheory th;
  th.base = s;
  th.preserve = x;
  th.op = Operator::by_id(f.id());
  th.cut = CutSpec::below(d0);
  Engine e(u, th, dom);
  bool theta_val = !f.q_monotone();
  e.ray_override = [&](const RayKey& k) -> std::optional<RayValue> {
    if (k.op == neg->id() && k.base == zero_eq) return RayValue{true, false};
    if (k.op == f.id() && k.base == theta && k.gap == gb) {
      auto cls = classify_positions_at(f.tmpl(), theta_val);
      bool r = f.q_monotone();
      switch (cls[static_cast<std::size_t>(k.pos)]) {
        case PosClass::Q: return RayValue::uniform(r);
        case PosClass::NotQ: return RayValue::uniform(!r);
        case PosClass::Top: return RayValue::uniform(true);
        case PosClass::Bot: return RayValue::uniform(false);
      }
    }
    return std::nullopt;
  };
  SatClass out = e.assemble();
  BreakResult br{out, d0, d1, theta, witness, {}};
  br.report = verify_comp(out);
  br.report.merge(check_correct_below(out, f, d0));
  ConstraintTheory pres;
  pres.base = s;
  pres.preserve = x;
  VerificationReport pr = check_constraints(out, pres, dom);
  br.report.merge(pr);
  auto tv = out.truth(theta), wv = out.truth(witness);
  if (!tv || !wv || *tv == *wv)
    br.report.add({"break", to_sexpr(witness, &u), nlohmann::json::object(),
                   "the witness does not separate T(theta) from T(F(d1, theta))"});
  return br;
}

// ------------------------------------------------------ double negation

BuildResult extend_double_negation(const ConstraintTheory& th, const ClosedSet& c, const GapUniverse& u) {
  if (!th.op || !th.op->is_double_negation()) fail("not_double_negation", "operator must be ¬¬");
  if (!th.cut) fail("no_bound", "a bound d is required");
  ConstraintTheory t2 = th;
  t2.mode = AboveMode::IncorrectAbove;
  BuildResult r = extend_with_constraints(t2, c, u);
  if (r.ok) {
    VerificationReport comp = check_complementarity(*r.cls);
    if (!comp.ok) {
      r.ok = false;
      r.report.merge(comp);
    }
  }
  return r;
}

VerificationReport check_complementarity(const SatClass& s) {
  VerificationReport rep;
  const auto& u = s.universe();
  for (const auto& [key, v] : s.table()) {
    Formula f = key.first;
    if (f->kind != FK::Not) continue;
    auto w = s.get(f->a, key.second);
    if (w && *w == v)
      rep.add({"complementarity", to_sexpr(f, &u), assignment_to_json(key.second, &u),
               "formula and its negation agree"});
  }
  for (const auto& [rk, rv] : s.ray_table()) {
    if (rk.ray.hat || rk.ray.pos != 0) continue;
    RayKey nk = rk.ray;
    nk.base = f_not(rk.ray.base);
    auto w = s.get_ray(nk);
    if (!w) continue;
    if (w->even == rv.even || w->odd == rv.odd)
      rep.add({"complementarity", ray_to_string(rk.ray, kFullGap, &u), nlohmann::json::object(),
               "iterates over a formula and its negation agree"});
  }
  return rep;
}

// ----------------------------------------------------------------- oracle

OracleOptions oracle_options_from_env() {
  OracleOptions o;
  if (const char* e = std::getenv("SATLAB_ORACLE_BOUND")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(e, &end, 10);
    if (end && *end == '\0' && v > 0) o.max_candidates = v;
  }
  return o;
}

OracleResult brute_force_oracle(const ClosedSet& d, const ConstraintTheory& th, const GapUniverse& u,
                                const OracleOptions& opt) {
  auto entries = required_entries(d, u);
  std::vector<RayKey> rays;
  for (const auto& [k, m] : d.rays())
    if (!k.hat) rays.push_back(k);
  std::size_t per_ray = opt.parity_rays ? 2 : 1;
  std::size_t bits = entries.size() + rays.size() * per_ray;
  if (bits >= 63 || (1ull << bits) > opt.max_candidates)
    fail("space_too_large", "candidate space 2^" + std::to_string(bits) + " exceeds the oracle bound");
  auto inst = constraint_instances(th, d);
  SatClass s(u);
  s.domain() = d;
  for (const auto& [f, a] : entries) s.set(f, a, false);
  for (const auto& k : rays) s.set_ray(k, RayValue{});
  std::vector<bool*> slots;
  for (auto& [key, v] : s.mutable_table()) slots.push_back(&v);
  std::vector<RayValue*> rslots;
  for (auto& [key, v] : s.mutable_ray_table()) rslots.push_back(&v);

  OracleResult res;
  std::uint64_t total = 1ull << bits;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::size_t b = 0;
    for (bool* p : slots) *p = (mask >> b++) & 1u;
    for (RayValue* r : rslots) {
      r->even = (mask >> b++) & 1u;
      r->odd = opt.parity_rays ? ((mask >> b++) & 1u) : r->even;
    }
    ++res.candidates;
    if (!comp_ok(s, d)) continue;
    if (!constraints_ok(s, th, inst, d)) continue;
    ++res.solutions;
    if (res.kept.size() < opt.keep) res.kept.push_back(s);
  }
  return res;
}

bool same_values(const SatClass& a, const SatClass& b) {
  return a.table() == b.table() && a.ray_table() == b.ray_table();
}

// ----------------------------------------------------- correctness sets

std::string correctness_name(const Operator& f) {
  std::string t = f.tmpl().to_string();
  if (t == "(or q p)") return "IDC";
  if (t == "(and q p)") return "ICC";
  if (f.is_double_negation()) return "DNC";
  if (t == "(or q q)") return "IDC-bin";
  if (t == "(and q q)") return "ICC-bin";
  const auto& n = f.tmpl().node(0);
  if ((n.kind == TNodeKind::Exists || n.kind == TNodeKind::Forall) && f.tmpl().size() == 2) return "QC";
  return "F-correct";
}

CorrectnessReport correctness_sets(const SatClass& s, const Operator& f) {
  const GapUniverse& u = s.universe();
  CorrectnessReport rep;
  CorrectnessSet cs;
  cs.name = correctness_name(f);
  if (f.local()) cs.name += "^theta";
  // x -> all instances agree so far?
  std::map<std::int64_t, bool> std_status;
  std::map<int, bool> gap_status;
  auto note = [](auto& m, auto key, bool ok) {
    auto [it, fresh] = m.emplace(key, ok);
    if (!fresh) it->second = it->second && ok;
  };
  for (const auto& v : valued_lengths(s, f)) {
    if (!(std_num(0) < v.length)) continue;
    auto rv = s.truth(v.root);
    if (!rv) continue;
    bool ok = *rv == v.value;
    if (v.length.standard()) note(std_status, v.length.offset, ok);
    else note(gap_status, v.length.gap, ok);
  }
  for (const auto& [x, ok] : std_status) cs.standard[x] = ok ? "in" : "out";
  for (int g = 1; g <= u.size(); ++g) {
    auto it = gap_status.find(g);
    cs.gaps[u.label(g)] = it == gap_status.end() ? "vacuous" : (it->second ? "in" : "out");
  }
  std::int64_t first_bad = -1;
  for (const auto& [x, ok] : std_status)
    if (!ok) {
      first_bad = x;
      break;
    }
  if (first_bad >= 0) {
    cs.initial_segment = "[0," + std::to_string(first_bad) + ")";
  } else {
    std::string seg = "standard";
    for (int g = 1; g <= u.size(); ++g) {
      const std::string& st = cs.gaps[u.label(g)];
      if (st != "in") break;
      seg = "through " + u.label(g);
    }
    cs.initial_segment = seg;
  }
  rep.sets.push_back(cs);

  // Disjunctive correctness over left-nested disjunction chains.
  CorrectnessSet dc;
  dc.name = "DC";
  std::map<std::int64_t, bool> dc_status;
  for (const auto& [key, v] : s.table()) {
    Formula g = key.first;
    if (!key.second.empty() || g->kind != FK::Or) continue;
    std::vector<Formula> parts;
    Formula cur = g;
    while (cur->kind == FK::Or) {
      parts.push_back(cur->b);
      cur = cur->a;
    }
    parts.push_back(cur);
    bool any = false, known = true;
    for (Formula p : parts) {
      auto pv = s.truth(p);
      if (!pv) {
        known = false;
        break;
      }
      any = any || *pv;
    }
    if (!known) continue;
    note(dc_status, static_cast<std::int64_t>(parts.size()) - 1, any == v);
  }
  for (const auto& [x, ok] : dc_status) dc.standard[x] = ok ? "in" : "out";
  if (f.tmpl().to_string() == "(or q p)")
    for (const auto& [label, st] : cs.gaps) dc.gaps[label] = st;
  std::int64_t bad = -1;
  for (const auto& [x, ok] : dc_status)
    if (!ok) {
      bad = x;
      break;
    }
  dc.initial_segment = bad >= 0 ? "[0," + std::to_string(bad) + ")" : "standard";
  rep.sets.push_back(dc);
  return rep;
}

SatClass semantic_class(const std::vector<Formula>& sentences, const GapUniverse& u) {
  ClosedSet d = cl(sentences);
  SatClass s(u);
  s.domain() = d;
  for (const auto& [f, a] : required_entries(d, u)) s.set(f, a, eval_bounded(u, f, a));
  return s;
}

// ------------------------------------------------------------------ JSON

nlohmann::json assignment_to_json(const Assignment& a, const GapUniverse* u) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [v, x] : a)
    j[var_name(v)] = u ? gap_to_json(x, *u) : nlohmann::json{{"gap", x.gap}, {"offset", x.offset}};
  return j;
}

Assignment assignment_from_json(const nlohmann::json& j, const GapUniverse& u) {
  Assignment a;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k.size() < 2 || k[0] != 'v') fail("json", "bad variable name '" + k + "'");
    a[std::stoi(k.substr(1))] = gap_from_json(it.value(), u);
  }
  return a;
}

nlohmann::json to_json(const SatClass& s) {
  const GapUniverse& u = s.universe();
  nlohmann::json j;
  j["universe"] = universe_to_json(u);
  j["domain"] = to_json(s.domain(), &u);
  j["explicit"] = nlohmann::json::array();
  for (const auto& [key, v] : s.table())
    j["explicit"].push_back({to_sexpr(key.first, &u), assignment_to_json(key.second, &u), v});
  j["rays"] = nlohmann::json::array();
  for (const auto& [rk, rv] : s.ray_table()) {
    const auto& e = catalog_get(rk.ray.op);
    nlohmann::json r;
    r["op"] = e.name;
    r["pos"] = e.paths[static_cast<std::size_t>(rk.ray.pos)];
    r["gap"] = u.label(rk.ray.gap);
    r["base"] = to_sexpr(rk.ray.base, &u);
    r["hat"] = rk.ray.hat;
    if (rk.ray.hat) r["value"] = gap_to_json(rk.value, u);
    r["even"] = rv.even;
    r["odd"] = rv.odd;
    j["rays"].push_back(r);
  }
  return j;
}

SatClass satclass_from_json(const nlohmann::json& j, const GapUniverse& u) {
  SatClass s(u);
  try {
    if (j.contains("domain")) s.domain() = closed_set_from_json(j.at("domain"), &u);
    for (const auto& e : j.value("explicit", nlohmann::json::array())) {
      Formula f = parse_formula(e.at(0).get<std::string>(), &u);
      s.set(f, assignment_from_json(e.at(1), u), e.at(2).get<bool>());
    }
    for (const auto& r : j.value("rays", nlohmann::json::array())) {
      RayKey k;
      auto op = catalog_find(r.at("op").get<std::string>());
      if (!op) fail("unknown_op", "unknown operator in ray");
      k.op = *op;
      k.pos = catalog_find_path(k.op, r.at("pos").get<std::string>());
      k.gap = u.gap_index(r.at("gap").get<std::string>());
      k.base = parse_formula(r.at("base").get<std::string>(), &u);
      k.hat = r.value("hat", false);
      GapNumber hv{};
      if (k.hat) hv = gap_from_json(r.at("value"), u);
      RayValue v;
      v.even = r.at("even").get<bool>();
      v.odd = r.at("odd").get<bool>();
      s.set_ray(k, v, hv);
    }
  } catch (const nlohmann::json::exception& e) {
    fail("json", std::string("malformed satisfaction class: ") + e.what());
  }
  return s;
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["ok"] = r.ok;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back(
        {{"clause", v.clause}, {"formula", v.formula}, {"assignment", v.assignment}, {"detail", v.detail}});
  return j;
}

nlohmann::json to_json(const CorrectnessReport& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : r.sets) {
    nlohmann::json e;
    e["name"] = s.name;
    nlohmann::json st = nlohmann::json::object();
    for (const auto& [x, v] : s.standard) st[std::to_string(x)] = v;
    e["standard"] = st;
    e["gaps"] = s.gaps;
    e["initial_segment"] = s.initial_segment;
    j.push_back(e);
  }
  return j;
}

}  // namespace satlab

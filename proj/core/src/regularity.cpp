#include "satlab/regularity.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

#include "satlab/error.hpp"

namespace satlab {

namespace {

bool mentions_bound(Term t, const std::map<int, int>& env) {
  for (int v : t->vars)
    if (env.count(v)) return true;
  return false;
}

int hat_var_floor(Formula f) {
  if (is_piece(f)) return max_var(structural_template(f->a).tmpl) + 1;
  int m = 0;
  for (Formula c : children(f)) m = std::max(m, hat_var_floor(c));
  return m;
}

class Templater {
 public:
  explicit Templater(int start) : next_(start) {}
  StructuralTemplate out;

  Formula run(Formula f) {
    switch (f->kind) {
      case FK::Eq: {
        Term s = term(f->s);
        Term t = term(f->t);
        return f_eq(s, t);
      }
      case FK::Not: return f_not(run(f->a));
      case FK::Or: {
        Formula a = run(f->a);
        return f_or(a, run(f->b));
      }
      case FK::And: {
        Formula a = run(f->a);
        return f_and(a, run(f->b));
      }
      case FK::Exists:
      case FK::Forall: {
        int nv = next_++;
        out.bound.push_back({f->var, nv});
        auto saved = env_;
        env_[f->var] = nv;
        Formula body = run(f->a);
        env_ = saved;
        return f->kind == FK::Exists ? f_exists(nv, body) : f_forall(nv, body);
      }
      case FK::Piece: {
        auto op = Operator::by_id(f->op);
        Formula base = is_hat_piece(f) ? f->a : structural_template(f->a).tmpl;
        return mk_piece(*op, f->pos, f->index, base, true);
      }
    }
    fail("internal", "unknown formula kind");
  }

 private:
  int next_;
  std::map<int, int> env_;

  Term term(Term t) {
    if (!mentions_bound(t, env_)) {
      int nv = next_++;
      out.gamma[nv] = t;
      return t_var(nv);
    }
    switch (t->kind) {
      case TK::Var: return t_var(env_.at(t->var));
      case TK::Plus: {
        Term a = term(t->a);
        return t_plus(a, term(t->b));
      }
      case TK::Times: {
        Term a = term(t->a);
        return t_times(a, term(t->b));
      }
      default: fail("internal", "constant mentions a bound variable");
    }
  }
};

struct Cache {
  std::mutex mu;
  std::unordered_map<Formula, std::unique_ptr<StructuralTemplate>> map;
};
Cache& cache() {
  static Cache c;
  return c;
}

}  // namespace

const StructuralTemplate& structural_template(Formula f) {
  {
    std::lock_guard<std::mutex> lock(cache().mu);
    auto it = cache().map.find(f);
    if (it != cache().map.end()) return *it->second;
  }
  int start = f->has_piece ? hat_var_floor(f) : 0;
  Templater t(start);
  Formula r = t.run(f);
  t.out.tmpl = r;
  std::lock_guard<std::mutex> lock(cache().mu);
  auto [it, fresh] = cache().map.emplace(f, std::make_unique<StructuralTemplate>(std::move(t.out)));
  return *it->second;
}

bool structurally_similar(Formula a, Formula b) {
  return structural_template(a).tmpl == structural_template(b).tmpl;
}

namespace {

void piece_constants(Formula f, std::vector<Formula>& out) {
  if (is_piece(f)) {
    out.push_back(f);
    return;
  }
  for (Formula c : children(f)) piece_constants(c, out);
}

}  // namespace

Assignment hat_assignment(Formula f, const Assignment& a) {
  const StructuralTemplate& st = structural_template(f);
  Assignment out;
  for (const auto& [v, t] : st.gamma) out[v] = eval_term(t, a);
  std::vector<Formula> pieces;
  piece_constants(f, pieces);
  for (Formula p : pieces) {
    if (is_hat_piece(p)) {
      // Already a template: its own variables carry the (constant) values.
      auto c = constant_value(p, a);
      if (!c) fail("nonconstant", "template piece needs a constant assignment");
      for (int v : p->fv) out[v] = *c;
      continue;
    }
    Assignment inner = hat_assignment(p->a, restrict_assignment(a, p->a));
    std::optional<GapNumber> c;
    for (const auto& [v, x] : inner) {
      if (c && *c != x)
        fail("nonconstant", "base of a symbolic node has a non-constant template assignment");
      c = x;
    }
    Formula hb = structural_template(p->a).tmpl;
    for (int v : hb->fv) out[v] = c.value_or(GapNumber{});
  }
  return restrict_assignment(out, st.tmpl);
}

VerificationReport is_regular(const SatClass& s) {
  VerificationReport rep;
  const GapUniverse& u = s.universe();
  for (const auto& [key, v] : s.table()) {
    Formula f = key.first;
    Formula h;
    Assignment ha;
    try {
      h = structural_template(f).tmpl;
      ha = hat_assignment(f, key.second);
    } catch (const Error& e) {
      rep.add({"regularity", to_sexpr(f, &u), assignment_to_json(key.second, &u), e.what()});
      continue;
    }
    auto w = s.get(h, ha);
    if (!w) {
      rep.add({"template-missing", to_sexpr(f, &u), assignment_to_json(key.second, &u),
               "no value for template " + to_sexpr(h, &u)});
    } else if (*w != v) {
      rep.add({"regularity", to_sexpr(f, &u), assignment_to_json(key.second, &u),
               "template " + to_sexpr(h, &u) + " has the opposite value"});
    }
  }
  for (const auto& [rk, rv] : s.ray_table()) {
    if (rk.ray.hat) continue;
    RayKey hk = rk.ray;
    hk.hat = true;
    Formula rep_f = ray_member(rk.ray, 0);
    GapNumber c{};
    try {
      hk.base = structural_template(rk.ray.base).tmpl;
      Assignment ha = hat_assignment(rk.ray.base, {});
      if (!ha.empty()) c = ha.begin()->second;
      for (const auto& [v, x] : ha)
        if (x != c) fail("nonconstant", "base template assignment is not constant");
    } catch (const Error& e) {
      rep.add({"regularity", to_sexpr(rep_f, &u), nlohmann::json::object(), e.what()});
      continue;
    }
    auto w = s.get_ray(hk, c);
    if (!w) {
      rep.add({"template-missing", to_sexpr(rep_f, &u), nlohmann::json::object(),
               "no value for the template ray " + ray_to_string(hk, kFullGap, &u)});
    } else if (!(*w == rv)) {
      rep.add({"regularity", to_sexpr(rep_f, &u), nlohmann::json::object(),
               "template ray " + ray_to_string(hk, kFullGap, &u) + " disagrees"});
    }
  }
  return rep;
}

// -------------------------------------------------------- X-satisfaction

namespace {

constexpr std::int64_t kMaxUnfold = 64;

Formula residual(const Operator& f, Formula g, const GapNumber& x, Formula a_lit) {
  if (is_piece(g)) {
    if (g->op != f.id() || g->index.gap != x.gap)
      fail("nonstandard", "residual formula keeps a symbolic node outside the gap of x");
    if (g->index < x) fail("not_intermediate", "symbolic node below x");
    if (g->pos == 0 && g->index == x) return a_lit;
    if (g->index.offset - x.offset > kMaxUnfold)
      fail("nonstandard", "residual complexity beyond the unfolding limit");
    Formula q = residual(f, mk_piece(f, 0, step(g->index, -1), g->a, is_hat_piece(g)), x, a_lit);
    return f.tmpl().instantiate(g->pos, g->a, q);
  }
  switch (g->kind) {
    case FK::Eq: return g;
    case FK::Not: return f_not(residual(f, g->a, x, a_lit));
    case FK::Or: return f_or(residual(f, g->a, x, a_lit), residual(f, g->b, x, a_lit));
    case FK::And: return f_and(residual(f, g->a, x, a_lit), residual(f, g->b, x, a_lit));
    case FK::Exists: return f_exists(g->var, residual(f, g->a, x, a_lit));
    case FK::Forall: return f_forall(g->var, residual(f, g->a, x, a_lit));
    default: break;
  }
  fail("internal", "unknown formula kind");
}

bool in_x(const GapSet& x_gaps, const GapNumber& x) { return x_gaps.count(x.gap) > 0; }

}  // namespace

bool x_satisfies(const Operator& f, Formula phi, const Assignment& a, const GapSet& x_gaps,
                 const GapNumber& x, const GapUniverse& u) {
  Formula lit = in_x(x_gaps, x) ? f_eq(t_zero(), t_zero()) : f_eq(t_zero(), t_one());
  Formula r = residual(f, phi, x, lit);
  if (r->has_piece) fail("nonstandard", "residual formula is still symbolic");
  return eval_bounded(u, r, a);
}

// ------------------------------------------------------- regular builder

namespace {

bool closed_equal_terms(Formula atom) {
  if (atom->kind != FK::Eq || !atom->s->vars.empty() || !atom->t->vars.empty()) return false;
  return eval_term(atom->s, {}) == eval_term(atom->t, {});
}

class RegularValuer {
 public:
  RegularValuer(const Operator& f, const GapSet& x, const GapUniverse& u) : f_(f), x_(x), u_(u) {}

  bool value(Formula g, const Assignment& a) {
    if (is_piece(g) && !g->index.standard()) {
      // The node at position pos unfolds once onto the root one step below.
      GapNumber at = g->pos == 0 ? g->index : step(g->index, -1);
      Assignment ra = restrict_assignment(a, g);
      bool v = x_satisfies(f_, g, ra, x_, at, u_);
      bool w = x_satisfies(f_, g, ra, x_, step(at, -1), u_);
      if (v != w) fail("internal", "X-satisfaction depends on the choice of x");
      return v;
    }
    if (!g->has_piece) return eval_bounded(u_, g, a);
    NodeShape sh = node_shape(g);
    if ((sh.kind == FK::Exists || sh.kind == FK::Forall) && !sh.transparent &&
        std::binary_search(g->a->fv.begin(), g->a->fv.end(), g->var)) {
      bool ex = sh.kind == FK::Exists;
      for (const auto& w : witness_range(u_, g, a)) {
        Assignment b = a;
        b[g->var] = w;
        if (value(g->a, b) == ex) return ex;
      }
      return !ex;
    }
    std::vector<bool> vals;
    for (Formula k : sh.kids) vals.push_back(value(k, restrict_assignment(a, k)));
    return combine_values(sh.kind, vals);
  }

 private:
  const Operator& f_;
  const GapSet& x_;
  const GapUniverse& u_;
};

}  // namespace

RegularResult build_regular_class(const Operator& f, const GapSet& x_gaps, const std::vector<Formula>& fg,
                                  const SatClass* base, const GapUniverse& u) {
  if (!f.local()) fail("nonlocal", "the regular builder needs a local operator");
  Formula theta = f.theta();
  Formula atom = theta->kind == FK::Not ? theta->a : theta;
  if (!closed_equal_terms(atom))
    fail("invalid_theta", "base must be a true closed equation or the negation of one");
  for (int g : x_gaps)
    if (g < 1 || g > u.size()) fail("invalid_gaps", "X must be a set of nonstandard gaps");
  // Standard iterates are forced to the base value.
  GapSet xs = x_gaps;
  if (theta_value(theta)) xs.insert(0);

  ClosedSet d0 = cl(fg, &f);
  ClosedSet seed = d0;
  std::vector<std::pair<Formula, Assignment>> seeds;
  for (const auto& [key, a] : required_entries(d0, u)) {
    (void)a;
    const auto& st = structural_template(key);
    seed.insert(st.tmpl);
    seeds.push_back({st.tmpl, hat_assignment(key, a)});
  }
  std::vector<GapNumber> hat_values;
  for (const auto& [k, m] : d0.rays()) {
    if (k.hat) continue;
    RayKey hk = k;
    hk.hat = true;
    hk.base = structural_template(k.base).tmpl;
    seed.insert_ray(hk, m);
    Assignment ha = hat_assignment(k.base, {});
    GapNumber c = ha.empty() ? GapNumber{} : ha.begin()->second;
    if (std::find(hat_values.begin(), hat_values.end(), c) == hat_values.end()) hat_values.push_back(c);
  }
  ClosedSet d = cl(seed, &f);
  for (const auto& [k, m] : d.rays()) {
    (void)m;
    if (!k.hat) continue;
    for (const auto& c : hat_values) {
      Assignment ca;
      for (int v : k.base->fv) ca[v] = c;
      seeds.push_back({k.base, ca});
    }
  }

  RegularValuer val(f, xs, u);
  SatClass out(u);
  out.domain() = d;
  for (const auto& [g, a] : required_entries(d, u, seeds)) {
    bool v = val.value(g, a);
    if (base) {
      auto b = base->get(g, a);
      if (b && *b != v)
        fail("preservation", "base class disagrees on " + to_sexpr(g, &u) + " " +
                                 assignment_to_json(a, &u).dump());
    }
    out.set(g, a, v);
  }
  for (const auto& [k, m] : d.rays()) {
    if (!k.hat) {
      bool v = val.value(ray_member(k, ray_rep(m)), {});
      if (base)
        if (auto b = base->get_ray(k); b && !(*b == RayValue::uniform(v)))
          fail("preservation", "base class disagrees on " + ray_to_string(k, m, &u));
      out.set_ray(k, RayValue::uniform(v));
      continue;
    }
    for (const auto& c : hat_values) {
      Formula mem = ray_member(k, ray_rep(m));
      Assignment ca;
      for (int v : mem->fv) ca[v] = c;
      out.set_ray(k, RayValue::uniform(val.value(mem, ca)), c);
    }
  }
  RegularResult r{out, verify_comp(out)};
  r.report.merge(is_regular(out));
  return r;
}

}  // namespace satlab

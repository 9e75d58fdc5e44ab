#include "satlab/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <set>
#include <unordered_set>

#include "satlab/error.hpp"

namespace satlab {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::vector<int> merge_sorted(const std::vector<int>& x, const std::vector<int>& y) {
  std::vector<int> out;
  out.reserve(x.size() + y.size());
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r < a ? UINT64_MAX : r;
}

struct TermHash {
  std::size_t operator()(const TermNode* n) const { return n->hash; }
};
struct TermEq {
  bool operator()(const TermNode* x, const TermNode* y) const {
    return x->kind == y->kind && x->var == y->var && x->a == y->a && x->b == y->b;
  }
};
struct FormHash {
  std::size_t operator()(const FormNode* n) const { return n->hash; }
};
struct FormEq {
  bool operator()(const FormNode* x, const FormNode* y) const {
    return x->kind == y->kind && x->s == y->s && x->t == y->t && x->a == y->a && x->b == y->b &&
           x->var == y->var && x->op == y->op && x->pos == y->pos && x->index == y->index;
  }
};

struct Store {
  std::mutex mu;
  std::deque<TermNode> terms;
  std::deque<FormNode> forms;
  std::unordered_set<const TermNode*, TermHash, TermEq> term_set;
  std::unordered_set<const FormNode*, FormHash, FormEq> form_set;
  std::uint64_t next_id = 0;
};

Store& store() {
  static Store s;
  return s;
}

Term intern_term(TermNode n) {
  std::size_t h = mix(static_cast<std::size_t>(n.kind), static_cast<std::size_t>(n.var + 7));
  h = mix(h, reinterpret_cast<std::size_t>(n.a));
  h = mix(h, reinterpret_cast<std::size_t>(n.b));
  n.hash = h;
  auto& st = store();
  std::lock_guard<std::mutex> lock(st.mu);
  auto it = st.term_set.find(&n);
  if (it != st.term_set.end()) return *it;
  st.terms.push_back(std::move(n));
  const TermNode* p = &st.terms.back();
  st.term_set.insert(p);
  return p;
}

Formula intern_form(FormNode n) {
  std::size_t h = mix(static_cast<std::size_t>(n.kind), static_cast<std::size_t>(n.var + 11));
  h = mix(h, reinterpret_cast<std::size_t>(n.s));
  h = mix(h, reinterpret_cast<std::size_t>(n.t));
  h = mix(h, reinterpret_cast<std::size_t>(n.a));
  h = mix(h, reinterpret_cast<std::size_t>(n.b));
  h = mix(h, static_cast<std::size_t>(n.op + 3));
  h = mix(h, static_cast<std::size_t>(n.pos + 5));
  h = mix(h, static_cast<std::size_t>(n.index.gap));
  h = mix(h, static_cast<std::size_t>(n.index.offset));
  n.hash = h;
  auto& st = store();
  std::lock_guard<std::mutex> lock(st.mu);
  auto it = st.form_set.find(&n);
  if (it != st.form_set.end()) return *it;
  n.id = st.next_id++;
  st.forms.push_back(std::move(n));
  const FormNode* p = &st.forms.back();
  st.form_set.insert(p);
  return p;
}

Term mk_term(TK k, int var, Term a, Term b) {
  TermNode n{k, var, a, b, 0, 1, {}};
  if (k == TK::Var) {
    if (var < 0) fail("invalid_var", "variable index must be non-negative");
    n.vars = {var};
  }
  if (a) {
    n.size = sat_add(n.size, a->size);
    n.vars = a->vars;
  }
  if (b) {
    n.size = sat_add(n.size, b->size);
    n.vars = merge_sorted(n.vars, b->vars);
  }
  return intern_term(std::move(n));
}

FormNode blank(FK k) {
  FormNode n;
  n.kind = k;
  return n;
}

}  // namespace

// ---------------------------------------------------------------- terms

Term t_zero() { return mk_term(TK::Zero, -1, nullptr, nullptr); }
Term t_one() { return mk_term(TK::One, -1, nullptr, nullptr); }
Term t_var(int v) { return mk_term(TK::Var, v, nullptr, nullptr); }
Term t_plus(Term a, Term b) { return mk_term(TK::Plus, -1, a, b); }
Term t_times(Term a, Term b) { return mk_term(TK::Times, -1, a, b); }

// ------------------------------------------------------------- formulas

Formula f_eq(Term s, Term t) {
  FormNode n = blank(FK::Eq);
  n.s = s;
  n.t = t;
  n.size = sat_add(1, sat_add(s->size, t->size));
  n.fv = merge_sorted(s->vars, t->vars);
  return intern_form(std::move(n));
}

static Formula unary(FK k, int var, Formula a) {
  FormNode n = blank(k);
  n.a = a;
  n.var = var;
  n.size = sat_add(1, a->size);
  n.has_piece = a->has_piece;
  n.compl_ = a->compl_ < 0 ? -1 : a->compl_ + 1;
  n.fv = a->fv;
  if (var >= 0) n.fv.erase(std::remove(n.fv.begin(), n.fv.end(), var), n.fv.end());
  return intern_form(std::move(n));
}

static Formula binary(FK k, Formula a, Formula b) {
  FormNode n = blank(k);
  n.a = a;
  n.b = b;
  n.size = sat_add(1, sat_add(a->size, b->size));
  n.has_piece = a->has_piece || b->has_piece;
  n.compl_ = (a->compl_ < 0 || b->compl_ < 0) ? -1 : std::max(a->compl_, b->compl_) + 1;
  n.fv = merge_sorted(a->fv, b->fv);
  return intern_form(std::move(n));
}

Formula f_not(Formula a) { return unary(FK::Not, -1, a); }
Formula f_or(Formula a, Formula b) { return binary(FK::Or, a, b); }
Formula f_and(Formula a, Formula b) { return binary(FK::And, a, b); }
Formula f_exists(int v, Formula a) {
  if (v < 0) fail("invalid_var", "variable index must be non-negative");
  return unary(FK::Exists, v, a);
}
Formula f_forall(int v, Formula a) {
  if (v < 0) fail("invalid_var", "variable index must be non-negative");
  return unary(FK::Forall, v, a);
}

Formula f_piece_raw(int op, int pos, GapNumber index, Formula base, bool hat) {
  FormNode n = blank(FK::Piece);
  n.var = hat ? 1 : -1;
  n.op = op;
  n.pos = pos;
  n.index = index;
  n.a = base;
  n.size = UINT64_MAX;
  n.has_piece = true;
  n.compl_ = -1;
  n.fv = base->fv;
  return intern_form(std::move(n));
}

bool is_atomic(Formula f) { return f->kind == FK::Eq; }
bool is_quant(Formula f) { return f->kind == FK::Exists || f->kind == FK::Forall; }
bool is_binary(Formula f) { return f->kind == FK::Or || f->kind == FK::And; }

std::vector<Formula> children(Formula f) {
  switch (f->kind) {
    case FK::Eq:
    case FK::Piece:
      return {};
    case FK::Not:
    case FK::Exists:
    case FK::Forall:
      return {f->a};
    case FK::Or:
    case FK::And:
      return {f->a, f->b};
  }
  return {};
}

int cmp_term(Term a, Term b) {
  if (a == b) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->kind == TK::Var) return a->var < b->var ? -1 : (a->var > b->var ? 1 : 0);
  int c = cmp_term(a->a, b->a);
  if (c != 0) return c;
  return cmp_term(a->b, b->b);
}

int cmp_formula(Formula a, Formula b) {
  if (a == b) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case FK::Eq: {
      int c = cmp_term(a->s, b->s);
      return c != 0 ? c : cmp_term(a->t, b->t);
    }
    case FK::Not:
      return cmp_formula(a->a, b->a);
    case FK::Or:
    case FK::And: {
      int c = cmp_formula(a->a, b->a);
      return c != 0 ? c : cmp_formula(a->b, b->b);
    }
    case FK::Exists:
    case FK::Forall:
      if (a->var != b->var) return a->var < b->var ? -1 : 1;
      return cmp_formula(a->a, b->a);
    case FK::Piece:
      if (a->var != b->var) return a->var < b->var ? -1 : 1;
      if (a->op != b->op) return a->op < b->op ? -1 : 1;
      if (a->pos != b->pos) return a->pos < b->pos ? -1 : 1;
      if (a->index != b->index) return a->index < b->index ? -1 : 1;
      return cmp_formula(a->a, b->a);
  }
  return 0;
}

int cmp_assignment(const Assignment& a, const Assignment& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

// ------------------------------------------------------------ operations

std::int64_t complexity(Formula f) {
  if (f->compl_ < 0) fail("nonstandard", "complexity of a symbolic formula is not a standard number");
  return f->compl_;
}

const std::vector<int>& free_vars(Formula f) { return f->fv; }
bool is_sentence(Formula f) { return f->fv.empty(); }

bool asn_check(Formula f, const Assignment& a) {
  if (a.size() != f->fv.size()) return false;
  std::size_t i = 0;
  for (const auto& [v, val] : a) {
    (void)val;
    if (f->fv[i++] != v) return false;
  }
  return true;
}

Assignment restrict_assignment(const Assignment& a, Formula f) {
  Assignment r;
  for (int v : f->fv) {
    auto it = a.find(v);
    if (it != a.end()) r.emplace(v, it->second);
  }
  return r;
}

int max_var(Term t) { return t->vars.empty() ? -1 : t->vars.back(); }

int max_var(Formula f) {
  std::unordered_set<Formula> seen;
  int best = -1;
  std::vector<Formula> stack{f};
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g).second) continue;
    switch (g->kind) {
      case FK::Eq:
        best = std::max({best, max_var(g->s), max_var(g->t)});
        break;
      case FK::Exists:
      case FK::Forall:
        best = std::max(best, g->var);
        stack.push_back(g->a);
        break;
      case FK::Piece:
        best = std::max(best, g->fv.empty() ? -1 : g->fv.back());
        stack.push_back(g->a);
        break;
      default:
        for (Formula c : children(g)) stack.push_back(c);
    }
  }
  return best;
}

namespace {

GapNumber checked_add(const GapNumber& x, const GapNumber& y) {
  if (!x.standard() && !y.standard())
    fail("unrepresentable", "sum of two nonstandard values is not representable");
  if (x.standard() && y.standard()) {
    std::int64_t r;
    if (__builtin_add_overflow(x.offset, y.offset, &r)) fail("unrepresentable", "overflow");
    return std_num(r);
  }
  const GapNumber& ns = x.standard() ? y : x;
  const GapNumber& st = x.standard() ? x : y;
  return step(ns, st.offset);
}

GapNumber checked_mul(const GapNumber& x, const GapNumber& y) {
  if (x.standard() && y.standard()) {
    std::int64_t r;
    if (__builtin_mul_overflow(x.offset, y.offset, &r)) fail("unrepresentable", "overflow");
    return std_num(r);
  }
  if (!x.standard() && !y.standard())
    fail("unrepresentable", "product of two nonstandard values is not representable");
  const GapNumber& ns = x.standard() ? y : x;
  const GapNumber& st = x.standard() ? x : y;
  if (st.offset == 0) return std_num(0);
  if (st.offset == 1) return ns;
  fail("unrepresentable", "product of a nonstandard value by a standard factor > 1");
}

}  // namespace

GapNumber eval_term(Term t, const Assignment& a) {
  switch (t->kind) {
    case TK::Zero:
      return std_num(0);
    case TK::One:
      return std_num(1);
    case TK::Var: {
      auto it = a.find(t->var);
      if (it == a.end()) fail("unassigned", "variable " + var_name(t->var) + " is not assigned");
      return it->second;
    }
    case TK::Plus:
      return checked_add(eval_term(t->a, a), eval_term(t->b, a));
    case TK::Times:
      return checked_mul(eval_term(t->a, a), eval_term(t->b, a));
  }
  fail("internal", "bad term");
}

Term substitute_term(Term t, const TermSubst& g) {
  if (g.empty() || t->vars.empty()) return t;
  switch (t->kind) {
    case TK::Var: {
      auto it = g.find(t->var);
      return it == g.end() ? t : it->second;
    }
    case TK::Plus:
      return t_plus(substitute_term(t->a, g), substitute_term(t->b, g));
    case TK::Times:
      return t_times(substitute_term(t->a, g), substitute_term(t->b, g));
    default:
      return t;
  }
}

namespace {

struct Substituter {
  TermSubst g;
  bool allow_rename;
  std::map<Formula, Formula> memo;

  bool touches(Formula f) const {
    for (int v : f->fv)
      if (g.count(v)) return true;
    return false;
  }

  Formula run(Formula f) {
    if (!touches(f)) return f;
    auto it = memo.find(f);
    if (it != memo.end()) return it->second;
    Formula r = nullptr;
    switch (f->kind) {
      case FK::Eq:
        r = f_eq(substitute_term(f->s, g), substitute_term(f->t, g));
        break;
      case FK::Not:
        r = f_not(run(f->a));
        break;
      case FK::Or:
        r = f_or(run(f->a), run(f->b));
        break;
      case FK::And:
        r = f_and(run(f->a), run(f->b));
        break;
      case FK::Exists:
      case FK::Forall:
        r = quant(f);
        break;
      case FK::Piece:
        fail("symbolic", "cannot substitute into the free variables of a symbolic formula");
    }
    memo.emplace(f, r);
    return r;
  }

  Formula quant(Formula f) {
    TermSubst inner;
    for (int v : f->a->fv) {
      if (v == f->var) continue;
      auto it = g.find(v);
      if (it != g.end()) inner.emplace(v, it->second);
    }
    if (inner.empty()) return f;
    int bv = f->var;
    Formula body = f->a;
    bool capture = false;
    for (const auto& [v, t] : inner)
      if (std::binary_search(t->vars.begin(), t->vars.end(), bv)) capture = true;
    if (capture) {
      if (!allow_rename) fail("capture", "substitution would capture " + var_name(bv));
      int fresh = max_var(body);
      for (const auto& [v, t] : inner) fresh = std::max({fresh, max_var(t), v});
      fresh = std::max(fresh, bv) + 1;
      body = substitute(body, TermSubst{{bv, t_var(fresh)}}, true);
      bv = fresh;
    }
    Formula nb = substitute(body, inner, allow_rename);
    return f->kind == FK::Exists ? f_exists(bv, nb) : f_forall(bv, nb);
  }
};

}  // namespace

Formula substitute(Formula f, const TermSubst& g, bool allow_rename) {
  if (g.empty()) return f;
  Substituter s{g, allow_rename, {}};
  return s.run(f);
}

Term numeral(const GapNumber& x) {
  if (!x.standard()) fail("nonstandard", "numerals of nonstandard values stay symbolic");
  Term t = t_zero();
  for (std::int64_t i = 0; i < x.offset; ++i) t = t_plus(t, t_one());
  return t;
}

Formula substitute_assignment(Formula f, const Assignment& a) {
  TermSubst g;
  for (const auto& [v, x] : a) g.emplace(v, numeral(x));
  return substitute(f, g);
}

Formula big_or(const std::vector<Formula>& fs) {
  if (fs.empty()) fail("empty", "big_or of an empty sequence");
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = f_or(r, fs[i]);
  return r;
}

Formula big_and(const std::vector<Formula>& fs) {
  if (fs.empty()) fail("empty", "big_and of an empty sequence");
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = f_and(r, fs[i]);
  return r;
}

namespace {

using Env = std::map<int, int>;  // bound variable -> binder depth

bool alpha_term(Term a, Term b, const Env& ea, const Env& eb) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TK::Zero:
    case TK::One:
      return true;
    case TK::Var: {
      auto ia = ea.find(a->var);
      auto ib = eb.find(b->var);
      if ((ia == ea.end()) != (ib == eb.end())) return false;
      if (ia == ea.end()) return a->var == b->var;
      return ia->second == ib->second;
    }
    default:
      return alpha_term(a->a, b->a, ea, eb) && alpha_term(a->b, b->b, ea, eb);
  }
}

bool alpha_form(Formula a, Formula b, const Env& ea, const Env& eb, int depth) {
  if (a == b && ea.empty() && eb.empty()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FK::Eq:
      return alpha_term(a->s, b->s, ea, eb) && alpha_term(a->t, b->t, ea, eb);
    case FK::Not:
      return alpha_form(a->a, b->a, ea, eb, depth);
    case FK::Or:
    case FK::And:
      return alpha_form(a->a, b->a, ea, eb, depth) && alpha_form(a->b, b->b, ea, eb, depth);
    case FK::Exists:
    case FK::Forall: {
      Env na = ea, nb = eb;
      na[a->var] = depth;
      nb[b->var] = depth;
      return alpha_form(a->a, b->a, na, nb, depth + 1);
    }
    case FK::Piece:
      return a == b;
  }
  return false;
}

}  // namespace

bool alpha_equal(Formula a, Formula b) {
  if (a == b) return true;
  return alpha_form(a, b, {}, {}, 0);
}

// ------------------------------------------------------------ semantics

namespace {

void closed_values(Term t, std::set<GapNumber>& out, std::set<Term>& seen) {
  if (!seen.insert(t).second) return;
  if (t->vars.empty()) {
    try {
      out.insert(eval_term(t, {}));
    } catch (const Error&) {
    }
  }
  if (t->a) closed_values(t->a, out, seen);
  if (t->b) closed_values(t->b, out, seen);
}

void collect_closed(Formula f, std::set<GapNumber>& out, std::set<Term>& seen_t,
                    std::set<Formula>& seen_f) {
  if (!seen_f.insert(f).second) return;
  if (f->kind == FK::Eq) {
    closed_values(f->s, out, seen_t);
    closed_values(f->t, out, seen_t);
    return;
  }
  if (f->kind == FK::Piece) return;
  for (Formula c : children(f)) collect_closed(c, out, seen_t, seen_f);
}

void add_around(std::set<GapNumber>& w, const GapNumber& x) {
  for (int k = -2; k <= 2; ++k) {
    if (x.standard() && x.offset + k < 0) continue;
    w.insert(GapNumber{x.gap, x.offset + k});
  }
}

}  // namespace

std::vector<GapNumber> witness_range(const GapUniverse& u, Formula quantified, const Assignment& a) {
  std::set<GapNumber> w;
  for (std::int64_t i = 0; i <= u.std_cap(); ++i) w.insert(std_num(i));
  for (int g = 1; g <= u.size(); ++g) w.insert(GapNumber{g, 0});
  std::set<GapNumber> closed;
  std::set<Term> st;
  std::set<Formula> sf;
  collect_closed(quantified, closed, st, sf);
  for (const auto& c : closed) add_around(w, c);
  for (int v : quantified->fv) {
    auto it = a.find(v);
    if (it != a.end()) add_around(w, it->second);
  }
  return {w.begin(), w.end()};
}

bool eval_bounded(const GapUniverse& u, Formula f, const Assignment& a) {
  switch (f->kind) {
    case FK::Eq:
      return eval_term(f->s, a) == eval_term(f->t, a);
    case FK::Not:
      return !eval_bounded(u, f->a, a);
    case FK::Or:
      return eval_bounded(u, f->a, a) || eval_bounded(u, f->b, a);
    case FK::And:
      return eval_bounded(u, f->a, a) && eval_bounded(u, f->b, a);
    case FK::Exists:
    case FK::Forall: {
      bool ex = f->kind == FK::Exists;
      for (const auto& x : witness_range(u, f, a)) {
        Assignment b = a;
        b[f->var] = x;
        if (eval_bounded(u, f->a, b) == ex) return ex;
      }
      return !ex;
    }
    case FK::Piece:
      fail("nonstandard", "bounded semantics does not apply to symbolic formulas");
  }
  return false;
}

// -------------------------------------------------------------- catalog

namespace {
struct Catalog {
  std::mutex mu;
  std::deque<PieceCatalogEntry> entries;
};
Catalog& catalog() {
  static Catalog c;
  return c;
}
}  // namespace

int catalog_register(PieceCatalogEntry e) {
  auto& c = catalog();
  std::lock_guard<std::mutex> lock(c.mu);
  c.entries.push_back(std::move(e));
  return static_cast<int>(c.entries.size()) - 1;
}

const PieceCatalogEntry& catalog_get(int op) {
  auto& c = catalog();
  std::lock_guard<std::mutex> lock(c.mu);
  if (op < 0 || op >= static_cast<int>(c.entries.size())) fail("unknown_op", "unknown operator id");
  return c.entries[static_cast<std::size_t>(op)];
}

std::optional<int> catalog_find(const std::string& name) {
  auto& c = catalog();
  std::lock_guard<std::mutex> lock(c.mu);
  // Latest registration wins so a redefinition shadows older ones.
  for (int i = static_cast<int>(c.entries.size()) - 1; i >= 0; --i)
    if (c.entries[static_cast<std::size_t>(i)].name == name) return i;
  return std::nullopt;
}

int catalog_find_path(int op, const std::string& path) {
  const auto& e = catalog_get(op);
  for (std::size_t i = 0; i < e.paths.size(); ++i)
    if (e.paths[i] == path) return static_cast<int>(i);
  fail("unknown_position", "operator '" + e.name + "' has no position " + path);
}

// -------------------------------------------------------------- printing

std::string var_name(int v) { return "v" + std::to_string(v); }

std::string to_sexpr(Term t) {
  switch (t->kind) {
    case TK::Zero:
      return "0";
    case TK::One:
      return "1";
    case TK::Var:
      return var_name(t->var);
    case TK::Plus:
      return "(+ " + to_sexpr(t->a) + " " + to_sexpr(t->b) + ")";
    case TK::Times:
      return "(* " + to_sexpr(t->a) + " " + to_sexpr(t->b) + ")";
  }
  return "?";
}

static std::string fmt_index(const GapNumber& x, const GapUniverse* u) {
  if (u) return u->format(x);
  if (x.standard()) return std::to_string(x.offset);
  std::string s = "#" + std::to_string(x.gap);
  if (x.offset > 0) s += "+" + std::to_string(x.offset);
  if (x.offset < 0) s += std::to_string(x.offset);
  return s;
}

std::string to_sexpr(Formula f, const GapUniverse* u) {
  switch (f->kind) {
    case FK::Eq:
      return "(= " + to_sexpr(f->s) + " " + to_sexpr(f->t) + ")";
    case FK::Not:
      return "(not " + to_sexpr(f->a, u) + ")";
    case FK::Or:
      return "(or " + to_sexpr(f->a, u) + " " + to_sexpr(f->b, u) + ")";
    case FK::And:
      return "(and " + to_sexpr(f->a, u) + " " + to_sexpr(f->b, u) + ")";
    case FK::Exists:
      return "(exists " + var_name(f->var) + " " + to_sexpr(f->a, u) + ")";
    case FK::Forall:
      return "(forall " + var_name(f->var) + " " + to_sexpr(f->a, u) + ")";
    case FK::Piece: {
      const auto& e = catalog_get(f->op);
      return std::string(is_hat_piece(f) ? "(hat-piece " : "(piece ") + e.name + " " +
             e.paths[static_cast<std::size_t>(f->pos)] + " " +
             fmt_index(f->index, u) + " " + to_sexpr(f->a, u) + ")";
    }
  }
  return "?";
}

std::string to_infix(Term t) {
  switch (t->kind) {
    case TK::Zero:
      return "0";
    case TK::One:
      return "1";
    case TK::Var:
      return var_name(t->var);
    case TK::Plus: {
      std::string r = to_infix(t->b);
      if (t->b->kind == TK::Plus) r = "(" + r + ")";
      return to_infix(t->a) + "+" + r;
    }
    case TK::Times: {
      auto wrap = [](Term x) {
        std::string s = to_infix(x);
        return x->kind == TK::Plus ? "(" + s + ")" : s;
      };
      std::string r = wrap(t->b);
      if (t->b->kind == TK::Times) r = "(" + r + ")";
      return wrap(t->a) + "·" + r;
    }
  }
  return "?";
}

std::string to_infix(Formula f, const GapUniverse* u) {
  auto paren_bin = [&](Formula g) {
    std::string s = to_infix(g, u);
    return is_binary(g) ? "(" + s + ")" : s;
  };
  switch (f->kind) {
    case FK::Eq:
      return to_infix(f->s) + "=" + to_infix(f->t);
    case FK::Not: {
      std::string s = to_infix(f->a, u);
      if (is_binary(f->a) || is_atomic(f->a)) s = "(" + s + ")";
      return "¬" + s;
    }
    case FK::Or:
      return paren_bin(f->a) + " ∨ " + paren_bin(f->b);
    case FK::And:
      return paren_bin(f->a) + " ∧ " + paren_bin(f->b);
    case FK::Exists:
      return "∃" + var_name(f->var) + "(" + to_infix(f->a, u) + ")";
    case FK::Forall:
      return "∀" + var_name(f->var) + "(" + to_infix(f->a, u) + ")";
    case FK::Piece: {
      const auto& e = catalog_get(f->op);
      return e.name + (is_hat_piece(f) ? "^[" : "[") + e.paths[static_cast<std::size_t>(f->pos)] + "," +
             fmt_index(f->index, u) + "](" + to_infix(f->a, u) + ")";
    }
  }
  return "?";
}

// --------------------------------------------------------------- parsing

namespace {

struct Tok {
  std::string text;
  std::size_t at;
};

std::vector<Tok> tokenize(const std::string& s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      out.push_back({std::string(1, c), i});
      ++i;
    } else {
      std::size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
             s[j] != ')')
        ++j;
      out.push_back({s.substr(i, j - i), i});
      i = j;
    }
  }
  return out;
}

struct Parser {
  std::vector<Tok> toks;
  std::size_t i = 0;
  std::size_t len;
  const GapUniverse* u;

  [[noreturn]] void err(const std::string& msg) const {
    std::size_t at = i < toks.size() ? toks[i].at : len;
    fail("syntax", msg + " at offset " + std::to_string(at));
  }
  const Tok& peek() const {
    if (i >= toks.size()) err("unexpected end of input (unbalanced parentheses)");
    return toks[i];
  }
  std::string next() { return peek(), toks[i++].text; }
  void expect(const std::string& t) {
    if (peek().text != t) err("expected '" + t + "'");
    ++i;
  }

  int var() {
    std::string t = next();
    if (t.size() < 2 || t[0] != 'v' ||
        !std::all_of(t.begin() + 1, t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      --i, err("expected a variable vN");
    return std::stoi(t.substr(1));
  }

  Term term() {
    const Tok& tk = peek();
    if (tk.text == "(") {
      ++i;
      std::string op = next();
      if (op != "+" && op != "*") --i, err("expected '+' or '*'");
      Term acc = term();
      do {
        Term r = term();
        acc = op == "+" ? t_plus(acc, r) : t_times(acc, r);
      } while (peek().text != ")");
      expect(")");
      return acc;
    }
    if (tk.text == ")") err("unexpected ')'");
    std::string t = next();
    if (t == "0") return t_zero();
    if (t == "1") return t_one();
    if (t[0] == 'v') return --i, t_var(var());
    if (std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return numeral(std_num(std::stoll(t)));
    --i;
    err("bad term '" + t + "'");
  }

  Formula formula() {
    expect("(");
    std::string head = next();
    Formula r = nullptr;
    if (head == "=") {
      Term a = term();
      Term b = term();
      r = f_eq(a, b);
    } else if (head == "<") {
      Term a = term();
      Term b = term();
      int z = std::max(max_var(a), max_var(b)) + 1;
      r = f_exists(z, f_eq(t_plus(t_plus(a, t_var(z)), t_one()), b));
    } else if (head == "not") {
      r = f_not(formula());
    } else if (head == "or" || head == "and") {
      Formula acc = formula();
      do {
        Formula nx = formula();
        acc = head == "or" ? f_or(acc, nx) : f_and(acc, nx);
      } while (peek().text != ")");
      r = acc;
    } else if (head == "exists" || head == "forall") {
      int v = var();
      Formula body = formula();
      r = head == "exists" ? f_exists(v, body) : f_forall(v, body);
    } else if (head == "piece" || head == "hat-piece") {
      std::string name = next();
      auto op = catalog_find(name);
      if (!op) --i, err("unknown operator '" + name + "'");
      std::string path = next();
      std::string idx = next();
      GapNumber x;
      if (u) {
        x = u->parse(idx);
      } else {
        if (!std::all_of(idx.begin(), idx.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
          err("symbolic index needs a gap universe");
        x = std_num(std::stoll(idx));
      }
      Formula base = formula();
      r = catalog_get(*op).make(base, catalog_find_path(*op, path), x, head == "hat-piece");
    } else {
      --i;
      err("unknown head '" + head + "'");
    }
    expect(")");
    return r;
  }
};

}  // namespace

Formula parse_formula(const std::string& text, const GapUniverse* u) {
  Parser p{tokenize(text), 0, text.size(), u};
  Formula f = p.formula();
  if (p.i != p.toks.size()) p.err("trailing input");
  return f;
}

Term parse_term(const std::string& text) {
  Parser p{tokenize(text), 0, text.size(), nullptr};
  Term t = p.term();
  if (p.i != p.toks.size()) p.err("trailing input");
  return t;
}

}  // namespace satlab

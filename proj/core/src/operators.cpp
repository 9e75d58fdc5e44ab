#include "satlab/operators.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>

#include "satlab/error.hpp"

namespace satlab {

// ------------------------------------------------------------- templates

namespace {

struct TParser {
  std::string s;
  std::size_t i = 0;
  std::map<std::string, int> names;
  std::vector<TemplateNode> nodes;

  [[noreturn]] void err(const std::string& m) const {
    fail("syntax", "template: " + m + " at offset " + std::to_string(i));
  }
  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  std::string atom() {
    ws();
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
           s[j] != ')')
      ++j;
    if (j == i) err("expected a symbol");
    std::string a = s.substr(i, j - i);
    i = j;
    return a;
  }
  void expect(char c) {
    ws();
    if (i >= s.size() || s[i] != c) err(std::string("expected '") + c + "'");
    ++i;
  }
  int var_of(const std::string& name) {
    if (name.size() >= 2 && name[0] == 'v' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::stoi(name.substr(1));
    if (name == "p" || name == "q") err("quantifier variable may not be p or q");
    auto it = names.find(name);
    if (it != names.end()) return it->second;
    int v = 100 + static_cast<int>(names.size());
    names.emplace(name, v);
    return v;
  }

  int node(int parent) {
    ws();
    if (i >= s.size()) err("unexpected end of input");
    int me = static_cast<int>(nodes.size());
    nodes.push_back(TemplateNode{});
    nodes.back().parent = parent;
    if (s[i] != '(') {
      std::string a = atom();
      if (a == "p")
        nodes[static_cast<std::size_t>(me)].kind = TNodeKind::P;
      else if (a == "q")
        nodes[static_cast<std::size_t>(me)].kind = TNodeKind::Q;
      else
        err("unknown leaf '" + a + "'");
      return me;
    }
    ++i;
    std::string head = atom();
    TNodeKind k;
    int arity = 1;
    int var = -1;
    if (head == "not") {
      k = TNodeKind::Not;
    } else if (head == "or") {
      k = TNodeKind::Or;
      arity = 2;
    } else if (head == "and") {
      k = TNodeKind::And;
      arity = 2;
    } else if (head == "forall" || head == "exists") {
      k = head == "forall" ? TNodeKind::Forall : TNodeKind::Exists;
      var = var_of(atom());
    } else {
      err("unknown connective '" + head + "'");
    }
    nodes[static_cast<std::size_t>(me)].kind = k;
    nodes[static_cast<std::size_t>(me)].var = var;
    for (int c = 0; c < arity; ++c) {
      int kid = node(me);
      nodes[static_cast<std::size_t>(me)].kids.push_back(kid);
    }
    expect(')');
    return me;
  }
};

}  // namespace

Template Template::parse(const std::string& text) {
  TParser p;
  p.s = text;
  p.node(-1);
  p.ws();
  if (p.i != p.s.size()) p.err("trailing input");
  return from_nodes(std::move(p.nodes));
}

Template Template::from_nodes(std::vector<TemplateNode> nodes) {
  if (nodes.empty()) fail("syntax", "empty template");
  Template t;
  t.nodes_ = std::move(nodes);
  t.finish();
  return t;
}

void Template::finish() {
  // Nodes arrive in pre-order; fill paths and subtree summaries bottom-up.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.parent < 0) {
      n.path = "/";
    } else {
      const auto& par = nodes_[static_cast<std::size_t>(n.parent)];
      auto it = std::find(par.kids.begin(), par.kids.end(), static_cast<int>(i));
      std::string base = par.path == "/" ? "" : par.path;
      n.path = base + "/" + std::to_string(it - par.kids.begin());
    }
  }
  for (std::size_t j = nodes_.size(); j-- > 0;) {
    auto& n = nodes_[j];
    n.has_p = n.kind == TNodeKind::P;
    n.has_q = n.kind == TNodeKind::Q;
    n.end = static_cast<int>(j) + 1;
    for (int k : n.kids) {
      const auto& c = nodes_[static_cast<std::size_t>(k)];
      n.has_p |= c.has_p;
      n.has_q |= c.has_q;
      n.end = std::max(n.end, c.end);
    }
  }
}

int Template::complexity() const {
  std::vector<int> h(nodes_.size(), 0);
  for (std::size_t j = nodes_.size(); j-- > 0;)
    for (int k : nodes_[j].kids) h[j] = std::max(h[j], h[static_cast<std::size_t>(k)] + 1);
  return h[0];
}

std::vector<int> Template::dummy_vars() const {
  std::vector<int> vs;
  for (const auto& n : nodes_)
    if (n.var >= 0) vs.push_back(n.var);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

std::string Template::to_string(int pos) const {
  const auto& n = node(pos);
  auto kid = [&](int i) { return to_string(n.kids[static_cast<std::size_t>(i)]); };
  switch (n.kind) {
    case TNodeKind::P:
      return "p";
    case TNodeKind::Q:
      return "q";
    case TNodeKind::Not:
      return "(not " + kid(0) + ")";
    case TNodeKind::Or:
      return "(or " + kid(0) + " " + kid(1) + ")";
    case TNodeKind::And:
      return "(and " + kid(0) + " " + kid(1) + ")";
    case TNodeKind::Exists:
      return "(exists " + var_name(n.var) + " " + kid(0) + ")";
    case TNodeKind::Forall:
      return "(forall " + var_name(n.var) + " " + kid(0) + ")";
  }
  return "?";
}

bool Template::eval(int pos, bool p, bool q) const {
  const auto& n = node(pos);
  auto kid = [&](int i) { return eval(n.kids[static_cast<std::size_t>(i)], p, q); };
  switch (n.kind) {
    case TNodeKind::P:
      return p;
    case TNodeKind::Q:
      return q;
    case TNodeKind::Not:
      return !kid(0);
    case TNodeKind::Or:
      return kid(0) || kid(1);
    case TNodeKind::And:
      return kid(0) && kid(1);
    case TNodeKind::Exists:
    case TNodeKind::Forall:
      return kid(0);
  }
  return false;
}

unsigned Template::table(int pos) const {
  unsigned bits = 0;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      if (eval(pos, p != 0, q != 0)) bits |= 1u << (2 * p + q);
  return bits;
}

Formula Template::instantiate(int pos, Formula p, Formula q) const {
  const auto& n = node(pos);
  auto kid = [&](int i) { return instantiate(n.kids[static_cast<std::size_t>(i)], p, q); };
  switch (n.kind) {
    case TNodeKind::P:
      return p;
    case TNodeKind::Q:
      return q;
    case TNodeKind::Not:
      return f_not(kid(0));
    case TNodeKind::Or:
      return f_or(kid(0), kid(1));
    case TNodeKind::And:
      return f_and(kid(0), kid(1));
    case TNodeKind::Exists:
      return f_exists(n.var, kid(0));
    case TNodeKind::Forall:
      return f_forall(n.var, kid(0));
  }
  return nullptr;
}

// --------------------------------------------------------- classification

std::string to_string(TemplateKind k) {
  switch (k) {
    case TemplateKind::OrPQ:
      return "OrPQ";
    case TemplateKind::AndPQ:
      return "AndPQ";
    case TemplateKind::JustQ:
      return "JustQ";
    case TemplateKind::Other:
      return "Other";
  }
  return "?";
}

std::string to_string(PosClass c) {
  switch (c) {
    case PosClass::Q:
      return "q";
    case PosClass::NotQ:
      return "not-q";
    case PosClass::Top:
      return "top";
    case PosClass::Bot:
      return "bot";
  }
  return "?";
}

bool theta_value(Formula theta) {
  bool neg = false;
  Formula a = theta;
  if (a->kind == FK::Not) {
    neg = true;
    a = a->a;
  }
  if (a->kind != FK::Eq || !is_sentence(a))
    fail("invalid_theta", "base must be an atomic or negated atomic sentence");
  bool v = eval_term(a->s, {}) == eval_term(a->t, {});
  return neg ? !v : v;
}

static bool bit(unsigned table, int p, int q) { return (table >> (2 * p + q)) & 1u; }

TemplateKind kind_of_table(unsigned t) {
  // bit index = 2p+q
  if (t == 0b1110) return TemplateKind::OrPQ;
  if (t == 0b1000) return TemplateKind::AndPQ;
  if (t == 0b1010) return TemplateKind::JustQ;
  return TemplateKind::Other;
}

TemplateClass validate_template(const Template& t, std::optional<Formula> theta) {
  if (!t.has_q()) fail("q_absent", "q must occur in the template");
  if (t.complexity() == 0) fail("complexity_zero", "template must contain a connective or quantifier");
  unsigned tb = t.table();
  if (theta) {
    bool v = theta_value(*theta);
    int p = v ? 1 : 0;
    if (bit(tb, p, 0) || !bit(tb, p, 1))
      fail("local_law", std::string("Phi(") + (v ? "T" : "F") + ", q) is not equivalent to q");
  } else {
    if (tb == 0b1100) fail("equiv_p", "template is equivalent to p");
    if (!bit(tb, 1, 1)) fail("law_pq", "p and q do not entail the template");
    if (bit(tb, 0, 0)) fail("law_not_pq", "not-p and not-q do not entail its negation");
  }
  TemplateClass c;
  c.kind = kind_of_table(tb);
  c.q_monotone = c.kind == TemplateKind::OrPQ || c.kind == TemplateKind::JustQ;
  c.accessible = t.has_p();
  return c;
}

std::vector<PosClass> classify_positions_at(const Template& t, bool p) {
  std::vector<PosClass> out;
  for (int pos = 0; pos < t.size(); ++pos) {
    bool f0 = t.eval(pos, p, false);
    bool f1 = t.eval(pos, p, true);
    if (!f0 && f1)
      out.push_back(PosClass::Q);
    else if (f0 && !f1)
      out.push_back(PosClass::NotQ);
    else if (f0)
      out.push_back(PosClass::Top);
    else
      out.push_back(PosClass::Bot);
  }
  return out;
}

// -------------------------------------------------------------- registry

namespace {
struct Registry {
  std::mutex mu;
  std::map<int, OpPtr> ops;
};
Registry& registry() {
  static Registry r;
  return r;
}
}  // namespace

std::shared_ptr<const Operator> register_operator(std::shared_ptr<Operator> op) {
  PieceCatalogEntry e;
  e.name = op->name_;
  for (const auto& n : op->tmpl_.nodes()) e.paths.push_back(n.path);
  // The catalog id is only known after registration; the lambda reads it back.
  auto holder = std::make_shared<int>(-1);
  e.make = [holder](Formula base, int pos, GapNumber x, bool hat) {
    return mk_piece(*Operator::by_id(*holder), pos, x, base, hat);
  };
  int id = catalog_register(std::move(e));
  *holder = id;
  op->id_ = id;
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  r.ops[id] = op;
  return op;
}

OpPtr Operator::create(const std::string& name, Template t, std::optional<Formula> theta,
                       int unfold_bound) {
  if (name.empty() || name == "piece") fail("invalid_name", "invalid operator name");
  if (unfold_bound < 1) fail("invalid_bound", "unfolding bound must be positive");
  if (theta && !is_sentence(*theta)) fail("invalid_theta", "base must be a sentence");
  auto op = std::shared_ptr<Operator>(new Operator());
  op->cls_ = validate_template(t, theta);
  op->name_ = name;
  op->tmpl_ = std::move(t);
  op->theta_ = theta;
  op->unfold_bound_ = unfold_bound;
  if (op->tmpl_.complexity() > 1 && !op->is_double_negation())
    op->warnings_.push_back("template depth " + std::to_string(op->tmpl_.complexity()) +
                            " > 1: builder contracts are only guaranteed at depth 1 and for ¬¬");
  return register_operator(op);
}

OpPtr Operator::negation() {
  static OpPtr neg = [] {
    auto op = std::shared_ptr<Operator>(new Operator());
    op->name_ = "neg";
    op->tmpl_ = Template::parse("(not q)");
    op->cls_ = TemplateClass{TemplateKind::Other, false, false};
    op->unfold_bound_ = 16;
    return register_operator(op);
  }();
  return neg;
}

OpPtr Operator::by_id(int id) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.ops.find(id);
  if (it == r.ops.end()) fail("unknown_op", "unknown operator id " + std::to_string(id));
  return it->second;
}

Formula Operator::theta() const {
  if (!theta_) fail("nonlocal", "operator '" + name_ + "' has no fixed base");
  return *theta_;
}

bool Operator::is_double_negation() const {
  return tmpl_.size() == 3 && tmpl_.node(0).kind == TNodeKind::Not &&
         tmpl_.node(1).kind == TNodeKind::Not && tmpl_.node(2).kind == TNodeKind::Q;
}

int Operator::p_pos() const {
  for (int i = 0; i < tmpl_.size(); ++i)
    if (tmpl_.node(i).kind == TNodeKind::P) return i;
  return -1;
}

int Operator::q_pos() const {
  for (int i = 0; i < tmpl_.size(); ++i)
    if (tmpl_.node(i).kind == TNodeKind::Q) return i;
  return -1;
}

// -------------------------------------------------------------- iterates

namespace {

void check_base(const Operator& f, Formula base) {
  for (int v : f.tmpl().dummy_vars())
    if (std::binary_search(base->fv.begin(), base->fv.end(), v))
      fail("capture", "dummy variable " + var_name(v) + " of '" + f.name() + "' occurs free in the base");
}

Formula unfold(const Operator& f, std::int64_t n, Formula base) {
  Formula cur = base;
  for (std::int64_t i = 0; i < n; ++i) cur = f.tmpl().instantiate(0, base, cur);
  return cur;
}

}  // namespace

Formula mk_piece(const Operator& f, int pos, GapNumber x, Formula base, bool hat) {
  if (pos < 0 || pos >= f.tmpl().size()) fail("unknown_position", "position out of range");
  const auto& n = f.tmpl().node(pos);
  if (n.kind == TNodeKind::P) return base;
  if (n.kind == TNodeKind::Q) return mk_piece(f, 0, step(x, -1), base, hat);
  if (x.standard()) {
    if (pos == 0 && x.offset == 0) return base;
    if (x.offset == 0) fail("underflow", "non-root position needs a positive index");
    if (x.offset <= f.unfold_bound() && !hat) {
      check_base(f, base);
      return f.tmpl().instantiate(pos, base, unfold(f, x.offset - 1, base));
    }
  }
  if (!hat) check_base(f, base);
  return f_piece_raw(f.id(), pos, x, base, hat);
}

Formula iterate(const Operator& f, GapNumber x, std::optional<Formula> phi) {
  Formula base;
  if (f.local()) {
    if (phi) fail("local", "a local operator takes no base formula");
    base = f.theta();
  } else {
    if (!phi) fail("nonlocal", "a nonlocal operator needs a base formula");
    base = *phi;
  }
  return mk_piece(f, 0, x, base);
}

Formula iterate(const Operator& f, std::int64_t x, std::optional<Formula> phi) {
  return iterate(f, std_num(x), phi);
}

std::vector<Formula> piece_children(Formula piece) {
  if (piece->kind != FK::Piece) fail("internal", "not a symbolic node");
  auto f = Operator::by_id(piece->op);
  std::vector<Formula> out;
  for (int k : f->tmpl().node(piece->pos).kids)
    out.push_back(mk_piece(*f, k, piece->index, piece->a, is_hat_piece(piece)));
  return out;
}

// ----------------------------------------------------------- length/root

namespace {

struct Slots {
  Formula p = nullptr;
  Formula q = nullptr;
};

bool match(const Template& t, int pos, Formula g, Slots& s) {
  const auto& n = t.node(pos);
  auto kid = [&](int i) { return n.kids[static_cast<std::size_t>(i)]; };
  switch (n.kind) {
    case TNodeKind::P:
      if (s.p && s.p != g) return false;
      s.p = g;
      return true;
    case TNodeKind::Q:
      if (s.q && s.q != g) return false;
      s.q = g;
      return true;
    case TNodeKind::Not:
      return g->kind == FK::Not && match(t, kid(0), g->a, s);
    case TNodeKind::Or:
      return g->kind == FK::Or && match(t, kid(0), g->a, s) && match(t, kid(1), g->b, s);
    case TNodeKind::And:
      return g->kind == FK::And && match(t, kid(0), g->a, s) && match(t, kid(1), g->b, s);
    case TNodeKind::Exists:
      return g->kind == FK::Exists && g->var == n.var && match(t, kid(0), g->a, s);
    case TNodeKind::Forall:
      return g->kind == FK::Forall && g->var == n.var && match(t, kid(0), g->a, s);
  }
  return false;
}

GapNumber add_std(const GapNumber& x, std::int64_t k) { return step(x, k); }

GapNumber add_len(const GapNumber& a, const GapNumber& b) {
  if (!a.standard() && !b.standard())
    fail("unrepresentable", "length is a sum of two nonstandard values");
  return a.standard() ? add_std(b, a.offset) : add_std(a, b.offset);
}

LengthRoot root_of(const Operator& f, Formula psi);

LengthRoot piece_root(const Operator& f, Formula psi) {
  if (psi->pos == 0) {
    if (f.accessible()) return {psi->index, psi->a, {}};
    LengthRoot b = root_of(f, psi->a);
    return {add_len(psi->index, b.length), b.root, b.warnings};
  }
  if (f.is_double_negation() && psi->pos == 1) {
    // ¬F(x-1, b) = F(x-1, ¬b)
    LengthRoot b = root_of(f, f_not(psi->a));
    return {add_len(step(psi->index, -1), b.length), b.root, b.warnings};
  }
  return {std_num(0), psi, {"non-root position " + f.tmpl().node(psi->pos).path +
                            " taken as its own root"}};
}

LengthRoot root_of(const Operator& f, Formula psi) {
  if (psi->kind == FK::Piece) {
    if (psi->op != f.id()) return {std_num(0), psi, {}};
    return piece_root(f, psi);
  }
  const Template& t = f.tmpl();
  if (f.accessible()) {
    Slots s;
    if (!match(t, 0, psi, s)) return {std_num(0), psi, {}};
    Formula phi = s.p;
    Formula cur = s.q;
    std::int64_t k = 1;
    while (true) {
      if (cur == phi) return {std_num(k), phi, {}};
      if (cur->kind == FK::Piece && cur->op == f.id() && cur->pos == 0 && cur->a == phi)
        return {add_std(cur->index, k), phi, {}};
      Slots s2;
      s2.p = phi;
      if (!match(t, 0, cur, s2)) return {std_num(0), psi, {}};
      cur = s2.q;
      ++k;
    }
  }
  std::int64_t k = 0;
  Formula cur = psi;
  while (true) {
    if (cur->kind == FK::Piece) {
      LengthRoot r = root_of(f, cur);
      r.length = add_std(r.length, k);
      return r;
    }
    Slots s;
    if (!match(t, 0, cur, s)) break;
    cur = s.q;
    ++k;
  }
  return {std_num(k), cur, {}};
}

}  // namespace

LengthRoot f_length_root(const Operator& f, Formula psi) { return root_of(f, psi); }

std::vector<PosClass> classify_positions(const Operator& f) {
  if (!f.local()) fail("nonlocal", "position classification needs a local operator");
  auto out = classify_positions_at(f.tmpl(), theta_value(f.theta()));
  // Validated local laws force the root to behave as q.
  if (out[0] != PosClass::Q) fail("internal", "root position is not classified as q");
  return out;
}

bool check_additivity(const Operator& f, std::int64_t x, std::int64_t y, Formula phi) {
  if (f.accessible()) fail("accessible", "additivity only holds for additive operators");
  if (x < 0 || y < 0) fail("underflow", "iterate counts must be non-negative");
  if (x + y > f.unfold_bound()) fail("bound", "x + y exceeds the unfolding bound");
  return unfold(f, x + y, phi) == unfold(f, x, unfold(f, y, phi));
}

}  // namespace satlab

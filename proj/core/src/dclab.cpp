#include "satlab/dclab.hpp"

#include <functional>

#include "satlab/error.hpp"

namespace satlab {

namespace {

bool need(const SatClass& s, Formula f) {
  auto v = s.truth(f);
  if (!v) fail("missing", "no value for " + to_sexpr(f, &s.universe()));
  return *v;
}

}  // namespace

SIndResult sind_check(const SatClass& s, const SentenceSequence& seq) {
  SIndResult r;
  if (seq.empty()) return r;
  std::vector<bool> v;
  for (Formula f : seq) {
    if (!is_sentence(f)) fail("sentence", "sequence entries must be sentences");
    v.push_back(need(s, f));
  }
  if (!v[0]) {
    r.premise = false;
    r.break_index = 0;
  }
  for (std::size_t i = 1; i < v.size() && r.premise; ++i)
    if (v[i - 1] && !v[i]) {
      r.premise = false;
      r.break_index = i;
    }
  bool all = std::all_of(v.begin(), v.end(), [](bool b) { return b; });
  r.holds = !r.premise || all;
  return r;
}

Formula left_disjunction(const SentenceSequence& seq, std::size_t last) {
  if (last >= seq.size()) fail("range", "disjunction index beyond the sequence");
  Formula cur = seq[0];
  for (std::size_t i = 1; i <= last; ++i) cur = f_or(cur, seq[i]);
  return cur;
}

DCResult dc_check(const SatClass& s, const GapNumber& c) {
  DCResult r;
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
    if (!(std_num(static_cast<std::int64_t>(parts.size()) - 1) <= c)) continue;
    bool any = false;
    for (Formula p : parts) any = need(s, p) || any;
    ++r.checked;
    if (any != v && r.ok) {
      r.ok = false;
      r.witness = g;
    }
  }
  if (!c.standard())
    for (const auto& [rk, rv] : s.ray_table()) {
      if (rk.ray.hat || rk.ray.pos != 0 || rk.ray.gap > c.gap) continue;
      auto op = Operator::by_id(rk.ray.op);
      if (op->tmpl().to_string() != "(or q p)") continue;
      bool base = need(s, rk.ray.base);
      ++r.checked;
      // F(x, phi) is the disjunction of x+1 copies of phi.
      if ((rv.even != base || rv.odd != base) && r.ok) {
        r.ok = false;
        r.witness = ray_member(rk.ray, 0);
      }
    }
  return r;
}

// --------------------------------------------------------------- staging

std::vector<Formula> staging_sentences(const SentenceSequence& seq) {
  std::vector<Formula> out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    Formula d = left_disjunction(seq, i);
    out.push_back(d);
    out.push_back(f_not(d));
    out.push_back(f_not(seq[i]));
  }
  return out;
}

SatClass staging_class(const SentenceSequence& seq, const std::vector<bool>& values, const GapUniverse& u) {
  if (seq.size() != values.size()) fail("range", "one value per disjunct is required");
  SatClass s(u);
  bool acc = false;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!is_sentence(seq[i])) fail("sentence", "sequence entries must be sentences");
    if (auto prior = s.truth(seq[i]); prior && *prior != values[i])
      fail("conflict", "repeated disjunct with two values");
    s.set(seq[i], {}, values[i]);
    s.set(f_not(seq[i]), {}, !values[i]);
    acc = acc || values[i];
    Formula d = left_disjunction(seq, i);
    s.set(d, {}, acc);
    s.set(f_not(d), {}, !acc);
  }
  for (const auto& [k, v] : s.table()) {
    (void)v;
    s.domain().insert(k.first);
  }
  return s;
}

namespace {

class Stager {
 public:
  Stager(const SatClass& s, const SentenceSequence& seq) : s_(s), seq_(seq) {}
  DerivationTrace trace;

  std::string name(Formula f) const { return to_infix(f, &s_.universe()); }
  std::string t(Formula f) const { return "T(" + name(f) + ")"; }

  Formula psi(std::int64_t last) const { return left_disjunction(seq_, static_cast<std::size_t>(last)); }

  void step(const std::string& rule, std::vector<std::string> prem, const std::string& concl, bool ok) {
    if (!ok) fail("unsound", "derivation step fails under the class: " + concl);
    trace.steps.push_back({rule, std::move(prem), concl, ok});
  }

  // T(¬(A ∨ B)) ≡ T(¬A) ∧ T(¬B), checked entry by entry.
  bool neg_or(Formula disj) {
    Formula a = disj->a, b = disj->b;
    bool nd = need(s_, f_not(disj)), na = need(s_, f_not(a)), nb = need(s_, f_not(b));
    bool d = need(s_, disj), av = need(s_, a), bv = need(s_, b);
    bool local = (nd == !d) && (na == !av) && (nb == !bv) && (d == (av || bv));
    return local && nd == (na && nb);
  }
  bool pos_or(Formula disj) {
    bool d = need(s_, disj), av = need(s_, disj->a), bv = need(s_, disj->b);
    return d == (av || bv);
  }

  // Backward direction: no disjunct true.
  void backward(std::int64_t c, std::int64_t b) {
    std::int64_t d = b / c, r = b % c;
    for (std::int64_t j = 0; j <= b; ++j)
      step("CS3", {t(seq_[static_cast<std::size_t>(j)]) + " = F"}, t(f_not(seq_[static_cast<std::size_t>(j)])),
           need(s_, f_not(seq_[static_cast<std::size_t>(j)])));
    auto theta = [&](std::int64_t i) { return i <= d ? psi(i * c) : psi(b); };
    step("definition", {t(f_not(seq_[0]))}, t(f_not(theta(0))), need(s_, f_not(theta(0))));
    std::vector<Formula> outer;
    outer.push_back(f_not(theta(0)));
    for (std::int64_t i = 0; i <= d; ++i) {
      std::int64_t cp = i < d ? c : r;
      std::vector<Formula> inner{f_not(psi(i * c))};
      for (std::int64_t k = 0; k < cp; ++k) {
        Formula nxt = psi(i * c + k + 1);
        Formula phi = seq_[static_cast<std::size_t>(i * c + k + 1)];
        step("CS2/CS3", {t(f_not(psi(i * c + k))), t(f_not(phi))}, t(f_not(nxt)),
             neg_or(nxt) && need(s_, f_not(nxt)));
        inner.push_back(f_not(nxt));
      }
      SIndResult sr = sind_check(s_, inner);
      std::vector<std::string> prem;
      for (Formula g : inner) prem.push_back(t(g));
      step("SInd", prem, t(f_not(theta(i + 1))), sr.holds && sr.premise && need(s_, f_not(theta(i + 1))));
      outer.push_back(f_not(theta(i + 1)));
    }
    SIndResult so = sind_check(s_, outer);
    std::vector<std::string> prem;
    for (Formula g : outer) prem.push_back(t(g));
    step("SInd", prem, t(f_not(psi(b))), so.holds && so.premise);
    step("CS3", {t(f_not(psi(b)))}, t(psi(b)) + " = F", !need(s_, psi(b)));
    trace.disjunction_true = false;
    trace.some_disjunct_true = false;
  }

  // Forward direction from the least true disjunct e.
  void forward(std::int64_t c, std::int64_t b, std::int64_t e) {
    Formula pe = psi(e);
    if (e == 0) step("definition", {t(seq_[0])}, t(pe), need(s_, pe));
    else step("CS2", {t(seq_[static_cast<std::size_t>(e)])}, t(pe), pos_or(pe) && need(s_, pe));
    std::int64_t dp = (b - e) / c, rp = (b - e) % c;
    auto theta = [&](std::int64_t j) { return j <= dp ? psi(e + j * c) : psi(b); };
    std::vector<Formula> outer{theta(0)};
    for (std::int64_t j = 0; j <= dp; ++j) {
      std::int64_t cp = j < dp ? c : rp;
      std::vector<Formula> inner{psi(e + j * c)};
      for (std::int64_t k = 0; k < cp; ++k) {
        Formula nxt = psi(e + j * c + k + 1);
        step("CS2", {t(psi(e + j * c + k))}, t(nxt), pos_or(nxt) && need(s_, nxt));
        inner.push_back(nxt);
      }
      SIndResult sr = sind_check(s_, inner);
      std::vector<std::string> prem;
      for (Formula g : inner) prem.push_back(t(g));
      step("SInd", prem, t(theta(j + 1)), sr.holds && sr.premise && need(s_, theta(j + 1)));
      outer.push_back(theta(j + 1));
    }
    SIndResult so = sind_check(s_, outer);
    std::vector<std::string> prem;
    for (Formula g : outer) prem.push_back(t(g));
    step("SInd", prem, t(psi(b)), so.holds && so.premise && need(s_, psi(b)));
    trace.disjunction_true = true;
    trace.some_disjunct_true = true;
  }

 private:
  const SatClass& s_;
  const SentenceSequence& seq_;
};

}  // namespace

DerivationTrace multiplication_staging(const SatClass& s, std::int64_t c, std::int64_t b,
                                       const SentenceSequence& seq) {
  if (c < 1) fail("range", "c must be positive");
  if (b < 0 || b > c * c) fail("range", "b must lie in [0, c^2]");
  if (static_cast<std::int64_t>(seq.size()) != b + 1) fail("range", "sequence must have length b + 1");
  for (Formula f : seq)
    if (!is_sentence(f)) fail("sentence", "sequence entries must be sentences");
  DCResult dc = dc_check(s, std_num(c));
  if (!dc.ok)
    fail("hypothesis", "c is not in the disjunctively correct set: " + to_sexpr(*dc.witness, &s.universe()));
  Stager st(s, seq);
  std::int64_t e = -1;
  for (std::int64_t i = 0; i <= b; ++i)
    if (need(s, seq[static_cast<std::size_t>(i)])) {
      e = i;
      break;
    }
  if (e < 0) st.backward(c, b);
  else st.forward(c, b, e);
  st.trace.steps.push_back({"conclusion",
                            {st.t(left_disjunction(seq, static_cast<std::size_t>(b))) + " = " +
                             (st.trace.disjunction_true ? "T" : "F")},
                            "T(disjunction) ≡ ∃i≤b T(phi_i)", true});
  return st.trace;
}

// ------------------------------------------------------ correctness tree

Formula equivalence(Formula a, Formula b) { return f_or(f_and(a, b), f_and(f_not(a), f_not(b))); }

Formula star_of(Formula label) {
  if (label->kind == FK::Not) {
    Formula e = label->a;
    if (e->kind == FK::Or && e->a->kind == FK::And && e->b->kind == FK::And) {
      Formula a = e->a->a, b = e->a->b;
      if (e->b->a == f_not(a) && e->b->b == f_not(b)) return b;
    }
  }
  fail("malformed", "label is not of the form ¬(A ≡ B)");
}

std::vector<GapNumber> halving_sequence(const GapNumber& a0, int height, const GapUniverse& u) {
  std::vector<GapNumber> a{a0};
  for (int n = 0; n < height; ++n) {
    const GapNumber& x = a.back();
    if (x.standard()) {
      a.push_back(std_num(x.offset / 2));
    } else {
      auto h = u.apply_map("half", x.gap);
      if (!h) fail("undeclared_half", "no declared halving for gap " + u.label(x.gap));
      a.push_back(GapNumber{*h, x.offset / 2});
    }
  }
  return a;
}

LabelledTree build_correctness_tree(const Operator& f, const std::vector<GapNumber>& a, Formula phi,
                                    int height, const SatClass* s) {
  if (f.accessible()) fail("accessible", "the correctness tree needs an additive operator");
  if (height < 0) fail("range", "height must be non-negative");
  if (static_cast<int>(a.size()) < height + 1) fail("range", "need a[0..height]");
  for (int n = 0; n < height; ++n)
    if (a[static_cast<std::size_t>(n)].standard() && a[static_cast<std::size_t>(n + 1)].standard() &&
        a[static_cast<std::size_t>(n + 1)].offset != a[static_cast<std::size_t>(n)].offset / 2)
      fail("not_halving", "a[n+1] must be floor(a[n]/2)");
  LabelledTree t;
  t.height = height;
  auto F = [&](const GapNumber& x, Formula g) { return mk_piece(f, 0, x, g); };
  t.labels[""] = f_not(equivalence(F(a[0], phi), phi));
  t.star[""] = star_of(t.labels[""]);
  std::vector<std::string> level{""};
  for (int n = 0; n < height; ++n) {
    std::vector<std::string> next;
    const GapNumber& an = a[static_cast<std::size_t>(n + 1)];
    for (const auto& sn : level) {
      Formula ss = t.star[sn];
      t.labels[sn + "0"] = f_not(equivalence(F(an, ss), ss));
      t.labels[sn + "1"] = f_not(equivalence(F(an, F(an, ss)), F(an, ss)));
      for (const char* b : {"0", "1"}) {
        t.star[sn + b] = star_of(t.labels[sn + b]);
        next.push_back(sn + b);
      }
    }
    level = std::move(next);
  }
  if (!s) return t;
  auto label_value = [&](Formula l) -> std::optional<bool> {
    if (auto v = s->truth(l)) return v;
    Formula eq = l->a;
    auto av = s->truth(eq->a->a), bv = s->truth(eq->a->b);
    if (!av || !bv) return std::nullopt;
    return *av != *bv;
  };
  for (const auto& [k, l] : t.labels) {
    t.values[k] = label_value(l);
    if (t.values[k] && *t.values[k]) t.true_labels.push_back(k);
  }
  for (const auto& [k, l] : t.labels) {
    (void)l;
    if (static_cast<int>(k.size()) >= height) continue;
    auto pv = t.values[k];
    if (!pv || !*pv) continue;
    auto c0 = t.values[k + "0"], c1 = t.values[k + "1"];
    if (c0 && c1 && !*c0 && !*c1) t.alternative_failures.push_back(k);
  }
  std::function<std::string(const std::string&)> branch = [&](const std::string& k) -> std::string {
    auto v = t.values[k];
    if (!v || !*v) return "";
    std::string best = k;
    if (static_cast<int>(k.size()) < height)
      for (const char* b : {"0", "1"}) {
        std::string sub = branch(k + b);
        if (!sub.empty() && sub.size() > best.size()) best = sub;
      }
    return best;
  };
  t.max_true_branch = t.values[""] && *t.values[""] ? branch("") : "-";
  return t;
}

// ------------------------------------------------------------------ JSON

nlohmann::json to_json(const DerivationTrace& t) {
  nlohmann::json j;
  j["steps"] = nlohmann::json::array();
  for (const auto& s : t.steps)
    j["steps"].push_back(
        {{"rule", s.rule}, {"premises", s.premises}, {"conclusion", s.conclusion}, {"verified", s.verified}});
  j["disjunction_true"] = t.disjunction_true;
  j["some_disjunct_true"] = t.some_disjunct_true;
  return j;
}

nlohmann::json to_json(const LabelledTree& t, const GapUniverse* u) {
  nlohmann::json j;
  j["height"] = t.height;
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [k, l] : t.labels) {
    std::string key = k.empty() ? "ε" : k;
    nlohmann::json e;
    e["label"] = to_sexpr(l, u);
    e["star"] = to_sexpr(t.star.at(k), u);
    auto it = t.values.find(k);
    if (it != t.values.end()) e["value"] = it->second ? nlohmann::json(*it->second) : nlohmann::json();
    labels[key] = e;
  }
  j["labels"] = labels;
  if (!t.values.empty()) {
    j["true_labels"] = t.true_labels;
    j["max_true_branch"] = t.max_true_branch;
    j["alternative_failures"] = t.alternative_failures;
  }
  return j;
}

}  // namespace satlab

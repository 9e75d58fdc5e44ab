#include "satlab/closure.hpp"

#include <deque>
#include <functional>
#include <sstream>

#include "satlab/error.hpp"

namespace satlab {

int cmp_ray_key(const RayKey& a, const RayKey& b) {
  if (a.op != b.op) return a.op < b.op ? -1 : 1;
  if (a.gap != b.gap) return a.gap < b.gap ? -1 : 1;
  if (a.pos != b.pos) return a.pos < b.pos ? -1 : 1;
  if (a.hat != b.hat) return a.hat ? 1 : -1;
  return cmp_formula(a.base, b.base);
}

RayKey ray_key_of(Formula piece) {
  if (!is_piece(piece) || piece->index.standard())
    fail("internal", "ray key needs a nonstandard symbolic node");
  return RayKey{piece->op, piece->a, piece->pos, piece->index.gap, is_hat_piece(piece)};
}

Formula ray_member(const RayKey& k, std::int64_t offset) {
  auto f = Operator::by_id(k.op);
  return mk_piece(*f, k.pos, GapNumber{k.gap, offset}, k.base, k.hat);
}

std::int64_t ray_rep(std::int64_t max_off) { return max_off == kFullGap ? 0 : max_off; }
std::int64_t ray_pred(std::int64_t max_off) { return max_off == kFullGap ? kFullGap : max_off - 1; }

// ------------------------------------------------------------- ClosedSet

bool ClosedSet::contains(Formula f) const {
  if (is_piece(f) && !f->index.standard()) return contains_ray(ray_key_of(f), f->index.offset);
  return explicit_.count(f) > 0;
}

bool ClosedSet::contains_ray(const RayKey& k, std::int64_t max_off) const {
  auto it = rays_.find(k);
  return it != rays_.end() && it->second >= max_off;
}

void ClosedSet::insert(Formula f) {
  if (is_piece(f) && !f->index.standard()) {
    insert_ray(ray_key_of(f), f->index.offset);
    return;
  }
  explicit_.insert(f);
}

void ClosedSet::insert_ray(const RayKey& k, std::int64_t max_off) {
  auto [it, fresh] = rays_.emplace(k, max_off);
  if (!fresh && it->second < max_off) it->second = max_off;
}

bool ClosedSet::subset_of(const ClosedSet& o) const {
  for (Formula f : explicit_)
    if (!o.contains(f)) return false;
  for (const auto& [k, m] : rays_)
    if (!o.contains_ray(k, m)) return false;
  return true;
}

ClosedSet ClosedSet::united(const ClosedSet& o) const {
  ClosedSet r = *this;
  for (Formula f : o.explicit_) r.explicit_.insert(f);
  for (const auto& [k, m] : o.rays_) r.insert_ray(k, m);
  for (Formula g : o.generators_) r.generators_.push_back(g);
  if (r.op_ < 0) r.op_ = o.op_;
  return r;
}

ClosedSet ClosedSet::intersected(const ClosedSet& o) const {
  ClosedSet r;
  r.op_ = op_;
  for (Formula f : explicit_)
    if (o.explicit_.count(f)) r.explicit_.insert(f);
  for (const auto& [k, m] : rays_) {
    auto it = o.rays_.find(k);
    if (it != o.rays_.end()) r.rays_[k] = std::min(m, it->second);
  }
  return r;
}

// -------------------------------------------------------------- closure

std::vector<Formula> immediate_subformulas(Formula f) {
  if (is_piece(f)) return piece_children(f);
  return children(f);
}

void ray_subformulas(const RayKey& k, std::int64_t max_off, std::vector<Formula>& out,
                     std::vector<std::pair<RayKey, std::int64_t>>& out_rays) {
  auto op = Operator::by_id(k.op);
  const Template& t = op->tmpl();
  for (int c : t.node(k.pos).kids) {
    switch (t.node(c).kind) {
      case TNodeKind::P:
        out.push_back(k.base);
        break;
      case TNodeKind::Q:
        out_rays.push_back({RayKey{k.op, k.base, 0, k.gap, k.hat}, ray_pred(max_off)});
        break;
      default:
        out_rays.push_back({RayKey{k.op, k.base, c, k.gap, k.hat}, max_off});
    }
  }
}

std::optional<Formula> f_root_edge(const Operator& f, Formula psi) {
  try {
    LengthRoot lr = f_length_root(f, psi);
    if (lr.root != psi) return lr.root;
  } catch (const Error&) {
  }
  return std::nullopt;
}

namespace {

std::optional<Formula> ray_root(const Operator& f, const RayKey& k, std::int64_t max_off) {
  if (k.op != f.id() || k.hat) return std::nullopt;
  return f_root_edge(f, ray_member(k, ray_rep(max_off)));
}

}  // namespace

ClosedSet cl(const ClosedSet& x, const Operator* f) {
  ClosedSet out;
  if (f) out.set_op(f->id());
  else out.set_op(x.op());
  for (Formula g : x.generators()) out.add_generator(g);

  std::deque<Formula> todo;
  std::deque<RayKey> ray_todo;
  auto push = [&](Formula g) {
    if (is_piece(g) && !g->index.standard()) {
      RayKey k = ray_key_of(g);
      if (!out.contains_ray(k, g->index.offset)) {
        out.insert_ray(k, g->index.offset);
        ray_todo.push_back(k);
      }
      return;
    }
    if (out.contains(g)) return;
    out.insert(g);
    todo.push_back(g);
  };
  auto push_ray = [&](const RayKey& k, std::int64_t m) {
    if (out.contains_ray(k, m)) return;
    out.insert_ray(k, m);
    ray_todo.push_back(k);
  };
  for (Formula g : x.explicit_elements()) push(g);
  for (const auto& [k, m] : x.rays()) push_ray(k, m);

  while (!todo.empty() || !ray_todo.empty()) {
    if (!todo.empty()) {
      Formula g = todo.front();
      todo.pop_front();
      for (Formula c : immediate_subformulas(g)) push(c);
      if (f)
        if (auto r = f_root_edge(*f, g)) push(*r);
      continue;
    }
    RayKey k = ray_todo.front();
    ray_todo.pop_front();
    std::int64_t m = out.rays().at(k);
    std::vector<Formula> kids;
    std::vector<std::pair<RayKey, std::int64_t>> kid_rays;
    ray_subformulas(k, m, kids, kid_rays);
    for (Formula c : kids) push(c);
    for (const auto& [kk, mm] : kid_rays) push_ray(kk, mm);
    if (f)
      if (auto r = ray_root(*f, k, m)) push(*r);
  }
  return out;
}

ClosedSet cl(const std::vector<Formula>& xs, const Operator* f) {
  ClosedSet seed;
  for (Formula g : xs) {
    seed.insert(g);
    seed.add_generator(g);
  }
  return cl(seed, f);
}

RankFunction rank(const FormulaSet& c, const Operator* f) {
  RankFunction r;
  std::set<Formula> active;
  std::function<int(Formula)> go = [&](Formula g) -> int {
    auto it = r.find(g);
    if (it != r.end()) return it->second;
    if (!active.insert(g).second) fail("internal", "cycle in the modified subformula relation");
    int best = 0;
    std::vector<Formula> preds = immediate_subformulas(g);
    if (f)
      if (auto root = f_root_edge(*f, g)) preds.push_back(*root);
    for (Formula p : preds)
      if (c.count(p)) best = std::max(best, go(p) + 1);
    active.erase(g);
    r[g] = best;
    return best;
  };
  for (Formula g : c) go(g);
  return r;
}

// ------------------------------------------------------------------ Z_d

namespace {

constexpr std::int64_t kMaxExplicitIterates = 100000;

void emit_below(ClosedSet& out, const Operator& f, const GapNumber& a, Formula phi,
                const GapNumber& d) {
  if (d.standard() && d.offset == 0) return;  // 0 < a - c < n*0 is empty
  if (a.standard()) {
    if (a.offset > kMaxExplicitIterates)
      fail("unrepresentable", "too many standard iterates below " + std::to_string(a.offset));
    for (std::int64_t c = 0; c < a.offset; ++c) out.insert(mk_piece(f, 0, std_num(c), phi));
    return;
  }
  if (!d.standard() && d.gap >= a.gap)
    fail("unrepresentable",
         "bound reaches every lower iterate, including the whole standard segment");
  out.insert_ray(RayKey{f.id(), phi, 0, a.gap, false}, ray_pred(a.offset));
}

}  // namespace

ClosedSet d_closure(const ClosedSet& z, const GapNumber& d, const Operator& f) {
  if (f.accessible()) return cl(z, &f);
  ClosedSet out;
  out.set_op(f.id());
  for (Formula g : z.explicit_elements()) {
    LengthRoot lr = f_length_root(f, g);
    if (lr.length > std_num(0)) emit_below(out, f, lr.length, lr.root, d);
  }
  for (const auto& [k, m] : z.rays()) {
    if (k.op != f.id() || k.pos != 0 || k.hat) continue;
    LengthRoot lr = f_length_root(f, ray_member(k, ray_rep(m)));
    GapNumber a = lr.length;
    if (m == kFullGap) a.offset = kFullGap;
    emit_below(out, f, a, lr.root, d);
  }
  return out;
}

// ------------------------------------------------------------ rendering

std::string ray_to_string(const RayKey& k, std::int64_t max_off, const GapUniverse* u) {
  const auto& e = catalog_get(k.op);
  std::string gap = u ? u->label(k.gap) : "#" + std::to_string(k.gap);
  std::string off = max_off == kFullGap ? "*" : std::to_string(max_off);
  return std::string(k.hat ? "hat-ray " : "ray ") + e.name + " " +
         e.paths[static_cast<std::size_t>(k.pos)] + " " + gap + "<=" + off + " " +
         to_sexpr(k.base, u);
}

nlohmann::json to_json(const ClosedSet& s, const GapUniverse* u) {
  nlohmann::json j;
  j["explicit"] = nlohmann::json::array();
  for (Formula f : s.explicit_elements()) j["explicit"].push_back(to_sexpr(f, u));
  j["rays"] = nlohmann::json::array();
  for (const auto& [k, m] : s.rays()) {
    const auto& e = catalog_get(k.op);
    nlohmann::json r;
    r["op"] = e.name;
    r["pos"] = e.paths[static_cast<std::size_t>(k.pos)];
    r["gap"] = u ? u->label(k.gap) : std::to_string(k.gap);
    r["base"] = to_sexpr(k.base, u);
    r["hat"] = k.hat;
    if (m == kFullGap) r["max_offset"] = "full";
    else r["max_offset"] = m;
    j["rays"].push_back(r);
  }
  j["generators"] = nlohmann::json::array();
  for (Formula g : s.generators()) j["generators"].push_back(to_sexpr(g, u));
  if (s.op() >= 0) j["operator"] = catalog_get(s.op()).name;
  return j;
}

ClosedSet closed_set_from_json(const nlohmann::json& j, const GapUniverse* u) {
  ClosedSet s;
  try {
    if (j.contains("operator")) {
      auto op = catalog_find(j.at("operator").get<std::string>());
      if (!op) fail("unknown_op", "unknown operator in closed set");
      s.set_op(*op);
    }
    if (j.contains("explicit"))
      for (const auto& e : j.at("explicit")) s.insert(parse_formula(e.get<std::string>(), u));
    if (j.contains("generators"))
      for (const auto& e : j.at("generators")) s.add_generator(parse_formula(e.get<std::string>(), u));
    if (j.contains("rays"))
      for (const auto& r : j.at("rays")) {
        RayKey k;
        auto op = catalog_find(r.at("op").get<std::string>());
        if (!op) fail("unknown_op", "unknown operator in ray");
        k.op = *op;
        k.pos = catalog_find_path(k.op, r.at("pos").get<std::string>());
        const auto& g = r.at("gap");
        k.gap = u ? u->gap_index(g.get<std::string>()) : std::stoi(g.get<std::string>());
        if (k.gap < 1) fail("invalid_ray", "rays live in nonstandard gaps");
        k.base = parse_formula(r.at("base").get<std::string>(), u);
        k.hat = r.value("hat", false);
        const auto& m = r.at("max_offset");
        s.insert_ray(k, m.is_string() ? kFullGap : m.get<std::int64_t>());
      }
  } catch (const nlohmann::json::exception& e) {
    fail("json", std::string("malformed closed set: ") + e.what());
  }
  return s;
}

std::string to_dot(const ClosedSet& s, const Operator* f, const GapUniverse* u) {
  std::ostringstream o;
  std::map<std::string, int> ids;
  auto node = [&](const std::string& label) {
    auto [it, fresh] = ids.emplace(label, static_cast<int>(ids.size()));
    if (fresh) {
      std::string esc;
      for (char c : label) {
        if (c == '"' || c == '\\') esc += '\\';
        esc += c;
      }
      o << "  n" << it->second << " [label=\"" << esc << "\"];\n";
    }
    return it->second;
  };
  auto label_of = [&](Formula g) {
    if (is_piece(g) && !g->index.standard()) {
      RayKey k = ray_key_of(g);
      auto it = s.rays().find(k);
      return ray_to_string(k, it == s.rays().end() ? g->index.offset : it->second, u);
    }
    return to_sexpr(g, u);
  };
  o << "digraph closure {\n";
  for (Formula g : s.explicit_elements()) {
    int to = node(label_of(g));
    for (Formula c : immediate_subformulas(g))
      if (s.contains(c)) o << "  n" << node(label_of(c)) << " -> n" << to << ";\n";
    if (f)
      if (auto r = f_root_edge(*f, g))
        if (s.contains(*r)) o << "  n" << node(label_of(*r)) << " -> n" << to << " [style=dashed];\n";
  }
  for (const auto& [k, m] : s.rays()) {
    int to = node(ray_to_string(k, m, u));
    std::vector<Formula> kids;
    std::vector<std::pair<RayKey, std::int64_t>> kid_rays;
    ray_subformulas(k, m, kids, kid_rays);
    for (Formula c : kids) o << "  n" << node(label_of(c)) << " -> n" << to << ";\n";
    for (const auto& [kk, mm] : kid_rays) {
      auto it = s.rays().find(kk);
      o << "  n" << node(ray_to_string(kk, it == s.rays().end() ? mm : it->second, u)) << " -> n" << to
        << ";\n";
    }
  }
  o << "}\n";
  return o.str();
}

}  // namespace satlab

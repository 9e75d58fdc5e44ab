#include "satlab/gapnum.hpp"

#include <cctype>
#include <stdexcept>
#include <set>

#include "satlab/error.hpp"

namespace satlab {

GapUniverse GapUniverse::make(const std::vector<std::string>& labels, const MapSpec& maps,
                              std::int64_t std_cap) {
  GapUniverse u;
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty() || l == "standard") fail("invalid_label", "invalid gap label '" + l + "'");
    if (!std::isalpha(static_cast<unsigned char>(l[0])))
      fail("invalid_label", "gap label must start with a letter: '" + l + "'");
    if (!seen.insert(l).second) fail("duplicate", "duplicate gap label '" + l + "'");
  }
  if (std_cap < 0) fail("invalid_cap", "std_cap must be non-negative");
  u.labels_ = labels;
  u.std_cap_ = std_cap;
  u.map_spec_ = maps;
  for (const auto& [name, pairs] : maps) {
    auto& m = u.maps_[name];
    for (const auto& [from, to] : pairs) {
      int f = u.gap_index(from);
      int t = u.gap_index(to);
      if (f == 0 || t == 0)
        fail("invalid_map", "declared map '" + name + "' must act between nonstandard gaps");
      m[f] = t;
    }
    // Order compatibility over every declared pair.
    for (const auto& [g1, h1] : m)
      for (const auto& [g2, h2] : m)
        if (g1 < g2 && h1 > h2)
          fail("order_incompatible", "declared map '" + name + "' is not order-compatible on " +
                                         u.label(g1) + " < " + u.label(g2));
  }
  return u;
}

const std::string& GapUniverse::label(int gap) const {
  static const std::string standard = "standard";
  if (gap == 0) return standard;
  if (gap < 0 || gap > size()) fail("foreign_universe", "gap index out of range");
  return labels_[static_cast<std::size_t>(gap - 1)];
}

int GapUniverse::gap_index(const std::string& label) const {
  if (label == "standard") return 0;
  for (int i = 0; i < size(); ++i)
    if (labels_[static_cast<std::size_t>(i)] == label) return i + 1;
  fail("unknown_gap", "unknown gap label '" + label + "'");
}

GapNumber GapUniverse::num(const std::string& label, std::int64_t offset) const {
  GapNumber x{gap_index(label), offset};
  if (x.standard() && offset < 0) fail("underflow", "standard number must be non-negative");
  return x;
}

std::optional<int> GapUniverse::apply_map(const std::string& name, int gap) const {
  auto it = maps_.find(name);
  if (it == maps_.end()) return std::nullopt;
  auto jt = it->second.find(gap);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

GapNumber GapUniverse::parse(const std::string& text) const {
  if (text.empty()) fail("parse", "empty number");
  if (std::isdigit(static_cast<unsigned char>(text[0]))) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &used);
    } catch (const std::exception&) {
      fail("parse", "bad standard number '" + text + "'");
    }
    if (used != text.size()) fail("parse", "bad standard number '" + text + "'");
    return std_num(v);
  }
  std::size_t pos = text.find_first_of("+-");
  std::string label = text.substr(0, pos);
  for (char c : label)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      fail("parse", "bad gap label in '" + text + "'");
  std::int64_t off = 0;
  if (pos != std::string::npos) {
    std::size_t used = 0;
    try {
      off = std::stoll(text.substr(pos), &used);
    } catch (const std::exception&) {
      fail("parse", "bad offset in '" + text + "'");
    }
    if (used != text.size() - pos) fail("parse", "bad offset in '" + text + "'");
  }
  return num(label, off);
}

std::string GapUniverse::format(const GapNumber& x) const {
  if (x.standard()) return std::to_string(x.offset);
  std::string s = label(x.gap);
  if (x.offset > 0) s += "+" + std::to_string(x.offset);
  if (x.offset < 0) s += std::to_string(x.offset);
  return s;
}

GapNumber step(const GapNumber& x, std::int64_t k) {
  if (x.standard() && x.offset + k < 0) fail("underflow", "standard value shifted below zero");
  return GapNumber{x.gap, x.offset + k};
}

Ord compare(const GapUniverse& u, const GapNumber& x, const GapNumber& y) {
  if (!u.has_gap(x.gap) || !u.has_gap(y.gap)) fail("foreign_universe", "number outside universe");
  if (x < y) return Ord::lt;
  if (y < x) return Ord::gt;
  return Ord::eq;
}

std::optional<std::int64_t> gap_diff(const GapNumber& x, const GapNumber& y) {
  if (x.gap != y.gap) return std::nullopt;
  return x.offset - y.offset;
}

CutSpec CutSpec::below_gap(int g) {
  if (g < 1) fail("invalid_cut", "a cut must contain the standard segment");
  CutSpec c;
  c.kind = Kind::BelowGap;
  c.gap = g;
  return c;
}

CutSpec CutSpec::below(const GapNumber& x) {
  CutSpec c;
  c.kind = Kind::BelowNumber;
  c.bound = x;
  c.gap = x.gap;
  return c;
}

bool CutSpec::contains(const GapNumber& x) const {
  if (kind == Kind::BelowGap) return x.gap < gap;
  return x < bound;
}

std::optional<bool> CutSpec::gap_inside(int g) const {
  if (kind == Kind::BelowGap) return g < gap;
  if (g < bound.gap) return true;
  if (g > bound.gap) return false;
  return std::nullopt;
}

}  // namespace satlab

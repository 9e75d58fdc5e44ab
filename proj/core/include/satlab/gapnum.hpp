#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace satlab {

// gap 0 is the standard segment; gaps 1..n are the nonstandard Z-gaps in order.
struct GapNumber {
  int gap = 0;
  std::int64_t offset = 0;

  bool standard() const { return gap == 0; }
  auto operator<=>(const GapNumber&) const = default;
};

inline GapNumber std_num(std::int64_t n) { return GapNumber{0, n}; }

enum class Ord { lt, eq, gt };

class GapUniverse {
 public:
  using MapSpec = std::map<std::string, std::map<std::string, std::string>>;

  GapUniverse() = default;
  static GapUniverse make(const std::vector<std::string>& labels, const MapSpec& maps = {},
                          std::int64_t std_cap = 4);

  int size() const { return static_cast<int>(labels_.size()); }  // nonstandard gaps
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int gap) const;
  int gap_index(const std::string& label) const;
  bool has_gap(int gap) const { return gap >= 0 && gap <= size(); }
  std::int64_t std_cap() const { return std_cap_; }
  const MapSpec& map_spec() const { return map_spec_; }

  GapNumber num(const std::string& label, std::int64_t offset) const;
  // Image gap of a declared map (e.g. "half"), if declared for that gap.
  std::optional<int> apply_map(const std::string& name, int gap) const;

  // "g1+3", "g2-1", "g1", "7": the inverse of format().
  GapNumber parse(const std::string& text) const;
  std::string format(const GapNumber& x) const;

 private:
  std::vector<std::string> labels_;
  std::int64_t std_cap_ = 4;
  MapSpec map_spec_;
  std::map<std::string, std::map<int, int>> maps_;
};

GapNumber step(const GapNumber& x, std::int64_t k);
Ord compare(const GapUniverse& u, const GapNumber& x, const GapNumber& y);
std::optional<std::int64_t> gap_diff(const GapNumber& x, const GapNumber& y);

// A threshold cut: either everything strictly below a nonstandard gap, or
// everything strictly below a given number.
struct CutSpec {
  enum class Kind { BelowGap, BelowNumber };
  Kind kind = Kind::BelowGap;
  int gap = 1;
  GapNumber bound{};
  bool additive = false;

  static CutSpec below_gap(int g);
  static CutSpec below(const GapNumber& x);
  bool contains(const GapNumber& x) const;
  // Every element of gap g lies in the cut / above it. Mixed gaps give nullopt.
  std::optional<bool> gap_inside(int g) const;
};

}  // namespace satlab

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satlab/satclass.hpp"

namespace satlab {

using SentenceSequence = std::vector<Formula>;

struct SIndResult {
  bool holds = true;           // the induction implication
  bool premise = true;         // T(phi_0) and every step T(phi_y) -> T(phi_{y+1})
  std::optional<std::size_t> break_index;  // first i with T(phi_{i-1}) and not T(phi_i), or 0
};
SIndResult sind_check(const SatClass& s, const SentenceSequence& seq);

struct DCResult {
  bool ok = true;
  std::optional<Formula> witness;
  std::size_t checked = 0;
};
// Every valued left-nested disjunction of length at most c (standard), and,
// for nonstandard c, every valued iterate ray of an operator with template
// (or q p) in a gap not above c.
DCResult dc_check(const SatClass& s, const GapNumber& c);

Formula left_disjunction(const SentenceSequence& seq, std::size_t last);  // phi_0 v ... v phi_last

struct TraceStep {
  std::string rule;
  std::vector<std::string> premises;
  std::string conclusion;
  bool verified = false;
};
struct DerivationTrace {
  std::vector<TraceStep> steps;
  bool disjunction_true = false;  // the concluded value of T(phi_0 v ... v phi_b)
  bool some_disjunct_true = false;
};
// The sentences the staging argument consults: prefix disjunctions, their
// negations and the negated disjuncts.
std::vector<Formula> staging_sentences(const SentenceSequence& seq);
// Class on the staging sentences alone: the disjuncts take the given values
// and every disjunction and negation is valued compositionally from them.
SatClass staging_class(const SentenceSequence& seq, const std::vector<bool>& values, const GapUniverse& u);
DerivationTrace multiplication_staging(const SatClass& s, std::int64_t c, std::int64_t b,
                                       const SentenceSequence& seq);

struct LabelledTree {
  int height = 0;
  std::map<std::string, Formula> labels;  // "" is the root
  std::map<std::string, Formula> star;
  std::map<std::string, std::optional<bool>> values;  // filled when a class is supplied
  std::vector<std::string> true_labels;
  std::string max_true_branch;
  std::vector<std::string> alternative_failures;  // true parent with no true child
};
Formula equivalence(Formula a, Formula b);  // (a ∧ b) ∨ (¬a ∧ ¬b)
Formula star_of(Formula label);             // B from ¬(A ≡ B)
// a[n+1] = floor(a[n]/2) for standard entries; nonstandard entries use the
// declared "half" map of the universe.
std::vector<GapNumber> halving_sequence(const GapNumber& a0, int height, const GapUniverse& u);
LabelledTree build_correctness_tree(const Operator& f, const std::vector<GapNumber>& a, Formula phi,
                                    int height, const SatClass* s = nullptr);

nlohmann::json to_json(const DerivationTrace& t);
nlohmann::json to_json(const LabelledTree& t, const GapUniverse* u);

}  // namespace satlab

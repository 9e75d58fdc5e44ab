#pragma once

#include <set>
#include <utility>
#include <vector>

#include "satlab/satclass.hpp"

namespace satlab {

struct StructuralTemplate {
  Formula tmpl;
  TermSubst gamma;                          // template var -> original term
  std::vector<std::pair<int, int>> bound;   // (original, template) per binder, left to right
};

// Left-to-right first-use numbering: each binder and each maximal subterm free
// of bound variables takes the next index. Symbolic nodes become hat pieces
// over the template of their base; concrete numbering then starts above the
// variables those bases use.
const StructuralTemplate& structural_template(Formula f);
bool structurally_similar(Formula a, Formula b);

// v -> value of gamma(v) under a; hat pieces take the constant value of their base.
Assignment hat_assignment(Formula f, const Assignment& a);

VerificationReport is_regular(const SatClass& s);

// Gap sets decide membership of whole nonstandard gaps (indices from 1).
using GapSet = std::set<int>;

// Evaluates the formula with F(x) replaced by 0=0 (x in X) or 0=1, after
// unfolding every iterate of F above x inside x's gap.
bool x_satisfies(const Operator& f, Formula phi, const Assignment& a, const GapSet& x_gaps,
                 const GapNumber& x, const GapUniverse& u);

struct RegularResult {
  SatClass cls;
  VerificationReport report;  // verify_comp and is_regular on the output
};
RegularResult build_regular_class(const Operator& f, const GapSet& x_gaps, const std::vector<Formula>& fg,
                                  const SatClass* base, const GapUniverse& u);

}  // namespace satlab

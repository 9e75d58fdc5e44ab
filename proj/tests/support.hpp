#pragma once

// Hand-rolled generators and brute-force oracles shared by the test binaries.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "satlab/closure.hpp"
#include "satlab/operators.hpp"
#include "satlab/satclass.hpp"
#include "satlab/syntax.hpp"

namespace satlab::gen {

using Rng = std::mt19937_64;

inline int uniform(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }
inline bool coin(Rng& r, double p = 0.5) { return std::bernoulli_distribution(p)(r); }

inline Term random_term(Rng& r, int depth, int nvars) {
  int pick = uniform(r, 0, depth > 0 ? 4 : 2);
  if (pick == 0) return t_zero();
  if (pick == 1) return t_one();
  if (pick == 2) return nvars > 0 ? t_var(uniform(r, 0, nvars - 1)) : t_one();
  Term a = random_term(r, depth - 1, nvars), b = random_term(r, depth - 1, nvars);
  return pick == 3 ? t_plus(a, b) : t_times(a, b);
}

inline Formula random_formula(Rng& r, int depth, int nvars, bool quantifiers = true) {
  int hi = depth > 0 ? (quantifiers ? 5 : 3) : 0;
  switch (uniform(r, 0, hi)) {
    case 0: return f_eq(random_term(r, 1, nvars), random_term(r, 1, nvars));
    case 1: return f_not(random_formula(r, depth - 1, nvars, quantifiers));
    case 2: return f_or(random_formula(r, depth - 1, nvars, quantifiers), random_formula(r, depth - 1, nvars, quantifiers));
    case 3: return f_and(random_formula(r, depth - 1, nvars, quantifiers), random_formula(r, depth - 1, nvars, quantifiers));
    case 4: return f_exists(uniform(r, 0, nvars), random_formula(r, depth - 1, nvars + 1, quantifiers));
    default: return f_forall(uniform(r, 0, nvars), random_formula(r, depth - 1, nvars + 1, quantifiers));
  }
}

// A closed atomic sentence with a known value.
inline Formula random_atomic_sentence(Rng& r) {
  return f_eq(random_term(r, 2, 0), random_term(r, 2, 0));
}

// ------------------------------------------------------ template oracle
// Templates as plain trees, evaluated without the library.

struct TTree {
  char kind;  // 'p' 'q' '!' '|' '&' 'A'
  std::vector<TTree> kids;

  std::string sexpr() const {
    switch (kind) {
      case 'p': return "p";
      case 'q': return "q";
      case '!': return "(not " + kids[0].sexpr() + ")";
      case '|': return "(or " + kids[0].sexpr() + " " + kids[1].sexpr() + ")";
      case '&': return "(and " + kids[0].sexpr() + " " + kids[1].sexpr() + ")";
      default: return "(forall y " + kids[0].sexpr() + ")";
    }
  }
  bool eval(bool p, bool q) const {
    switch (kind) {
      case 'p': return p;
      case 'q': return q;
      case '!': return !kids[0].eval(p, q);
      case '|': return kids[0].eval(p, q) || kids[1].eval(p, q);
      case '&': return kids[0].eval(p, q) && kids[1].eval(p, q);
      default: return kids[0].eval(p, q);
    }
  }
  bool has(char leaf) const {
    if (kind == leaf) return true;
    for (const auto& k : kids)
      if (k.has(leaf)) return true;
    return false;
  }
  int depth() const {
    int d = 0;
    for (const auto& k : kids) d = std::max(d, k.depth() + 1);
    return d;
  }
};

inline std::vector<TTree> all_templates(int depth) {
  std::vector<TTree> out{{'p', {}}, {'q', {}}};
  if (depth == 0) return out;
  auto sub = all_templates(depth - 1);
  for (char u : {'!', 'A'})
    for (const auto& a : sub) out.push_back({u, {a}});
  for (char b : {'|', '&'})
    for (const auto& a : sub)
      for (const auto& c : sub) out.push_back({b, {a, c}});
  return out;
}

// ------------------------------------------------------- root oracle
// Every (x, theta) with F(x, theta) == psi, theta ranging over subformula
// occurrences of psi; the maximal x wins.

inline void all_subformulas(Formula f, std::vector<Formula>& out) {
  out.push_back(f);
  for (Formula c : children(f)) all_subformulas(c, out);
}

struct Decomposition {
  std::int64_t length = -1;
  Formula root = nullptr;
};

inline Decomposition brute_length_root(const Operator& f, Formula psi) {
  std::vector<Formula> subs;
  all_subformulas(psi, subs);
  Decomposition best;
  // Iterates are unfolded one template step at a time, with no symbolic cut-off.
  for (Formula th : subs) {
    if (f.local() && th != f.theta()) continue;
    Formula it = th;
    for (std::int64_t x = 0; it->size <= psi->size; ++x) {
      if (it == psi && x > best.length) best = {x, th};
      it = f.tmpl().instantiate(0, th, it);
    }
  }
  return best;
}

}  // namespace satlab::gen

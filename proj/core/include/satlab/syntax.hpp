#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satlab/gapnum.hpp"

namespace satlab {

// ---------------------------------------------------------------- terms
// Terms and formulas are hash-consed: structurally equal trees are the same
// pointer, so equality is pointer comparison and sharing is maximal.

enum class TK : std::uint8_t { Zero, One, Var, Plus, Times };

struct TermNode {
  TK kind;
  int var;
  const TermNode* a;
  const TermNode* b;
  std::size_t hash;
  std::uint64_t size;
  std::vector<int> vars;  // sorted, distinct
};
using Term = const TermNode*;

Term t_zero();
Term t_one();
Term t_var(int v);
Term t_plus(Term a, Term b);
Term t_times(Term a, Term b);

// ------------------------------------------------------------- formulas

enum class FK : std::uint8_t { Eq, Not, Or, And, Exists, Forall, Piece };

struct FormNode {
  FK kind;
  Term s = nullptr;                  // Eq left
  Term t = nullptr;                  // Eq right
  const FormNode* a = nullptr;       // unary child, binary left, Piece base
  const FormNode* b = nullptr;       // binary right
  int var = -1;                      // quantified variable; Piece: 1 marks a template piece
  int op = -1;                       // Piece: operator id
  int pos = -1;                      // Piece: template position (pre-order index)
  GapNumber index{};                 // Piece: iterate index
  std::size_t hash = 0;
  std::uint64_t id = 0;              // creation order, not canonical
  std::uint64_t size = 0;            // saturating node count
  std::int64_t compl_ = 0;           // complexity; -1 once a Piece occurs inside
  bool has_piece = false;
  std::vector<int> fv;               // sorted free variables
};
using Formula = const FormNode*;

Formula f_eq(Term s, Term t);
Formula f_not(Formula a);
Formula f_or(Formula a, Formula b);
Formula f_and(Formula a, Formula b);
Formula f_exists(int v, Formula a);
Formula f_forall(int v, Formula a);
// Raw symbolic node; canonical construction goes through operators::mk_piece.
// A hat piece stands for the structural template of the ordinary piece, with
// the template of the base in the base slot.
Formula f_piece_raw(int op, int pos, GapNumber index, Formula base, bool hat = false);
inline bool is_piece(Formula f) { return f->kind == FK::Piece; }
inline bool is_hat_piece(Formula f) { return f->kind == FK::Piece && f->var == 1; }

bool is_atomic(Formula f);
bool is_quant(Formula f);
bool is_binary(Formula f);
std::vector<Formula> children(Formula f);  // concrete children only (Piece: none)

// Total structural order, deterministic across runs.
int cmp_term(Term a, Term b);
int cmp_formula(Formula a, Formula b);
struct FormulaLess {
  bool operator()(Formula a, Formula b) const { return cmp_formula(a, b) < 0; }
};

// --------------------------------------------------------- assignments

using Assignment = std::map<int, GapNumber>;
int cmp_assignment(const Assignment& a, const Assignment& b);

// ------------------------------------------------------------ operations

std::int64_t complexity(Formula f);  // throws "nonstandard" when a Piece occurs
const std::vector<int>& free_vars(Formula f);
bool is_sentence(Formula f);
bool asn_check(Formula f, const Assignment& a);
Assignment restrict_assignment(const Assignment& a, Formula f);
int max_var(Formula f);  // -1 when no variable occurs at all
int max_var(Term t);

GapNumber eval_term(Term t, const Assignment& a);

using TermSubst = std::map<int, Term>;
Formula substitute(Formula f, const TermSubst& g, bool allow_rename = true);
Term substitute_term(Term t, const TermSubst& g);
// Assignments act as numeral substitutions (standard values only).
Formula substitute_assignment(Formula f, const Assignment& a);

Term numeral(const GapNumber& x);
Formula big_or(const std::vector<Formula>& fs);
Formula big_and(const std::vector<Formula>& fs);

bool alpha_equal(Formula a, Formula b);

// Bounded semantics over the gap universe: quantifiers range over
// witness_range(). Throws "nonstandard" on symbolic subformulas.
std::vector<GapNumber> witness_range(const GapUniverse& u, Formula quantified, const Assignment& a);
bool eval_bounded(const GapUniverse& u, Formula f, const Assignment& a);

// ------------------------------------------------------------- catalog
// Symbolic nodes need operator names, position paths and a normaliser for
// printing and parsing; the operators module fills these in.

struct PieceCatalogEntry {
  std::string name;
  std::vector<std::string> paths;
  std::function<Formula(Formula base, int pos, GapNumber index, bool hat)> make;
};
int catalog_register(PieceCatalogEntry e);
const PieceCatalogEntry& catalog_get(int op);
std::optional<int> catalog_find(const std::string& name);
int catalog_find_path(int op, const std::string& path);

// -------------------------------------------------------------- printing

std::string to_sexpr(Term t);
std::string to_sexpr(Formula f, const GapUniverse* u = nullptr);
std::string to_infix(Term t);
std::string to_infix(Formula f, const GapUniverse* u = nullptr);
std::string var_name(int v);

Formula parse_formula(const std::string& text, const GapUniverse* u = nullptr);
Term parse_term(const std::string& text);

}  // namespace satlab

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "satlab/syntax.hpp"

namespace satlab {

// ------------------------------------------------------------- templates

enum class TNodeKind : std::uint8_t { P, Q, Not, Or, And, Exists, Forall };

struct TemplateNode {
  TNodeKind kind;
  int var = -1;  // dummy variable of a quantifier node
  int parent = -1;
  std::vector<int> kids;
  std::string path;  // "/" for the root, "/0/1" for nested children
  bool has_p = false;  // subtree contains a p-leaf
  bool has_q = false;
  int end = 0;  // one past the last pre-order index of the subtree
};

// Propositional template Phi(p, q), stored in pre-order: position 0 is the root.
class Template {
 public:
  static Template parse(const std::string& text);
  static Template from_nodes(std::vector<TemplateNode> nodes);

  const std::vector<TemplateNode>& nodes() const { return nodes_; }
  const TemplateNode& node(int pos) const { return nodes_[static_cast<std::size_t>(pos)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool has_p() const { return nodes_[0].has_p; }
  bool has_q() const { return nodes_[0].has_q; }
  int complexity() const;  // nesting depth of connectives and quantifiers
  std::vector<int> dummy_vars() const;
  bool in_subtree(int root, int pos) const {
    return pos >= root && pos < node(root).end;
  }
  std::string to_string(int pos = 0) const;  // s-expression over p, q

  // Truth value with quantifiers transparent.
  bool eval(int pos, bool p, bool q) const;
  // Bits (T(0,0), T(0,1), T(1,0), T(1,1)) for a position.
  unsigned table(int pos = 0) const;

  Formula instantiate(int pos, Formula p, Formula q) const;

 private:
  std::vector<TemplateNode> nodes_;
  void finish();
};

// --------------------------------------------------------- classification

enum class TemplateKind : std::uint8_t { OrPQ, AndPQ, JustQ, Other };
enum class PosClass : std::uint8_t { Q, NotQ, Top, Bot };

struct TemplateClass {
  TemplateKind kind = TemplateKind::Other;
  bool q_monotone = false;
  bool accessible = false;
};

std::string to_string(TemplateKind k);
std::string to_string(PosClass c);

// Truth value of a local base: an atomic or negated atomic sentence.
bool theta_value(Formula theta);

// Throws with codes q_absent, complexity_zero, equiv_p, law_pq, law_not_pq,
// local_law or invalid_theta.
TemplateClass validate_template(const Template& t, std::optional<Formula> theta = std::nullopt);
// Class of the truth table alone (no law checks).
TemplateKind kind_of_table(unsigned table);
// Classification of every position once p is fixed to a truth value.
std::vector<PosClass> classify_positions_at(const Template& t, bool p);

// -------------------------------------------------------------- operators

class Operator {
 public:
  // Validates and registers; the returned id addresses symbolic nodes.
  static std::shared_ptr<const Operator> create(const std::string& name, Template t,
                                                std::optional<Formula> theta = std::nullopt,
                                                int unfold_bound = 16);
  // Negation operator Phi = ¬q (not an idempotent template; used for the
  // deep-negation sentences of the correctness-breaking stage).
  static std::shared_ptr<const Operator> negation();
  static std::shared_ptr<const Operator> by_id(int id);

  int id() const { return id_; }
  const std::string& name() const { return name_; }
  const Template& tmpl() const { return tmpl_; }
  bool local() const { return theta_.has_value(); }
  Formula theta() const;
  const TemplateClass& cls() const { return cls_; }
  bool accessible() const { return cls_.accessible; }
  bool additive() const { return !cls_.accessible; }
  bool q_monotone() const { return cls_.q_monotone; }
  int unfold_bound() const { return unfold_bound_; }
  int depth() const { return tmpl_.complexity(); }
  bool is_double_negation() const;
  const std::vector<std::string>& warnings() const { return warnings_; }
  int p_pos() const;  // first p-leaf, -1 if none
  int q_pos() const;  // first q-leaf

 private:
  Operator() = default;
  int id_ = -1;
  std::string name_;
  Template tmpl_;
  std::optional<Formula> theta_;
  TemplateClass cls_;
  int unfold_bound_ = 16;
  std::vector<std::string> warnings_;
  friend std::shared_ptr<const Operator> register_operator(std::shared_ptr<Operator>);
};
using OpPtr = std::shared_ptr<const Operator>;

// Canonical symbolic node for position `pos` of Phi(base, F(x-1, base)).
// Hat pieces never materialize; they stay symbolic down to index 0.
Formula mk_piece(const Operator& f, int pos, GapNumber x, Formula base, bool hat = false);
// F(x) (local) or F(x, phi) (nonlocal).
Formula iterate(const Operator& f, GapNumber x, std::optional<Formula> phi = std::nullopt);
Formula iterate(const Operator& f, std::int64_t x, std::optional<Formula> phi = std::nullopt);

// The template children of a symbolic node, canonicalized.
std::vector<Formula> piece_children(Formula piece);

struct LengthRoot {
  GapNumber length;
  Formula root;
  std::vector<std::string> warnings;
};
LengthRoot f_length_root(const Operator& f, Formula psi);

// Position table of a local operator relative to its base value.
std::vector<PosClass> classify_positions(const Operator& f);

bool check_additivity(const Operator& f, std::int64_t x, std::int64_t y, Formula phi);

}  // namespace satlab

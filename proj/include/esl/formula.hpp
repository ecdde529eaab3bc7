#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "esl/environment.hpp"
#include "esl/validation.hpp"

namespace esl {

/// An agent as it may appear in formulas: a base agent of the environment,
/// the strategic agent sigma(i) whose local state is i's strategy, or the
/// distinguished environment agent `env`.
struct ExtendedAgent {
  enum class Kind { Base, Sigma, Env };
  Kind kind = Kind::Base;
  std::string name;  // empty for Env

  static ExtendedAgent base(std::string n) { return {Kind::Base, std::move(n)}; }
  static ExtendedAgent sigma(std::string n) { return {Kind::Sigma, std::move(n)}; }
  static ExtendedAgent environment() { return {Kind::Env, {}}; }

  bool operator==(const ExtendedAgent&) const = default;
  auto operator<=>(const ExtendedAgent&) const = default;

  std::string to_string() const;
};

using AgentGroup = std::vector<ExtendedAgent>;  // kept sorted and deduplicated

enum class Op {
  // core
  True,
  False,
  Prop,     // text = proposition name
  Not,
  And,
  Or,
  Implies,
  AX,
  EX,
  AU,
  EU,
  Dk,       // distributed knowledge, group may be empty (universal modality)
  Ck,       // common knowledge
  Exists,   // text = variable
  LocEq,    // group[0] = agent, text = variable
  // derived, eliminated by expand_derived
  Knows,        // group[0] = agent
  Ek,           // everyone-knows
  LocEqGroup,   // text = variable
  Forall,       // text = variable
  AF,
  EF,
  AG,
  EG,
  CoalitionC,   // <<H>>_C{G} phi
  CoalitionD,
  CoalitionE,
};

class Formula;

struct FormulaNode {
  Op op;
  std::vector<Formula> kids;
  std::string text;                    // prop name or variable
  AgentGroup group;                    // knowledge group / loc agents
  std::vector<std::string> coalition;  // base agent names H of coalition macros
  std::size_t hash;
};

/// Immutable hash-consed formula. Structural equality is pointer equality:
/// identical subterms share one node. Default-constructed formulas are null
/// placeholders; every factory returns a valid one.
class Formula {
 public:
  Formula() = default;

  static Formula tt();
  static Formula ff();
  static Formula prop(const std::string& name);
  static Formula lnot(Formula f);
  static Formula land(Formula a, Formula b);
  static Formula lor(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula ax(Formula f);
  static Formula ex(Formula f);
  static Formula au(Formula a, Formula b);
  static Formula eu(Formula a, Formula b);
  static Formula af(Formula f);
  static Formula ef(Formula f);
  static Formula ag(Formula f);
  static Formula eg(Formula f);
  static Formula knows(ExtendedAgent who, Formula f);
  static Formula dk(AgentGroup group, Formula f);
  static Formula ck(AgentGroup group, Formula f);
  static Formula ek(AgentGroup group, Formula f);
  static Formula exists(const std::string& var, Formula f);
  static Formula forall(const std::string& var, Formula f);
  static Formula loc(ExtendedAgent who, const std::string& var);
  static Formula loc_group(AgentGroup group, const std::string& var);
  static Formula coalition(Op kind, std::vector<std::string> h, AgentGroup g, Formula f);

  bool valid() const { return node_ != nullptr; }
  Op op() const { return node_->op; }
  const Formula& kid(std::size_t i) const { return node_->kids[i]; }
  std::size_t arity() const { return node_->kids.size(); }
  const std::string& text() const { return node_->text; }
  const AgentGroup& group() const { return node_->group; }
  const std::vector<std::string>& coalition_members() const { return node_->coalition; }
  const FormulaNode* node() const { return node_; }

  bool operator==(const Formula& other) const { return node_ == other.node_; }
  bool operator!=(const Formula& other) const { return node_ != other.node_; }

  /// Concrete syntax; parse_formula(to_string(f)) == f.
  std::string to_string() const;

 private:
  explicit Formula(const FormulaNode* node) : node_(node) {}
  static Formula intern(FormulaNode node);
  const FormulaNode* node_ = nullptr;
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, int line, int column)
      : std::runtime_error(message + " at line " + std::to_string(line) + ", column " +
                           std::to_string(column)),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses the ASCII concrete syntax (see README). The result may contain
/// derived operators; run expand_derived before evaluation.
Formula parse_formula(const std::string& text);

/// Rewrites every derived operator into the core fragment: K/E into D,
/// EF/AF/AG/EG into until forms, forall into ~exists~, loc groups into
/// conjunctions and coalition macros into their exists/common-knowledge
/// encodings. Fresh variables are drawn from the reserved `_x<n>` space and
/// never collide with variables already present. Idempotent.
Formula expand_derived(Formula f, std::vector<std::string>* warnings = nullptr);

std::set<std::string> free_variables(Formula f);

/// Checks agents and propositions against `env` and (defensively) that the
/// formula stays in the supported temporal fragment.
ValidationReport check_well_formed(Formula f, const Environment& env);

}  // namespace esl

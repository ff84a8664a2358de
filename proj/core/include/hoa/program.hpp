#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hoa/terms.hpp"

namespace hoa {

/// Predicate indicator `name/arity`.
struct PredKey {
  std::string name;
  std::size_t arity = 0;
  friend auto operator<=>(const PredKey&, const PredKey&) = default;
  friend bool operator==(const PredKey&, const PredKey&) = default;
};
std::string to_string(const PredKey& key);

/// Identifier of a labeled assertion condition instance (`a3`) or of a
/// hypothetical condition (`h1`). `h0` marks conditions written in the
/// program itself.
struct Label {
  enum class Kind : std::uint8_t { Instance, Hyp };
  Kind kind = Kind::Instance;
  std::uint32_t index = 0;

  static Label instance(std::uint32_t i) { return {Kind::Instance, i}; }
  static Label hyp(std::uint32_t i) { return {Kind::Hyp, i}; }
  static Label program_origin() { return {Kind::Hyp, 0}; }

  friend auto operator<=>(const Label&, const Label&) = default;
  friend bool operator==(const Label&, const Label&) = default;
};
std::string to_string(const Label& label);

struct SourceSpan {
  std::string file;
  int line = 0;
  int col = 0;
};
std::string to_string(const SourceSpan& span);

// ---------------------------------------------------------------------------
// Literals

/// Equations and ground tests evaluated by the constraint solver.
struct Constraint {
  enum class Op : std::uint8_t { Eq, Lt, Le, Gt, Ge, Test, Fail };
  Op op = Op::Eq;
  std::string test;  ///< builtin name when op == Test
  std::vector<Term> args;
  /// Introduced by head normalization rather than written in a body.
  bool head_equation = false;

  static Constraint eq(Term a, Term b, bool head_eq = false) {
    return {Op::Eq, {}, {std::move(a), std::move(b)}, head_eq};
  }
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct Atom {
  std::string pred;
  std::vector<Term> args;
  PredKey key() const { return {pred, args.size()}; }
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// `X(t1,...,tn)` with a variable callee.
struct HoCall {
  Term callee;
  std::vector<Term> args;
  friend bool operator==(const HoCall&, const HoCall&) = default;
};

/// Engine-internal marker that evaluates a success condition instance.
struct Check {
  Label label;
  friend bool operator==(const Check&, const Check&) = default;
};

using Literal = std::variant<Constraint, Atom, HoCall, Check>;
using Goal = std::vector<Literal>;

inline bool is_check(const Literal& l) { return std::holds_alternative<Check>(l); }

std::string to_string(const Literal& lit, VarStyle style = VarStyle::Unique);
std::string to_string(const Goal& goal, VarStyle style = VarStyle::Unique);
void collect_vars(const Literal& lit, std::vector<Term>& out);
Literal apply(const Renaming& r, const Literal& lit);

// ---------------------------------------------------------------------------
// Program structure

/// Normalized rule: head arguments are distinct variables; any other head
/// structure lives in leading `head_equation` constraints of the body.
struct Clause {
  PredKey pred;
  std::vector<Term> head;
  Goal body;
  SourceSpan span;
  friend bool operator==(const Clause& a, const Clause& b) {
    return a.pred == b.pred && a.head == b.head && a.body == b.body;
  }
};

struct Predicate {
  PredKey key;
  std::vector<Clause> clauses;
};

/// One literal of an assertion condition formula.
struct CondLiteral {
  enum class Kind : std::uint8_t { Prop, Predprop };
  Kind kind = Kind::Prop;
  std::string name;
  std::vector<Term> args;
  friend bool operator==(const CondLiteral&, const CondLiteral&) = default;
};

/// Disjunction of conjunctions. `true` is a single empty conjunct, `false`
/// has no conjuncts.
struct Dnf {
  std::vector<std::vector<CondLiteral>> conjuncts;

  static Dnf truth() { return Dnf{{{}}}; }
  static Dnf falsity() { return Dnf{}; }
  bool is_true() const;
  bool is_false() const { return conjuncts.empty(); }
  bool has_predprop() const;
  friend bool operator==(const Dnf&, const Dnf&) = default;
};

std::string to_string(const CondLiteral& lit, VarStyle style = VarStyle::Unique);
std::string to_string(const Dnf& f, VarStyle style = VarStyle::Unique);
Dnf substitute(const Substitution& sigma, const Dnf& f);
Dnf disjoin(const Dnf& a, const Dnf& b);

/// `:- pred Head : Pre => Post.` with the head renamed to the predicate's
/// canonical variables.
struct Assertion {
  PredKey pred;
  std::vector<Term> head;
  Dnf pre = Dnf::truth();
  Dnf post = Dnf::truth();
  std::size_t ordinal = 0;  ///< 1-based position among the predicate's assertions
  SourceSpan span;
};

struct AnonAssertion {
  Dnf pre = Dnf::truth();
  Dnf post = Dnf::truth();
};

/// Named bundle of anonymous assertions over `Param(V1,...,Vm)`.
struct Predprop {
  std::string name;
  Term param = Term::nil();
  std::vector<Term> head;  ///< V1..Vm
  std::vector<AnonAssertion> assertions;
  SourceSpan span;
  std::size_t arity() const { return head.size(); }
};

struct HypOrigin {
  std::string predprop;
  PredKey pred;
  friend bool operator==(const HypOrigin&, const HypOrigin&) = default;
};

struct AssertionCondition {
  enum class Kind : std::uint8_t { Calls, Success };
  Kind kind = Kind::Calls;
  PredKey pred;
  std::vector<Term> head;
  Dnf pre = Dnf::truth();
  Dnf post = Dnf::truth();  ///< unused for calls conditions
  /// Program assertions this condition belongs to (ordinals are indices into
  /// AnnotatedProgram::assertions).
  std::vector<std::size_t> assertions;
  std::optional<HypOrigin> hyp;

  bool trivial() const {
    return kind == Kind::Calls ? pre.is_true() : post.is_true();
  }
};

std::string to_string(const AssertionCondition& c, VarStyle style = VarStyle::Unique);

/// Condition over an anonymous head `X(V1,...,Vm)`; instantiated per
/// predicate symbol.
struct AnonCondition {
  AssertionCondition::Kind kind = AssertionCondition::Kind::Calls;
  std::vector<Term> head;
  Dnf pre = Dnf::truth();
  Dnf post = Dnf::truth();
};

struct Query {
  Goal goal;
  Store store;
  std::string text;
  SourceSpan span;
  std::vector<Term> vars() const;
};

struct AnnotatedProgram {
  std::map<PredKey, Predicate> predicates;
  std::vector<Assertion> assertions;
  std::map<std::string, Predprop> predprops;
  /// Program assertion conditions; calls condition first for each predicate.
  std::vector<AssertionCondition> conditions;
  std::map<PredKey, std::vector<std::size_t>> conditions_by_pred;
  std::vector<Query> queries;
  /// Canonical head variables for predicates that carry assertions.
  std::map<PredKey, std::vector<Term>> canonical_heads;

  const Predicate* predicate(const PredKey& key) const;
  /// Unique arity of a defined predicate name, if any.
  std::optional<std::size_t> arity_of(const std::string& name) const;
  const Predprop* predprop(const std::string& name) const;
  bool has_predprops() const { return !predprops.empty(); }
};

}  // namespace hoa

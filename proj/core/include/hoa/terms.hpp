#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hoa {

/// Identity of a logic variable. Ids are unique per process for source
/// variables and unique per run for renamed ones; a larger id always means
/// a younger variable.
struct VarId {
  std::uint64_t value = 0;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

/// First id handed out to clause renamings inside a derivation run.
inline constexpr std::uint64_t kRunVarBase = std::uint64_t{1} << 40;
/// First id used by prop sub-derivations, kept above every run variable so
/// prop-local variables never capture a variable of the calling store.
inline constexpr std::uint64_t kPropVarBase = std::uint64_t{1} << 56;

/// Fresh id for a variable read from source text (thread-safe).
VarId next_source_var();

/// Immutable Herbrand term with numeric constants and predicate symbols.
/// Handles are cheap to copy and share structure.
class Term {
 public:
  enum class Kind : std::uint8_t { Var, Compound, Pred, Int, Flt };

  static Term var(VarId id, std::string name);
  static Term compound(std::string functor, std::vector<Term> args);
  static Term atom(std::string name) { return compound(std::move(name), {}); }
  static Term pred(std::string name, std::size_t arity);
  static Term integer(std::int64_t value);
  static Term real(double value);
  static Term nil() { return atom("[]"); }
  static Term cons(Term head, Term tail);
  static Term list(std::span<const Term> items, const Term* tail = nullptr);

  Kind kind() const { return node_->kind; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_compound() const { return kind() == Kind::Compound; }
  bool is_atom() const { return is_compound() && node_->args.empty(); }
  bool is_pred() const { return kind() == Kind::Pred; }
  bool is_number() const { return kind() == Kind::Int || kind() == Kind::Flt; }

  VarId var_id() const { return VarId{node_->id}; }
  /// Variable display name, functor, or predicate symbol name.
  const std::string& name() const { return node_->name; }
  const std::vector<Term>& args() const { return node_->args; }
  /// Compound arity, or the declared arity of a predicate symbol.
  std::size_t arity() const;
  std::int64_t int_value() const { return node_->ival; }
  double flt_value() const { return node_->fval; }
  double numeric_value() const;

  bool same_node(const Term& other) const { return node_ == other.node_; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::uint64_t id = 0;
    std::int64_t ival = 0;
    double fval = 0.0;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// How variables are spelled when printing.
enum class VarStyle {
  Unique,  ///< name plus id suffix for renamed variables (`N_3`)
  Source,  ///< the name as written in the source
};

std::string to_string(const Term& t, VarStyle style = VarStyle::Unique);
std::string var_name(const Term& v, VarStyle style);

/// Variables of a term in first-occurrence order (no duplicates).
void collect_vars(const Term& t, std::vector<Term>& out);
std::vector<Term> vars_of(std::span<const Term> terms);
bool occurs_in(VarId v, const Term& t);

/// A constraint store: a triangular substitution over Herbrand terms,
/// kept free of cycles by the occurs check. Stores are values; every
/// operation returns a new one.
class Store {
 public:
  Store() = default;
  static Store inconsistent();

  bool satisfiable() const { return satisfiable_; }
  const std::map<VarId, Term>& bindings() const { return bindings_; }
  const Term* lookup(VarId v) const;
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }

  /// Adds `v -> t` without any checking. `v` must be unbound and must not
  /// occur in the resolved form of `t`.
  Store with_binding(VarId v, Term t) const;

  friend bool operator==(const Store&, const Store&) = default;

 private:
  friend class Unifier;
  std::map<VarId, Term> bindings_;
  bool satisfiable_ = true;
};

/// Decides which of two distinct unbound variables receives the binding
/// when they are unified: returns true when `a` should be bound to `b`.
using BindOrder = std::function<bool(VarId a, VarId b)>;

/// Default orientation: the younger variable is bound to the older one, so
/// fresh clause variables never capture the variables of a caller.
bool younger_first(VarId a, VarId b);

/// Least extension of `store` equating `a` and `b`, or an inconsistent store.
Store unify(const Store& store, const Term& a, const Term& b);
Store unify(const Store& store, const Term& a, const Term& b, const BindOrder& order);

/// Follows variable bindings at the top of `t` only.
Term deref(const Store& store, const Term& t);
/// Applies the store exhaustively.
Term walk(const Store& store, const Term& t);

/// Bindings of `store` reachable from the variables of `object`.
Store restrict(const Store& store, std::span<const Term> object);
Store restrict(const Store& store, const Term& object);

/// True iff every constraint of `weaker` already holds in `stronger`.
/// Variables of `weaker` that occur only inside its bindings and are unknown
/// to `stronger` are treated as local (existentially quantified), which is
/// the reading of a restricted answer store.
bool entails(const Store& stronger, const Store& weaker);

/// New bindings of `after` relative to `before` (stores only grow along a
/// derivation).
std::vector<std::pair<VarId, Term>> binding_delta(const Store& before, const Store& after);

std::string to_string(const Store& store, VarStyle style = VarStyle::Unique);

/// Source of fresh variables for one run.
class VarSupply {
 public:
  explicit VarSupply(std::uint64_t first = kRunVarBase) : next_(first) {}
  Term fresh(std::string name) { return Term::var(VarId{next_++}, std::move(name)); }
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_;
};

/// A bijection between variables: source variable -> replacement variable.
class Renaming {
 public:
  Renaming() = default;

  /// Fresh renaming of the given variables.
  static Renaming fresh_for(std::span<const Term> vars, VarSupply& supply);

  void add(const Term& from, const Term& to);
  Term apply(const Term& t) const;
  Renaming inverse() const;
  bool empty() const { return map_.empty(); }
  const std::map<VarId, Term>& mapping() const { return map_; }

  friend bool operator==(const Renaming&, const Renaming&) = default;

 private:
  std::map<VarId, Term> map_;
};

/// Substitution of variables by arbitrary terms (used to instantiate
/// assertion heads at call atoms).
using Substitution = std::map<VarId, Term>;
Term substitute(const Substitution& sigma, const Term& t);

}  // namespace hoa

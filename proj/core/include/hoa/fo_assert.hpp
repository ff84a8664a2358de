#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hoa/engine.hpp"
#include "hoa/program.hpp"
#include "hoa/props.hpp"

namespace hoa {

/// `body` is a conjunction of disjunctions of negated labels; the rule
/// derives the negation of `head`. An empty disjunction never holds.
struct DepRule {
  std::vector<std::vector<Label>> body;
  Label head;
  friend bool operator==(const DepRule&, const DepRule&) = default;
};
std::string to_string(const DepRule& r);

/// Negated labels known to hold plus dependency rules between them.
struct ErrorSet {
  std::set<Label> facts;
  std::vector<DepRule> rules;

  std::set<Label> closure() const;
  bool empty() const { return facts.empty() && rules.empty(); }
  friend bool operator==(const ErrorSet&, const ErrorSet&) = default;
};

/// A condition instantiated at one call atom: head replaced by the call
/// arguments, pre and post instantiated accordingly.
struct LabeledInstance {
  Label label;
  AssertionCondition condition;
  /// Index into AnnotatedProgram::conditions for program-origin instances.
  std::optional<std::size_t> program_condition;
  /// h0 for program-origin instances, otherwise the hypothesis label.
  Label origin = Label::program_origin();
};

/// Hypothetical condition of a predprop instantiated at a predicate symbol.
struct HypCondition {
  Label label;
  AssertionCondition condition;
};

/// Hypotheses visible on one branch, in the order they became visible.
using HypScope = std::vector<Label>;

/// Instantiates `c` at the call `args` (renaming the head variables).
AssertionCondition instantiate_at(const AssertionCondition& c, const std::vector<Term>& args);

/// Per-query bookkeeping shared by all branches of one run: label counters,
/// the instance table and the memoized hypothesis registry. Lookups and
/// inserts are serialized, so concurrent use is safe.
class CheckContext {
 public:
  explicit CheckContext(const AnnotatedProgram& program, SearchLimits limits = {});

  const AnnotatedProgram& program() const { return program_; }
  const SearchLimits& limits() const { return limits_; }

  Label add_instance(AssertionCondition condition, std::optional<std::size_t> program_condition,
                     Label origin);
  std::optional<LabeledInstance> instance(Label label) const;
  std::vector<LabeledInstance> instances() const;

  /// Hypothesis labels for (predprop, predicate), created on first request.
  std::vector<Label> hypotheses(const Predprop& pp, const PredKey& pred);
  std::optional<HypCondition> hypothesis(Label label) const;

  void note(std::string diagnostic);
  std::vector<std::string> diagnostics() const;
  void mark_truncated();
  bool truncated() const;

 private:
  const AnnotatedProgram& program_;
  SearchLimits limits_;
  mutable std::mutex mu_;
  std::uint32_t next_instance_ = 1;
  std::uint32_t next_hyp_ = 1;
  std::map<Label, LabeledInstance> instances_;
  std::map<std::pair<std::string, PredKey>, std::vector<Label>> hyp_memo_;
  std::map<Label, HypCondition> hyps_;
  std::vector<std::string> diagnostics_;
  bool truncated_ = false;
};

/// What checking one formula for one instance contributes.
struct Extension {
  std::set<Label> facts;
  std::vector<DepRule> rules;
  std::vector<Label> hypotheses;  ///< to be made visible on this branch
};

/// How condition formulas are judged. First-order checking records a fact
/// when the formula does not succeed trivially; predprop checking may
/// instead record rules and hypotheses.
class CheckPolicy {
 public:
  virtual ~CheckPolicy() = default;
  /// Apply hypothetical conditions and `not a -> not h` rules.
  virtual bool dynamic() const { return false; }
  virtual Extension extend(Label label, const Dnf& formula, const Store& store,
                           CheckContext& ctx) = 0;
  /// Whether a success condition's precondition enables its check.
  virtual bool enables_check(const Dnf& pre, const Store& store, CheckContext& ctx) = 0;
};

/// First-order policy over an arbitrary literal evaluator.
class FormulaPolicy : public CheckPolicy {
 public:
  explicit FormulaPolicy(LiteralEval eval) : eval_(std::move(eval)) {}
  Extension extend(Label label, const Dnf& formula, const Store& store,
                   CheckContext& ctx) override;
  bool enables_check(const Dnf& pre, const Store& store, CheckContext& ctx) override;

 private:
  PropValue eval(const Dnf& f, const Store& store, CheckContext& ctx);
  LiteralEval eval_;
};

/// Prop-only first-order checking.
std::unique_ptr<CheckPolicy> make_fo_policy(const AnnotatedProgram& program,
                                            const SearchLimits& limits);

struct ExtState {
  State state;
  ErrorSet errors;
  std::set<Label> closure;
  std::shared_ptr<const HypScope> hyps = std::make_shared<const HypScope>();

  friend bool operator==(const ExtState& a, const ExtState& b) {
    return a.state == b.state && a.errors == b.errors;
  }
};

struct ExtStep {
  Step step;
  std::set<Label> facts_added;
  std::vector<DepRule> rules_added;
  std::vector<Label> checks_emitted;
  std::vector<Label> instances_created;
  std::vector<Label> hyps_added;
  std::set<Label> closure_delta;
};

struct ExtDerivation {
  std::vector<ExtState> states;
  std::vector<ExtStep> steps;
  Outcome outcome = Outcome::Running;
  const ExtState& last() const { return states.back(); }
};

/// Labeled instances for a call atom in state `s`, in condition order
/// followed by visible hypotheses.
std::vector<Label> instantiate(const Atom& call, const ExtState& s, CheckPolicy& policy,
                               CheckContext& ctx);

/// One step of the instrumented semantics.
Expansion<ExtState, ExtStep> reduce_checked(const ExtState& s, CheckPolicy& policy,
                                            CheckContext& ctx);

struct CheckRunResult {
  std::vector<ExtDerivation> derivations;
  bool truncated = false;
  std::vector<std::string> diagnostics;
  std::shared_ptr<CheckContext> context;
};

ExtState initial_ext_state(const Query& q);

/// Explores all derivations of `query` under the instrumented semantics.
/// Check reductions do not count towards the depth limit.
CheckRunResult derive_checked(const Query& query, const AnnotatedProgram& program,
                              const SearchLimits& limits, CheckPolicy& policy);

CheckRunResult derive_fo(const Query& query, const AnnotatedProgram& program,
                         const SearchLimits& limits = {});

/// Drops check states and check literals, keeping the underlying base
/// derivation.
Derivation erase(const ExtDerivation& d);

/// First state index after `call` whose goal is one literal shorter: the
/// point where the selected literal of `call` has been fully reduced.
std::optional<std::size_t> return_point(std::span<const State> states, std::size_t call);

/// Valuation of a program condition on a derivation prefix.
bool solve(const AssertionCondition& c, std::span<const State> prefix, const LiteralEval& eval);

/// False iff some instance of program condition `condition` is negated in
/// the closure of the last state.
bool rtsolve(std::size_t condition, const ExtDerivation& d, const CheckContext& ctx);

enum class Verdict { CheckedWithinBounds, False, Truncated };
std::string to_string(Verdict v);

struct Witness {
  std::size_t query = 0;
  std::size_t derivation = 0;
  std::size_t step = 0;  ///< index of the step that put the label in the closure
  Label label;
};

struct ConditionStatus {
  std::size_t condition = 0;
  Verdict verdict = Verdict::CheckedWithinBounds;
  std::optional<Witness> witness;
};

struct AssertionStatus {
  std::size_t assertion = 0;
  Verdict verdict = Verdict::CheckedWithinBounds;
  std::optional<Witness> witness;
  std::vector<std::size_t> false_conditions;
};

/// Status of every program condition over the runs of a query set.
std::vector<ConditionStatus> condition_statuses(const AnnotatedProgram& program,
                                                std::span<const CheckRunResult> runs);
ConditionStatus status(std::size_t condition, const AnnotatedProgram& program,
                       std::span<const CheckRunResult> runs);
std::vector<AssertionStatus> assertion_statuses(const AnnotatedProgram& program,
                                                std::span<const ConditionStatus> conditions,
                                                bool truncated);

}  // namespace hoa

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hoa/program.hpp"

namespace hoa {

/// A goal and a store. The next free variable id travels with the state so
/// that every branch renames clauses deterministically, independent of the
/// order in which branches are explored.
struct State {
  Goal goal;
  Store store;
  bool floundered = false;  ///< the distinguished uninstantiated-call state
  std::uint64_t next_var = kRunVarBase;

  friend bool operator==(const State& a, const State& b) {
    return a.floundered == b.floundered && a.goal == b.goal && a.store == b.store &&
           a.next_var == b.next_var;
  }
};

enum class Rule : std::uint8_t { Constraint, Clause, HoApply, Flounder, Check };
std::string to_string(Rule r);

/// Metadata of one reduction: the selected literal, the clause chosen (for
/// atoms), the renaming applied to it and the new store bindings.
struct Step {
  Rule rule = Rule::Constraint;
  Literal literal;
  std::optional<std::size_t> clause;
  Renaming renaming;
  std::vector<std::pair<VarId, Term>> bindings;
};

enum class Outcome : std::uint8_t { Running, Success, Failed, Floundered, ResourceBound };
std::string to_string(Outcome o);

struct Derivation {
  std::vector<State> states;
  std::vector<Step> steps;
  Outcome outcome = Outcome::Running;
  const State& last() const { return states.back(); }
};

struct SearchLimits {
  std::size_t max_depth = 200;        ///< reductions per derivation
  std::size_t max_solutions = 1000;   ///< successful derivations per query
  std::size_t max_derivations = 10000;  ///< finished derivations per query
};

struct Successor {
  State state;
  Step step;
};

/// Result of reducing the leftmost literal of a state. An empty successor
/// list means the branch fails; `diagnostic` explains failures caused by
/// instantiation errors in arithmetic comparisons.
struct Reduction {
  std::vector<Successor> successors;
  std::optional<std::string> diagnostic;
};

State initial_state(const Query& q, std::uint64_t first_var = kRunVarBase);

/// One step of the base operational semantics. The first literal must not
/// be a check literal.
Reduction reduce(const State& state, const AnnotatedProgram& program);

/// Solves a comparison or builtin test under `store`. Returns nullopt and
/// sets `diagnostic` when an operand is not sufficiently instantiated.
std::optional<bool> eval_builtin(const Constraint& c, const Store& store, std::string* diagnostic);

/// Terminal classification of a state with no further reductions.
Outcome terminal_outcome(const State& s);

// ---------------------------------------------------------------------------
// Generic depth-first exploration shared by every semantics.

template <class S, class St>
struct Expansion {
  std::vector<std::pair<S, St>> successors;
  /// Set when there are no successors.
  Outcome terminal = Outcome::Failed;
  std::optional<std::string> diagnostic;
};

struct ExploreStats {
  std::size_t finished = 0;
  std::size_t successes = 0;
  bool truncated = false;
  std::vector<std::string> diagnostics;
};

/// Depth-first, leftmost-successor enumeration of finished derivations.
/// `expand(state)` returns an Expansion; `counts(step)` tells whether a step
/// consumes depth; `on_leaf(states, steps, outcome)` returns false to stop.
template <class S, class St, class Expand, class Counts, class OnLeaf>
ExploreStats explore(const S& init, const SearchLimits& limits, Expand&& expand, Counts&& counts,
                     OnLeaf&& on_leaf) {
  ExploreStats stats;
  std::vector<S> states{init};
  std::vector<St> steps;
  bool stop = false;

  std::function<void(std::size_t)> go = [&](std::size_t depth) {
    if (stop) return;
    auto finish = [&](Outcome o) {
      ++stats.finished;
      if (o == Outcome::Success) ++stats.successes;
      if (o == Outcome::ResourceBound) stats.truncated = true;
      if (!on_leaf(std::as_const(states), std::as_const(steps), o)) stop = true;
      if (stats.finished >= limits.max_derivations || stats.successes >= limits.max_solutions) {
        if (!stop) stats.truncated = true;
        stop = true;
      }
    };
    Expansion<S, St> ex = expand(std::as_const(states.back()));
    if (ex.diagnostic) stats.diagnostics.push_back(*ex.diagnostic);
    if (ex.successors.empty()) {
      finish(ex.terminal);
      return;
    }
    bool bounded = false;
    for (auto& [next, step] : ex.successors) {
      if (stop) return;
      std::size_t d = depth + (counts(std::as_const(step)) ? 1 : 0);
      if (d > limits.max_depth) {
        // One resource-bound leaf per cut state, however many successors.
        if (!bounded) finish(Outcome::ResourceBound);
        bounded = true;
        continue;
      }
      states.push_back(std::move(next));
      steps.push_back(std::move(step));
      go(d);
      states.pop_back();
      steps.pop_back();
    }
  };
  go(0);
  return stats;
}

// ---------------------------------------------------------------------------
// Base semantics front end

struct DeriveResult {
  std::vector<Derivation> derivations;
  bool truncated = false;
  std::vector<std::string> diagnostics;
};

Expansion<State, Step> expand_base(const State& s, const AnnotatedProgram& program);

/// `first_var` is the first id used for renamed clause variables; it must
/// exceed every variable id occurring in the query.
DeriveResult derive(const Query& query, const AnnotatedProgram& program,
                    const SearchLimits& limits = {}, std::uint64_t first_var = kRunVarBase);

/// Answer stores of the successful derivations, restricted to the query
/// variables and deduplicated up to variable renaming.
std::vector<Store> answers(const Query& query, const AnnotatedProgram& program,
                           const SearchLimits& limits = {}, std::uint64_t first_var = kRunVarBase);
std::vector<Store> answers_of(const DeriveResult& result, const Query& query);

/// Key identifying a restricted store up to renaming of its non-query
/// variables.
std::string answer_key(const Store& answer, std::span<const Term> query_vars);

/// Human readable answer, one `Var = term` per bound query variable, or
/// `true` when nothing is bound.
std::string format_answer(const Store& answer, std::span<const Term> query_vars);

/// Re-runs the recorded steps from the first state. Returns nullopt when a
/// step does not correspond to any successor.
std::optional<std::vector<State>> replay(const State& init, std::span<const Step> steps,
                                         const AnnotatedProgram& program);

/// Aggregate classification of a query: Success if any derivation
/// succeeded, Floundered if all finished derivations floundered, Failed
/// otherwise (ResourceBound when nothing finished within the limits).
Outcome classify(const DeriveResult& result);

}  // namespace hoa

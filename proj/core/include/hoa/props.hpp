#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hoa/engine.hpp"
#include "hoa/program.hpp"

namespace hoa {

/// Truth value of a prop check plus what was learned while computing it.
struct PropValue {
  bool value = false;
  /// The search hit a limit before finding a trivially successful derivation.
  bool truncated = false;
  std::vector<std::string> diagnostics;
};

/// `store` makes `lit` succeed without binding any variable left free by the
/// store. Builtins are evaluated on the walked arguments; other props run
/// on the base engine, pruning every branch that instantiates a variable of
/// the literal.
PropValue succeeds_trivially(const Store& store, const CondLiteral& lit,
                             const AnnotatedProgram& program, const SearchLimits& limits = {});

/// Evaluator used for individual literals of a formula.
using LiteralEval = std::function<PropValue(const Store&, const CondLiteral&)>;

/// Disjunction over conjuncts of the conjunction of literal values.
PropValue eval_dnf(const Store& store, const Dnf& formula, const LiteralEval& eval);

/// eval_dnf with succeeds_trivially for props. Predprop literals are not
/// handled here and evaluate to false with a diagnostic.
PropValue eval_dnf(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                   const SearchLimits& limits = {});

/// The query for a prop literal under `store`, in a form the engine runs.
Query prop_query(const Store& store, const CondLiteral& lit);

enum class TestVerdict { TriviallySucceeds, FinitelyFails, Instantiates, Unknown };
std::string to_string(TestVerdict v);

struct TestLiteralEntry {
  Store store;
  TestVerdict verdict = TestVerdict::Unknown;
};

struct TestLiteralReport {
  std::vector<TestLiteralEntry> entries;
  /// Every store either trivially succeeds or finitely fails.
  bool is_test() const;
};

/// Checks that `lit` behaves as a test on each store of the corpus.
TestLiteralReport verify_test_literal(const CondLiteral& lit, std::span<const Store> corpus,
                                      const AnnotatedProgram& program,
                                      const SearchLimits& limits = {});

}  // namespace hoa

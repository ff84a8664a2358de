#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hoa/fo_assert.hpp"

namespace hoa {

/// A formula after evaluating its prop literals: true, false, or the
/// predprop literals that remain undecided, with arguments walked.
struct Simplified {
  enum class Kind { True, False, Residue };
  Kind kind = Kind::False;
  std::vector<std::vector<CondLiteral>> residue;
  std::vector<std::string> diagnostics;
  bool truncated = false;
};

Simplified simplify(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                    const LiteralEval& prop_eval);
Simplified simplify(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                    const SearchLimits& limits = {});

/// Hypothetical conditions of `pp` at predicate `pred`, memoized per run.
std::vector<HypCondition> hyp_conditions(const Predprop& pp, const PredKey& pred,
                                         CheckContext& ctx);

/// Contribution of checking `formula` for instance `label`: a fact when the
/// formula simplifies to false, nothing when it simplifies to true, and
/// otherwise one rule whose body groups the hypotheses of each conjunct.
Extension ext(Label label, const Dnf& formula, const Store& store, CheckContext& ctx,
              const LiteralEval& prop_eval);

/// Predprop checking with hypothetical assertion conditions.
class DynamicPolicy : public CheckPolicy {
 public:
  DynamicPolicy(const AnnotatedProgram& program, SearchLimits limits);
  bool dynamic() const override { return true; }
  Extension extend(Label label, const Dnf& formula, const Store& store,
                   CheckContext& ctx) override;
  bool enables_check(const Dnf& pre, const Store& store, CheckContext& ctx) override;

 private:
  const AnnotatedProgram& program_;
  LiteralEval prop_eval_;
};

/// Predprop name to the predicate symbols known to satisfy it.
using MeaningTable = std::map<std::string, std::set<PredKey>>;

struct MeaningTableLoad {
  MeaningTable table;
  std::vector<std::string> errors;
};

/// Reads `{"nneg": ["p/1"], "neg": ["n/1"]}`.
MeaningTableLoad parse_meaning_table(const std::string& json_text);
/// Predprops used by the program's assertions but absent from the table.
std::vector<std::string> missing_meanings(const MeaningTable& table,
                                          const AnnotatedProgram& program);

std::unique_ptr<CheckPolicy> make_static_policy(const AnnotatedProgram& program,
                                                const SearchLimits& limits,
                                                const MeaningTable& table);
std::unique_ptr<CheckPolicy> make_dynamic_policy(const AnnotatedProgram& program,
                                                 const SearchLimits& limits);

CheckRunResult derive_had(const Query& query, const AnnotatedProgram& program,
                          const SearchLimits& limits = {});
CheckRunResult derive_static(const Query& query, const AnnotatedProgram& program,
                             const SearchLimits& limits, const MeaningTable& table);

enum class CheckMode { Fo, Static, Dynamic };
std::string to_string(CheckMode m);

struct Report {
  CheckMode mode = CheckMode::Dynamic;
  std::vector<Query> queries;
  std::vector<CheckRunResult> runs;
  std::vector<ConditionStatus> conditions;
  std::vector<AssertionStatus> assertions;
  std::vector<std::string> diagnostics;
  /// Configuration problems that prevented checking.
  std::vector<std::string> errors;
  bool truncated = false;

  bool ok() const { return errors.empty(); }
  std::size_t false_count() const;
  /// Indices of program assertions reported false.
  std::set<std::size_t> false_assertions() const;
};

/// Runs every query under the selected semantics and derives per-condition
/// and per-assertion verdicts. With `parallel` the queries run
/// concurrently; results are stored in query order either way.
Report report(std::span<const Query> queries, const AnnotatedProgram& program,
              const SearchLimits& limits, CheckMode mode, const MeaningTable* table = nullptr,
              bool parallel = false);

}  // namespace hoa

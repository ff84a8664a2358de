#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hoa/program.hpp"

namespace hoa {

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  SourceSpan where;
  std::string message;
};

/// `file:line:col: message`
std::string render(const Diagnostic& d);
bool has_errors(std::span<const Diagnostic> diags);

struct SourceText {
  std::string name;
  std::string text;
};

struct ParseResult {
  AnnotatedProgram program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Parses and elaborates one or more source files into a single program.
/// Never stops at the first error; every problem is reported.
ParseResult parse_program(std::span<const SourceText> sources);
ParseResult parse_program(const std::string& text, const std::string& name = "<input>");

struct QueryParseResult {
  std::optional<Query> query;
  std::vector<Diagnostic> diagnostics;
};

/// Parses a goal such as `(test_s(1,P),P(-2))` against an elaborated program
/// (constants naming defined predicates become predicate symbols).
QueryParseResult parse_query(const std::string& text, const AnnotatedProgram& program,
                             const std::string& name = "<query>");

/// Builtin props evaluated directly: int/1, flt/1, nnegint/1, negint/1,
/// between/3.
bool is_builtin_prop(const std::string& name, std::size_t arity);

/// Assertion conditions of one predicate: the calls condition over the
/// disjunction of all preconditions followed by one success condition per
/// assertion. Empty when the predicate has no assertions.
std::vector<AssertionCondition> conditions_for(const PredKey& pred,
                                               std::span<const Assertion> assertions);

/// Anonymous conditions of a predprop with trivial conditions removed.
std::vector<AnonCondition> anon_conditions(const Predprop& pp);

/// Instantiates an anonymous condition at predicate `pred`, using `head` as
/// the concrete head variables.
AssertionCondition instantiate_anon(const AnonCondition& c, const std::string& predprop,
                                    const PredKey& pred, std::vector<Term> head);

/// Fresh copy of a clause; the renaming maps clause variables to the copies.
std::pair<Clause, Renaming> rename(const Clause& clause, VarSupply& supply);
Clause apply(const Renaming& r, const Clause& clause);

/// Canonical source text for a program (keyworded predprop form, head
/// equations folded back into heads).
std::string print_program(const AnnotatedProgram& program);
std::string print_clause(const Clause& clause);

}  // namespace hoa

#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hoa/engine.hpp"
#include "hoa/fo_assert.hpp"
#include "hoa/ho_assert.hpp"
#include "hoa/syntax.hpp"

namespace hoa::testing {

std::string corpus_path(const std::string& name);
std::string read_text(const std::string& path);

/// Parses a program, throwing with the rendered diagnostics on error.
AnnotatedProgram load_program(const std::string& text, const std::string& name = "<test>");
AnnotatedProgram load_corpus(const std::string& name);
Query make_query(const std::string& text, const AnnotatedProgram& program);

/// Ground-truth predprop meanings for the corpus programs.
MeaningTable fig1_meanings();
MeaningTable comparator_meanings();

/// Instance label of the first instance satisfying `match`, in label order.
std::optional<Label> find_instance(const CheckContext& ctx,
                                   const std::function<bool(const LabeledInstance&)>& match);

/// Program-origin instance of condition `condition` (an index into the
/// program's condition list).
std::optional<Label> program_instance(const CheckContext& ctx, std::size_t condition);

/// Instance derived from the hypothesis of `predprop` at `pred`.
std::optional<Label> hyp_instance(const CheckContext& ctx, const std::string& predprop,
                                  const PredKey& pred);

/// Hypothesis label registered for `predprop` at `pred`.
std::optional<Label> hyp_label(const CheckContext& ctx, const std::string& predprop,
                               const PredKey& pred);

/// Index of the `kind` condition of `pred` whose pre/post renders containing
/// `fragment`.
std::optional<std::size_t> condition_index(const AnnotatedProgram& program, const PredKey& pred,
                                           AssertionCondition::Kind kind,
                                           const std::string& fragment = "");

/// Assertion indices reported false.
std::set<std::size_t> false_assertions(const Report& r);

}  // namespace hoa::testing

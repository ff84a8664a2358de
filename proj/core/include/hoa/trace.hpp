#pragma once

#include <string>
#include <vector>

#include "hoa/engine.hpp"
#include "hoa/fo_assert.hpp"

namespace hoa {

/// First line of every trace.
std::string trace_header(const std::string& mode);

/// JSON-lines records, one per step of every derivation followed by one
/// outcome record per derivation. No header.
std::vector<std::string> trace_records(const Query& query, const DeriveResult& result);
std::vector<std::string> trace_records(const Query& query, const CheckRunResult& result);

/// `a1#calls(test_c(n,X), nneg(n) ; neg(n))`
std::string describe(const LabeledInstance& inst);
std::string describe(const HypCondition& hyp);

/// One row of the tabular view of a derivation.
struct TableRow {
  std::string goal;
  std::string bindings;
  std::string errors;
  std::string conditions;
};

/// Rows shown for a derivation: the first and last states plus every state
/// reached by something other than a higher-order application whose first
/// literal is not a head equation. Goals are printed under the store of the
/// following row so that arguments show the values they end up with.
/// Passing the query names its variables in the bindings column.
std::vector<TableRow> table_rows(const ExtDerivation& d, const CheckContext& ctx,
                                 const Query* query = nullptr);
std::string render_table(const std::vector<TableRow>& rows);

}  // namespace hoa

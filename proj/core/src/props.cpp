#include "hoa/props.hpp"

#include <set>

#include "hoa/syntax.hpp"

namespace hoa {

Query prop_query(const Store& store, const CondLiteral& lit) {
  Query q;
  q.store = store;
  if (is_builtin_prop(lit.name, lit.args.size())) {
    Constraint c;
    c.op = Constraint::Op::Test;
    c.test = lit.name;
    c.args = lit.args;
    q.goal.push_back(std::move(c));
  } else {
    q.goal.push_back(Atom{lit.name, lit.args});
  }
  q.text = to_string(lit);
  return q;
}

PropValue succeeds_trivially(const Store& store, const CondLiteral& lit,
                             const AnnotatedProgram& program, const SearchLimits& limits) {
  PropValue out;
  if (lit.kind == CondLiteral::Kind::Predprop) {
    out.diagnostics.push_back("predprop " + lit.name + " cannot be evaluated as a prop");
    return out;
  }
  if (is_builtin_prop(lit.name, lit.args.size())) {
    Constraint c;
    c.op = Constraint::Op::Test;
    c.test = lit.name;
    c.args = lit.args;
    std::string diag;
    auto v = eval_builtin(c, store, &diag);
    if (!v) out.diagnostics.push_back(diag);
    out.value = v.value_or(false);
    return out;
  }
  if (!program.predicate({lit.name, lit.args.size()})) {
    out.diagnostics.push_back("undefined prop " + lit.name + "/" + std::to_string(lit.args.size()));
    return out;
  }

  // Variables the store leaves free; binding any of them means the answer
  // adds a relevant constraint and cannot be entailed.
  std::set<VarId> guarded;
  {
    std::vector<Term> vars;
    for (const auto& a : lit.args) collect_vars(walk(store, a), vars);
    for (const auto& v : vars) guarded.insert(v.var_id());
  }

  Query q = prop_query(store, lit);
  auto stats = explore<State, Step>(
      initial_state(q, kPropVarBase), limits,
      [&](const State& s) {
        auto ex = expand_base(s, program);
        std::erase_if(ex.successors, [&](const auto& succ) {
          for (const auto& [v, t] : succ.second.bindings) {
            if (guarded.count(v)) return true;
          }
          return false;
        });
        return ex;
      },
      [](const Step&) { return true; },
      [&](const std::vector<State>&, const std::vector<Step>&, Outcome o) {
        if (o == Outcome::Success) {
          out.value = true;
          return false;
        }
        return true;
      });
  if (!out.value && stats.truncated) {
    out.truncated = true;
    out.diagnostics.push_back("search limit reached while checking " + to_string(lit) +
                              "; treated as false");
  }
  for (auto& d : stats.diagnostics) out.diagnostics.push_back(std::move(d));
  return out;
}

PropValue eval_dnf(const Store& store, const Dnf& formula, const LiteralEval& eval) {
  PropValue out;
  for (const auto& conj : formula.conjuncts) {
    bool all = true;
    for (const auto& lit : conj) {
      PropValue v = eval(store, lit);
      out.truncated = out.truncated || v.truncated;
      for (auto& d : v.diagnostics) out.diagnostics.push_back(std::move(d));
      if (!v.value) {
        all = false;
        break;
      }
    }
    if (all) {
      out.value = true;
      return out;
    }
  }
  return out;
}

PropValue eval_dnf(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                   const SearchLimits& limits) {
  return eval_dnf(store, formula, [&](const Store& s, const CondLiteral& lit) {
    return succeeds_trivially(s, lit, program, limits);
  });
}

std::string to_string(TestVerdict v) {
  switch (v) {
    case TestVerdict::TriviallySucceeds: return "trivially-succeeds";
    case TestVerdict::FinitelyFails: return "finitely-fails";
    case TestVerdict::Instantiates: return "instantiates";
    case TestVerdict::Unknown: return "unknown";
  }
  return "?";
}

bool TestLiteralReport::is_test() const {
  for (const auto& e : entries) {
    if (e.verdict != TestVerdict::TriviallySucceeds && e.verdict != TestVerdict::FinitelyFails) {
      return false;
    }
  }
  return true;
}

TestLiteralReport verify_test_literal(const CondLiteral& lit, std::span<const Store> corpus,
                                      const AnnotatedProgram& program,
                                      const SearchLimits& limits) {
  TestLiteralReport report;
  for (const auto& store : corpus) {
    TestLiteralEntry e;
    e.store = store;
    PropValue v = succeeds_trivially(store, lit, program, limits);
    if (v.value) {
      e.verdict = TestVerdict::TriviallySucceeds;
    } else {
      DeriveResult r = derive(prop_query(store, lit), program, limits, kPropVarBase);
      bool any_success = false;
      for (const auto& d : r.derivations) any_success = any_success || d.outcome == Outcome::Success;
      if (any_success) {
        e.verdict = TestVerdict::Instantiates;
      } else if (r.truncated || classify(r) != Outcome::Failed) {
        e.verdict = TestVerdict::Unknown;
      } else {
        e.verdict = TestVerdict::FinitelyFails;
      }
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace hoa

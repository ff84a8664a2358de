#include "hoa/ho_assert.hpp"

#include <algorithm>
#include <future>

#include "json.hpp"

namespace hoa {

namespace {

LiteralEval prop_evaluator(const AnnotatedProgram& program, const SearchLimits& limits) {
  return [&program, limits](const Store& s, const CondLiteral& l) {
    return succeeds_trivially(s, l, program, limits);
  };
}

std::optional<PredKey> parse_indicator(const std::string& s) {
  auto slash = s.rfind('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == s.size()) return std::nullopt;
  std::size_t arity = 0;
  for (std::size_t i = slash + 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    arity = arity * 10 + static_cast<std::size_t>(s[i] - '0');
  }
  return PredKey{s.substr(0, slash), arity};
}

}  // namespace

Simplified simplify(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                    const LiteralEval& prop_eval) {
  Simplified out;
  for (const auto& conj : formula.conjuncts) {
    bool holds = true;
    std::vector<CondLiteral> rest;
    for (const auto& lit : conj) {
      if (lit.kind == CondLiteral::Kind::Prop) {
        PropValue v = prop_eval(store, lit);
        out.truncated = out.truncated || v.truncated;
        for (auto& d : v.diagnostics) out.diagnostics.push_back(std::move(d));
        if (!v.value) {
          holds = false;
          break;
        }
        continue;
      }
      const Predprop* pp = program.predprop(lit.name);
      Term arg = walk(store, lit.args.at(0));
      if (!pp) {
        out.diagnostics.push_back("unknown predprop " + lit.name);
        holds = false;
        break;
      }
      if (arg.is_var()) {
        out.diagnostics.push_back("predprop " + lit.name + " applied to unbound variable " +
                                  arg.name() + "; its conjunct cannot be refuted");
      } else if (!arg.is_pred() || arg.arity() != pp->arity()) {
        holds = false;
        break;
      }
      CondLiteral kept = lit;
      kept.args = {arg};
      rest.push_back(std::move(kept));
    }
    if (!holds) continue;
    if (rest.empty()) {
      out.kind = Simplified::Kind::True;
      out.residue.clear();
      return out;
    }
    out.residue.push_back(std::move(rest));
  }
  out.kind = out.residue.empty() ? Simplified::Kind::False : Simplified::Kind::Residue;
  return out;
}

Simplified simplify(const Store& store, const Dnf& formula, const AnnotatedProgram& program,
                    const SearchLimits& limits) {
  return simplify(store, formula, program, prop_evaluator(program, limits));
}

std::vector<HypCondition> hyp_conditions(const Predprop& pp, const PredKey& pred,
                                         CheckContext& ctx) {
  std::vector<HypCondition> out;
  for (Label h : ctx.hypotheses(pp, pred)) {
    if (auto hc = ctx.hypothesis(h)) out.push_back(std::move(*hc));
  }
  return out;
}

Extension ext(Label label, const Dnf& formula, const Store& store, CheckContext& ctx,
              const LiteralEval& prop_eval) {
  Extension out;
  Simplified s = simplify(store, formula, ctx.program(), prop_eval);
  for (auto& d : s.diagnostics) ctx.note(std::move(d));
  if (s.truncated) ctx.mark_truncated();
  if (s.kind == Simplified::Kind::True) return out;
  if (s.kind == Simplified::Kind::False) {
    out.facts.insert(label);
    return out;
  }
  DepRule rule;
  rule.head = label;
  for (const auto& conj : s.residue) {
    std::vector<Label> group;
    bool open = false;
    for (const auto& lit : conj) {
      const Term& p = lit.args[0];
      if (p.is_var()) {
        open = true;
        break;
      }
      const Predprop* pp = ctx.program().predprop(lit.name);
      for (Label h : ctx.hypotheses(*pp, {p.name(), p.arity()})) {
        if (std::find(group.begin(), group.end(), h) == group.end()) group.push_back(h);
      }
    }
    if (open) group.clear();
    for (Label h : group) {
      if (std::find(out.hypotheses.begin(), out.hypotheses.end(), h) == out.hypotheses.end()) {
        out.hypotheses.push_back(h);
      }
    }
    rule.body.push_back(std::move(group));
  }
  out.rules.push_back(std::move(rule));
  return out;
}

DynamicPolicy::DynamicPolicy(const AnnotatedProgram& program, SearchLimits limits)
    : program_(program), prop_eval_(prop_evaluator(program, limits)) {}

Extension DynamicPolicy::extend(Label label, const Dnf& formula, const Store& store,
                                CheckContext& ctx) {
  return ext(label, formula, store, ctx, prop_eval_);
}

bool DynamicPolicy::enables_check(const Dnf& pre, const Store& store, CheckContext& ctx) {
  // A residue is never accepted: predprops cannot be proved true while running.
  Simplified s = simplify(store, pre, program_, prop_eval_);
  for (auto& d : s.diagnostics) ctx.note(std::move(d));
  return s.kind == Simplified::Kind::True;
}

MeaningTableLoad parse_meaning_table(const std::string& json_text) {
  MeaningTableLoad out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    out.errors.push_back(std::string("malformed meaning table: ") + e.what());
    return out;
  }
  if (!j.is_object()) {
    out.errors.push_back("meaning table must be a JSON object");
    return out;
  }
  for (const auto& [name, value] : j.items()) {
    auto& entry = out.table[name];
    if (!value.is_array()) {
      out.errors.push_back("meaning of " + name + " must be an array of name/arity strings");
      continue;
    }
    for (const auto& item : value) {
      std::optional<PredKey> key;
      if (item.is_string()) key = parse_indicator(item.get<std::string>());
      if (!key) {
        out.errors.push_back("bad predicate indicator " + item.dump() + " in meaning of " + name);
        continue;
      }
      entry.insert(*key);
    }
  }
  return out;
}

std::vector<std::string> missing_meanings(const MeaningTable& table,
                                          const AnnotatedProgram& program) {
  std::set<std::string> missing;
  for (const auto& a : program.assertions) {
    for (const Dnf* f : {&a.pre, &a.post}) {
      for (const auto& conj : f->conjuncts) {
        for (const auto& lit : conj) {
          if (lit.kind == CondLiteral::Kind::Predprop && !table.count(lit.name)) {
            missing.insert(lit.name);
          }
        }
      }
    }
  }
  return {missing.begin(), missing.end()};
}

std::unique_ptr<CheckPolicy> make_static_policy(const AnnotatedProgram& program,
                                                const SearchLimits& limits,
                                                const MeaningTable& table) {
  auto props = prop_evaluator(program, limits);
  return std::make_unique<FormulaPolicy>(
      [props, &table](const Store& s, const CondLiteral& l) -> PropValue {
        if (l.kind == CondLiteral::Kind::Prop) return props(s, l);
        PropValue v;
        auto it = table.find(l.name);
        if (it == table.end()) {
          v.diagnostics.push_back("predprop " + l.name + " missing from meaning table");
          return v;
        }
        Term p = walk(s, l.args.at(0));
        v.value = p.is_pred() && it->second.count(PredKey{p.name(), p.arity()});
        return v;
      });
}

std::unique_ptr<CheckPolicy> make_dynamic_policy(const AnnotatedProgram& program,
                                                 const SearchLimits& limits) {
  return std::make_unique<DynamicPolicy>(program, limits);
}

CheckRunResult derive_had(const Query& query, const AnnotatedProgram& program,
                          const SearchLimits& limits) {
  DynamicPolicy policy(program, limits);
  return derive_checked(query, program, limits, policy);
}

CheckRunResult derive_static(const Query& query, const AnnotatedProgram& program,
                             const SearchLimits& limits, const MeaningTable& table) {
  auto policy = make_static_policy(program, limits, table);
  return derive_checked(query, program, limits, *policy);
}

std::string to_string(CheckMode m) {
  switch (m) {
    case CheckMode::Fo: return "fo";
    case CheckMode::Static: return "ho-static";
    case CheckMode::Dynamic: return "ho-dynamic";
  }
  return "?";
}

std::size_t Report::false_count() const { return false_assertions().size(); }

std::set<std::size_t> Report::false_assertions() const {
  std::set<std::size_t> out;
  for (const auto& a : assertions) {
    if (a.verdict == Verdict::False) out.insert(a.assertion);
  }
  return out;
}

Report report(std::span<const Query> queries, const AnnotatedProgram& program,
              const SearchLimits& limits, CheckMode mode, const MeaningTable* table,
              bool parallel) {
  Report out;
  out.mode = mode;
  out.queries.assign(queries.begin(), queries.end());
  if (mode == CheckMode::Fo) {
    for (const auto& a : program.assertions) {
      if (a.pre.has_predprop() || a.post.has_predprop()) {
        out.errors.push_back("assertion for " + to_string(a.pred) + " at " + to_string(a.span) +
                             " uses predprops; use --mode ho-static or ho-dynamic");
      }
    }
  } else if (mode == CheckMode::Static) {
    if (!table) {
      out.errors.push_back("ho-static mode needs a meaning table");
    } else {
      for (const auto& name : missing_meanings(*table, program)) {
        out.errors.push_back("predprop " + name + " missing from meaning table");
      }
    }
  }
  if (!out.ok()) return out;

  auto run_one = [&](const Query& q) {
    std::unique_ptr<CheckPolicy> policy;
    switch (mode) {
      case CheckMode::Fo: policy = make_fo_policy(program, limits); break;
      case CheckMode::Static: policy = make_static_policy(program, limits, *table); break;
      case CheckMode::Dynamic: policy = make_dynamic_policy(program, limits); break;
    }
    return derive_checked(q, program, limits, *policy);
  };

  if (parallel && queries.size() > 1) {
    std::vector<std::future<CheckRunResult>> futures;
    for (const auto& q : queries) futures.push_back(std::async(std::launch::async, run_one, std::cref(q)));
    for (auto& f : futures) out.runs.push_back(f.get());
  } else {
    for (const auto& q : queries) out.runs.push_back(run_one(q));
  }

  for (const auto& r : out.runs) {
    out.truncated = out.truncated || r.truncated;
    for (const auto& d : r.diagnostics) {
      if (std::find(out.diagnostics.begin(), out.diagnostics.end(), d) == out.diagnostics.end()) {
        out.diagnostics.push_back(d);
      }
    }
  }
  out.conditions = condition_statuses(program, out.runs);
  out.assertions = assertion_statuses(program, out.conditions, out.truncated);
  return out;
}

}  // namespace hoa

#include "hoa/engine.hpp"

#include <set>

#include "hoa/syntax.hpp"

namespace hoa {

std::string to_string(Rule r) {
  switch (r) {
    case Rule::Constraint: return "constraint";
    case Rule::Clause: return "clause";
    case Rule::HoApply: return "hoapply";
    case Rule::Flounder: return "flounder";
    case Rule::Check: return "check";
  }
  return "?";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Running: return "running";
    case Outcome::Success: return "success";
    case Outcome::Failed: return "failed";
    case Outcome::Floundered: return "floundered";
    case Outcome::ResourceBound: return "resource-bound";
  }
  return "?";
}

State initial_state(const Query& q, std::uint64_t first_var) {
  State s;
  s.next_var = first_var;
  s.goal = q.goal;
  s.store = q.store;
  return s;
}

namespace {

std::optional<double> number(const Store& store, const Term& t, Term* walked = nullptr) {
  Term w = walk(store, t);
  if (walked) *walked = w;
  if (!w.is_number()) return std::nullopt;
  return w.numeric_value();
}

int compare_numbers(const Term& a, const Term& b) {
  if (a.kind() == Term::Kind::Int && b.kind() == Term::Kind::Int) {
    return a.int_value() < b.int_value() ? -1 : a.int_value() > b.int_value() ? 1 : 0;
  }
  double x = a.numeric_value();
  double y = b.numeric_value();
  return x < y ? -1 : x > y ? 1 : 0;
}

}  // namespace

std::optional<bool> eval_builtin(const Constraint& c, const Store& store, std::string* diagnostic) {
  switch (c.op) {
    case Constraint::Op::Eq:
      return unify(store, c.args[0], c.args[1]).satisfiable();
    case Constraint::Op::Fail:
      return false;
    case Constraint::Op::Test: {
      std::vector<Term> w;
      for (const auto& a : c.args) w.push_back(walk(store, a));
      auto is_int = [](const Term& t) { return t.kind() == Term::Kind::Int; };
      if (c.test == "int") return is_int(w[0]);
      if (c.test == "flt") return w[0].kind() == Term::Kind::Flt;
      if (c.test == "nnegint") return is_int(w[0]) && w[0].int_value() >= 0;
      if (c.test == "negint") return is_int(w[0]) && w[0].int_value() < 0;
      if (c.test == "between") {
        return is_int(w[0]) && is_int(w[1]) && is_int(w[2]) &&
               w[0].int_value() <= w[2].int_value() && w[2].int_value() <= w[1].int_value();
      }
      if (diagnostic) *diagnostic = "unknown builtin " + c.test;
      return std::nullopt;
    }
    default:
      break;
  }
  Term a = Term::nil();
  Term b = Term::nil();
  auto x = number(store, c.args[0], &a);
  auto y = number(store, c.args[1], &b);
  if (!x || !y) {
    if (diagnostic) {
      *diagnostic = "instantiation error: " + to_string(Literal{c}) + " needs numbers, got " +
                    to_string(a) + " and " + to_string(b);
    }
    return std::nullopt;
  }
  int cmp = compare_numbers(a, b);
  switch (c.op) {
    case Constraint::Op::Lt: return cmp < 0;
    case Constraint::Op::Le: return cmp <= 0;
    case Constraint::Op::Gt: return cmp > 0;
    case Constraint::Op::Ge: return cmp >= 0;
    default: return false;
  }
}

Outcome terminal_outcome(const State& s) {
  if (s.floundered) return Outcome::Floundered;
  if (s.goal.empty()) return Outcome::Success;
  return Outcome::Failed;
}

Reduction reduce(const State& state, const AnnotatedProgram& program) {
  Reduction out;
  if (state.goal.empty() || state.floundered) return out;
  const Literal& lit = state.goal.front();
  Goal rest(state.goal.begin() + 1, state.goal.end());

  if (const auto* c = std::get_if<Constraint>(&lit)) {
    Store next = state.store;
    if (c->op == Constraint::Op::Eq) {
      next = unify(state.store, c->args[0], c->args[1]);
      if (!next.satisfiable()) return out;
    } else {
      std::string diag;
      auto ok = eval_builtin(*c, state.store, &diag);
      if (!ok) out.diagnostic = diag;
      if (!ok || !*ok) return out;
    }
    Successor s{State{std::move(rest), next, false, state.next_var}, Step{}};
    s.step.rule = Rule::Constraint;
    s.step.literal = lit;
    s.step.bindings = binding_delta(state.store, next);
    out.successors.push_back(std::move(s));
    return out;
  }

  if (const auto* atom = std::get_if<Atom>(&lit)) {
    const Predicate* pred = program.predicate(atom->key());
    if (!pred) return out;
    for (std::size_t i = 0; i < pred->clauses.size(); ++i) {
      VarSupply supply(state.next_var);
      auto [clause, renaming] = rename(pred->clauses[i], supply);
      Store next = state.store;
      for (std::size_t k = 0; k < clause.head.size() && next.satisfiable(); ++k) {
        next = unify(next, clause.head[k], atom->args[k]);
      }
      if (!next.satisfiable()) continue;
      Goal goal = std::move(clause.body);
      goal.insert(goal.end(), rest.begin(), rest.end());
      Successor s{State{std::move(goal), next, false, supply.peek()}, Step{}};
      s.step.rule = Rule::Clause;
      s.step.literal = lit;
      s.step.clause = i;
      s.step.renaming = std::move(renaming);
      s.step.bindings = binding_delta(state.store, next);
      out.successors.push_back(std::move(s));
    }
    return out;
  }

  if (const auto* ho = std::get_if<HoCall>(&lit)) {
    Term callee = deref(state.store, ho->callee);
    Successor s{state, Step{}};
    s.step.literal = lit;
    if (callee.is_pred() && callee.arity() == ho->args.size() &&
        program.predicate({callee.name(), callee.arity()})) {
      s.state.goal = std::move(rest);
      s.state.goal.insert(s.state.goal.begin(), Atom{callee.name(), ho->args});
      s.step.rule = Rule::HoApply;
    } else {
      s.state.floundered = true;
      s.step.rule = Rule::Flounder;
    }
    out.successors.push_back(std::move(s));
    return out;
  }
  return out;  // check literals are handled by the instrumented semantics
}

Expansion<State, Step> expand_base(const State& s, const AnnotatedProgram& program) {
  Expansion<State, Step> ex;
  if (s.goal.empty() || s.floundered) {
    ex.terminal = terminal_outcome(s);
    return ex;
  }
  Reduction r = reduce(s, program);
  ex.diagnostic = std::move(r.diagnostic);
  for (auto& succ : r.successors) ex.successors.emplace_back(std::move(succ.state), std::move(succ.step));
  ex.terminal = Outcome::Failed;
  return ex;
}

DeriveResult derive(const Query& query, const AnnotatedProgram& program,
                    const SearchLimits& limits, std::uint64_t first_var) {
  DeriveResult result;
  auto stats = explore<State, Step>(
      initial_state(query, first_var), limits,
      [&](const State& s) { return expand_base(s, program); },
      [](const Step&) { return true; },
      [&](const std::vector<State>& states, const std::vector<Step>& steps, Outcome o) {
        result.derivations.push_back(Derivation{states, steps, o});
        return true;
      });
  result.truncated = stats.truncated;
  result.diagnostics = std::move(stats.diagnostics);
  return result;
}

namespace {

/// Replaces every non-query variable by `_G<n>` in first-occurrence order.
Substitution anonymize(std::span<const Term> terms, std::span<const Term> query_vars) {
  std::set<VarId> keep;
  for (const auto& v : query_vars) keep.insert(v.var_id());
  std::vector<Term> vars;
  for (const auto& t : terms) collect_vars(t, vars);
  Substitution sigma;
  std::size_t n = 0;
  for (const auto& v : vars) {
    if (keep.count(v.var_id())) continue;
    sigma.emplace(v.var_id(), Term::var(v.var_id(), "_G" + std::to_string(++n)));
  }
  return sigma;
}

bool shown(const Term& v) { return !v.name().empty() && v.name()[0] != '_'; }

}  // namespace

std::string answer_key(const Store& answer, std::span<const Term> query_vars) {
  std::vector<Term> walked;
  for (const auto& v : query_vars) walked.push_back(walk(answer, v));
  auto sigma = anonymize(walked, query_vars);
  std::string key;
  for (std::size_t i = 0; i < walked.size(); ++i) {
    key += to_string(query_vars[i]) + "=" + to_string(substitute(sigma, walked[i]), VarStyle::Source) + ";";
  }
  return key;
}

std::string format_answer(const Store& answer, std::span<const Term> query_vars) {
  std::vector<Term> visible;
  for (const auto& v : query_vars) {
    if (shown(v)) visible.push_back(v);
  }
  std::vector<Term> walked;
  for (const auto& v : visible) walked.push_back(walk(answer, v));
  auto sigma = anonymize(walked, visible);
  std::string out;
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (walked[i].is_var() && walked[i].var_id() == visible[i].var_id()) continue;
    if (!out.empty()) out += ", ";
    out += visible[i].name() + " = " + to_string(substitute(sigma, walked[i]), VarStyle::Source);
  }
  return out.empty() ? "true" : out;
}

std::vector<Store> answers_of(const DeriveResult& result, const Query& query) {
  std::vector<Term> qvars = query.vars();
  std::vector<Store> out;
  std::set<std::string> seen;
  for (const auto& d : result.derivations) {
    if (d.outcome != Outcome::Success) continue;
    Store a = restrict(d.last().store, std::span<const Term>(qvars));
    if (seen.insert(answer_key(a, qvars)).second) out.push_back(std::move(a));
  }
  return out;
}

std::vector<Store> answers(const Query& query, const AnnotatedProgram& program,
                           const SearchLimits& limits, std::uint64_t first_var) {
  return answers_of(derive(query, program, limits, first_var), query);
}

std::optional<std::vector<State>> replay(const State& init, std::span<const Step> steps,
                                         const AnnotatedProgram& program) {
  std::vector<State> states{init};
  for (const auto& step : steps) {
    Reduction r = reduce(states.back(), program);
    const Successor* match = nullptr;
    for (const auto& s : r.successors) {
      if (s.step.rule == step.rule && s.step.clause == step.clause) {
        match = &s;
        break;
      }
    }
    if (!match) return std::nullopt;
    states.push_back(match->state);
  }
  return states;
}

Outcome classify(const DeriveResult& result) {
  std::size_t failed = 0;
  std::size_t floundered = 0;
  std::size_t bounded = 0;
  for (const auto& d : result.derivations) {
    switch (d.outcome) {
      case Outcome::Success: return Outcome::Success;
      case Outcome::Failed: ++failed; break;
      case Outcome::Floundered: ++floundered; break;
      case Outcome::ResourceBound: ++bounded; break;
      default: break;
    }
  }
  if (failed == 0 && bounded == 0 && floundered > 0) return Outcome::Floundered;
  if (failed > 0) return Outcome::Failed;
  if (bounded > 0) return Outcome::ResourceBound;
  return Outcome::Failed;
}

}  // namespace hoa

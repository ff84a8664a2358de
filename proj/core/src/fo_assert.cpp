#include "hoa/fo_assert.hpp"

#include <algorithm>

#include "hoa/syntax.hpp"

namespace hoa {

std::string to_string(const DepRule& r) {
  std::string out;
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) out += " & ";
    const auto& group = r.body[i];
    if (group.size() > 1 && r.body.size() > 1) out += "(";
    if (group.empty()) out += "false";
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (j) out += " | ";
      out += "~" + to_string(group[j]);
    }
    if (group.size() > 1 && r.body.size() > 1) out += ")";
  }
  if (r.body.empty()) out = "true";
  return out + " -> ~" + to_string(r.head);
}

std::set<Label> ErrorSet::closure() const {
  std::set<Label> known = facts;
  std::vector<Label> work(facts.begin(), facts.end());
  std::map<Label, std::vector<std::pair<std::size_t, std::size_t>>> watch;
  std::vector<std::vector<bool>> satisfied(rules.size());
  std::vector<std::size_t> count(rules.size(), 0);
  auto fire = [&](std::size_t r) {
    if (known.insert(rules[r].head).second) work.push_back(rules[r].head);
  };
  for (std::size_t r = 0; r < rules.size(); ++r) {
    satisfied[r].assign(rules[r].body.size(), false);
    if (rules[r].body.empty()) fire(r);
    for (std::size_t g = 0; g < rules[r].body.size(); ++g) {
      for (const auto& l : rules[r].body[g]) watch[l].emplace_back(r, g);
    }
  }
  while (!work.empty()) {
    Label l = work.back();
    work.pop_back();
    auto it = watch.find(l);
    if (it == watch.end()) continue;
    for (auto [r, g] : it->second) {
      if (satisfied[r][g]) continue;
      satisfied[r][g] = true;
      if (++count[r] == rules[r].body.size()) fire(r);
    }
  }
  return known;
}

AssertionCondition instantiate_at(const AssertionCondition& c, const std::vector<Term>& args) {
  Substitution sigma;
  for (std::size_t i = 0; i < c.head.size() && i < args.size(); ++i) {
    sigma.emplace(c.head[i].var_id(), args[i]);
  }
  AssertionCondition out = c;
  out.head = args;
  out.pre = substitute(sigma, c.pre);
  out.post = substitute(sigma, c.post);
  return out;
}

// ---------------------------------------------------------------------------
// CheckContext

CheckContext::CheckContext(const AnnotatedProgram& program, SearchLimits limits)
    : program_(program), limits_(limits) {}

Label CheckContext::add_instance(AssertionCondition condition,
                                 std::optional<std::size_t> program_condition, Label origin) {
  std::lock_guard lock(mu_);
  Label label = Label::instance(next_instance_++);
  instances_.emplace(label, LabeledInstance{label, std::move(condition), program_condition, origin});
  return label;
}

std::optional<LabeledInstance> CheckContext::instance(Label label) const {
  std::lock_guard lock(mu_);
  auto it = instances_.find(label);
  if (it == instances_.end()) return std::nullopt;
  return it->second;
}

std::vector<LabeledInstance> CheckContext::instances() const {
  std::lock_guard lock(mu_);
  std::vector<LabeledInstance> out;
  for (const auto& [l, inst] : instances_) out.push_back(inst);
  return out;
}

std::vector<Label> CheckContext::hypotheses(const Predprop& pp, const PredKey& pred) {
  std::lock_guard lock(mu_);
  auto key = std::make_pair(pp.name, pred);
  auto it = hyp_memo_.find(key);
  if (it != hyp_memo_.end()) return it->second;
  std::vector<Label> labels;
  if (pp.arity() == pred.arity) {
    for (const auto& anon : anon_conditions(pp)) {
      std::vector<Term> head;
      for (const auto& v : pp.head) head.push_back(Term::var(next_source_var(), v.name()));
      Label label = Label::hyp(next_hyp_++);
      hyps_.emplace(label, HypCondition{label, instantiate_anon(anon, pp.name, pred, head)});
      labels.push_back(label);
    }
  }
  hyp_memo_.emplace(key, labels);
  return labels;
}

std::optional<HypCondition> CheckContext::hypothesis(Label label) const {
  std::lock_guard lock(mu_);
  auto it = hyps_.find(label);
  if (it == hyps_.end()) return std::nullopt;
  return it->second;
}

void CheckContext::note(std::string diagnostic) {
  std::lock_guard lock(mu_);
  if (std::find(diagnostics_.begin(), diagnostics_.end(), diagnostic) == diagnostics_.end()) {
    diagnostics_.push_back(std::move(diagnostic));
  }
}

std::vector<std::string> CheckContext::diagnostics() const {
  std::lock_guard lock(mu_);
  return diagnostics_;
}

void CheckContext::mark_truncated() {
  std::lock_guard lock(mu_);
  truncated_ = true;
}

bool CheckContext::truncated() const {
  std::lock_guard lock(mu_);
  return truncated_;
}

// ---------------------------------------------------------------------------
// Policies

PropValue FormulaPolicy::eval(const Dnf& f, const Store& store, CheckContext& ctx) {
  PropValue v = eval_dnf(store, f, eval_);
  for (auto& d : v.diagnostics) ctx.note(std::move(d));
  if (v.truncated) ctx.mark_truncated();
  return v;
}

Extension FormulaPolicy::extend(Label label, const Dnf& formula, const Store& store,
                                CheckContext& ctx) {
  Extension ext;
  if (!eval(formula, store, ctx).value) ext.facts.insert(label);
  return ext;
}

bool FormulaPolicy::enables_check(const Dnf& pre, const Store& store, CheckContext& ctx) {
  return eval(pre, store, ctx).value;
}

std::unique_ptr<CheckPolicy> make_fo_policy(const AnnotatedProgram& program,
                                            const SearchLimits& limits) {
  return std::make_unique<FormulaPolicy>([&program, limits](const Store& s, const CondLiteral& l) {
    return succeeds_trivially(s, l, program, limits);
  });
}

// ---------------------------------------------------------------------------
// Instrumented reduction

namespace {

void merge(ExtState& s, const Extension& ext, ExtStep& step) {
  for (const auto& f : ext.facts) {
    if (s.errors.facts.insert(f).second) step.facts_added.insert(f);
  }
  for (const auto& r : ext.rules) {
    s.errors.rules.push_back(r);
    step.rules_added.push_back(r);
  }
  if (!ext.hypotheses.empty()) {
    auto scope = std::make_shared<HypScope>(*s.hyps);
    for (const auto& h : ext.hypotheses) {
      if (std::find(scope->begin(), scope->end(), h) == scope->end()) {
        scope->push_back(h);
        step.hyps_added.push_back(h);
      }
    }
    s.hyps = std::move(scope);
  }
}

void close(ExtState& s, const std::set<Label>& before, ExtStep& step) {
  if (step.facts_added.empty() && step.rules_added.empty()) return;
  s.closure = s.errors.closure();
  for (const auto& l : s.closure) {
    if (!before.count(l)) step.closure_delta.insert(l);
  }
}

void accumulate(Extension& into, Extension&& from) {
  into.facts.insert(from.facts.begin(), from.facts.end());
  for (auto& r : from.rules) into.rules.push_back(std::move(r));
  for (auto& h : from.hypotheses) {
    if (std::find(into.hypotheses.begin(), into.hypotheses.end(), h) == into.hypotheses.end()) {
      into.hypotheses.push_back(h);
    }
  }
}

}  // namespace

std::vector<Label> instantiate(const Atom& call, const ExtState& s, CheckPolicy& policy,
                               CheckContext& ctx) {
  std::vector<Label> out;
  const auto& program = ctx.program();
  auto it = program.conditions_by_pred.find(call.key());
  if (it != program.conditions_by_pred.end()) {
    for (std::size_t idx : it->second) {
      const auto& c = program.conditions[idx];
      if (c.trivial()) continue;
      out.push_back(ctx.add_instance(instantiate_at(c, call.args), idx, Label::program_origin()));
    }
  }
  if (policy.dynamic()) {
    for (const auto& h : *s.hyps) {
      auto hc = ctx.hypothesis(h);
      if (!hc || hc->condition.pred != call.key()) continue;
      out.push_back(ctx.add_instance(instantiate_at(hc->condition, call.args), std::nullopt, h));
    }
  }
  return out;
}

Expansion<ExtState, ExtStep> reduce_checked(const ExtState& s, CheckPolicy& policy,
                                            CheckContext& ctx) {
  Expansion<ExtState, ExtStep> ex;
  const State& base = s.state;
  if (base.goal.empty() || base.floundered) {
    ex.terminal = terminal_outcome(base);
    return ex;
  }
  const Literal& lit = base.goal.front();

  if (const auto* chk = std::get_if<Check>(&lit)) {
    ExtState next = s;
    next.state.goal.erase(next.state.goal.begin());
    ExtStep step;
    step.step.rule = Rule::Check;
    step.step.literal = lit;
    if (auto inst = ctx.instance(chk->label)) {
      merge(next, policy.extend(chk->label, inst->condition.post, base.store, ctx), step);
    } else {
      ctx.note("check of unknown instance " + to_string(chk->label));
    }
    close(next, s.closure, step);
    ex.successors.emplace_back(std::move(next), std::move(step));
    return ex;
  }

  Reduction r = reduce(base, ctx.program());
  ex.diagnostic = std::move(r.diagnostic);
  if (r.successors.empty()) {
    ex.terminal = Outcome::Failed;
    return ex;
  }

  Extension delta;
  std::vector<Label> created;
  std::vector<Label> checks;
  if (const auto* atom = std::get_if<Atom>(&lit)) {
    created = instantiate(*atom, s, policy, ctx);
    for (Label a : created) {
      auto inst = ctx.instance(a);
      if (policy.dynamic()) delta.rules.push_back(DepRule{{{a}}, inst->origin});
      if (inst->condition.kind == AssertionCondition::Kind::Calls) {
        accumulate(delta, policy.extend(a, inst->condition.pre, base.store, ctx));
      } else if (policy.enables_check(inst->condition.pre, base.store, ctx)) {
        checks.push_back(a);
      }
    }
  }

  std::size_t rest = base.goal.size() - 1;
  for (auto& succ : r.successors) {
    ExtState next;
    next.state = std::move(succ.state);
    next.errors = s.errors;
    next.closure = s.closure;
    next.hyps = s.hyps;
    ExtStep step;
    step.step = std::move(succ.step);
    step.instances_created = created;
    step.checks_emitted = checks;
    if (!checks.empty()) {
      auto pos = next.state.goal.end() - static_cast<std::ptrdiff_t>(rest);
      std::vector<Literal> lits;
      for (Label a : checks) lits.emplace_back(Check{a});
      next.state.goal.insert(pos, lits.begin(), lits.end());
    }
    merge(next, delta, step);
    close(next, s.closure, step);
    ex.successors.emplace_back(std::move(next), std::move(step));
  }
  return ex;
}

ExtState initial_ext_state(const Query& q) {
  ExtState s;
  s.state = initial_state(q);
  return s;
}

CheckRunResult derive_checked(const Query& query, const AnnotatedProgram& program,
                              const SearchLimits& limits, CheckPolicy& policy) {
  CheckRunResult result;
  result.context = std::make_shared<CheckContext>(program, limits);
  auto& ctx = *result.context;
  auto stats = explore<ExtState, ExtStep>(
      initial_ext_state(query), limits,
      [&](const ExtState& s) { return reduce_checked(s, policy, ctx); },
      [](const ExtStep& st) { return st.step.rule != Rule::Check; },
      [&](const std::vector<ExtState>& states, const std::vector<ExtStep>& steps, Outcome o) {
        result.derivations.push_back(ExtDerivation{states, steps, o});
        return true;
      });
  result.truncated = stats.truncated;
  result.diagnostics = std::move(stats.diagnostics);
  for (auto& d : ctx.diagnostics()) result.diagnostics.push_back(std::move(d));
  return result;
}

CheckRunResult derive_fo(const Query& query, const AnnotatedProgram& program,
                         const SearchLimits& limits) {
  auto policy = make_fo_policy(program, limits);
  return derive_checked(query, program, limits, *policy);
}

Derivation erase(const ExtDerivation& d) {
  Derivation out;
  out.outcome = d.outcome;
  for (std::size_t i = 0; i < d.states.size(); ++i) {
    const State& s = d.states[i].state;
    if (!s.goal.empty() && is_check(s.goal.front())) continue;
    State kept = s;
    std::erase_if(kept.goal, [](const Literal& l) { return is_check(l); });
    out.states.push_back(std::move(kept));
    if (i < d.steps.size()) out.steps.push_back(d.steps[i].step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Valuations

std::optional<std::size_t> return_point(std::span<const State> states, std::size_t call) {
  if (call >= states.size() || states[call].goal.empty()) return std::nullopt;
  std::size_t target = states[call].goal.size() - 1;
  for (std::size_t j = call + 1; j < states.size(); ++j) {
    if (states[j].floundered) return std::nullopt;
    if (states[j].goal.size() == target) return j;
  }
  return std::nullopt;
}

namespace {

const Atom* call_of(const State& s, const PredKey& pred) {
  if (s.goal.empty() || s.floundered) return nullptr;
  const auto* a = std::get_if<Atom>(&s.goal.front());
  if (!a || a->key() != pred) return nullptr;
  return a;
}

}  // namespace

bool solve(const AssertionCondition& c, std::span<const State> prefix, const LiteralEval& eval) {
  if (prefix.empty()) return true;
  std::size_t k = prefix.size() - 1;
  if (c.kind == AssertionCondition::Kind::Calls) {
    const Atom* call = call_of(prefix[k], c.pred);
    if (!call) return true;
    auto inst = instantiate_at(c, call->args);
    return eval_dnf(prefix[k].store, inst.pre, eval).value;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const Atom* call = call_of(prefix[i], c.pred);
    if (!call) continue;
    auto ret = return_point(prefix, i);
    if (!ret || *ret != k) continue;
    auto inst = instantiate_at(c, call->args);
    if (!eval_dnf(prefix[i].store, inst.pre, eval).value) continue;
    if (!eval_dnf(prefix[k].store, inst.post, eval).value) return false;
  }
  return true;
}

namespace {

std::optional<Label> falsified(std::size_t condition, const ExtDerivation& d,
                               const std::vector<LabeledInstance>& instances) {
  const auto& closure = d.last().closure;
  for (const auto& inst : instances) {
    if (inst.program_condition == condition && closure.count(inst.label)) return inst.label;
  }
  return std::nullopt;
}

}  // namespace

bool rtsolve(std::size_t condition, const ExtDerivation& d, const CheckContext& ctx) {
  return !falsified(condition, d, ctx.instances());
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CheckedWithinBounds: return "checked-within-bounds";
    case Verdict::False: return "false";
    case Verdict::Truncated: return "truncated";
  }
  return "?";
}

ConditionStatus status(std::size_t condition, const AnnotatedProgram&,
                       std::span<const CheckRunResult> runs) {
  ConditionStatus out;
  out.condition = condition;
  bool truncated = false;
  for (std::size_t q = 0; q < runs.size(); ++q) {
    truncated = truncated || runs[q].truncated;
    auto instances = runs[q].context->instances();
    for (std::size_t k = 0; k < runs[q].derivations.size(); ++k) {
      const auto& d = runs[q].derivations[k];
      auto label = falsified(condition, d, instances);
      if (!label) continue;
      Witness w;
      w.query = q;
      w.derivation = k;
      w.label = *label;
      for (std::size_t t = 0; t < d.steps.size(); ++t) {
        if (d.steps[t].closure_delta.count(*label)) {
          w.step = t;
          break;
        }
      }
      out.verdict = Verdict::False;
      out.witness = w;
      return out;
    }
  }
  out.verdict = truncated ? Verdict::Truncated : Verdict::CheckedWithinBounds;
  return out;
}

std::vector<ConditionStatus> condition_statuses(const AnnotatedProgram& program,
                                                std::span<const CheckRunResult> runs) {
  std::vector<ConditionStatus> out;
  for (std::size_t i = 0; i < program.conditions.size(); ++i) {
    out.push_back(status(i, program, runs));
  }
  return out;
}

std::vector<AssertionStatus> assertion_statuses(const AnnotatedProgram& program,
                                                std::span<const ConditionStatus> conditions,
                                                bool truncated) {
  std::vector<AssertionStatus> out;
  for (std::size_t a = 0; a < program.assertions.size(); ++a) {
    AssertionStatus st;
    st.assertion = a;
    for (const auto& cs : conditions) {
      const auto& members = program.conditions[cs.condition].assertions;
      if (std::find(members.begin(), members.end(), a) == members.end()) continue;
      if (cs.verdict != Verdict::False) continue;
      st.false_conditions.push_back(cs.condition);
      if (!st.witness) st.witness = cs.witness;
    }
    if (!st.false_conditions.empty()) {
      st.verdict = Verdict::False;
    } else {
      st.verdict = truncated ? Verdict::Truncated : Verdict::CheckedWithinBounds;
    }
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace hoa

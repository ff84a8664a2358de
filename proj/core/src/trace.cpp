#include "hoa/trace.hpp"

#include <map>
#include <sstream>

#include "json.hpp"

namespace hoa {

using nlohmann::json;

namespace {

using VarNames = std::map<VarId, Term>;

VarNames names_for(const Query& q, const std::vector<const Step*>& steps) {
  VarNames names;
  for (const auto& v : q.vars()) names.emplace(v.var_id(), v);
  for (const Step* s : steps) {
    for (const auto& [from, to] : s->renaming.mapping()) names.emplace(to.var_id(), to);
  }
  return names;
}

std::string var_label(VarId v, const VarNames& names, VarStyle style) {
  auto it = names.find(v);
  if (it != names.end()) return var_name(it->second, style);
  return "_V" + std::to_string(v.value);
}

json bindings_json(const Step& s, const VarNames& names) {
  json out = json::array();
  for (const auto& [v, t] : s.bindings) {
    out.push_back({{"var", var_label(v, names, VarStyle::Unique)}, {"term", to_string(t)}});
  }
  return out;
}

json step_json(std::size_t derivation, std::size_t index, const Step& s, const VarNames& names) {
  json rec;
  rec["derivation"] = derivation;
  rec["step"] = index;
  rec["rule"] = to_string(s.rule);
  rec["literal"] = to_string(s.literal);
  rec["clause"] = s.clause ? json(*s.clause) : json(nullptr);
  rec["bindings"] = bindings_json(s, names);
  return rec;
}

json labels_json(const auto& labels) {
  json out = json::array();
  for (const auto& l : labels) out.push_back(to_string(l));
  return out;
}

json rules_json(const std::vector<DepRule>& rules) {
  json out = json::array();
  for (const auto& r : rules) out.push_back(to_string(r));
  return out;
}

std::string answer_text(const Query& q, const State& last) {
  std::vector<Term> qv = q.vars();
  return format_answer(restrict(last.store, std::span<const Term>(qv)), qv);
}

json outcome_json(const Query& q, std::size_t derivation, Outcome o, const State& last) {
  json rec;
  rec["derivation"] = derivation;
  rec["outcome"] = to_string(o);
  if (o == Outcome::Success) rec["answer"] = answer_text(q, last);
  return rec;
}

}  // namespace

std::string trace_header(const std::string& mode) {
  json h;
  h["schema"] = "hoa-trace/1";
  h["mode"] = mode;
  return h.dump();
}

std::vector<std::string> trace_records(const Query& query, const DeriveResult& result) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < result.derivations.size(); ++k) {
    const auto& d = result.derivations[k];
    std::vector<const Step*> steps;
    for (const auto& s : d.steps) steps.push_back(&s);
    VarNames names = names_for(query, steps);
    for (std::size_t t = 0; t < d.steps.size(); ++t) {
      out.push_back(step_json(k, t, d.steps[t], names).dump());
    }
    out.push_back(outcome_json(query, k, d.outcome, d.last()).dump());
  }
  return out;
}

std::string describe(const LabeledInstance& inst) {
  return to_string(inst.label) + "#" + to_string(inst.condition, VarStyle::Source);
}

std::string describe(const HypCondition& hyp) {
  return to_string(hyp.label) + "#" + to_string(hyp.condition, VarStyle::Source);
}

std::vector<std::string> trace_records(const Query& query, const CheckRunResult& result) {
  std::vector<std::string> out;
  const auto& ctx = *result.context;
  for (std::size_t k = 0; k < result.derivations.size(); ++k) {
    const auto& d = result.derivations[k];
    std::vector<const Step*> steps;
    for (const auto& s : d.steps) steps.push_back(&s.step);
    VarNames names = names_for(query, steps);
    for (std::size_t t = 0; t < d.steps.size(); ++t) {
      const ExtStep& es = d.steps[t];
      json rec = step_json(k, t, es.step, names);
      rec["errors_delta"] = {{"facts", labels_json(es.facts_added)},
                             {"rules", rules_json(es.rules_added)}};
      rec["checks_emitted"] = labels_json(es.checks_emitted);
      json insts = json::array();
      for (Label a : es.instances_created) {
        if (auto inst = ctx.instance(a)) insts.push_back(describe(*inst));
      }
      rec["instances"] = insts;
      json hyps = json::array();
      for (Label h : es.hyps_added) {
        if (auto hc = ctx.hypothesis(h)) hyps.push_back(describe(*hc));
      }
      rec["hyp_conditions_added"] = hyps;
      rec["rules_added"] = rules_json(es.rules_added);
      rec["closure_delta"] = labels_json(es.closure_delta);
      out.push_back(rec.dump());
    }
    json end = outcome_json(query, k, d.outcome, d.last().state);
    end["facts"] = labels_json(d.last().errors.facts);
    end["closure"] = labels_json(d.last().closure);
    out.push_back(end.dump());
  }
  return out;
}

namespace {

bool starts_with_head_equation(const State& s) {
  if (s.goal.empty()) return false;
  const auto* c = std::get_if<Constraint>(&s.goal.front());
  return c && c->head_equation;
}

std::string render_literal(const Literal& lit, const Store& store) {
  if (const auto* a = std::get_if<Atom>(&lit)) {
    Atom shown = *a;
    for (auto& t : shown.args) t = walk(store, t);
    return to_string(Literal{shown}, VarStyle::Source);
  }
  if (const auto* h = std::get_if<HoCall>(&lit)) {
    HoCall shown = *h;
    for (auto& t : shown.args) t = walk(store, t);
    return to_string(Literal{shown}, VarStyle::Source);
  }
  return to_string(lit, VarStyle::Source);
}

std::string render_goal(const Goal& goal, const Store& store) {
  if (goal.empty()) return "□";
  std::string out;
  for (std::size_t i = 0; i < goal.size(); ++i) {
    if (i) out += ", ";
    out += render_literal(goal[i], store);
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Code points, which is close enough for the symbols we print.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

std::vector<TableRow> table_rows(const ExtDerivation& d, const CheckContext& ctx,
                                 const Query* query) {
  std::vector<std::size_t> shown;
  for (std::size_t i = 0; i < d.states.size(); ++i) {
    bool first_or_last = i == 0 || i + 1 == d.states.size();
    bool via_hoapply = i > 0 && d.steps[i - 1].step.rule == Rule::HoApply;
    if (first_or_last || (!via_hoapply && !starts_with_head_equation(d.states[i].state))) {
      shown.push_back(i);
    }
  }
  std::vector<const Step*> steps;
  for (const auto& s : d.steps) steps.push_back(&s.step);
  Query none;
  VarNames names = names_for(query ? *query : none, steps);

  std::vector<TableRow> rows;
  for (std::size_t r = 0; r < shown.size(); ++r) {
    std::size_t i = shown[r];
    std::size_t next = r + 1 < shown.size() ? shown[r + 1] : i;
    TableRow row;
    row.goal = render_goal(d.states[i].state.goal, d.states[next].state.store);
    std::vector<std::string> binds;
    std::vector<std::string> errs;
    std::vector<std::string> conds;
    for (std::size_t t = i; t < next && t < d.steps.size(); ++t) {
      const ExtStep& es = d.steps[t];
      for (const auto& [v, term] : es.step.bindings) {
        binds.push_back(var_label(v, names, VarStyle::Source) + " = " +
                        to_string(term, VarStyle::Source));
      }
      for (const auto& f : es.facts_added) errs.push_back("~" + to_string(f));
      for (const auto& rule : es.rules_added) errs.push_back(to_string(rule));
      for (Label a : es.instances_created) {
        if (auto inst = ctx.instance(a)) conds.push_back(describe(*inst));
      }
      for (Label h : es.hyps_added) {
        if (auto hc = ctx.hypothesis(h)) conds.push_back(describe(*hc));
      }
    }
    row.bindings = join(binds, ", ");
    row.errors = join(errs, ", ");
    row.conditions = join(conds, ", ");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_table(const std::vector<TableRow>& rows) {
  std::size_t w[3] = {4, 5, 6};
  for (const auto& r : rows) {
    w[0] = std::max(w[0], display_width(r.goal));
    w[1] = std::max(w[1], display_width(r.bindings));
    w[2] = std::max(w[2], display_width(r.errors));
  }
  auto pad = [](const std::string& s, std::size_t n) {
    std::size_t width = display_width(s);
    return s + std::string(n > width ? n - width : 0, ' ');
  };
  std::ostringstream os;
  os << pad("goal", w[0]) << " | " << pad("delta", w[1]) << " | " << pad("errors", w[2])
     << " | conditions\n";
  for (const auto& r : rows) {
    os << pad(r.goal, w[0]) << " | " << pad(r.bindings, w[1]) << " | " << pad(r.errors, w[2])
       << " | " << r.conditions << "\n";
  }
  return os.str();
}

}  // namespace hoa

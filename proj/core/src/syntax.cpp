#include <sstream>

#include "hoa/syntax.hpp"

namespace hoa {

namespace {

Dnf disjoin_all(const std::vector<const Dnf*>& parts) {
  Dnf out = Dnf::falsity();
  for (const Dnf* d : parts) {
    if (d->is_true()) return Dnf::truth();
    out = disjoin(out, *d);
  }
  return out;
}

Substitution head_substitution(const std::vector<Term>& from, const std::vector<Term>& to) {
  Substitution sigma;
  for (std::size_t i = 0; i < from.size() && i < to.size(); ++i) {
    sigma.emplace(from[i].var_id(), to[i]);
  }
  return sigma;
}

std::string head_string(const std::string& name, const std::vector<Term>& args) {
  std::string out = to_string(Term::atom(name), VarStyle::Source);
  if (args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += to_string(args[i], VarStyle::Source);
  }
  return out + ')';
}

std::string assertion_tail(const Dnf& pre, const Dnf& post) {
  std::string out;
  if (!pre.is_true()) out += " : " + to_string(pre, VarStyle::Source);
  if (!post.is_true()) out += " => " + to_string(post, VarStyle::Source);
  return out;
}

}  // namespace

std::vector<AssertionCondition> conditions_for(const PredKey& pred,
                                               std::span<const Assertion> assertions) {
  std::vector<AssertionCondition> out;
  if (assertions.empty()) return out;
  AssertionCondition calls;
  calls.kind = AssertionCondition::Kind::Calls;
  calls.pred = pred;
  calls.head = assertions.front().head;
  std::vector<const Dnf*> pres;
  for (std::size_t i = 0; i < assertions.size(); ++i) {
    pres.push_back(&assertions[i].pre);
    calls.assertions.push_back(i);
  }
  calls.pre = disjoin_all(pres);
  out.push_back(std::move(calls));
  for (std::size_t i = 0; i < assertions.size(); ++i) {
    AssertionCondition s;
    s.kind = AssertionCondition::Kind::Success;
    s.pred = pred;
    s.head = assertions.front().head;
    auto sigma = head_substitution(assertions[i].head, s.head);
    s.pre = substitute(sigma, assertions[i].pre);
    s.post = substitute(sigma, assertions[i].post);
    s.assertions.push_back(i);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AnonCondition> anon_conditions(const Predprop& pp) {
  std::vector<AnonCondition> out;
  std::vector<const Dnf*> pres;
  for (const auto& a : pp.assertions) pres.push_back(&a.pre);
  AnonCondition calls;
  calls.kind = AssertionCondition::Kind::Calls;
  calls.head = pp.head;
  calls.pre = disjoin_all(pres);
  if (!calls.pre.is_true()) out.push_back(std::move(calls));
  for (const auto& a : pp.assertions) {
    if (a.post.is_true()) continue;
    AnonCondition s;
    s.kind = AssertionCondition::Kind::Success;
    s.head = pp.head;
    s.pre = a.pre;
    s.post = a.post;
    out.push_back(std::move(s));
  }
  return out;
}

AssertionCondition instantiate_anon(const AnonCondition& c, const std::string& predprop,
                                    const PredKey& pred, std::vector<Term> head) {
  AssertionCondition out;
  out.kind = c.kind;
  out.pred = pred;
  auto sigma = head_substitution(c.head, head);
  out.head = std::move(head);
  out.pre = substitute(sigma, c.pre);
  out.post = substitute(sigma, c.post);
  out.hyp = HypOrigin{predprop, pred};
  return out;
}

Clause apply(const Renaming& r, const Clause& clause) {
  Clause out;
  out.pred = clause.pred;
  out.span = clause.span;
  out.head.reserve(clause.head.size());
  for (const auto& h : clause.head) out.head.push_back(r.apply(h));
  out.body.reserve(clause.body.size());
  for (const auto& l : clause.body) out.body.push_back(apply(r, l));
  return out;
}

std::pair<Clause, Renaming> rename(const Clause& clause, VarSupply& supply) {
  std::vector<Term> vars;
  for (const auto& h : clause.head) collect_vars(h, vars);
  for (const auto& l : clause.body) collect_vars(l, vars);
  Renaming r = Renaming::fresh_for(vars, supply);
  return {apply(r, clause), r};
}

std::string print_clause(const Clause& clause) {
  Substitution fold;
  std::size_t skip = 0;
  for (const auto& lit : clause.body) {
    const auto* c = std::get_if<Constraint>(&lit);
    if (!c || !c->head_equation || !c->args[0].is_var()) break;
    fold.emplace(c->args[0].var_id(), c->args[1]);
    ++skip;
  }
  std::vector<Term> head;
  for (const auto& h : clause.head) head.push_back(substitute(fold, h));
  std::string out = head_string(clause.pred.name, head);
  if (skip < clause.body.size()) {
    out += " :-\n    ";
    for (std::size_t i = skip; i < clause.body.size(); ++i) {
      if (i > skip) out += ",\n    ";
      out += to_string(clause.body[i], VarStyle::Source);
    }
  }
  return out + ".";
}

std::string print_program(const AnnotatedProgram& program) {
  std::ostringstream os;
  for (const auto& [name, pp] : program.predprops) {
    os << ":- predprop " << name << "(" << to_string(pp.param, VarStyle::Source) << ") {\n";
    for (const auto& a : pp.assertions) {
      os << "    :- pred " << to_string(pp.param, VarStyle::Source) << "(";
      for (std::size_t i = 0; i < pp.head.size(); ++i) {
        if (i) os << ',';
        os << to_string(pp.head[i], VarStyle::Source);
      }
      os << ")" << assertion_tail(a.pre, a.post) << ".\n";
    }
    os << "}.\n\n";
  }
  for (const auto& a : program.assertions) {
    os << ":- pred " << head_string(a.pred.name, a.head) << assertion_tail(a.pre, a.post)
       << ".\n";
  }
  if (!program.assertions.empty()) os << "\n";
  for (const auto& [key, pred] : program.predicates) {
    for (const auto& c : pred.clauses) os << print_clause(c) << "\n";
  }
  for (const auto& q : program.queries) {
    os << "\n:- query " << to_string(q.goal, VarStyle::Source) << ".";
  }
  if (!program.queries.empty()) os << "\n";
  return os.str();
}

}  // namespace hoa

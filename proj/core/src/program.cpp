#include <sstream>

#include "hoa/program.hpp"

namespace hoa {

std::string to_string(const PredKey& key) { return key.name + "/" + std::to_string(key.arity); }

std::string to_string(const Label& label) {
  return (label.kind == Label::Kind::Instance ? "a" : "h") + std::to_string(label.index);
}

std::string to_string(const SourceSpan& span) {
  return span.file + ":" + std::to_string(span.line) + ":" + std::to_string(span.col);
}

namespace {

std::string call_string(const std::string& name, const std::vector<Term>& args, VarStyle style) {
  std::string out = to_string(Term::atom(name), style);
  if (args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += to_string(args[i], style);
  }
  return out + ')';
}

const char* op_symbol(Constraint::Op op) {
  switch (op) {
    case Constraint::Op::Eq: return "=";
    case Constraint::Op::Lt: return "<";
    case Constraint::Op::Le: return "=<";
    case Constraint::Op::Gt: return ">";
    case Constraint::Op::Ge: return ">=";
    default: return "?";
  }
}

}  // namespace

std::string to_string(const Literal& lit, VarStyle style) {
  return std::visit(
      [&](const auto& l) -> std::string {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Constraint>) {
          if (l.op == Constraint::Op::Test) return call_string(l.test, l.args, style);
          if (l.op == Constraint::Op::Fail) return "fail";
          return to_string(l.args[0], style) + " " + op_symbol(l.op) + " " +
                 to_string(l.args[1], style);
        } else if constexpr (std::is_same_v<T, Atom>) {
          return call_string(l.pred, l.args, style);
        } else if constexpr (std::is_same_v<T, HoCall>) {
          std::string out = to_string(l.callee, style) + "(";
          for (std::size_t i = 0; i < l.args.size(); ++i) {
            if (i) out += ',';
            out += to_string(l.args[i], style);
          }
          return out + ")";
        } else {
          return "check(" + to_string(l.label) + ")";
        }
      },
      lit);
}

std::string to_string(const Goal& goal, VarStyle style) {
  if (goal.empty()) return "□";
  std::string out;
  for (std::size_t i = 0; i < goal.size(); ++i) {
    if (i) out += ", ";
    out += to_string(goal[i], style);
  }
  return out;
}

void collect_vars(const Literal& lit, std::vector<Term>& out) {
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, HoCall>) {
          collect_vars(l.callee, out);
          for (const auto& a : l.args) collect_vars(a, out);
        } else if constexpr (std::is_same_v<T, Check>) {
        } else {
          for (const auto& a : l.args) collect_vars(a, out);
        }
      },
      lit);
}

Literal apply(const Renaming& r, const Literal& lit) {
  return std::visit(
      [&](const auto& l) -> Literal {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Check>) {
          return l;
        } else {
          T copy = l;
          if constexpr (std::is_same_v<T, HoCall>) copy.callee = r.apply(l.callee);
          for (auto& a : copy.args) a = r.apply(a);
          return copy;
        }
      },
      lit);
}

bool Dnf::is_true() const {
  for (const auto& c : conjuncts) {
    if (c.empty()) return true;
  }
  return false;
}

bool Dnf::has_predprop() const {
  for (const auto& c : conjuncts) {
    for (const auto& l : c) {
      if (l.kind == CondLiteral::Kind::Predprop) return true;
    }
  }
  return false;
}

std::string to_string(const CondLiteral& lit, VarStyle style) {
  return call_string(lit.name, lit.args, style);
}

std::string to_string(const Dnf& f, VarStyle style) {
  if (f.is_false()) return "false";
  std::string out;
  for (std::size_t i = 0; i < f.conjuncts.size(); ++i) {
    if (i) out += " ; ";
    const auto& c = f.conjuncts[i];
    if (c.empty()) {
      out += "true";
      continue;
    }
    bool paren = c.size() > 1 && f.conjuncts.size() > 1;
    if (paren) out += '(';
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j) out += ", ";
      out += to_string(c[j], style);
    }
    if (paren) out += ')';
  }
  return out;
}

Dnf substitute(const Substitution& sigma, const Dnf& f) {
  Dnf out = f;
  for (auto& c : out.conjuncts) {
    for (auto& l : c) {
      for (auto& a : l.args) a = substitute(sigma, a);
    }
  }
  return out;
}

Dnf disjoin(const Dnf& a, const Dnf& b) {
  Dnf out = a;
  out.conjuncts.insert(out.conjuncts.end(), b.conjuncts.begin(), b.conjuncts.end());
  return out;
}

std::string to_string(const AssertionCondition& c, VarStyle style) {
  std::string head = call_string(c.pred.name, c.head, style);
  if (c.kind == AssertionCondition::Kind::Calls) {
    return "calls(" + head + ", " + to_string(c.pre, style) + ")";
  }
  return "success(" + head + ", " + to_string(c.pre, style) + ", " + to_string(c.post, style) +
         ")";
}

std::vector<Term> Query::vars() const {
  std::vector<Term> out;
  for (const auto& l : goal) collect_vars(l, out);
  return out;
}

const Predicate* AnnotatedProgram::predicate(const PredKey& key) const {
  auto it = predicates.find(key);
  return it == predicates.end() ? nullptr : &it->second;
}

std::optional<std::size_t> AnnotatedProgram::arity_of(const std::string& name) const {
  std::optional<std::size_t> found;
  for (const auto& [key, pred] : predicates) {
    if (key.name != name) continue;
    if (found) return std::nullopt;
    found = key.arity;
  }
  return found;
}

const Predprop* AnnotatedProgram::predprop(const std::string& name) const {
  auto it = predprops.find(name);
  return it == predprops.end() ? nullptr : &it->second;
}

}  // namespace hoa

#include "hoa/terms.hpp"

#include <atomic>
#include <cassert>
#include <cctype>
#include <cstdio>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace hoa {

VarId next_source_var() {
  static std::atomic<std::uint64_t> counter{1};
  return VarId{counter.fetch_add(1, std::memory_order_relaxed)};
}

Term Term::var(VarId id, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->id = id.value;
  n->name = std::move(name);
  return Term(std::move(n));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Compound;
  n->name = std::move(functor);
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::pred(std::string name, std::size_t arity) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Pred;
  n->name = std::move(name);
  n->id = arity;
  return Term(std::move(n));
}

Term Term::integer(std::int64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Int;
  n->ival = value;
  return Term(std::move(n));
}

Term Term::real(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Flt;
  n->fval = value;
  return Term(std::move(n));
}

Term Term::cons(Term head, Term tail) { return compound(".", {std::move(head), std::move(tail)}); }

Term Term::list(std::span<const Term> items, const Term* tail) {
  Term out = tail ? *tail : nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) out = cons(*it, out);
  return out;
}

std::size_t Term::arity() const {
  if (kind() == Kind::Pred) return static_cast<std::size_t>(node_->id);
  return node_->args.size();
}

double Term::numeric_value() const {
  return kind() == Kind::Int ? static_cast<double>(node_->ival) : node_->fval;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Var:
      return a.node_->id == b.node_->id;
    case Term::Kind::Int:
      return a.node_->ival == b.node_->ival;
    case Term::Kind::Flt:
      return a.node_->fval == b.node_->fval;
    case Term::Kind::Pred:
      return a.node_->id == b.node_->id && a.node_->name == b.node_->name;
    case Term::Kind::Compound:
      if (a.node_->name != b.node_->name || a.node_->args.size() != b.node_->args.size()) {
        return false;
      }
      for (std::size_t i = 0; i < a.node_->args.size(); ++i) {
        if (!(a.node_->args[i] == b.node_->args[i])) return false;
      }
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing

std::string var_name(const Term& v, VarStyle style) {
  if (style == VarStyle::Source || v.var_id().value < kRunVarBase) {
    if (v.name().empty()) return "_G" + std::to_string(v.var_id().value);
    return v.name();
  }
  std::uint64_t id = v.var_id().value;
  std::string suffix = id >= kPropVarBase ? "p" + std::to_string(id - kPropVarBase)
                                          : std::to_string(id - kRunVarBase);
  return (v.name().empty() ? std::string("_G") : v.name()) + "_" + suffix;
}

namespace {

bool plain_atom(const std::string& s) {
  if (s.empty()) return false;
  if (s == "[]") return true;
  if (!std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

std::string quote_atom(const std::string& s) {
  if (plain_atom(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(std::ostringstream& os, const Term& t, VarStyle style) {
  switch (t.kind()) {
    case Term::Kind::Var:
      os << var_name(t, style);
      return;
    case Term::Kind::Int:
      os << t.int_value();
      return;
    case Term::Kind::Flt:
      os << format_real(t.flt_value());
      return;
    case Term::Kind::Pred:
      os << quote_atom(t.name());
      return;
    case Term::Kind::Compound:
      break;
  }
  if (t.name() == "." && t.args().size() == 2) {
    os << '[';
    print(os, t.args()[0], style);
    Term rest = t.args()[1];
    while (rest.is_compound() && rest.name() == "." && rest.args().size() == 2) {
      os << ',';
      print(os, rest.args()[0], style);
      rest = rest.args()[1];
    }
    if (!(rest.is_atom() && rest.name() == "[]")) {
      os << '|';
      print(os, rest, style);
    }
    os << ']';
    return;
  }
  os << quote_atom(t.name());
  if (!t.args().empty()) {
    os << '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) os << ',';
      print(os, t.args()[i], style);
    }
    os << ')';
  }
}

}  // namespace

std::string to_string(const Term& t, VarStyle style) {
  std::ostringstream os;
  print(os, t, style);
  return os.str();
}

// ---------------------------------------------------------------------------
// Variables

void collect_vars(const Term& t, std::vector<Term>& out) {
  if (t.is_var()) {
    for (const auto& v : out) {
      if (v.var_id() == t.var_id()) return;
    }
    out.push_back(t);
    return;
  }
  for (const auto& a : t.args()) collect_vars(a, out);
}

std::vector<Term> vars_of(std::span<const Term> terms) {
  std::vector<Term> out;
  for (const auto& t : terms) collect_vars(t, out);
  return out;
}

bool occurs_in(VarId v, const Term& t) {
  if (t.is_var()) return t.var_id() == v;
  for (const auto& a : t.args()) {
    if (occurs_in(v, a)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Store

Store Store::inconsistent() {
  Store s;
  s.satisfiable_ = false;
  return s;
}

const Term* Store::lookup(VarId v) const {
  auto it = bindings_.find(v);
  return it == bindings_.end() ? nullptr : &it->second;
}

Store Store::with_binding(VarId v, Term t) const {
  Store s = *this;
  s.bindings_.insert_or_assign(v, std::move(t));
  return s;
}

bool younger_first(VarId a, VarId b) { return a.value > b.value; }

Term deref(const Store& store, const Term& t) {
  Term cur = t;
  while (cur.is_var()) {
    const Term* next = store.lookup(cur.var_id());
    if (!next) break;
    cur = *next;
  }
  return cur;
}

Term walk(const Store& store, const Term& t) {
  Term cur = deref(store, t);
  if (!cur.is_compound() || cur.args().empty()) return cur;
  std::vector<Term> args;
  args.reserve(cur.args().size());
  bool changed = false;
  for (const auto& a : cur.args()) {
    args.push_back(walk(store, a));
    if (!args.back().same_node(a)) changed = true;
  }
  return changed ? Term::compound(cur.name(), std::move(args)) : cur;
}

class Unifier {
 public:
  Unifier(Store& s, const BindOrder& order) : s_(s), order_(order) {}

  bool run(const Term& a, const Term& b) {
    std::vector<std::pair<Term, Term>> work{{a, b}};
    while (!work.empty()) {
      auto [x0, y0] = std::move(work.back());
      work.pop_back();
      Term x = deref(s_, x0);
      Term y = deref(s_, y0);
      if (x.is_var() && y.is_var()) {
        if (x.var_id() == y.var_id()) continue;
        if (order_(x.var_id(), y.var_id())) {
          bind(x.var_id(), y);
        } else {
          bind(y.var_id(), x);
        }
        continue;
      }
      if (x.is_var()) {
        if (!bind_checked(x.var_id(), y)) return false;
        continue;
      }
      if (y.is_var()) {
        if (!bind_checked(y.var_id(), x)) return false;
        continue;
      }
      if (x.kind() != y.kind()) return false;
      switch (x.kind()) {
        case Term::Kind::Int:
        case Term::Kind::Flt:
        case Term::Kind::Pred:
          if (!(x == y)) return false;
          break;
        case Term::Kind::Compound:
          if (x.name() != y.name() || x.args().size() != y.args().size()) return false;
          for (std::size_t i = 0; i < x.args().size(); ++i) {
            work.emplace_back(x.args()[i], y.args()[i]);
          }
          break;
        case Term::Kind::Var:
          break;
      }
    }
    return true;
  }

 private:
  bool bind_checked(VarId v, const Term& t) {
    if (occurs_in(v, walk(s_, t))) return false;
    bind(v, t);
    return true;
  }
  void bind(VarId v, const Term& t) { s_.bindings_.insert_or_assign(v, t); }

  Store& s_;
  const BindOrder& order_;
};

Store unify(const Store& store, const Term& a, const Term& b) {
  static const BindOrder kDefault = younger_first;
  return unify(store, a, b, kDefault);
}

Store unify(const Store& store, const Term& a, const Term& b, const BindOrder& order) {
  if (!store.satisfiable()) return Store::inconsistent();
  Store out = store;
  Unifier u(out, order);
  if (!u.run(a, b)) return Store::inconsistent();
  return out;
}

Store restrict(const Store& store, std::span<const Term> object) {
  Store out;
  if (!store.satisfiable()) return Store::inconsistent();
  std::deque<Term> queue;
  for (const auto& v : vars_of(object)) queue.push_back(v);
  std::set<VarId> seen;
  while (!queue.empty()) {
    Term v = queue.front();
    queue.pop_front();
    if (!seen.insert(v.var_id()).second) continue;
    const Term* bound = store.lookup(v.var_id());
    if (!bound) continue;
    out = out.with_binding(v.var_id(), *bound);
    std::vector<Term> inner;
    collect_vars(*bound, inner);
    for (auto& w : inner) queue.push_back(std::move(w));
  }
  return out;
}

Store restrict(const Store& store, const Term& object) {
  return restrict(store, std::span<const Term>(&object, 1));
}

namespace {

std::set<VarId> store_vars(const Store& s) {
  std::set<VarId> out;
  for (const auto& [k, t] : s.bindings()) {
    out.insert(k);
    std::vector<Term> vs;
    collect_vars(t, vs);
    for (const auto& v : vs) out.insert(v.var_id());
  }
  return out;
}

}  // namespace

bool entails(const Store& stronger, const Store& weaker) {
  if (!stronger.satisfiable()) return true;
  if (!weaker.satisfiable()) return false;
  std::set<VarId> known = store_vars(stronger);
  std::set<VarId> inner;
  for (const auto& [k, t] : weaker.bindings()) {
    std::vector<Term> vs;
    collect_vars(t, vs);
    for (const auto& v : vs) inner.insert(v.var_id());
  }
  // Local variables: occur inside a binding of `weaker`, unknown to `stronger`.
  std::set<VarId> local;
  for (VarId v : store_vars(weaker)) {
    if (!known.count(v) && inner.count(v)) local.insert(v);
  }
  BindOrder order = [&](VarId a, VarId b) {
    bool la = local.count(a) > 0;
    bool lb = local.count(b) > 0;
    if (la != lb) return la;
    return younger_first(a, b);
  };
  Store s = stronger;
  for (const auto& [k, t] : weaker.bindings()) {
    s = unify(s, Term::var(k, ""), t, order);
    if (!s.satisfiable()) return false;
  }
  for (const auto& [k, t] : s.bindings()) {
    if (!stronger.lookup(k) && !local.count(k)) return false;
  }
  return true;
}

std::vector<std::pair<VarId, Term>> binding_delta(const Store& before, const Store& after) {
  std::vector<std::pair<VarId, Term>> out;
  for (const auto& [k, t] : after.bindings()) {
    if (!before.lookup(k)) out.emplace_back(k, t);
  }
  return out;
}

std::string to_string(const Store& store, VarStyle style) {
  if (!store.satisfiable()) return "false";
  if (store.empty()) return "true";
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, t] : store.bindings()) {
    if (!first) os << ", ";
    first = false;
    os << var_name(Term::var(k, ""), style) << " = " << to_string(t, style);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Renaming / substitution

Renaming Renaming::fresh_for(std::span<const Term> vars, VarSupply& supply) {
  Renaming r;
  for (const auto& v : vars) {
    if (r.map_.count(v.var_id())) continue;
    r.map_.emplace(v.var_id(), supply.fresh(v.name()));
  }
  return r;
}

void Renaming::add(const Term& from, const Term& to) {
  if (!from.is_var() || !to.is_var()) throw std::invalid_argument("renaming maps variables only");
  map_.insert_or_assign(from.var_id(), to);
}

Term Renaming::apply(const Term& t) const {
  if (t.is_var()) {
    auto it = map_.find(t.var_id());
    return it == map_.end() ? t : it->second;
  }
  if (!t.is_compound() || t.args().empty()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(apply(a));
  return Term::compound(t.name(), std::move(args));
}

Renaming Renaming::inverse() const {
  Renaming r;
  for (const auto& [k, v] : map_) r.map_.insert_or_assign(v.var_id(), Term::var(k, v.name()));
  return r;
}

Term substitute(const Substitution& sigma, const Term& t) {
  if (t.is_var()) {
    auto it = sigma.find(t.var_id());
    return it == sigma.end() ? t : it->second;
  }
  if (!t.is_compound() || t.args().empty()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(substitute(sigma, a));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace hoa

// Lexer, recursive-descent parser and elaboration for the surface language:
//
//   clause      ::= head [ ":-" goal ] "."
//   directive   ::= ":-" ( "pred" assertion | "predprop" ppdef | "query" goal
//                        | ppdef ) "."
//   ppdef       ::= name "(" Var ")" "{" { ":-" "pred" assertion "." } "}"
//   assertion   ::= head [ ":" formula ] [ "=>" formula ]
//   formula     ::= conj { ";" conj } ;  conj ::= prim { "," prim }
//   literal     ::= Var "(" args ")" | term [ relop term ] | "(" goal ")"
//
// A predprop block may also be written at top level without ":-".

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <variant>

#include "hoa/syntax.hpp"

namespace hoa {

std::string render(const Diagnostic& d) {
  std::string sev = d.severity == Diagnostic::Severity::Warning ? "warning: " : "";
  return to_string(d.where) + ": " + sev + d.message;
}

bool has_errors(std::span<const Diagnostic> diags) {
  for (const auto& d : diags) {
    if (d.severity == Diagnostic::Severity::Error) return true;
  }
  return false;
}

bool is_builtin_prop(const std::string& name, std::size_t arity) {
  if (arity == 1) return name == "int" || name == "flt" || name == "nnegint" || name == "negint";
  return arity == 3 && name == "between";
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { Var, Name, Int, Flt, Punct, End, Eof };
  Kind kind = Kind::Eof;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  Lexer(const std::string& src, std::string file, std::vector<Diagnostic>& diags)
      : src_(src), file_(std::move(file)), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Token::Kind::Eof;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Token::Kind::Var;
        t.text = ident();
      } else if (std::islower(static_cast<unsigned char>(c))) {
        t.kind = Token::Kind::Name;
        t.text = ident();
      } else if (c == '\'') {
        t.kind = Token::Kind::Name;
        t.text = quoted();
      } else if (c == '.' && end_follows()) {
        advance();
        t.kind = Token::Kind::End;
        t.text = ".";
      } else {
        if (!lex_punct(t)) {
          diags_.push_back({Diagnostic::Severity::Error, {file_, line_, col_},
                            std::string("unexpected character '") + c + "'"});
          advance();
          continue;
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && pos_ + 1 < src_.size() &&
                                       src_[pos_ + 1] == '/')) {
          advance();
        }
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
      } else {
        break;
      }
    }
  }

  bool end_follows() const {
    std::size_t n = pos_ + 1;
    return n >= src_.size() || std::isspace(static_cast<unsigned char>(src_[n])) ||
           src_[n] == '%';
  }

  std::string ident() {
    std::string s;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      s += src_[pos_];
      advance();
    }
    return s;
  }

  std::string quoted() {
    std::string s;
    advance();
    while (pos_ < src_.size() && src_[pos_] != '\'') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) advance();
      s += src_[pos_];
      advance();
    }
    if (pos_ < src_.size()) advance();
    return s;
  }

  void lex_number(Token& t) {
    std::string s;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      s += src_[pos_];
      advance();
    }
    bool real = false;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      real = true;
      s += '.';
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        s += src_[pos_];
        advance();
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      std::string exp = "e";
      std::size_t n = pos_ + 1;
      if (n < src_.size() && (src_[n] == '+' || src_[n] == '-')) exp += src_[n++];
      if (n < src_.size() && std::isdigit(static_cast<unsigned char>(src_[n]))) {
        real = true;
        while (pos_ < n) advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          exp += src_[pos_];
          advance();
        }
        s += exp;
      } else {
        pos_ = save;
      }
    }
    t.kind = real ? Token::Kind::Flt : Token::Kind::Int;
    t.text = s;
  }

  bool lex_punct(Token& t) {
    static const char* kPuncts[] = {":-", "=>", "=<", ">=", "(", ")", "[", "]", "{", "}",
                                    ",",  "|",  ":",  ";",  "=", "<", ">", "-"};
    for (const char* p : kPuncts) {
      std::string_view sv(p);
      if (src_.compare(pos_, sv.size(), sv) == 0) {
        for (std::size_t i = 0; i < sv.size(); ++i) advance();
        t.kind = Token::Kind::Punct;
        t.text = std::string(sv);
        return true;
      }
    }
    return false;
  }

  const std::string& src_;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Raw syntax

struct RawHo {
  Term callee = Term::nil();
  std::vector<Term> args;
};

struct RawRel {
  Constraint::Op op;
  Term lhs;
  Term rhs;
};

struct RawLit {
  std::variant<Term, RawHo, RawRel> value;
  SourceSpan span;
};

struct RawFormula {
  enum class Kind { And, Or, Lit, True } kind = Kind::True;
  std::vector<RawFormula> kids;
  Term lit = Term::nil();
  SourceSpan span;
};

struct RawAssertion {
  bool var_head = false;
  Term head = Term::nil();  // compound, or the callee variable when var_head
  std::vector<Term> head_args;
  std::optional<RawFormula> pre;
  std::optional<RawFormula> post;
  SourceSpan span;
};

struct RawClause {
  Term head = Term::nil();
  std::vector<RawLit> body;
  SourceSpan span;
};

struct RawPredprop {
  std::string name;
  Term param = Term::nil();
  std::vector<RawAssertion> assertions;
  SourceSpan span;
};

struct RawQuery {
  std::vector<RawLit> body;
  SourceSpan span;
  std::string text;
};

struct RawProgram {
  std::vector<RawClause> clauses;
  std::vector<RawAssertion> assertions;
  std::vector<RawPredprop> predprops;
  std::vector<RawQuery> queries;
};

struct SyntaxError {
  SourceSpan where;
  std::string message;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file, std::vector<Diagnostic>& diags)
      : toks_(std::move(toks)), file_(std::move(file)), diags_(diags) {}

  void parse_program(RawProgram& out) {
    while (peek().kind != Token::Kind::Eof) {
      std::size_t start = pos_;
      try {
        vars_.clear();
        depth_ = 0;
        item(out);
      } catch (const SyntaxError& e) {
        diags_.push_back({Diagnostic::Severity::Error, e.where, e.message});
        recover();
        if (pos_ == start) ++pos_;
      }
    }
  }

  std::optional<RawQuery> parse_goal_only(const std::string& text) {
    try {
      vars_.clear();
      RawQuery q;
      q.span = span_of(peek());
      q.text = text;
      q.body = goal();
      if (peek().kind == Token::Kind::End) ++pos_;
      if (peek().kind != Token::Kind::Eof) fail("expected end of query");
      return q;
    } catch (const SyntaxError& e) {
      diags_.push_back({Diagnostic::Severity::Error, e.where, e.message});
      return std::nullopt;
    }
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    std::size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  bool is_punct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Punct && peek(k).text == p;
  }
  bool is_name(const char* n, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Name && peek(k).text == n;
  }
  SourceSpan span_of(const Token& t) const { return {file_, t.line, t.col}; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Token::Kind::Eof ? "end of input"
                        : t.kind == Token::Kind::End ? "'.'"
                                                     : "'" + t.text + "'";
    throw SyntaxError{span_of(t), msg + ", found " + found};
  }

  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    if (std::string_view(p) == "{") ++depth_;
    if (std::string_view(p) == "}") --depth_;
    ++pos_;
  }
  void expect_end() {
    if (peek().kind != Token::Kind::End) fail("expected '.'");
    ++pos_;
  }

  void recover() {
    while (peek().kind != Token::Kind::Eof) {
      const Token& t = peek();
      ++pos_;
      if (t.kind == Token::Kind::Punct && t.text == "{") ++depth_;
      if (t.kind == Token::Kind::Punct && t.text == "}") --depth_;
      if (t.kind == Token::Kind::End && depth_ <= 0) return;
    }
  }

  Term variable(const std::string& name) {
    if (name == "_") return Term::var(next_source_var(), "_");
    auto it = vars_.find(name);
    if (it != vars_.end()) return it->second;
    Term v = Term::var(next_source_var(), name);
    vars_.emplace(name, v);
    return v;
  }

  void item(RawProgram& out) {
    if (is_punct(":-")) {
      SourceSpan span = span_of(peek());
      ++pos_;
      if (is_name("pred") && !is_punct("(", 1)) {
        ++pos_;
        out.assertions.push_back(assertion(span));
        expect_end();
      } else if (is_name("predprop") && !is_punct("(", 1)) {
        ++pos_;
        out.predprops.push_back(predprop_block(span));
        expect_end();
      } else if (is_name("query") && !is_punct("(", 1)) {
        ++pos_;
        std::size_t first = pos_;
        RawQuery q;
        q.span = span;
        q.body = goal();
        q.text = slice(first, pos_);
        out.queries.push_back(std::move(q));
        expect_end();
      } else if (peek().kind == Token::Kind::Name && is_punct("(", 1) &&
                 peek(2).kind == Token::Kind::Var && is_punct(")", 3) && is_punct("{", 4)) {
        out.predprops.push_back(predprop_block(span));
        expect_end();
      } else {
        fail("expected 'pred', 'predprop', 'query' or a predprop block after ':-'");
      }
      return;
    }
    SourceSpan span = span_of(peek());
    if (peek().kind == Token::Kind::Name && is_punct("(", 1) &&
        peek(2).kind == Token::Kind::Var && is_punct(")", 3) && is_punct("{", 4)) {
      out.predprops.push_back(predprop_block(span));
      expect_end();
      return;
    }
    RawClause c;
    c.span = span;
    if (peek().kind == Token::Kind::Var) fail("clause head must be an atom");
    c.head = term();
    if (!c.head.is_compound()) throw SyntaxError{span, "clause head must be an atom"};
    if (is_punct(":-")) {
      ++pos_;
      c.body = goal();
    }
    expect_end();
    out.clauses.push_back(std::move(c));
  }

  std::string slice(std::size_t from, std::size_t to) const {
    std::string s;
    int depth = 0;
    for (std::size_t i = from; i < to; ++i) {
      const Token& t = toks_[i];
      bool punct = t.kind == Token::Kind::Punct;
      if (punct && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
      if (punct && (t.text == ")" || t.text == "]" || t.text == "}")) --depth;
      if (punct && t.text == ",") {
        s += depth == 0 ? ", " : ",";
      } else if (t.kind == Token::Kind::Punct && t.text != "(" && t.text != ")" &&
                 t.text != "[" && t.text != "]" && t.text != "|" && t.text != "-") {
        s += " " + t.text + " ";
      } else {
        s += t.text;
      }
    }
    return s;
  }

  RawPredprop predprop_block(SourceSpan span) {
    RawPredprop pp;
    pp.span = span;
    if (peek().kind != Token::Kind::Name) fail("expected predprop name");
    pp.name = peek().text;
    ++pos_;
    expect_punct("(");
    if (peek().kind != Token::Kind::Var) fail("expected predprop parameter variable");
    pp.param = variable(peek().text);
    ++pos_;
    expect_punct(")");
    expect_punct("{");
    while (!is_punct("}")) {
      SourceSpan aspan = span_of(peek());
      expect_punct(":-");
      if (!is_name("pred")) fail("expected 'pred' inside predprop block");
      ++pos_;
      pp.assertions.push_back(assertion(aspan));
      expect_end();
    }
    expect_punct("}");
    return pp;
  }

  RawAssertion assertion(SourceSpan span) {
    RawAssertion a;
    a.span = span;
    if (peek().kind == Token::Kind::Var) {
      a.var_head = true;
      a.head = variable(peek().text);
      ++pos_;
      expect_punct("(");
      a.head_args = args_until(")");
    } else {
      Term h = term();
      if (!h.is_compound()) throw SyntaxError{span, "assertion head must be an atom"};
      a.head = h;
      a.head_args = h.args();
    }
    if (is_punct(":")) {
      ++pos_;
      a.pre = formula();
    }
    if (is_punct("=>")) {
      ++pos_;
      a.post = formula();
    }
    return a;
  }

  RawFormula formula() {
    RawFormula first = conj();
    if (!is_punct(";")) return first;
    RawFormula f;
    f.kind = RawFormula::Kind::Or;
    f.span = first.span;
    f.kids.push_back(std::move(first));
    while (is_punct(";")) {
      ++pos_;
      f.kids.push_back(conj());
    }
    return f;
  }

  RawFormula conj() {
    RawFormula first = fprim();
    if (!is_punct(",")) return first;
    RawFormula f;
    f.kind = RawFormula::Kind::And;
    f.span = first.span;
    f.kids.push_back(std::move(first));
    while (is_punct(",")) {
      ++pos_;
      f.kids.push_back(fprim());
    }
    return f;
  }

  RawFormula fprim() {
    RawFormula f;
    f.span = span_of(peek());
    if (is_punct("(")) {
      ++pos_;
      f = formula();
      expect_punct(")");
      return f;
    }
    if (is_name("true") && !is_punct("(", 1)) {
      ++pos_;
      f.kind = RawFormula::Kind::True;
      return f;
    }
    if (peek().kind != Token::Kind::Name) fail("expected a property literal");
    f.kind = RawFormula::Kind::Lit;
    f.lit = term();
    return f;
  }

  std::vector<RawLit> goal() {
    std::vector<RawLit> out;
    literal_into(out);
    while (is_punct(",")) {
      ++pos_;
      literal_into(out);
    }
    return out;
  }

  void literal_into(std::vector<RawLit>& out) {
    SourceSpan span = span_of(peek());
    if (is_punct("(")) {
      ++pos_;
      auto inner = goal();
      expect_punct(")");
      for (auto& l : inner) out.push_back(std::move(l));
      return;
    }
    if (peek().kind == Token::Kind::Var && is_punct("(", 1)) {
      RawHo ho;
      ho.callee = variable(peek().text);
      pos_ += 2;
      ho.args = args_until(")");
      out.push_back({std::move(ho), span});
      return;
    }
    Term lhs = term();
    static const std::pair<const char*, Constraint::Op> kRel[] = {
        {"=", Constraint::Op::Eq}, {"=<", Constraint::Op::Le}, {"<", Constraint::Op::Lt},
        {">=", Constraint::Op::Ge}, {">", Constraint::Op::Gt}};
    for (const auto& [sym, op] : kRel) {
      if (is_punct(sym)) {
        ++pos_;
        Term rhs = term();
        out.push_back({RawRel{op, lhs, rhs}, span});
        return;
      }
    }
    if (lhs.is_var()) throw SyntaxError{span, "a variable is not a callable literal"};
    out.push_back({lhs, span});
  }

  std::vector<Term> args_until(const char* close) {
    std::vector<Term> args;
    if (is_punct(close)) fail("expected an argument");
    args.push_back(term());
    while (is_punct(",")) {
      ++pos_;
      args.push_back(term());
    }
    expect_punct(close);
    return args;
  }

  Term term() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Var: {
        std::string name = t.text;
        ++pos_;
        if (is_punct("(")) fail("higher-order application is not a term");
        return variable(name);
      }
      case Token::Kind::Int:
        ++pos_;
        return Term::integer(std::stoll(t.text));
      case Token::Kind::Flt:
        ++pos_;
        return Term::real(std::stod(t.text));
      case Token::Kind::Name: {
        std::string name = t.text;
        ++pos_;
        if (is_punct("(")) {
          ++pos_;
          return Term::compound(name, args_until(")"));
        }
        return Term::atom(name);
      }
      case Token::Kind::Punct:
        if (t.text == "-" && (peek(1).kind == Token::Kind::Int ||
                              peek(1).kind == Token::Kind::Flt)) {
          const Token& n = peek(1);
          pos_ += 2;
          if (n.kind == Token::Kind::Int) return Term::integer(-std::stoll(n.text));
          return Term::real(-std::stod(n.text));
        }
        if (t.text == "[") {
          ++pos_;
          if (is_punct("]")) {
            ++pos_;
            return Term::nil();
          }
          std::vector<Term> items{term()};
          while (is_punct(",")) {
            ++pos_;
            items.push_back(term());
          }
          std::optional<Term> tail;
          if (is_punct("|")) {
            ++pos_;
            tail = term();
          }
          expect_punct("]");
          return Term::list(items, tail ? &*tail : nullptr);
        }
        if (t.text == "(") {
          ++pos_;
          Term inner = term();
          expect_punct(")");
          return inner;
        }
        break;
      default:
        break;
    }
    fail("expected a term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string file_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, Term> vars_;
  int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Elaboration

class Elaborator {
 public:
  Elaborator(AnnotatedProgram& prog, std::vector<Diagnostic>& diags) : prog_(prog), diags_(diags) {}

  void error(const SourceSpan& at, std::string msg) {
    diags_.push_back({Diagnostic::Severity::Error, at, std::move(msg)});
  }

  void declare(const RawProgram& raw) {
    std::map<std::string, std::pair<std::size_t, SourceSpan>> arities;
    for (const auto& c : raw.clauses) {
      PredKey key{c.head.name(), c.head.args().size()};
      auto [it, fresh] = arities.emplace(key.name, std::make_pair(key.arity, c.span));
      if (!fresh && it->second.first != key.arity) {
        error(c.span, "arity conflict: " + key.name + " defined with arity " +
                          std::to_string(key.arity) + " and " +
                          std::to_string(it->second.first) + " (first at " +
                          to_string(it->second.second) + ")");
        continue;
      }
      prog_.predicates.try_emplace(key, Predicate{key, {}});
    }
    std::set<std::string> seen;
    for (const auto& pp : raw.predprops) {
      if (!seen.insert(pp.name).second) {
        error(pp.span, "duplicate predprop '" + pp.name + "'");
        continue;
      }
      if (arities.count(pp.name)) {
        error(pp.span, "predprop '" + pp.name + "' clashes with a predicate of the same name");
      }
      predprop_names_.insert(pp.name);
    }
  }

  /// Replaces constants that name a defined predicate by predicate symbols.
  Term resolve(const Term& t) const {
    if (t.is_atom()) {
      if (auto ar = prog_.arity_of(t.name())) return Term::pred(t.name(), *ar);
      return t;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) args.push_back(resolve(a));
    return Term::compound(t.name(), std::move(args));
  }

  std::vector<Term> resolve_all(const std::vector<Term>& ts) const {
    std::vector<Term> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back(resolve(t));
    return out;
  }

  std::optional<Literal> body_literal(const RawLit& raw) {
    if (const auto* ho = std::get_if<RawHo>(&raw.value)) {
      return HoCall{ho->callee, resolve_all(ho->args)};
    }
    if (const auto* rel = std::get_if<RawRel>(&raw.value)) {
      Constraint c;
      c.op = rel->op;
      c.args = {resolve(rel->lhs), resolve(rel->rhs)};
      return c;
    }
    const Term& t = std::get<Term>(raw.value);
    if (!t.is_compound()) {
      error(raw.span, "'" + to_string(t, VarStyle::Source) + "' is not a callable literal");
      return std::nullopt;
    }
    const std::string& name = t.name();
    std::size_t arity = t.args().size();
    if (arity == 0 && name == "true") return std::nullopt;
    if (arity == 0 && (name == "fail" || name == "false")) {
      Constraint c;
      c.op = Constraint::Op::Fail;
      return c;
    }
    if (is_builtin_prop(name, arity)) {
      Constraint c;
      c.op = Constraint::Op::Test;
      c.test = name;
      c.args = resolve_all(t.args());
      return c;
    }
    PredKey key{name, arity};
    if (!prog_.predicate(key)) {
      error(raw.span, "unknown predicate " + to_string(key));
      return std::nullopt;
    }
    return Atom{name, resolve_all(t.args())};
  }

  Goal body(const std::vector<RawLit>& raw) {
    Goal out;
    for (const auto& l : raw) {
      if (auto lit = body_literal(l)) out.push_back(std::move(*lit));
    }
    return out;
  }

  void clauses(const RawProgram& raw) {
    for (const auto& c : raw.clauses) {
      PredKey key{c.head.name(), c.head.args().size()};
      auto it = prog_.predicates.find(key);
      if (it == prog_.predicates.end()) continue;  // arity conflict already reported
      Clause out;
      out.pred = key;
      out.span = c.span;
      std::set<VarId> seen;
      std::size_t gen = 0;
      Goal eqs;
      for (const auto& a : c.head.args()) {
        if (a.is_var() && a.name() != "_" && seen.insert(a.var_id()).second) {
          out.head.push_back(a);
          continue;
        }
        if (a.is_var() && a.name() == "_") {
          out.head.push_back(a);
          continue;
        }
        Term v = Term::var(next_source_var(), "_H" + std::to_string(++gen));
        out.head.push_back(v);
        eqs.push_back(Constraint::eq(v, resolve(a), true));
      }
      out.body = std::move(eqs);
      Goal rest = body(c.body);
      out.body.insert(out.body.end(), rest.begin(), rest.end());
      it->second.clauses.push_back(std::move(out));
    }
  }

  std::optional<Dnf> to_dnf(const RawFormula& f, const std::set<VarId>& allowed,
                            bool allow_predprops) {
    switch (f.kind) {
      case RawFormula::Kind::True:
        return Dnf::truth();
      case RawFormula::Kind::Or: {
        Dnf out = Dnf::falsity();
        for (const auto& k : f.kids) {
          auto d = to_dnf(k, allowed, allow_predprops);
          if (!d) return std::nullopt;
          out = disjoin(out, *d);
        }
        return out;
      }
      case RawFormula::Kind::And: {
        Dnf out = Dnf::truth();
        for (const auto& k : f.kids) {
          auto d = to_dnf(k, allowed, allow_predprops);
          if (!d) return std::nullopt;
          Dnf prod;
          for (const auto& a : out.conjuncts) {
            for (const auto& b : d->conjuncts) {
              auto c = a;
              c.insert(c.end(), b.begin(), b.end());
              prod.conjuncts.push_back(std::move(c));
            }
          }
          out = std::move(prod);
        }
        return out;
      }
      case RawFormula::Kind::Lit:
        break;
    }
    const Term& t = f.lit;
    std::vector<Term> vs;
    collect_vars(t, vs);
    for (const auto& v : vs) {
      if (!allowed.count(v.var_id())) {
        error(f.span, "variable " + v.name() + " in '" + to_string(t, VarStyle::Source) +
                          "' does not occur in the assertion head");
        return std::nullopt;
      }
    }
    CondLiteral lit;
    lit.name = t.name();
    lit.args = resolve_all(t.args());
    std::size_t arity = t.args().size();
    if (predprop_names_.count(lit.name)) {
      if (!allow_predprops) {
        error(f.span, "predprop '" + lit.name + "' cannot be used inside a predprop block");
        return std::nullopt;
      }
      if (arity != 1) {
        error(f.span, "predprop '" + lit.name + "' takes exactly one argument");
        return std::nullopt;
      }
      lit.kind = CondLiteral::Kind::Predprop;
    } else if (is_builtin_prop(lit.name, arity) || prog_.predicate({lit.name, arity})) {
      lit.kind = CondLiteral::Kind::Prop;
    } else {
      error(f.span, "undeclared property or predprop " + lit.name + "/" + std::to_string(arity));
      return std::nullopt;
    }
    Dnf out;
    out.conjuncts.push_back({std::move(lit)});
    return out;
  }

  bool distinct_vars(const std::vector<Term>& args) const {
    std::set<VarId> seen;
    for (const auto& a : args) {
      if (!a.is_var() || !seen.insert(a.var_id()).second) return false;
    }
    return true;
  }

  void predprops(const RawProgram& raw) {
    std::set<std::string> done;
    for (const auto& rp : raw.predprops) {
      if (!done.insert(rp.name).second) continue;
      Predprop pp;
      pp.name = rp.name;
      pp.param = rp.param;
      pp.span = rp.span;
      bool ok = true;
      for (const auto& ra : rp.assertions) {
        if (!ra.var_head || ra.head.var_id() != rp.param.var_id()) {
          error(ra.span, "anonymous assertion head must apply the predprop parameter " +
                             rp.param.name());
          ok = false;
          continue;
        }
        if (!distinct_vars(ra.head_args)) {
          error(ra.span, "anonymous assertion head arguments must be distinct variables");
          ok = false;
          continue;
        }
        if (pp.head.empty()) {
          for (const auto& v : ra.head_args) pp.head.push_back(Term::var(next_source_var(), v.name()));
        } else if (pp.head.size() != ra.head_args.size()) {
          error(ra.span, "anonymous assertions of predprop '" + rp.name +
                             "' disagree on arity");
          ok = false;
          continue;
        }
        Substitution sigma;
        std::set<VarId> allowed;
        for (std::size_t i = 0; i < ra.head_args.size(); ++i) {
          sigma.emplace(ra.head_args[i].var_id(), pp.head[i]);
          allowed.insert(ra.head_args[i].var_id());
        }
        AnonAssertion aa;
        if (ra.pre) {
          auto d = to_dnf(*ra.pre, allowed, false);
          if (!d) {
            ok = false;
            continue;
          }
          aa.pre = substitute(sigma, *d);
        }
        if (ra.post) {
          auto d = to_dnf(*ra.post, allowed, false);
          if (!d) {
            ok = false;
            continue;
          }
          aa.post = substitute(sigma, *d);
        }
        pp.assertions.push_back(std::move(aa));
      }
      if (pp.assertions.empty() && ok) {
        error(rp.span, "predprop '" + rp.name + "' has no assertions");
        ok = false;
      }
      if (ok) prog_.predprops.emplace(pp.name, std::move(pp));
    }
  }

  void assertions(const RawProgram& raw) {
    std::map<PredKey, std::size_t> counts;
    for (const auto& ra : raw.assertions) {
      if (ra.var_head) {
        error(ra.span, "assertion head must name a predicate");
        continue;
      }
      PredKey key{ra.head.name(), ra.head_args.size()};
      if (!prog_.predicate(key)) {
        error(ra.span, "assertion for undefined predicate " + to_string(key));
        continue;
      }
      if (!distinct_vars(ra.head_args)) {
        error(ra.span, "assertion head must be normalized (distinct variables)");
        continue;
      }
      auto [cit, fresh] = prog_.canonical_heads.try_emplace(key);
      if (fresh) {
        for (const auto& v : ra.head_args) cit->second.push_back(Term::var(next_source_var(), v.name()));
      }
      Substitution sigma;
      std::set<VarId> allowed;
      for (std::size_t i = 0; i < ra.head_args.size(); ++i) {
        sigma.emplace(ra.head_args[i].var_id(), cit->second[i]);
        allowed.insert(ra.head_args[i].var_id());
      }
      Assertion a;
      a.pred = key;
      a.head = cit->second;
      a.span = ra.span;
      bool ok = true;
      if (ra.pre) {
        auto d = to_dnf(*ra.pre, allowed, true);
        ok = ok && d.has_value();
        if (d) a.pre = substitute(sigma, *d);
      }
      if (ra.post) {
        auto d = to_dnf(*ra.post, allowed, true);
        ok = ok && d.has_value();
        if (d) a.post = substitute(sigma, *d);
      }
      if (!ok) continue;
      a.ordinal = ++counts[key];
      prog_.assertions.push_back(std::move(a));
    }
  }

  void conditions() {
    std::vector<PredKey> order;
    std::map<PredKey, std::vector<std::size_t>> by_pred;
    for (std::size_t i = 0; i < prog_.assertions.size(); ++i) {
      const auto& key = prog_.assertions[i].pred;
      if (!by_pred.count(key)) order.push_back(key);
      by_pred[key].push_back(i);
    }
    for (const auto& key : order) {
      std::vector<Assertion> group;
      for (std::size_t i : by_pred[key]) group.push_back(prog_.assertions[i]);
      auto conds = conditions_for(key, group);
      for (auto& c : conds) {
        for (auto& local : c.assertions) local = by_pred[key][local];
        prog_.conditions_by_pred[key].push_back(prog_.conditions.size());
        prog_.conditions.push_back(std::move(c));
      }
    }
  }

  std::optional<Query> query(const RawQuery& rq) {
    std::size_t before = diags_.size();
    Query q;
    q.goal = body(rq.body);
    q.text = rq.text;
    q.span = rq.span;
    if (has_errors(std::span(diags_).subspan(before))) return std::nullopt;
    return q;
  }

 private:
  AnnotatedProgram& prog_;
  std::vector<Diagnostic>& diags_;
  std::set<std::string> predprop_names_;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\n.");
  return s.substr(a, b - a + 1);
}

}  // namespace

ParseResult parse_program(std::span<const SourceText> sources) {
  ParseResult result;
  RawProgram raw;
  for (const auto& src : sources) {
    Lexer lex(src.text, src.name, result.diagnostics);
    Parser parser(lex.run(), src.name, result.diagnostics);
    parser.parse_program(raw);
  }
  Elaborator el(result.program, result.diagnostics);
  el.declare(raw);
  el.clauses(raw);
  el.predprops(raw);
  el.assertions(raw);
  el.conditions();
  for (const auto& rq : raw.queries) {
    if (auto q = el.query(rq)) result.program.queries.push_back(std::move(*q));
  }
  return result;
}

ParseResult parse_program(const std::string& text, const std::string& name) {
  SourceText src{name, text};
  return parse_program(std::span<const SourceText>(&src, 1));
}

QueryParseResult parse_query(const std::string& text, const AnnotatedProgram& program,
                             const std::string& name) {
  QueryParseResult result;
  Lexer lex(text, name, result.diagnostics);
  auto toks = lex.run();
  if (has_errors(result.diagnostics)) return result;
  Parser parser(std::move(toks), name, result.diagnostics);
  auto raw = parser.parse_goal_only(trim(text));
  if (!raw) return result;
  AnnotatedProgram scratch = program;
  Elaborator el(scratch, result.diagnostics);
  result.query = el.query(*raw);
  return result;
}

}  // namespace hoa

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hoa/engine.hpp"
#include "hoa/fo_assert.hpp"
#include "hoa/ho_assert.hpp"
#include "hoa/syntax.hpp"
#include "hoa/trace.hpp"

namespace hoa::cli {

namespace {

using nlohmann::json;

struct Config {
  std::vector<std::string> files;
  std::vector<std::string> queries;
  std::string mode;
  std::string format;
  std::string static_table;
  SearchLimits limits;
  bool parallel = false;
};

void add_common(CLI::App* cmd, Config& cfg, const std::string& default_mode,
                const std::string& default_format) {
  cfg.mode = default_mode;
  cfg.format = default_format;
  cmd->add_option("files", cfg.files, "Program files")->required()->check(CLI::ExistingFile);
  cmd->add_option("-q,--query", cfg.queries, "Query goal (repeatable)");
  cmd->add_option("--mode", cfg.mode, "Semantics: base, fo, ho-static or ho-dynamic")
      ->check(CLI::IsMember({"base", "fo", "ho-static", "ho-dynamic"}))
      ->capture_default_str();
  cmd->add_option("--max-depth", cfg.limits.max_depth, "Reductions per derivation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-solutions", cfg.limits.max_solutions, "Successful derivations per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-derivations", cfg.limits.max_derivations,
                  "Finished derivations per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--static-table", cfg.static_table, "JSON predprop meaning table")
      ->check(CLI::ExistingFile);
  cmd->add_option("--format", cfg.format, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  cmd->add_flag("--parallel", cfg.parallel, "Run queries concurrently");
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Everything a subcommand needs after loading.
struct Session {
  AnnotatedProgram program;
  std::vector<Query> queries;
  std::optional<MeaningTable> table;
};

std::optional<Session> load(const Config& cfg, std::ostream& err) {
  std::vector<SourceText> sources;
  for (const auto& f : cfg.files) {
    auto text = read_file(f);
    if (!text) {
      err << f << ": cannot read file\n";
      return std::nullopt;
    }
    sources.push_back({f, std::move(*text)});
  }
  ParseResult parsed = parse_program(sources);
  for (const auto& d : parsed.diagnostics) err << render(d) << "\n";
  if (!parsed.ok()) return std::nullopt;

  Session s;
  s.program = std::move(parsed.program);
  s.queries = s.program.queries;
  bool bad_query = false;
  for (std::size_t i = 0; i < cfg.queries.size(); ++i) {
    auto q = parse_query(cfg.queries[i], s.program, "--query " + std::to_string(i + 1));
    for (const auto& d : q.diagnostics) err << render(d) << "\n";
    if (!q.query) {
      bad_query = true;
      continue;
    }
    s.queries.push_back(std::move(*q.query));
  }
  if (bad_query) return std::nullopt;
  if (s.queries.empty()) {
    err << "no queries: pass --query or add ':- query Goal.' to the program\n";
    return std::nullopt;
  }
  if (cfg.mode == "ho-static") {
    if (cfg.static_table.empty()) {
      err << "--mode ho-static requires --static-table\n";
      return std::nullopt;
    }
    auto text = read_file(cfg.static_table);
    if (!text) {
      err << cfg.static_table << ": cannot read file\n";
      return std::nullopt;
    }
    auto loaded = parse_meaning_table(*text);
    for (const auto& e : loaded.errors) err << cfg.static_table << ": " << e << "\n";
    if (!loaded.errors.empty()) return std::nullopt;
    s.table = std::move(loaded.table);
  }
  return s;
}

CheckMode check_mode(const std::string& mode) {
  if (mode == "fo") return CheckMode::Fo;
  if (mode == "ho-static") return CheckMode::Static;
  return CheckMode::Dynamic;
}

DeriveResult erased(const CheckRunResult& r) {
  DeriveResult out;
  out.truncated = r.truncated;
  out.diagnostics = r.diagnostics;
  for (const auto& d : r.derivations) out.derivations.push_back(erase(d));
  return out;
}

std::vector<std::string> answer_lines(const Query& q, const DeriveResult& r) {
  std::vector<std::string> out;
  std::vector<Term> vars = q.vars();
  for (const auto& a : answers_of(r, q)) out.push_back(format_answer(a, vars));
  return out;
}

std::string query_text(const Query& q) {
  return q.text.empty() ? to_string(q.goal, VarStyle::Source) : q.text;
}

int query_exit(Outcome o) {
  switch (o) {
    case Outcome::Success: return kOk;
    case Outcome::Floundered: return kFloundered;
    default: return kFailed;
  }
}

/// Aggregate status: 0 if every query succeeded, 1 if any query has no
/// success and is not purely floundered, 2 otherwise.
int combine(const std::vector<int>& codes) {
  if (std::all_of(codes.begin(), codes.end(), [](int c) { return c == kOk; })) return kOk;
  if (std::any_of(codes.begin(), codes.end(), [](int c) { return c == kFailed; })) return kFailed;
  return kFloundered;
}

void print_answers(const Query& q, const DeriveResult& r, std::ostream& out) {
  out << "?- " << query_text(q) << ".\n";
  auto lines = answer_lines(q, r);
  for (const auto& l : lines) out << l << "\n";
  if (lines.empty()) out << (classify(r) == Outcome::Floundered ? "floundered" : "false") << "\n";
  if (r.truncated) out << "% search truncated by limits\n";
}

json answers_json(const Query& q, const DeriveResult& r) {
  json j;
  j["query"] = query_text(q);
  j["outcome"] = to_string(classify(r));
  j["answers"] = answer_lines(q, r);
  j["truncated"] = r.truncated;
  j["derivations"] = r.derivations.size();
  return j;
}

template <class F>
auto per_query(const std::vector<Query>& queries, bool parallel, F&& f) {
  using R = decltype(f(queries.front()));
  std::vector<R> out;
  if (parallel && queries.size() > 1) {
    std::vector<std::future<R>> futures;
    for (const auto& q : queries) futures.push_back(std::async(std::launch::async, f, std::cref(q)));
    for (auto& fut : futures) out.push_back(fut.get());
  } else {
    for (const auto& q : queries) out.push_back(f(q));
  }
  return out;
}

void print_diagnostics(const std::vector<std::string>& diags, std::ostream& err) {
  std::set<std::string> seen;
  for (const auto& d : diags) {
    if (seen.insert(d).second) err << "warning: " << d << "\n";
  }
}

int cmd_run(const Config& cfg, std::ostream& out, std::ostream& err) {
  auto session = load(cfg, err);
  if (!session) return kUsage;
  const auto& program = session->program;

  std::vector<DeriveResult> results;
  std::optional<Report> rep;
  if (cfg.mode == "base") {
    results = per_query(session->queries, cfg.parallel, [&](const Query& q) {
      return derive(q, program, cfg.limits);
    });
  } else {
    rep = report(session->queries, program, cfg.limits, check_mode(cfg.mode),
                 session->table ? &*session->table : nullptr, cfg.parallel);
    if (!rep->ok()) {
      for (const auto& e : rep->errors) err << e << "\n";
      return kUsage;
    }
    for (const auto& r : rep->runs) results.push_back(erased(r));
  }

  std::vector<int> codes;
  json all = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& q = session->queries[i];
    codes.push_back(query_exit(classify(results[i])));
    if (cfg.format == "json") {
      all.push_back(answers_json(q, results[i]));
    } else {
      print_answers(q, results[i], out);
    }
    print_diagnostics(results[i].diagnostics, err);
  }
  if (cfg.format == "json") out << all.dump(2) << "\n";
  if (rep) {
    for (std::size_t a : rep->false_assertions()) {
      const auto& asr = program.assertions[a];
      err << to_string(asr.span) << ": warning: assertion for " << to_string(asr.pred)
          << " is false\n";
    }
  }
  return combine(codes);
}

std::string condition_kind(const AssertionCondition& c) {
  return c.kind == AssertionCondition::Kind::Calls ? "calls" : "success";
}

int cmd_check(const Config& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.mode == "base") {
    err << "check needs --mode fo, ho-static or ho-dynamic\n";
    return kUsage;
  }
  auto session = load(cfg, err);
  if (!session) return kUsage;
  const auto& program = session->program;
  Report rep = report(session->queries, program, cfg.limits, check_mode(cfg.mode),
                      session->table ? &*session->table : nullptr, cfg.parallel);
  if (!rep.ok()) {
    for (const auto& e : rep.errors) err << e << "\n";
    return kUsage;
  }
  print_diagnostics(rep.diagnostics, err);

  if (cfg.format == "json") {
    json j;
    j["mode"] = to_string(rep.mode);
    j["queries"] = json::array();
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
      j["queries"].push_back(answers_json(rep.queries[i], erased(rep.runs[i])));
    }
    j["assertions"] = json::array();
    for (const auto& st : rep.assertions) {
      const auto& a = program.assertions[st.assertion];
      json rec;
      rec["predicate"] = to_string(a.pred);
      rec["ordinal"] = a.ordinal;
      rec["span"] = to_string(a.span);
      rec["verdict"] = to_string(st.verdict);
      if (st.witness) {
        const auto& c = program.conditions[st.false_conditions.front()];
        rec["condition"] = condition_kind(c);
        rec["witness"] = {{"query", st.witness->query},
                          {"derivation", st.witness->derivation},
                          {"step", st.witness->step},
                          {"label", to_string(st.witness->label)}};
      }
      j["assertions"].push_back(rec);
    }
    j["false"] = rep.false_count();
    j["truncated"] = rep.truncated;
    out << j.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < rep.runs.size(); ++i) print_answers(rep.queries[i], erased(rep.runs[i]), out);
    out << "\n";
    for (const auto& st : rep.assertions) {
      const auto& a = program.assertions[st.assertion];
      out << to_string(a.span) << ": " << to_string(a.pred) << " assertion " << a.ordinal << ": "
          << to_string(st.verdict);
      if (st.witness) {
        const auto& c = program.conditions[st.false_conditions.front()];
        out << " (" << condition_kind(c) << " condition; query " << st.witness->query
            << ", derivation " << st.witness->derivation << ", step " << st.witness->step << ", "
            << to_string(st.witness->label) << ")";
      }
      out << "\n";
    }
    out << rep.false_count() << " false assertion" << (rep.false_count() == 1 ? "" : "s");
    if (rep.truncated) out << " (exploration truncated by limits)";
    out << "\n";
  }
  return rep.false_count() == 0 ? kOk : kFailed;
}

/// Base derivations viewed as instrumented ones without error sets.
CheckRunResult lift(const DeriveResult& r, const AnnotatedProgram& program,
                    const SearchLimits& limits) {
  CheckRunResult out;
  out.truncated = r.truncated;
  out.diagnostics = r.diagnostics;
  out.context = std::make_shared<CheckContext>(program, limits);
  for (const auto& d : r.derivations) {
    ExtDerivation e;
    e.outcome = d.outcome;
    for (const auto& s : d.states) e.states.push_back(ExtState{s, {}, {}});
    for (const auto& s : d.steps) e.steps.push_back(ExtStep{s, {}, {}, {}, {}, {}, {}});
    out.derivations.push_back(std::move(e));
  }
  return out;
}

int cmd_trace(const Config& cfg, std::ostream& out, std::ostream& err) {
  auto session = load(cfg, err);
  if (!session) return kUsage;
  const auto& program = session->program;
  std::vector<CheckRunResult> runs;
  std::vector<DeriveResult> base;
  if (cfg.mode == "base") {
    base = per_query(session->queries, cfg.parallel,
                     [&](const Query& q) { return derive(q, program, cfg.limits); });
  } else {
    Report rep = report(session->queries, program, cfg.limits, check_mode(cfg.mode),
                        session->table ? &*session->table : nullptr, cfg.parallel);
    if (!rep.ok()) {
      for (const auto& e : rep.errors) err << e << "\n";
      return kUsage;
    }
    runs = std::move(rep.runs);
  }

  if (cfg.format == "json") {
    out << trace_header(cfg.mode) << "\n";
    for (std::size_t i = 0; i < session->queries.size(); ++i) {
      const auto& q = session->queries[i];
      json head{{"query", i}, {"goal", query_text(q)}};
      out << head.dump() << "\n";
      auto records = cfg.mode == "base" ? trace_records(q, base[i]) : trace_records(q, runs[i]);
      for (const auto& r : records) out << r << "\n";
    }
  } else {
    for (std::size_t i = 0; i < session->queries.size(); ++i) {
      const auto& q = session->queries[i];
      CheckRunResult run = cfg.mode == "base" ? lift(base[i], program, cfg.limits) : runs[i];
      out << "?- " << query_text(q) << ".\n";
      for (std::size_t k = 0; k < run.derivations.size(); ++k) {
        const auto& d = run.derivations[k];
        out << "\nderivation " << k << " (" << to_string(d.outcome) << ")\n";
        out << render_table(table_rows(d, *run.context, &q));
      }
      out << "\n";
    }
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run and check higher-order constraint logic programs with assertions", "hoa"};
  app.require_subcommand(1);
  Config run_cfg, check_cfg, trace_cfg;
  auto* run = app.add_subcommand("run", "Print the answers of each query");
  add_common(run, run_cfg, "base", "text");
  auto* check = app.add_subcommand("check", "Report the status of every assertion");
  add_common(check, check_cfg, "ho-dynamic", "text");
  auto* trace = app.add_subcommand("trace", "Dump every derivation step");
  add_common(trace, trace_cfg, "ho-dynamic", "json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (run->parsed()) return cmd_run(run_cfg, out, err);
  if (check->parsed()) return cmd_check(check_cfg, out, err);
  return cmd_trace(trace_cfg, out, err);
}

}  // namespace hoa::cli

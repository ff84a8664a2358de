#include <gtest/gtest.h>

#include <thread>

#include "fixtures.hpp"
#include "hoa/ho_assert.hpp"

namespace hoa {
namespace {

using testing::load_corpus;
using testing::make_query;

class HoTest : public ::testing::Test {
 protected:
  AnnotatedProgram fig = load_corpus("fig1.hoa");
  Term P = Term::var(next_source_var(), "P");
  Term N = Term::var(next_source_var(), "N");

  CondLiteral predprop(const std::string& name, Term arg) {
    CondLiteral l;
    l.kind = CondLiteral::Kind::Predprop;
    l.name = name;
    l.args = {std::move(arg)};
    return l;
  }
  CondLiteral prop(const std::string& name, Term arg) {
    CondLiteral l;
    l.name = name;
    l.args = {std::move(arg)};
    return l;
  }
  Dnf either(CondLiteral x, CondLiteral y) { return Dnf{{{std::move(x)}, {std::move(y)}}}; }
  Dnf just(CondLiteral x) { return Dnf{{{std::move(x)}}}; }
};

TEST_F(HoTest, SimplifyKeepsPredpropResidue) {
  Store s = unify({}, P, Term::pred("n", 1));
  Simplified r = simplify(s, either(predprop("nneg", P), predprop("neg", P)), fig, SearchLimits{});
  ASSERT_EQ(r.kind, Simplified::Kind::Residue);
  ASSERT_EQ(r.residue.size(), 2u);
  EXPECT_EQ(r.residue[0][0].args[0], Term::pred("n", 1));
  EXPECT_EQ(r.residue[1][0].name, "neg");
}

TEST_F(HoTest, SimplifyEvaluatesProps) {
  Simplified t = simplify({}, just(prop("nnegint", Term::integer(1))), fig, SearchLimits{});
  EXPECT_EQ(t.kind, Simplified::Kind::True);
  Simplified f = simplify({}, either(prop("nnegint", N), prop("negint", N)), fig, SearchLimits{});
  EXPECT_EQ(f.kind, Simplified::Kind::False);
}

TEST_F(HoTest, SimplifyRejectsNonPredicatesAndWrongArity) {
  Store atom = unify({}, P, Term::atom("n"));
  EXPECT_EQ(simplify(atom, just(predprop("nneg", P)), fig, SearchLimits{}).kind,
            Simplified::Kind::False);
  Store arity = unify({}, P, Term::pred("test_c", 2));
  EXPECT_EQ(simplify(arity, just(predprop("nneg", P)), fig, SearchLimits{}).kind,
            Simplified::Kind::False);
}

TEST_F(HoTest, SimplifyUnboundPredpropArgument) {
  Simplified r = simplify({}, just(predprop("nneg", P)), fig, SearchLimits{});
  EXPECT_EQ(r.kind, Simplified::Kind::Residue);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST_F(HoTest, HypConditionsAreMemoized) {
  CheckContext ctx(fig);
  auto first = hyp_conditions(*fig.predprop("nneg"), {"z", 1}, ctx);
  ASSERT_EQ(first.size(), 1u);
  std::string text = to_string(first[0].condition, VarStyle::Source);
  EXPECT_EQ(text.rfind("success(z(", 0), 0u) << text;
  EXPECT_NE(text.find("nnegint("), std::string::npos);
  auto again = hyp_conditions(*fig.predprop("nneg"), {"z", 1}, ctx);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].label, first[0].label);

  auto neg_n = hyp_conditions(*fig.predprop("neg"), {"n", 1}, ctx);
  ASSERT_EQ(neg_n.size(), 1u);
  EXPECT_NE(neg_n[0].label, first[0].label);
  EXPECT_NE(to_string(neg_n[0].condition).find("negint("), std::string::npos);
}

TEST_F(HoTest, ComparatorHypothesesAtCmp3) {
  auto cmp = load_corpus("comparator.hoa");
  CheckContext ctx(cmp);
  auto hyps = hyp_conditions(*cmp.predprop("comparator"), {"cmp3", 3}, ctx);
  ASSERT_EQ(hyps.size(), 3u);
  EXPECT_EQ(hyps[0].condition.kind, AssertionCondition::Kind::Calls);
  for (const auto& hc : hyps) EXPECT_EQ(hc.condition.pred, (PredKey{"cmp3", 3}));
}

TEST_F(HoTest, RegistryIsSafeUnderConcurrency) {
  CheckContext ctx(fig);
  std::vector<std::vector<Label>> seen(8);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    threads.emplace_back([&, i] {
      for (const char* pred : {"z", "n", "p", "c"}) {
        for (Label l : ctx.hypotheses(*fig.predprop(i % 2 ? "nneg" : "neg"), {pred, 1})) {
          seen[i].push_back(l);
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (std::size_t i = 2; i < seen.size(); ++i) EXPECT_EQ(seen[i], seen[i % 2]);
  std::set<Label> all;
  for (const auto& v : seen) all.insert(v.begin(), v.end());
  EXPECT_EQ(all.size(), 8u);
}

TEST_F(HoTest, ExtRecordsHypothesesAndRule) {
  CheckContext ctx(fig);
  LiteralEval eval = [this](const Store& s, const CondLiteral& l) {
    return succeeds_trivially(s, l, fig);
  };
  Store s = unify({}, P, Term::pred("n", 1));
  Extension e = ext(Label::instance(1), either(predprop("nneg", P), predprop("neg", P)), s, ctx, eval);
  EXPECT_TRUE(e.facts.empty());
  ASSERT_EQ(e.rules.size(), 1u);
  EXPECT_EQ(to_string(e.rules[0]), "~h1 & ~h2 -> ~a1");
  EXPECT_EQ(e.hypotheses, (std::vector<Label>{Label::hyp(1), Label::hyp(2)}));

  Extension f = ext(Label::instance(2), just(prop("nnegint", N)), {}, ctx, eval);
  EXPECT_EQ(f.facts, std::set<Label>{Label::instance(2)});
  EXPECT_TRUE(f.rules.empty());

  Store z = unify({}, P, Term::pred("z", 1));
  Extension g = ext(Label::instance(3), just(predprop("nneg", P)), z, ctx, eval);
  ASSERT_EQ(g.rules.size(), 1u);
  EXPECT_EQ(to_string(g.rules[0]), "~h3 -> ~a3");

  Extension t = ext(Label::instance(4), just(prop("nnegint", Term::integer(3))), {}, ctx, eval);
  EXPECT_TRUE(t.facts.empty() && t.rules.empty() && t.hypotheses.empty());
}

TEST_F(HoTest, UnboundPredpropNeverBlames) {
  CheckContext ctx(fig);
  LiteralEval eval = [this](const Store& s, const CondLiteral& l) {
    return succeeds_trivially(s, l, fig);
  };
  Extension e = ext(Label::instance(1), just(predprop("nneg", P)), {}, ctx, eval);
  ASSERT_EQ(e.rules.size(), 1u);
  ErrorSet es;
  es.rules = e.rules;
  es.facts = {Label::hyp(1), Label::hyp(2)};
  EXPECT_FALSE(es.closure().count(Label::instance(1)));
}

TEST_F(HoTest, MeaningTableParsing) {
  auto ok = parse_meaning_table(R"({"nneg": ["p/1"], "neg": ["n/1", "m/1"]})");
  EXPECT_TRUE(ok.errors.empty());
  EXPECT_EQ(ok.table.at("neg").size(), 2u);
  EXPECT_TRUE(ok.table.at("nneg").count({"p", 1}));
  EXPECT_FALSE(parse_meaning_table("{").errors.empty());
  EXPECT_FALSE(parse_meaning_table("[1]").errors.empty());
  EXPECT_FALSE(parse_meaning_table(R"({"nneg": ["p"]})").errors.empty());
  EXPECT_FALSE(parse_meaning_table(R"({"nneg": "p/1"})").errors.empty());
  EXPECT_EQ(missing_meanings({{"nneg", {}}}, fig), std::vector<std::string>{"neg"});
}

TEST_F(HoTest, StaticModeUsesTable) {
  MeaningTable table = testing::fig1_meanings();
  auto report_of = [&](const std::string& q) {
    return report(std::vector<Query>{make_query(q, fig)}, fig, {}, CheckMode::Static, &table);
  };
  EXPECT_EQ(report_of("test_c(z,-2)").false_count(), 2u);
  EXPECT_EQ(report_of("test_c(n,X)").false_count(), 0u);
  Report missing = report(std::vector<Query>{make_query("z(A)", fig)}, fig, {}, CheckMode::Static,
                          nullptr);
  EXPECT_FALSE(missing.ok());
  MeaningTable partial{{"nneg", {}}};
  Report incomplete = report(std::vector<Query>{make_query("z(A)", fig)}, fig, {},
                             CheckMode::Static, &partial);
  EXPECT_FALSE(incomplete.ok());
}

TEST_F(HoTest, StaticModeWithoutPredpropsMatchesFirstOrder) {
  auto qs = load_corpus("qsort.hoa");
  MeaningTable empty;
  for (const char* text : {"qsort([2,1],B)", "qsort(f,B)"}) {
    Query q = make_query(text, qs);
    CheckRunResult fo = derive_fo(q, qs);
    CheckRunResult st = derive_static(q, qs, {}, empty);
    ASSERT_EQ(fo.derivations.size(), st.derivations.size());
    for (std::size_t i = 0; i < fo.derivations.size(); ++i) {
      EXPECT_EQ(fo.derivations[i].states, st.derivations[i].states) << text;
    }
  }
}

TEST_F(HoTest, ReportExamples) {
  auto run = [&](const std::string& q) {
    return report(std::vector<Query>{make_query(q, fig)}, fig, {}, CheckMode::Dynamic, nullptr);
  };
  Report c = run("test_c(c,X)");
  EXPECT_EQ(c.false_count(), 2u);
  for (std::size_t i : c.false_assertions()) {
    EXPECT_EQ(fig.assertions[i].pred, (PredKey{"test_c", 2}));
  }
  EXPECT_EQ(run("test_s(1,P), P(1)").false_count(), 0u);
  Report t3 = run("test_s(1,P), P(-2)");
  ASSERT_EQ(t3.false_count(), 1u);
  const Assertion& bad = fig.assertions[*t3.false_assertions().begin()];
  EXPECT_EQ(bad.pred, (PredKey{"test_s", 2}));
  EXPECT_EQ(bad.ordinal, 1u);
  for (const auto& a : t3.assertions) {
    if (a.verdict == Verdict::False) ASSERT_TRUE(a.witness);
  }
}

TEST_F(HoTest, FirstOrderModeRejectsPredprops) {
  Report r = report(std::vector<Query>{make_query("z(A)", fig)}, fig, {}, CheckMode::Fo, nullptr);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(r.runs.empty());
}

TEST_F(HoTest, ParallelReportMatchesSequential) {
  std::vector<Query> qs;
  for (const char* t : {"test_c(n,X)", "test_c(c,X)", "test_s(1,P), P(-2)", "test_c(z,X)"}) {
    qs.push_back(make_query(t, fig));
  }
  Report seq = report(qs, fig, {}, CheckMode::Dynamic, nullptr, false);
  Report par = report(qs, fig, {}, CheckMode::Dynamic, nullptr, true);
  EXPECT_EQ(seq.false_assertions(), par.false_assertions());
  ASSERT_EQ(seq.runs.size(), par.runs.size());
  for (std::size_t i = 0; i < seq.runs.size(); ++i) {
    ASSERT_EQ(seq.runs[i].derivations.size(), par.runs[i].derivations.size());
    for (std::size_t k = 0; k < seq.runs[i].derivations.size(); ++k) {
      EXPECT_EQ(seq.runs[i].derivations[k].states, par.runs[i].derivations[k].states);
    }
  }
  for (std::size_t a = 0; a < seq.assertions.size(); ++a) {
    EXPECT_EQ(seq.assertions[a].verdict, par.assertions[a].verdict);
    if (seq.assertions[a].witness) {
      EXPECT_EQ(seq.assertions[a].witness->query, par.assertions[a].witness->query);
      EXPECT_EQ(seq.assertions[a].witness->step, par.assertions[a].witness->step);
    }
  }
}

}  // namespace
}  // namespace hoa

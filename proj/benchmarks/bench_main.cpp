#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hoa/engine.hpp"
#include "hoa/fo_assert.hpp"
#include "hoa/ho_assert.hpp"
#include "hoa/syntax.hpp"

namespace {

using namespace hoa;

AnnotatedProgram load(const std::string& file) {
  std::ifstream in(std::string(HOA_BENCH_CORPUS_DIR) + "/" + file);
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_program(ss.str(), file);
  if (!r.ok()) throw std::runtime_error("cannot load " + file);
  return std::move(r.program);
}

Query query(const std::string& text, const AnnotatedProgram& p) {
  auto r = parse_query(text, p);
  if (!r.query) throw std::runtime_error("bad query " + text);
  return *r.query;
}

Term int_list(std::int64_t n, std::int64_t offset) {
  std::vector<Term> items;
  for (std::int64_t i = 0; i < n; ++i) items.push_back(Term::integer((i * 7 + offset) % n));
  return Term::list(items);
}

std::string int_list_text(std::int64_t n) {
  std::string s = "[";
  for (std::int64_t i = 0; i < n; ++i) {
    if (i) s += ",";
    s += std::to_string((i * 7 + 3) % n);
  }
  return s + "]";
}

void BM_UnifyGroundLists(benchmark::State& state) {
  Term a = int_list(state.range(0), 3);
  Term b = int_list(state.range(0), 3);
  for (auto _ : state) {
    Store s = unify(Store{}, a, b);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_UnifyGroundLists)->RangeMultiplier(4)->Range(4, 1024);

void BM_UnifyOpenList(benchmark::State& state) {
  std::vector<Term> vars;
  for (std::int64_t i = 0; i < state.range(0); ++i)
    vars.push_back(Term::var(next_source_var(), "V"));
  Term open = Term::list(vars);
  Term ground = int_list(state.range(0), 1);
  for (auto _ : state) {
    Store s = unify(Store{}, open, ground);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_UnifyOpenList)->RangeMultiplier(4)->Range(4, 1024);

void BM_QsortBase(benchmark::State& state) {
  static const AnnotatedProgram p = load("qsort.hoa");
  Query q = query("qsort(" + int_list_text(state.range(0)) + ",B)", p);
  for (auto _ : state) {
    DeriveResult r = derive(q, p);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_QsortBase)->DenseRange(2, 10, 4);

void BM_QsortFirstOrderChecked(benchmark::State& state) {
  static const AnnotatedProgram p = load("qsort.hoa");
  Query q = query("qsort(" + int_list_text(state.range(0)) + ",B)", p);
  for (auto _ : state) {
    CheckRunResult r = derive_fo(q, p);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_QsortFirstOrderChecked)->DenseRange(2, 6, 2);

void BM_DynamicPredprops(benchmark::State& state) {
  static const AnnotatedProgram p = load("fig1.hoa");
  static const char* const queries[] = {"test_c(n,X)", "test_c(c,X)", "test_s(1,P), P(-2)"};
  Query q = query(queries[state.range(0)], p);
  for (auto _ : state) {
    CheckRunResult r = derive_had(q, p);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_DynamicPredprops)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();

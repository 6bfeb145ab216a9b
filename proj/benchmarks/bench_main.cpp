#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "langx/ck.hpp"
#include "langx/engine.hpp"
#include "langx/parser.hpp"
#include "langx/subtyping.hpp"

namespace {

std::string fixture_text(const std::string& name) {
  std::ifstream in(std::string(LANGX_SOURCE_DIR) + "/languages/" + name + ".lang");
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

langx::LanguageSpec fixture(const std::string& name) {
  auto r = langx::parse_spec(fixture_text(name), name);
  if (!r.ok()) throw std::runtime_error("fixture " + name + " does not parse");
  return *r.spec;
}

// n nested identity applications around c
std::string nested_apps(std::int64_t n) {
  std::string t = "c";
  for (std::int64_t i = 0; i < n; ++i) t = "(app (lam x int x) " + t + ")";
  return t;
}

}  // namespace

static void BM_ParseSpec(benchmark::State& state) {
  const auto text = fixture_text("langfunny");
  for (auto _ : state) benchmark::DoNotOptimize(langx::parse_spec(text, "langfunny"));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseSpec);

static void BM_AddSubtyping(benchmark::State& state) {
  const auto spec = fixture("langfunny");
  for (auto _ : state) benchmark::DoNotOptimize(langx::add_subtyping(spec));
}
BENCHMARK(BM_AddSubtyping);

static void BM_DeriveCk(benchmark::State& state) {
  const auto spec = fixture("langfunny");
  for (auto _ : state) benchmark::DoNotOptimize(langx::derive_ck(spec));
}
BENCHMARK(BM_DeriveCk);

static void BM_EvalSmallStep(benchmark::State& state) {
  const auto spec = fixture("stlc");
  const auto term = langx::parse_term(nested_apps(state.range(0)), spec);
  for (auto _ : state) benchmark::DoNotOptimize(langx::eval(term, spec));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalSmallStep)->RangeMultiplier(2)->Range(4, 64)->Complexity();

static void BM_EvalMachine(benchmark::State& state) {
  const auto spec = fixture("stlc");
  const auto ck = langx::derive_ck(spec);
  const auto term = langx::parse_term(nested_apps(state.range(0)), spec);
  for (auto _ : state) benchmark::DoNotOptimize(langx::ck_eval(langx::initial_config(term), ck));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalMachine)->RangeMultiplier(2)->Range(4, 64)->Complexity();

BENCHMARK_MAIN();

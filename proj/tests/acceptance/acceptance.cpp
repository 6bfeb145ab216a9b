// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli.hpp"
#include "compare.hpp"
#include "langx/ck.hpp"
#include "langx/engine.hpp"
#include "langx/parser.hpp"
#include "langx/subtyping.hpp"
#include "langx/variance.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace langx;

namespace {

using Clock = std::chrono::steady_clock;

// Runtime limits, in seconds.
constexpr double kGoldenTappLimit = 1.0;
constexpr double kEquivalenceLimit = 60.0;
constexpr double kVarianceLimit = 5.0;

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string golden(const std::string& name) { return test::read_text(test::source_path("tests/golden/" + name)); }

std::string fmt_seconds(double s) {
  std::ostringstream ss;
  ss.precision(3);
  ss << s << "s";
  return ss.str();
}

bool matches_answer(const LanguageSpec& out, const std::string& rule, const std::string& answer_file) {
  auto want = test::answer_rules(answer_file, out);
  return want.size() == 1 && canonicalize(test::rule_named(out, rule), out) == canonicalize(want[0], out);
}

// A transform run through the CLI, checked byte-for-byte against a golden file.
CriterionResult golden_transform(const std::string& command, const std::string& fixture, const std::string& golden_name,
                         const std::vector<std::pair<std::string, std::string>>& answers) {
  auto r = cli({command, test::fixture_path(fixture)});
  if (r.code != kExitOk) return {false, "exit " + std::to_string(r.code) + ": " + r.err};
  if (r.out != golden(golden_name)) return {false, "output differs from tests/golden/" + golden_name};
  auto spec = test::parse_ok(r.out);
  for (const auto& [rule, file] : answers)
    if (!matches_answer(spec, rule, file)) return {false, rule + " differs from " + file};
  return {true, "matches tests/golden/" + golden_name};
}

CriterionResult criterion_1() {
  auto start = Clock::now();
  auto o = golden_transform("add-subtyping", "stlc", "stlc.subtyping.lang", {{"t-app", "t-app.rules"}});
  double t = seconds_since(start);
  if (o.pass && t >= kGoldenTappLimit) return {false, "took " + fmt_seconds(t)};
  auto spec = test::parse_ok(golden("stlc.subtyping.lang"));
  if (print_rule(test::rule_named(spec, "t-app"), spec).find("  T12 <: T11\n") == std::string::npos)
    return {false, "premise T12 <: T11 missing"};
  o.detail += ", " + fmt_seconds(t);
  return o;
}

CriterionResult criterion_2() {
  return golden_transform("add-subtyping", "references", "references.subtyping.lang",
                          {{"t-assign", "t-assign.rules"}, {"t-if", "t-if.rules"}});
}

CriterionResult criterion_3() {
  auto r = cli({"add-subtyping", test::fixture_path("app2")});
  if (r.code != kExitTransform) return {false, "exit " + std::to_string(r.code)};
  if (r.err.find("MultipleContravariant") == std::string::npos) return {false, "reason missing: " + r.err};
  auto want = golden("app2.subtyping.err");
  if (r.err != want) return {false, "report differs from tests/golden/app2.subtyping.err"};
  return {true, "exit 2, MultipleContravariant"};
}

CriterionResult criterion_4() {
  return golden_transform("add-subtyping", "langfunny", "langfunny.subtyping.lang",
                          {{"t-doublyApply", "t-doublyApply.rules"}, {"t-addToPairAsList", "t-addToPairAsList.rules"}});
}

std::vector<InferenceRule> rules_with_prefix(const LanguageSpec& spec, const std::string& prefix) {
  std::vector<InferenceRule> out;
  for (const auto& r : spec.rules)
    if (r.name.rfind(prefix, 0) == 0) out.push_back(r);
  return out;
}

bool same_rules(const std::vector<InferenceRule>& a, const std::vector<InferenceRule>& b, const LanguageSpec& spec) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(canonicalize(a[i], spec) == canonicalize(b[i], spec))) return false;
  return true;
}

CriterionResult criterion_5() {
  auto o = golden_transform("derive-ck", "stlc", "stlc.ck.lang", {});
  if (!o.pass) return o;
  auto spec = test::parse_ok(golden("stlc.ck.lang"));
  std::vector<std::string> prods;
  for (const auto& p : spec.find_category(kContinuationCategory)->productions) prods.push_back(print_term(p, spec));
  if (prods != std::vector<std::string>{"mt", "(app_1 e k)", "(app_2 v k)"}) return {false, "continuation grammar"};
  auto machine = rules_with_prefix(spec, "app-");
  if (machine.size() != 3) return {false, std::to_string(machine.size()) + " machine rules"};
  if (!same_rules(machine, test::answer_rules("stlc_ck.rules", spec), spec)) return {false, "rules differ"};
  return {true, "{mt, app_1, app_2}; start/order/computation match"};
}

CriterionResult criterion_6() {
  auto o = golden_transform("derive-ck", "langfunny", "langfunny.ck.lang", {});
  if (!o.pass) return o;
  auto spec = test::parse_ok(golden("langfunny.ck.lang"));
  auto rules = rules_with_prefix(spec, "doublyApply-");
  if (rules.size() != 5) return {false, std::to_string(rules.size()) + " doublyApply rules"};
  if (!same_rules(rules, test::answer_rules("doublyApply_ck.rules", spec), spec)) return {false, "rules differ"};
  return {true, "five doublyApply rules match"};
}

CriterionResult criterion_7() {
  std::string detail;
  double total = 0;
  for (const char* name : {"stlc", "langfunny"}) {
    auto start = Clock::now();
    auto r = cli({"compare", test::fixture_path(name), "--count", "1000", "--max-size", "7", "--seed", "1"});
    double t = seconds_since(start);
    total += t;
    if (r.code != kExitOk || r.out.rfind("1000/1000 terms agree", 0) != 0)
      return {false, std::string(name) + ": " + r.out + r.err};
    if (t >= kEquivalenceLimit) return {false, std::string(name) + " took " + fmt_seconds(t)};
    detail += std::string(detail.empty() ? "" : ", ") + name + " 1000/1000";
  }
  return {true, detail + ", " + fmt_seconds(total)};
}

CriterionResult criterion_8() {
  std::size_t checked = 0;
  for (const char* name : {"stlc", "references", "langfunny", "bools"}) {
    auto spec = test::load_fixture(name);
    auto once = add_subtyping(spec);
    auto twice = add_subtyping(once);
    if (!(canonicalize(once) == canonicalize(twice))) return {false, std::string(name) + " changed on second pass"};
    ++checked;
  }
  // app2 has no transform; both attempts fail the same way
  try {
    add_subtyping(test::load_fixture("app2"));
    return {false, "app2 transformed"};
  } catch (const SubtypingError& e) {
    if (e.reason() != SubtypingReason::MultipleContravariant) return {false, "app2 reason"};
  }
  return {true, std::to_string(checked) + " fixtures stable, app2 rejected"};
}

CriterionResult criterion_9() {
  auto stlc = test::load_fixture("stlc");
  auto sub = add_subtyping(stlc);
  Typechecker before(stlc), after(sub);
  std::size_t typed = 0, regressions = 0;
  for (std::size_t n = 1; n <= 7; ++n)
    for (const auto& t : enumerate_terms(stlc, kExpressionCategory, n)) {
      auto a = before.try_infer(t);
      if (!a) continue;
      ++typed;
      auto b = after.try_infer(t);
      if (!b || !(*a == *b)) ++regressions;
    }
  if (typed == 0) return {false, "no typed terms"};
  return {regressions == 0, std::to_string(typed) + " typed terms, " + std::to_string(regressions) + " regressions"};
}

CriterionResult criterion_10() {
  auto start = Clock::now();
  auto spec = test::parse_ok(R"(language Variance
grammar
  Type T ::= (arrow T T) | (Ref T) | (List T) | (prod T T) | (sum T T) | int | float

subtype-base
  int <: float
)");
  test::RuleSubtypeOracle oracle(spec);
  Term lo = Term::constructor("int"), hi = Term::constructor("float");
  auto types = test::types_up_to(2, {parse_pattern("T", spec), lo, hi}, test::type_constructors(spec));
  std::size_t checked = 0, mismatches = 0;
  for (const auto& t : types) {
    if (test::count_meta(t) != 1) continue;
    auto path = metavariable_paths(t).front();
    if (occurrence_variance(path, t, spec.variance) != test::semantic_variance(t, lo, hi, oracle)) ++mismatches;
    ++checked;
  }
  double s = seconds_since(start);
  if (s >= kVarianceLimit) return {false, "took " + fmt_seconds(s)};
  return {mismatches == 0 && checked > 0,
          std::to_string(checked) + " types, " + std::to_string(mismatches) + " mismatches, " + fmt_seconds(s)};
}

CriterionResult criterion_11() {
  std::size_t specs = 0;
  for (const char* name : {"stlc", "references", "app2", "langfunny", "bools"}) {
    auto spec = test::load_fixture(name);
    auto text = print_spec(spec);
    if (text != golden(std::string(name) + ".print.lang")) return {false, std::string(name) + " print differs from golden"};
    std::vector<LanguageSpec> all{spec};
    if (spec.context()) all.push_back(derive_ck(spec));
    if (std::string(name) != "app2") all.push_back(add_subtyping(spec));
    for (const auto& s : all) {
      auto printed = print_spec(s);
      auto back = parse_spec(printed);
      if (!back.ok() || !(*back.spec == s) || print_spec(*back.spec) != printed)
        return {false, std::string(name) + " does not round-trip"};
      ++specs;
    }
  }
  return {true, std::to_string(specs) + " specs round-trip"};
}

CriterionResult criterion_12() {
  auto r = cli({"compare", test::fixture_path("langfunny"), "--ck",
                test::source_path("tests/data/langfunny_ck_faulty.lang")});
  if (r.code != kExitDisagreement) return {false, "exit " + std::to_string(r.code)};
  auto funny = test::load_fixture("langfunny");
  auto machine = test::parse_ok(test::read_text(test::source_path("tests/data/langfunny_ck_faulty.lang")));
  auto report = compare_semantics(funny, machine, CompareOptions{});
  if (!report.counterexample) return {false, "no counterexample"};
  std::size_t size = report.counterexample->shrunk.size();
  if (size > 10) return {false, "counterexample has " + std::to_string(size) + " nodes"};
  return {true, "exit 5, counterexample " + print_term(report.counterexample->shrunk, funny) + " (" +
                    std::to_string(size) + " nodes)"};
}

}  // namespace

int main() {
  setenv("LANGX_COLOR", "never", 1);
  const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria{
      {"golden t-app", criterion_1},
      {"golden t-assign and t-if", criterion_2},
      {"golden app2 error", criterion_3},
      {"golden exam answers", criterion_4},
      {"golden CK for STLC", criterion_5},
      {"golden CK for doublyApply", criterion_6},
      {"semantics and machine agree", criterion_7},
      {"add-subtyping is idempotent", criterion_8},
      {"typing is monotone under add-subtyping", criterion_9},
      {"variance agrees with the subtype oracle", criterion_10},
      {"parse and print round-trip", criterion_11},
      {"injected CK fault is caught", criterion_12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    CriterionResult o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first
              << "  (" << o.detail << ")\n";
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

#include <doctest.h>

#include "langx/parser.hpp"
#include "langx/subtyping.hpp"
#include "langx/variance.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace langx;

namespace {

constexpr Variance co = Variance::Covariant, contra = Variance::Contravariant, inv = Variance::Invariant;

std::vector<Formula> premises_of(const std::string& fixture, const std::string& rule) {
  return test::rule_named(test::load_fixture(fixture), rule).premises;
}

}  // namespace

TEST_CASE("composition table") {
  for (auto x : {co, contra, inv}) {
    CHECK(compose(inv, x) == inv);
    CHECK(compose(x, inv) == inv);
    CHECK(compose(co, x) == x);
  }
  CHECK(compose(contra, contra) == co);
  CHECK(compose(contra, co) == contra);
}

TEST_CASE("occurrence variance along a path") {
  auto refs = test::load_fixture("references");
  const auto& table = refs.variance;
  CHECK(occurrence_variance({0}, parse_pattern("(arrow T11 T2)", refs), table) == contra);
  CHECK(occurrence_variance({1}, parse_pattern("(arrow T11 T2)", refs), table) == co);
  CHECK(occurrence_variance({0}, parse_pattern("(Ref T)", refs), table) == inv);
  CHECK(occurrence_variance({0, 0}, parse_pattern("(arrow (arrow T Bool) Bool)", refs), table) == co);
  CHECK(occurrence_variance({}, parse_pattern("T1", refs), table) == co);
}

TEST_CASE("defaults apply when the table has no entry") {
  auto stlc = test::load_fixture("stlc");
  auto ty = Term::constructor("List", {Term::constructor("Ref", {parse_pattern("T", stlc)})});
  CHECK(occurrence_variance({0, 0}, ty, {}) == inv);
  auto unknown = Term::constructor("box", {parse_pattern("T", stlc)});
  CHECK_THROWS_AS(occurrence_variance({0}, unknown, {}), MissingVariance);
}

TEST_CASE("collect occurrences in output types of typing premises") {
  auto stlc = test::load_fixture("stlc");
  auto app = add_subtyping(test::rule_named(stlc, "t-app"), stlc);
  auto t11 = collect_occurrences(resolve_metavariable("T11", stlc), app.premises, stlc.variance);
  REQUIRE(t11.size() == 1);
  CHECK(t11[0].premise == 0);
  CHECK(t11[0].variance == contra);

  auto refs = test::load_fixture("references");
  auto split = split_equal_types(premises_of("references", "t-if"));
  auto t1 = collect_occurrences(resolve_metavariable("T1", refs), split.premises, refs.variance);
  REQUIRE(t1.size() == 1);
  CHECK(t1[0].premise == 1);
  CHECK(t1[0].variance == co);

  auto app2 = test::load_fixture("app2");
  auto t = collect_occurrences(resolve_metavariable("T", app2), premises_of("app2", "t-app2"), app2.variance);
  REQUIRE(t.size() == 4);
  CHECK(std::count_if(t.begin(), t.end(), [](const Occurrence& o) { return o.variance == contra; }) == 2);

  CHECK(collect_occurrences(resolve_metavariable("T9", stlc), app.premises, stlc.variance).empty());
}

TEST_CASE("variance agrees with the subtype relation on small types") {
  auto spec = test::parse_ok(R"(language V
grammar
  Type T ::= (arrow T T) | (Ref T) | (List T) | int | float

subtype-base
  int <: float
)");
  test::RuleSubtypeOracle oracle(spec);
  auto X = parse_pattern("T", spec);
  auto types = test::types_up_to(2, {X, Term::constructor("int"), Term::constructor("float")},
                                 test::type_constructors(spec));
  std::size_t checked = 0;
  for (const auto& t : types) {
    if (test::count_meta(t) != 1) continue;
    auto path = metavariable_paths(t).front();
    CAPTURE(print_term(t, spec));
    CHECK(occurrence_variance(path, t, spec.variance) ==
          test::semantic_variance(t, Term::constructor("int"), Term::constructor("float"), oracle));
    ++checked;
  }
  CHECK(checked > 100);
}

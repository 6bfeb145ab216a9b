#include <doctest.h>

#include <random>

#include "langx/ir.hpp"
#include "langx/parser.hpp"
#include "support.hpp"

using namespace langx;

TEST_CASE("metavariables resolve by longest declared prefix") {
  auto stlc = test::load_fixture("stlc");
  auto t12 = resolve_metavariable("T12", stlc);
  CHECK(t12.base == "T");
  CHECK(t12.suffix == "12");
  CHECK(t12.category == "Type");

  auto e = resolve_metavariable("e", stlc);
  CHECK(e.base == "e");
  CHECK(e.suffix.empty());
  CHECK(e.category == "Expression");

  CHECK_THROWS_AS(resolve_metavariable("Q7", stlc), UnknownMetavariable);
  CHECK_THROWS_AS(resolve_metavariable("Tx", stlc), UnknownMetavariable);
  CHECK(resolve_metavariable("T1''", stlc).suffix == "1''");
}

TEST_CASE("longest prefix wins over a shorter metavariable") {
  auto spec = test::parse_ok(R"(language P
grammar
  Type T ::= int
  Expression e ::= c | (wrap ex)
  Extra ex ::= z
)");
  CHECK(resolve_metavariable("ex2", spec).category == "Extra");
  CHECK(resolve_metavariable("e2", spec).category == "Expression");
}

TEST_CASE("resolved tokens render back unchanged") {
  auto stlc = test::load_fixture("stlc");
  std::mt19937 rng(7);
  const std::string bases[] = {"T", "e", "v", "E", "x"};
  for (int i = 0; i < 200; ++i) {
    std::string tok = bases[rng() % 5];
    int len = static_cast<int>(rng() % 4);
    for (int j = 0; j < len; ++j) tok += (rng() % 4 == 0) ? '\'' : static_cast<char>('0' + rng() % 10);
    CHECK(resolve_metavariable(tok, stlc).token() == tok);
  }
}

TEST_CASE("fresh appends the smallest unused integer") {
  Metavariable t1{"T", "1", "Type"}, t{"T", "", "Type"};
  CHECK(fresh(t1, {"T1", "T2"}).token() == "T11");
  CHECK(fresh(t, {"T"}).token() == "T1");
  CHECK(fresh(t, {"T", "T1", "T2"}).token() == "T3");
  CHECK(fresh(t, {"T", "T1", "T2"}).category == "Type");
}

TEST_CASE("fresh never returns a used name and successive calls are distinct") {
  std::mt19937 rng(11);
  for (int round = 0; round < 20; ++round) {
    std::set<std::string> used;
    for (int i = 0; i < 10; ++i) used.insert("T" + std::to_string(rng() % 30));
    Metavariable base{"T", rng() % 2 ? "1" : "", "Type"};
    std::set<std::string> produced;
    for (int i = 0; i < 25; ++i) {
      auto m = fresh(base, used);
      CHECK(used.count(m.token()) == 0);
      CHECK(produced.insert(m.token()).second);
      used.insert(m.token());
    }
  }
}

TEST_CASE("built-in variance table") {
  const auto& d = default_variance();
  CHECK(d.at("arrow") == std::vector<Variance>{Variance::Contravariant, Variance::Covariant});
  CHECK(d.at("Ref") == std::vector<Variance>{Variance::Invariant});
  CHECK(d.at("List") == std::vector<Variance>{Variance::Covariant});
  CHECK(d.at("prod") == std::vector<Variance>{Variance::Covariant, Variance::Covariant});
  CHECK(d.at("sum") == std::vector<Variance>{Variance::Covariant, Variance::Covariant});
}

TEST_CASE("plug fills the hole") {
  auto ctx = Term::constructor("app", {Term::hole(), Term::constructor("c")});
  auto filled = plug(ctx, Term::constructor("d"));
  CHECK(filled == Term::constructor("app", {Term::constructor("d"), Term::constructor("c")}));
  CHECK(plug(Term::hole(), Term::constructor("c")) == Term::constructor("c"));
}

TEST_CASE("canonicalize identifies rules equal up to renaming") {
  auto stlc = test::load_fixture("stlc");
  const auto& app = test::rule_named(stlc, "t-app");
  Renaming r{{"T1", Metavariable{"T", "7", "Type"}}, {"T2", Metavariable{"T", "'", "Type"}},
             {"e1", Metavariable{"e", "5", "Expression"}}};
  auto renamed = rename(app, r);
  CHECK_FALSE(renamed == app);
  CHECK(canonicalize(renamed, stlc) == canonicalize(app, stlc));
}

TEST_CASE("term size counts nodes but not bound names") {
  auto stlc = test::load_fixture("stlc");
  CHECK(parse_term("(app (lam x int x) c)", stlc).size() == 5);
  CHECK(parse_term("c", stlc).size() == 1);
}

TEST_CASE("validation reports arity and variance problems") {
  auto arity = parse_spec(R"(language A
grammar
  Type T ::= int
  Expression e ::= c | (app e e) | (app e)
)");
  REQUIRE_FALSE(arity.ok());
  CHECK(arity.errors.size() == 1);
  CHECK(arity.errors[0].kind == "ArityMismatch");
  CHECK(arity.errors[0].span.line == 4);

  auto variance = parse_spec(R"(language V
grammar
  Type T ::= (box T) | int
  Expression e ::= c
)");
  REQUIRE_FALSE(variance.ok());
  CHECK(variance.errors[0].kind == "MissingVariance");
}

#include <doctest.h>

#include "langx/ck.hpp"
#include "langx/parser.hpp"
#include "support.hpp"

using namespace langx;

namespace {

std::vector<std::string> production_texts(const GrammarCategory& g, const LanguageSpec& spec) {
  std::vector<std::string> out;
  for (const auto& p : g.productions) out.push_back(print_term(p, spec));
  return out;
}

std::vector<std::string> rule_texts(const std::vector<InferenceRule>& rules, const LanguageSpec& spec) {
  std::vector<std::string> out;
  for (const auto& r : rules) out.push_back(print_formula(r.conclusion, spec));
  return out;
}

std::vector<Term> contexts_for(const std::string& op, const LanguageSpec& spec) {
  std::vector<Term> out;
  for (const auto& p : spec.context()->productions)
    if (head_of(p) == op) out.push_back(p);
  return out;
}

std::vector<InferenceRule> reductions(const LanguageSpec& spec) {
  std::vector<InferenceRule> out;
  for (const auto& r : spec.rules)
    if (is_reduction_rule(r)) out.push_back(r);
  return out;
}

std::vector<InferenceRule> rules_with_prefix(const LanguageSpec& spec, const std::string& prefix) {
  std::vector<InferenceRule> out;
  for (const auto& r : spec.rules)
    if (r.name.rfind(prefix, 0) == 0) out.push_back(r);
  return out;
}

bool same_rules(std::vector<InferenceRule> a, std::vector<InferenceRule> b, const LanguageSpec& spec) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(canonicalize(a[i], spec) == canonicalize(b[i], spec))) return false;
  return true;
}

}  // namespace

TEST_CASE("continuation grammar") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  CHECK(production_texts(generate_continuation_grammar(stlc), ck) ==
        std::vector<std::string>{"mt", "(app_1 e k)", "(app_2 v k)"});

  auto funny = test::load_fixture("langfunny");
  auto texts = production_texts(generate_continuation_grammar(funny), derive_ck(funny));
  for (const char* want : {"(doublyApply_1 e e e k)", "(doublyApply_2 v e e k)", "(doublyApply_3 v v e k)",
                           "(doublyApply_4 v v v k)", "(addToPairAsList_1 e k)", "(addToPairAsList_2 v k)"})
    CHECK(std::find(texts.begin(), texts.end(), want) != texts.end());
}

TEST_CASE("continuation ops keep hole positions and arities") {
  auto funny = test::load_fixture("langfunny");
  for (const auto& c : continuation_ops(funny)) {
    CAPTURE(c.name());
    auto ctxs = contexts_for(c.source_op, funny);
    REQUIRE_FALSE(ctxs.empty());
    std::size_t arity = ctxs.front().args.size();
    CHECK(c.index >= 1);
    CHECK(static_cast<std::size_t>(c.index) <= arity);
    CHECK(c.args.size() + 1 == arity);
  }
}

TEST_CASE("start rules") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  auto start = generate_start_rule("app", continuation_ops(stlc), stlc);
  CHECK(print_formula(start.conclusion, ck) == "<(app e1 e2) , k> --> <e1 , (app_1 e2 k)>");
  CHECK(start.premises.empty());

  auto funny = test::load_fixture("langfunny");
  auto dstart = generate_start_rule("doublyApply", continuation_ops(funny), funny);
  CHECK(print_formula(dstart.conclusion, derive_ck(funny)) ==
        "<(doublyApply e1 e2 e3 e4) , k> --> <e1 , (doublyApply_1 e2 e3 e4 k)>");

  // pair is also a value form: its start rule only fires on non-values
  auto pstart = generate_start_rule("pair", continuation_ops(funny), funny);
  REQUIRE(pstart.premises.size() == 1);
  CHECK(std::holds_alternative<NotValue>(pstart.premises[0]));
}

TEST_CASE("an operator whose contexts all hold a value has no start") {
  auto spec = test::parse_ok(R"(language S
grammar
  Type T ::= int
  Expression e ::= c | (op e e)
  Value v ::= c
  Context E ::= [.] | (op v E)
)");
  try {
    derive_ck(spec);
    FAIL("expected CkError");
  } catch (const CkError& e) {
    CHECK(e.kind() == CkErrorKind::NoStart);
    CHECK(e.op() == "op");
  }
}

TEST_CASE("order rules") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  auto order = generate_order_rules("app", continuation_ops(stlc), contexts_for("app", stlc), stlc);
  CHECK(rule_texts(order, ck) == std::vector<std::string>{"<v1 , (app_1 e2 k)> --> <e2 , (app_2 v1 k)>"});

  auto funny = test::load_fixture("langfunny");
  auto fck = derive_ck(funny);
  auto dorder = generate_order_rules("doublyApply", continuation_ops(funny), contexts_for("doublyApply", funny), funny);
  CHECK(rule_texts(dorder, fck) ==
        std::vector<std::string>{"<v1 , (doublyApply_1 e2 e3 e4 k)> --> <e2 , (doublyApply_2 v1 e3 e4 k)>",
                                 "<v2 , (doublyApply_2 v1 e3 e4 k)> --> <e3 , (doublyApply_3 v1 v2 e4 k)>",
                                 "<v3 , (doublyApply_3 v1 v2 e4 k)> --> <e4 , (doublyApply_4 v1 v2 v3 k)>"});

  auto aorder = generate_order_rules("addToPairAsList", continuation_ops(funny), contexts_for("addToPairAsList", funny),
                                     funny);
  CHECK(rule_texts(aorder, fck) ==
        std::vector<std::string>{"<v1 , (addToPairAsList_1 e2 k)> --> <e2 , (addToPairAsList_2 v1 k)>"});
}

TEST_CASE("computation rules") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  auto comp = generate_computation_rules("app", continuation_ops(stlc), reductions(stlc), stlc);
  CHECK(rule_texts(comp, ck) == std::vector<std::string>{"<v , (app_2 (lam x T e) k)> --> <e[v/x] , k>"});

  auto funny = test::load_fixture("langfunny");
  auto fck = derive_ck(funny);
  CHECK(rule_texts(generate_computation_rules("doublyApply", continuation_ops(funny), reductions(funny), funny), fck) ==
        std::vector<std::string>{
            "<v4 , (doublyApply_4 v1 v2 v3 k)> --> <(pair (app v2 (app v1 v3)) (app v1 (app v2 v4))) , k>"});
  CHECK(rule_texts(generate_computation_rules("addToPairAsList", continuation_ops(funny), reductions(funny), funny),
                   fck) == std::vector<std::string>{"<(pair v2 v3) , (addToPairAsList_2 v1 k)> --> <[v1, v2, v3] , k>"});
}

TEST_CASE("if with two reductions yields two computation rules on the final frame") {
  auto bools = test::load_fixture("bools");
  auto ck = derive_ck(bools);
  auto comp = generate_computation_rules("if", continuation_ops(bools), reductions(bools), bools);
  CHECK(rule_texts(comp, ck) ==
        std::vector<std::string>{"<t , (if_1 e1 e2 k)> --> <e1 , k>", "<f , (if_1 e1 e2 k)> --> <e2 , k>"});
  CHECK(generate_order_rules("if", continuation_ops(bools), contexts_for("if", bools), bools).empty());
}

TEST_CASE("derived machines match the worked answers") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  std::vector<InferenceRule> machine;
  for (const auto& r : ck.rules)
    if (is_machine_rule(r)) machine.push_back(r);
  CHECK(machine.size() == 3);
  CHECK(same_rules(machine, test::answer_rules("stlc_ck.rules", ck), ck));

  auto funny = test::load_fixture("langfunny");
  auto fck = derive_ck(funny);
  auto da = rules_with_prefix(fck, "doublyApply-");
  CHECK(da.size() == 5);
  CHECK(same_rules(da, test::answer_rules("doublyApply_ck.rules", fck), fck));
}

TEST_CASE("rule counts per operator") {
  for (const char* name : {"stlc", "langfunny", "bools", "references"}) {
    CAPTURE(name);
    auto spec = test::load_fixture(name);
    auto ck = derive_ck(spec);
    auto conts = continuation_ops(spec);
    std::set<std::string> ops;
    for (const auto& c : conts) ops.insert(c.source_op);
    for (const auto& op : ops) {
      CAPTURE(op);
      auto c = contexts_for(op, spec).size();
      std::size_t reds = 0;
      for (const auto& r : reductions(spec))
        if (head_of(std::get<Reduction>(r.conclusion).lhs) == op) ++reds;
      auto made = rules_with_prefix(ck, op + "-");
      auto count = [&](const std::string& kind) {
        return std::count_if(made.begin(), made.end(),
                             [&](const InferenceRule& r) { return r.name.find("-" + kind) != std::string::npos; });
      };
      CHECK(count("start") == 1);
      CHECK(static_cast<std::size_t>(count("order-")) == c - 1);
      CHECK(static_cast<std::size_t>(count("comp-")) == reds);
      CHECK(count("rebuild") == (reds == 0 ? 1 : 0));
    }
    CHECK(ck.find_category(kContinuationCategory)->productions.size() == conts.size() + 1);
  }
}

TEST_CASE("derived spec layout") {
  auto stlc = test::load_fixture("stlc");
  auto ck = derive_ck(stlc);
  CHECK(ck.find_category("Context") == nullptr);
  CHECK(ck.categories[4].name == kContinuationCategory);
  for (const auto& r : ck.rules) CHECK_FALSE(is_reduction_rule(r));
  CHECK(test::has_rule(ck, "t-app"));
}

TEST_CASE("no context category") {
  auto spec = test::parse_ok(R"(language N
grammar
  Type T ::= int
  Expression e ::= c
  Value v ::= c
)");
  try {
    derive_ck(spec);
    FAIL("expected CkError");
  } catch (const CkError& e) {
    CHECK(e.kind() == CkErrorKind::NoContextCategory);
  }
}

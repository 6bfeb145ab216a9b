#include "langx/ck.hpp"

#include <algorithm>

namespace langx {

const char* to_string(CkErrorKind k) {
  switch (k) {
    case CkErrorKind::NoContextCategory: return "NoContextCategory";
    case CkErrorKind::BadContext: return "BadContext";
    case CkErrorKind::NoStart: return "NoStart";
    case CkErrorKind::AmbiguousStart: return "AmbiguousStart";
    case CkErrorKind::OrderAmbiguity: return "OrderAmbiguity";
    case CkErrorKind::NoFinalContinuation: return "NoFinalContinuation";
    case CkErrorKind::PatternMismatch: return "PatternMismatch";
  }
  return "CkError";
}

namespace {

const GrammarCategory& context_category(const LanguageSpec& spec) {
  const auto* ctx = spec.context();
  if (!ctx) throw CkError(CkErrorKind::NoContextCategory, "", "no '" + spec.context_category + "' category declared");
  return *ctx;
}

Term continuation_var() { return Term::metavariable(Metavariable{"k", "", kContinuationCategory}); }

// Metavariable named after the argument position it stands for: e3, v1, ...
Term positional(const std::string& category, std::size_t position, const LanguageSpec& spec) {
  const auto* c = spec.find_category(category);
  std::string base = c ? c->metavariable : category;
  return Term::metavariable(Metavariable{base, std::to_string(position), category});
}

std::size_t hole_position(const Term& context, const std::string& ctx_name) {
  std::size_t pos = 0, holes = 0;
  for (std::size_t i = 0; i < context.args.size(); ++i)
    if (context.args[i].is_meta() && context.args[i].meta.category == ctx_name) {
      pos = i + 1;
      ++holes;
    }
  if (holes != 1)
    throw CkError(CkErrorKind::BadContext, context.name,
                  "context production must contain exactly one hole, found " + std::to_string(holes));
  return pos;
}

std::vector<Term> contexts_of(const std::string& op, const LanguageSpec& spec) {
  std::vector<Term> out;
  for (const auto& p : context_category(spec).productions)
    if (p.kind == TermKind::Constructor && p.name == op) out.push_back(p);
  return out;
}

bool heads_value(const std::string& op, const LanguageSpec& spec) {
  const auto* val = spec.find_category(kValueCategory);
  if (!val) return false;
  return std::any_of(val->productions.begin(), val->productions.end(),
                     [&](const Term& p) { return head_of(p) == op; });
}

bool is_value_pattern(const Term& p, const LanguageSpec& spec) {
  if (p.is_meta()) return p.meta.category == kValueCategory;
  const auto* val = spec.find_category(kValueCategory);
  if (!val) return false;
  return std::any_of(val->productions.begin(), val->productions.end(), [&](const Term& v) {
    return v.kind == p.kind && v.name == p.name && v.args.size() == p.args.size();
  });
}

// Argument categories of a frame with the value re-inserted at its index.
std::vector<std::string> filled_slots(const ContinuationOp& c) {
  std::vector<std::string> slots;
  for (const auto& a : c.args) slots.push_back(a.is_meta() ? a.meta.category : std::string());
  slots.insert(slots.begin() + (c.index - 1), kValueCategory);
  return slots;
}

Term frame(const std::string& name, const std::vector<Term>& args, std::size_t skip) {
  std::vector<Term> out;
  for (std::size_t p = 1; p <= args.size(); ++p)
    if (p != skip) out.push_back(args[p - 1]);
  out.push_back(continuation_var());
  return Term::constructor(name, std::move(out));
}

std::vector<Term> positional_args(const std::vector<std::string>& slots, const LanguageSpec& spec) {
  std::vector<Term> out;
  for (std::size_t p = 1; p <= slots.size(); ++p) out.push_back(positional(slots[p - 1], p, spec));
  return out;
}

std::vector<const ContinuationOp*> frames_of(const std::string& op, const std::vector<ContinuationOp>& continuations) {
  std::vector<const ContinuationOp*> out;
  for (const auto& c : continuations)
    if (c.source_op == op) out.push_back(&c);
  return out;
}

// Hole position of the next context reached after filling `c`, or 0 for none.
std::size_t next_position(const ContinuationOp& c, const std::vector<Term>& contexts, const std::string& ctx_name) {
  auto slots = filled_slots(c);
  std::set<std::size_t> targets;
  for (const auto& ctx : contexts) {
    if (ctx.args.size() != slots.size()) continue;
    std::size_t j = hole_position(ctx, ctx_name);
    bool match = true;
    for (std::size_t p = 1; p <= slots.size() && match; ++p)
      if (p != j) match = ctx.args[p - 1].is_meta() && ctx.args[p - 1].meta.category == slots[p - 1];
    if (match && j != static_cast<std::size_t>(c.index)) targets.insert(j);
  }
  if (targets.size() > 1)
    throw CkError(CkErrorKind::OrderAmbiguity, c.source_op,
                  "after '" + c.name() + "' several contexts apply with different hole positions");
  return targets.empty() ? 0 : *targets.begin();
}

std::string machine_rule_name(const std::string& op, const std::string& kind) { return op + "-" + kind; }

}  // namespace

std::vector<ContinuationOp> continuation_ops(const LanguageSpec& spec) {
  const auto& ctx = context_category(spec);
  std::vector<ContinuationOp> out;
  for (const auto& p : ctx.productions) {
    if (p.kind == TermKind::Hole) continue;
    if (p.kind != TermKind::Constructor)
      throw CkError(CkErrorKind::BadContext, p.name, "context production must be an operator application");
    std::size_t j = hole_position(p, ctx.name);
    ContinuationOp c{p.name, static_cast<int>(j), {}};
    for (std::size_t i = 0; i < p.args.size(); ++i)
      if (i + 1 != j) c.args.push_back(p.args[i]);
    out.push_back(std::move(c));
  }
  return out;
}

GrammarCategory generate_continuation_grammar(const LanguageSpec& spec) {
  GrammarCategory g{kContinuationCategory, "k", false, {Term::constructor(kEmptyContinuation)}};
  for (const auto& c : continuation_ops(spec)) {
    auto args = c.args;
    args.push_back(continuation_var());
    g.productions.push_back(Term::constructor(c.name(), std::move(args)));
  }
  return g;
}

InferenceRule generate_start_rule(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                  const LanguageSpec& spec) {
  const ContinuationOp* start = nullptr;
  for (const auto* c : frames_of(op, continuations)) {
    bool value_free = std::none_of(c->args.begin(), c->args.end(),
                                   [](const Term& a) { return a.is_meta() && a.meta.category == kValueCategory; });
    if (!value_free) continue;
    if (start) throw CkError(CkErrorKind::AmbiguousStart, op, "more than one context evaluates no argument first");
    start = c;
  }
  if (!start) throw CkError(CkErrorKind::NoStart, op, "every context of the operator contains a value");

  std::vector<std::string> slots;
  for (const auto& a : start->args) slots.push_back(a.is_meta() ? a.meta.category : std::string(kExpressionCategory));
  slots.insert(slots.begin() + (start->index - 1), kExpressionCategory);
  auto args = positional_args(slots, spec);
  std::size_t i = static_cast<std::size_t>(start->index);

  Term subject = Term::constructor(op, args);
  InferenceRule r{machine_rule_name(op, "start"), {}, {}};
  if (heads_value(op, spec)) r.premises.emplace_back(NotValue{subject});
  r.conclusion = MachineStep{{subject, continuation_var()}, {args[i - 1], frame(start->name(), args, i)}};
  return r;
}

std::vector<InferenceRule> generate_order_rules(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                                const std::vector<Term>& contexts, const LanguageSpec& spec) {
  const auto& ctx_name = context_category(spec).name;
  std::vector<InferenceRule> out;
  for (const auto* c : frames_of(op, continuations)) {
    std::size_t j = next_position(*c, contexts, ctx_name);
    if (j == 0) continue;
    auto args = positional_args(filled_slots(*c), spec);
    std::size_t i = static_cast<std::size_t>(c->index);
    ContinuationOp next{op, static_cast<int>(j), {}};
    out.push_back({machine_rule_name(op, "order-" + std::to_string(i)),
                   {},
                   MachineStep{{args[i - 1], frame(c->name(), args, i)}, {args[j - 1], frame(next.name(), args, j)}}});
  }
  return out;
}

const ContinuationOp& final_continuation(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                         const std::vector<Term>& contexts, const LanguageSpec& spec) {
  const auto& ctx_name = context_category(spec).name;
  const ContinuationOp* found = nullptr;
  for (const auto* c : frames_of(op, continuations)) {
    if (next_position(*c, contexts, ctx_name) != 0) continue;
    if (found)
      throw CkError(CkErrorKind::OrderAmbiguity, op,
                    "both '" + found->name() + "' and '" + c->name() + "' end the evaluation of the operator");
    found = c;
  }
  if (!found) throw CkError(CkErrorKind::NoFinalContinuation, op, "every continuation leads to another context");
  return *found;
}

std::vector<InferenceRule> generate_computation_rules(const std::string& op,
                                                      const std::vector<ContinuationOp>& continuations,
                                                      const std::vector<InferenceRule>& reductions,
                                                      const LanguageSpec& spec) {
  const auto& ctx_name = context_category(spec).name;
  auto contexts = contexts_of(op, spec);
  const auto& fin = final_continuation(op, continuations, contexts, spec);
  std::size_t f = static_cast<std::size_t>(fin.index);

  std::set<std::size_t> evaluated;
  for (const auto& ctx : contexts) evaluated.insert(hole_position(ctx, ctx_name));

  std::vector<InferenceRule> out;
  int n = 0;
  for (const auto& red : reductions) {
    const auto* rule = std::get_if<Reduction>(&red.conclusion);
    if (!rule || head_of(rule->lhs) != op) continue;
    const auto& lhs = rule->lhs;
    if (lhs.args.size() < f)
      throw CkError(CkErrorKind::PatternMismatch, op, "rule '" + red.name + "' has too few arguments");
    for (auto p : evaluated)
      if (p <= lhs.args.size() && !is_value_pattern(lhs.args[p - 1], spec))
        throw CkError(CkErrorKind::PatternMismatch, op,
                      "rule '" + red.name + "' expects a non-value at evaluated position " + std::to_string(p));
    out.push_back({machine_rule_name(op, "comp-" + std::to_string(++n)),
                   red.premises,
                   MachineStep{{lhs.args[f - 1], frame(fin.name(), lhs.args, f)}, {rule->rhs, continuation_var()}}});
  }
  if (out.empty() && heads_value(op, spec)) {
    // A value constructor whose arguments are evaluated: rebuild it once done.
    auto args = positional_args(filled_slots(fin), spec);
    out.push_back({machine_rule_name(op, "rebuild"),
                   {},
                   MachineStep{{args[f - 1], frame(fin.name(), args, f)}, {Term::constructor(op, args), continuation_var()}}});
  }
  return out;
}

LanguageSpec derive_ck(const LanguageSpec& spec) {
  const auto& ctx = context_category(spec);
  auto continuations = continuation_ops(spec);

  LanguageSpec out = spec;
  out.context_category = kDefaultContextCategory;
  out.categories.clear();
  for (const auto& c : spec.categories) {
    if (c.name == ctx.name) out.categories.push_back(generate_continuation_grammar(spec));
    else out.categories.push_back(c);
  }

  std::vector<InferenceRule> reductions;
  out.rules.clear();
  for (const auto& r : spec.rules) {
    if (is_reduction_rule(r)) reductions.push_back(r);
    else out.rules.push_back(r);
  }

  std::vector<std::string> ops;
  for (const auto& c : continuations)
    if (std::find(ops.begin(), ops.end(), c.source_op) == ops.end()) ops.push_back(c.source_op);

  for (const auto& op : ops) {
    auto contexts = contexts_of(op, spec);
    out.rules.push_back(generate_start_rule(op, continuations, spec));
    for (auto& r : generate_order_rules(op, continuations, contexts, spec)) out.rules.push_back(std::move(r));
    for (auto& r : generate_computation_rules(op, continuations, reductions, spec)) out.rules.push_back(std::move(r));
  }

  // Operators reduced in place, without evaluating any argument first.
  std::map<std::string, int> counters;
  for (const auto& red : reductions) {
    const auto& rule = std::get<Reduction>(red.conclusion);
    std::string op = head_of(rule.lhs);
    if (std::find(ops.begin(), ops.end(), op) != ops.end()) continue;
    std::string name = op.empty() ? red.name : machine_rule_name(op, "comp-" + std::to_string(++counters[op]));
    out.rules.push_back({name, red.premises,
                         MachineStep{{rule.lhs, continuation_var()}, {rule.rhs, continuation_var()}}});
  }
  return out;
}

}  // namespace langx

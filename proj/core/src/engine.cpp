#include "langx/engine.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "langx/ck.hpp"
#include "langx/parser.hpp"

namespace langx {

// --- categories -------------------------------------------------------------

namespace {

constexpr std::size_t kInfinite = std::numeric_limits<std::size_t>::max() / 4;

bool shape_matches(const Term& p, const Term& t, const LanguageSpec& spec,
                   std::vector<const GrammarCategory*>& stack);

bool belongs_impl(const Term& t, const GrammarCategory& c, const LanguageSpec& spec,
                  std::vector<const GrammarCategory*>& stack) {
  if (std::find(stack.begin(), stack.end(), &c) != stack.end()) return false;
  if (c.identifiers && t.kind == TermKind::Variable) return true;
  stack.push_back(&c);
  bool ok = std::any_of(c.productions.begin(), c.productions.end(),
                        [&](const Term& p) { return shape_matches(p, t, spec, stack); });
  stack.pop_back();
  return ok;
}

bool shape_matches(const Term& p, const Term& t, const LanguageSpec& spec,
                   std::vector<const GrammarCategory*>& stack) {
  switch (p.kind) {
    case TermKind::Metavariable: {
      const auto* c = spec.find_category(p.meta.category);
      return c && belongs_impl(t, *c, spec, stack);
    }
    case TermKind::Constructor:
    case TermKind::Binder: {
      if (t.kind != p.kind || t.name != p.name || t.args.size() != p.args.size()) return false;
      for (std::size_t i = 0; i < p.args.size(); ++i) {
        std::vector<const GrammarCategory*> inner;
        if (!shape_matches(p.args[i], t.args[i], spec, inner)) return false;
      }
      return true;
    }
    case TermKind::Variable: return t.kind == TermKind::Variable && t.name == p.name;
    case TermKind::Hole: return t.kind == TermKind::Hole;
    case TermKind::Substitution: return false;
  }
  return false;
}

}  // namespace

bool belongs(const Term& t, const std::string& category, const LanguageSpec& spec) {
  const auto* c = spec.find_category(category);
  if (!c) return false;
  std::vector<const GrammarCategory*> stack;
  return belongs_impl(t, *c, spec, stack);
}

bool is_value(const Term& t, const LanguageSpec& spec) { return belongs(t, kValueCategory, spec); }

// --- object-level substitution ---------------------------------------------------

namespace {

void collect_free(const Term& t, std::vector<std::string>& bound, std::set<std::string>& out) {
  if (t.kind == TermKind::Variable) {
    if (std::find(bound.begin(), bound.end(), t.name) == bound.end()) out.insert(t.name);
    return;
  }
  if (t.kind == TermKind::Binder) bound.push_back(t.bound);
  for (const auto& a : t.args) collect_free(a, bound, out);
  if (t.kind == TermKind::Binder) bound.pop_back();
}

std::string fresh_name(const std::string& name, const std::set<std::string>& avoid) {
  std::string base = name;
  while (!base.empty() && std::isdigit(static_cast<unsigned char>(base.back()))) base.pop_back();
  if (base.empty()) base = name;
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

Term subst(const Term& t, const std::string& x, const Term& v, const std::set<std::string>& fv_v) {
  switch (t.kind) {
    case TermKind::Variable: return t.name == x ? v : t;
    case TermKind::Binder: {
      if (t.bound == x) return t;
      Term out = t;
      if (fv_v.count(t.bound)) {
        std::set<std::string> avoid = fv_v;
        auto fv_t = free_variables(t);
        avoid.insert(fv_t.begin(), fv_t.end());
        avoid.insert(x);
        std::string renamed = fresh_name(t.bound, avoid);
        Term var = Term::variable(renamed);
        for (auto& a : out.args) a = subst(a, t.bound, var, {renamed});
        out.bound = renamed;
      }
      for (auto& a : out.args) a = subst(a, x, v, fv_v);
      return out;
    }
    default: {
      Term out = t;
      for (auto& a : out.args) a = subst(a, x, v, fv_v);
      return out;
    }
  }
}

bool alpha(const Term& a, const Term& b, std::vector<std::pair<std::string, std::string>>& env) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case TermKind::Variable:
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == a.name || it->second == b.name) return it->first == a.name && it->second == b.name;
      return a.name == b.name;
    case TermKind::Metavariable: return a.meta == b.meta;
    case TermKind::Binder: {
      if (a.name != b.name) return false;
      env.emplace_back(a.bound, b.bound);
      bool ok = true;
      for (std::size_t i = 0; i < a.args.size() && ok; ++i) ok = alpha(a.args[i], b.args[i], env);
      env.pop_back();
      return ok;
    }
    default:
      if (a.name != b.name) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!alpha(a.args[i], b.args[i], env)) return false;
      return true;
  }
}

}  // namespace

std::set<std::string> free_variables(const Term& t) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(t, bound, out);
  return out;
}

Term substitute(const Term& body, const std::string& var, const Term& value) {
  return subst(body, var, value, free_variables(value));
}

bool alpha_equivalent(const Term& a, const Term& b) {
  std::vector<std::pair<std::string, std::string>> env;
  return alpha(a, b, env);
}

// --- matching ------------------------------------------------------------------

namespace {

bool bind_token(Substitution& s, const std::string& token, const Term& value) {
  auto [it, inserted] = s.emplace(token, value);
  return inserted || it->second == value;
}

bool match_into(const Term& p, const Term& t, const LanguageSpec& spec, Substitution& s) {
  switch (p.kind) {
    case TermKind::Metavariable:
      return belongs(t, p.meta.category, spec) && bind_token(s, p.meta.token(), t);
    case TermKind::Constructor:
    case TermKind::Binder:
      if (t.kind != p.kind || t.name != p.name || t.args.size() != p.args.size()) return false;
      if (p.kind == TermKind::Binder && !bind_token(s, p.bound, Term::variable(t.bound))) return false;
      for (std::size_t i = 0; i < p.args.size(); ++i)
        if (!match_into(p.args[i], t.args[i], spec, s)) return false;
      return true;
    case TermKind::Variable: return t.kind == TermKind::Variable && t.name == p.name;
    case TermKind::Hole: return t.kind == TermKind::Hole;
    case TermKind::Substitution: return false;
  }
  return false;
}

bool all_bound(const Term& p, const Substitution& s) {
  if (p.is_meta()) return s.count(p.meta.token()) != 0;
  return std::all_of(p.args.begin(), p.args.end(), [&](const Term& a) { return all_bound(a, s); });
}

}  // namespace

std::optional<Substitution> match_pattern(const Term& pattern, const Term& subject, const LanguageSpec& spec,
                                          Substitution s) {
  if (!match_into(pattern, subject, spec, s)) return std::nullopt;
  return s;
}

Term instantiate(const Term& p, const Substitution& s) {
  switch (p.kind) {
    case TermKind::Metavariable: {
      auto it = s.find(p.meta.token());
      if (it == s.end()) throw std::runtime_error("unbound metavariable '" + p.meta.token() + "'");
      return it->second;
    }
    case TermKind::Substitution: {
      Term body = instantiate(p.args[0], s);
      Term value = instantiate(p.args[1], s);
      Term var = instantiate(p.args[2], s);
      if (var.kind != TermKind::Variable) throw std::runtime_error("substitution target is not a variable");
      return substitute(body, var.name, value);
    }
    default: {
      Term out = p;
      if (p.kind == TermKind::Binder)
        if (auto it = s.find(p.bound); it != s.end() && it->second.kind == TermKind::Variable)
          out.bound = it->second.name;
      for (auto& a : out.args) a = instantiate(a, s);
      return out;
    }
  }
}

std::optional<Term> try_instantiate(const Term& pattern, const Substitution& s) {
  if (!all_bound(pattern, s)) return std::nullopt;
  return instantiate(pattern, s);
}

// --- small-step evaluation ----------------------------------------------------

const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::ContextualReduction: return "contextual-reduction";
    case StepKind::MachineStart: return "machine-start";
    case StepKind::MachineOrder: return "machine-order";
    case StepKind::MachineComputation: return "machine-computation";
    case StepKind::MachineRebuild: return "machine-rebuild";
  }
  return "step";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Value: return "value";
    case Outcome::Stuck: return "stuck";
    case Outcome::OutOfFuel: return "out-of-fuel";
  }
  return "?";
}

namespace {

bool side_conditions_hold(const InferenceRule& r, const Substitution& s, const LanguageSpec& spec) {
  for (const auto& p : r.premises) {
    const auto* nv = std::get_if<NotValue>(&p);
    if (!nv) return false;  // other premise kinds are not executable here
    auto t = try_instantiate(nv->term, s);
    if (!t || is_value(*t, spec)) return false;
  }
  return true;
}

std::size_t hole_index(const Term& ctx, const std::string& ctx_name) {
  for (std::size_t i = 0; i < ctx.args.size(); ++i)
    if (ctx.args[i].is_meta() && ctx.args[i].meta.category == ctx_name) return i;
  return ctx.args.size();
}

}  // namespace

Interpreter::Interpreter(const LanguageSpec& spec) : spec_(spec), context_name_(spec.context_category) {
  if (const auto* ctx = spec.context())
    for (const auto& p : ctx->productions)
      if (p.kind == TermKind::Constructor && hole_index(p, context_name_) < p.args.size()) contexts_.push_back(p);
  for (const auto& r : spec.rules)
    if (is_reduction_rule(r)) reductions_.push_back(&r);
}

bool Interpreter::premises_hold(const InferenceRule& r, const Substitution& s) const {
  return side_conditions_hold(r, s, spec_);
}

const InferenceRule* Interpreter::matching_rule(const Term& redex, Substitution* out) const {
  std::string head = head_of(redex);
  for (const auto* r : reductions_) {
    const auto& lhs = std::get<Reduction>(r->conclusion).lhs;
    std::string h = head_of(lhs);
    if (!h.empty() && h != head) continue;
    auto s = match_pattern(lhs, redex, spec_);
    if (s && premises_hold(*r, *s)) {
      if (out) *out = std::move(*s);
      return r;
    }
  }
  return nullptr;
}

std::optional<Decomposition> Interpreter::find_redex(const Term& t) const {
  if (t.kind == TermKind::Constructor) {
    for (const auto& ctx : contexts_) {
      if (ctx.name != t.name || ctx.args.size() != t.args.size()) continue;
      std::size_t j = hole_index(ctx, context_name_);
      bool fits = true;
      for (std::size_t i = 0; i < ctx.args.size() && fits; ++i)
        if (i != j) fits = belongs(t.args[i], ctx.args[i].meta.category, spec_);
      if (!fits) continue;
      if (auto inner = find_redex(t.args[j])) {
        Term context = t;
        context.args[j] = std::move(inner->context);
        return Decomposition{std::move(context), std::move(inner->redex)};
      }
    }
  }
  if (matching_rule(t, nullptr)) return Decomposition{Term::hole(), t};
  return std::nullopt;
}

Decomposition Interpreter::decompose(const Term& t) const {
  if (auto d = find_redex(t)) return *d;
  return {Term::hole(), t};
}

std::optional<std::pair<Term, TraceStep>> Interpreter::step(const Term& t) const {
  auto d = find_redex(t);
  if (!d) return std::nullopt;
  Substitution s;
  const auto* rule = matching_rule(d->redex, &s);
  Term contractum = instantiate(std::get<Reduction>(rule->conclusion).rhs, s);
  Term next = plug(d->context, contractum);
  TraceStep ts{StepKind::ContextualReduction, rule->name, t, next};
  return std::make_pair(std::move(next), std::move(ts));
}

EvalResult Interpreter::eval(const Term& t, std::size_t fuel, bool record_trace) const {
  EvalResult r;
  r.term = t;
  while (true) {
    if (is_value(r.term, spec_)) {
      r.outcome = Outcome::Value;
      return r;
    }
    if (r.steps >= fuel) {
      r.outcome = Outcome::OutOfFuel;
      return r;
    }
    auto s = step(r.term);
    if (!s) {
      r.outcome = Outcome::Stuck;
      return r;
    }
    r.term = std::move(s->first);
    ++r.steps;
    if (record_trace) r.trace.push_back(std::move(s->second));
  }
}

Decomposition decompose(const Term& t, const LanguageSpec& spec) { return Interpreter(spec).decompose(t); }

std::optional<std::pair<Term, TraceStep>> step(const Term& t, const LanguageSpec& spec) {
  return Interpreter(spec).step(t);
}

EvalResult eval(const Term& t, const LanguageSpec& spec, std::size_t fuel) { return Interpreter(spec).eval(t, fuel); }

// --- CK machine -----------------------------------------------------------------

namespace {

StepKind classify(const std::string& rule) {
  auto ends_with = [&](const std::string& s) { return rule.size() >= s.size() && rule.compare(rule.size() - s.size(), s.size(), s) == 0; };
  if (ends_with("-start")) return StepKind::MachineStart;
  if (ends_with("-rebuild")) return StepKind::MachineRebuild;
  if (rule.find("-order-") != std::string::npos) return StepKind::MachineOrder;
  return StepKind::MachineComputation;
}

}  // namespace

MachineConfig initial_config(const Term& t) { return {t, Term::constructor(kEmptyContinuation)}; }

Machine::Machine(const LanguageSpec& spec) : spec_(spec) {
  for (const auto& r : spec.rules) {
    const auto* m = std::get_if<MachineStep>(&r.conclusion);
    if (!m) continue;
    rules_.push_back({&r, head_of(m->lhs.focus), head_of(m->lhs.continuation), classify(r.name)});
  }
}

bool Machine::is_final(const MachineConfig& c) const {
  return c.continuation.is_constant(kEmptyContinuation) && is_value(c.focus, spec_);
}

std::optional<std::pair<MachineConfig, TraceStep>> Machine::step(const MachineConfig& c) const {
  std::string fh = head_of(c.focus), ch = head_of(c.continuation);
  for (const auto& e : rules_) {
    if (!e.focus_head.empty() && e.focus_head != fh) continue;
    if (!e.cont_head.empty() && e.cont_head != ch) continue;
    const auto& m = std::get<MachineStep>(e.rule->conclusion);
    auto s = match_pattern(m.lhs.focus, c.focus, spec_);
    if (!s) continue;
    s = match_pattern(m.lhs.continuation, c.continuation, spec_, std::move(*s));
    if (!s || !side_conditions_hold(*e.rule, *s, spec_)) continue;
    MachineConfig next{instantiate(m.rhs.focus, *s), instantiate(m.rhs.continuation, *s)};
    TraceStep ts{e.kind, e.rule->name, c, next};
    return std::make_pair(std::move(next), std::move(ts));
  }
  return std::nullopt;
}

MachineResult Machine::run(const MachineConfig& c, std::size_t fuel, bool record_trace) const {
  MachineResult r;
  r.config = c;
  while (true) {
    if (is_final(r.config)) {
      r.outcome = Outcome::Value;
      return r;
    }
    if (r.steps >= fuel) {
      r.outcome = Outcome::OutOfFuel;
      return r;
    }
    auto s = step(r.config);
    if (!s) {
      r.outcome = Outcome::Stuck;
      return r;
    }
    r.config = std::move(s->first);
    ++r.steps;
    if (s->second.kind == StepKind::MachineComputation) ++r.computation_steps;
    if (record_trace) r.trace.push_back(std::move(s->second));
  }
}

MachineResult ck_eval(const MachineConfig& config, const LanguageSpec& ck_spec, std::size_t fuel) {
  return Machine(ck_spec).run(config, fuel);
}

// --- typing ----------------------------------------------------------------------

const char* to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::NoRuleApplies: return "NoRuleApplies";
    case TypeErrorKind::SubtypeFailure: return "SubtypeFailure";
    case TypeErrorKind::NoJoin: return "NoJoin";
    case TypeErrorKind::UnboundVariable: return "UnboundVariable";
  }
  return "TypeError";
}

Typechecker::Typechecker(const LanguageSpec& spec) : spec_(spec), lattice_(spec) {
  const auto* vars = spec.variable_category();
  for (const auto& r : spec.rules) {
    const auto* ty = std::get_if<Typing>(&r.conclusion);
    if (!ty) continue;
    std::string head = head_of(ty->subject);
    if (!head.empty()) by_head_[head].push_back(&r);
    else if (vars && ty->subject.is_meta() && ty->subject.meta.category == vars->name) variable_rules_.push_back(&r);
    else other_rules_.push_back(&r);
  }
}

std::optional<Term> Typechecker::try_infer(const Term& t, const TypeEnv& env) const {
  try {
    return infer(t, env);
  } catch (const TypeError&) {
    return std::nullopt;
  }
}

Term Typechecker::infer(const Term& t, const TypeEnv& env) const {
  std::vector<const InferenceRule*> candidates;
  if (t.kind == TermKind::Variable) {
    candidates = variable_rules_;
  } else if (auto it = by_head_.find(head_of(t)); it != by_head_.end()) {
    candidates = it->second;
  }
  candidates.insert(candidates.end(), other_rules_.begin(), other_rules_.end());

  std::optional<TypeError> failure;
  for (const auto* r : candidates) {
    auto s = match_pattern(std::get<Typing>(r->conclusion).subject, t, spec_);
    if (!s) continue;
    try {
      return apply_rule(*r, *s, t, env);
    } catch (const TypeError& e) {
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  if (t.kind == TermKind::Variable && variable_rules_.empty())
    throw TypeError(TypeErrorKind::UnboundVariable, t, "no typing rule for variables");
  throw TypeError(TypeErrorKind::NoRuleApplies, t, "no typing rule applies to " + print_term(t, spec_));
}

Term Typechecker::apply_rule(const InferenceRule& r, const Substitution& s0, const Term& t, const TypeEnv& env) const {
  Substitution s = s0;
  auto fail = [&](TypeErrorKind kind, const std::string& msg) -> TypeError {
    return TypeError(kind, t, "rule '" + r.name + "': " + msg);
  };
  auto ground = [&](const Term& p, const char* what) {
    auto x = try_instantiate(p, s);
    if (!x) throw fail(TypeErrorKind::NoRuleApplies, std::string(what) + " is not determined");
    return *x;
  };
  auto show = [&](const Term& x) { return print_term(x, spec_); };

  for (const auto& premise : r.premises) {
    if (const auto* ty = std::get_if<Typing>(&premise)) {
      TypeEnv inner = env;
      for (const auto& [tok, pat] : ty->env.extensions) {
        auto var = s.find(tok);
        if (var == s.end() || var->second.kind != TermKind::Variable)
          throw fail(TypeErrorKind::NoRuleApplies, "environment variable '" + tok + "' is not bound");
        inner.emplace_back(var->second.name, ground(pat, "environment type"));
      }
      Term subject = ground(ty->subject, "premise subject");
      Term found = infer(subject, inner);
      auto m = match_pattern(ty->type, found, spec_, s);
      if (!m) {
        auto expected = try_instantiate(ty->type, s);
        throw fail(TypeErrorKind::NoRuleApplies, show(subject) + " has type " + show(found) + ", expected " +
                                                     (expected ? show(*expected) : show(ty->type)));
      }
      s = std::move(*m);
    } else if (const auto* lk = std::get_if<Lookup>(&premise)) {
      Term var = ground(lk->var, "looked-up variable");
      auto it = std::find_if(env.rbegin(), env.rend(), [&](const auto& b) { return b.first == var.name; });
      if (it == env.rend()) throw TypeError(TypeErrorKind::UnboundVariable, t, "unbound variable '" + var.name + "'");
      auto m = match_pattern(lk->type, it->second, spec_, s);
      if (!m) throw fail(TypeErrorKind::NoRuleApplies, "type of '" + var.name + "' does not fit");
      s = std::move(*m);
    } else if (const auto* st = std::get_if<Subtype>(&premise)) {
      Term a = ground(st->sub, "subtype operand"), b = ground(st->super, "subtype operand");
      if (!check_subtype(a, b, spec_, lattice_))
        throw fail(TypeErrorKind::SubtypeFailure, show(a) + " is not a subtype of " + show(b));
    } else if (const auto* eq = std::get_if<TypeEq>(&premise)) {
      auto a = try_instantiate(eq->left, s), b = try_instantiate(eq->right, s);
      std::optional<Substitution> m;
      if (a && b) {
        if (*a != *b) throw fail(TypeErrorKind::SubtypeFailure, show(*a) + " and " + show(*b) + " differ");
        continue;
      }
      if (a) m = match_pattern(eq->right, *a, spec_, s);
      else if (b) m = match_pattern(eq->left, *b, spec_, s);
      if (!m) throw fail(TypeErrorKind::NoRuleApplies, "equation cannot be solved");
      s = std::move(*m);
    } else if (const auto* j = std::get_if<Join>(&premise)) {
      Term acc = ground(j->operands.at(0), "join operand");
      for (std::size_t i = 1; i < j->operands.size(); ++i) {
        Term next = ground(j->operands[i], "join operand");
        auto r2 = join(acc, next, spec_, lattice_);
        if (!r2) throw fail(TypeErrorKind::NoJoin, "no join of " + show(acc) + " and " + show(next));
        acc = std::move(*r2);
      }
      auto m = match_pattern(j->result, acc, spec_, s);
      if (!m) throw fail(TypeErrorKind::NoRuleApplies, "join result " + show(acc) + " does not fit");
      s = std::move(*m);
    } else if (const auto* mt = std::get_if<Meet>(&premise)) {
      Term acc = ground(mt->operands.at(0), "meet operand");
      for (std::size_t i = 1; i < mt->operands.size(); ++i) {
        Term next = ground(mt->operands[i], "meet operand");
        auto r2 = meet(acc, next, spec_, lattice_);
        if (!r2) throw fail(TypeErrorKind::NoJoin, "no meet of " + show(acc) + " and " + show(next));
        acc = std::move(*r2);
      }
      auto m = match_pattern(mt->result, acc, spec_, s);
      if (!m) throw fail(TypeErrorKind::NoRuleApplies, "meet result " + show(acc) + " does not fit");
      s = std::move(*m);
    } else if (const auto* nv = std::get_if<NotValue>(&premise)) {
      if (is_value(ground(nv->term, "side condition"), spec_))
        throw fail(TypeErrorKind::NoRuleApplies, "side condition failed");
    } else {
      throw fail(TypeErrorKind::NoRuleApplies, "premise kind not supported in typing rules");
    }
  }
  return ground(std::get<Typing>(r.conclusion).type, "conclusion type");
}

Term typecheck(const Term& t, const LanguageSpec& spec) { return Typechecker(spec).infer(t); }

// --- generation ------------------------------------------------------------------

namespace {

std::size_t production_min(const Term& p, const std::map<std::string, std::size_t>& mins) {
  switch (p.kind) {
    case TermKind::Metavariable: {
      auto it = mins.find(p.meta.category);
      return it == mins.end() ? kInfinite : it->second;
    }
    case TermKind::Hole:
    case TermKind::Substitution: return kInfinite;
    default: {
      std::size_t n = 1;
      for (const auto& a : p.args) n = std::min(kInfinite, n + production_min(a, mins));
      return n;
    }
  }
}

std::map<std::string, std::size_t> category_minimums(const LanguageSpec& spec) {
  std::map<std::string, std::size_t> mins;
  for (const auto& c : spec.categories) mins[c.name] = c.identifiers ? 1 : kInfinite;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : spec.categories)
      for (const auto& p : c.productions) {
        std::size_t m = production_min(p, mins);
        if (m < mins[c.name]) {
          mins[c.name] = m;
          changed = true;
        }
      }
  }
  return mins;
}

std::vector<std::string> binder_pool(const LanguageSpec& spec) {
  auto constants = spec.constants();
  std::vector<std::string> out;
  for (const char* n : {"x", "y", "z"})
    if (!constants.count(n)) out.push_back(n);
  return out;
}

}  // namespace

TermGenerator::TermGenerator(const LanguageSpec& spec, std::uint64_t seed)
    : binder_names_(binder_pool(spec)), spec_(spec), rng_(seed), min_category_(category_minimums(spec)) {}

std::size_t TermGenerator::min_size(const Term& production) const { return production_min(production, min_category_); }

std::size_t TermGenerator::pick(std::size_t lo, std::size_t hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
}

std::optional<Term> TermGenerator::generate(const std::string& category, std::size_t max_size) {
  std::vector<std::string> scope;
  for (int attempt = 0; attempt < 16; ++attempt)
    if (auto t = gen_category(category, pick(1, max_size), scope)) return t;
  return std::nullopt;
}

std::optional<Term> TermGenerator::generate_sized(const std::string& category, std::size_t size) {
  std::vector<std::string> scope;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto t = gen_category(category, size, scope);
    if (t && t->size() == size) return t;
  }
  return std::nullopt;
}

std::optional<Term> TermGenerator::gen_category(const std::string& category, std::size_t budget,
                                                std::vector<std::string>& scope) {
  const auto* c = spec_.find_category(category);
  if (!c || budget == 0) return std::nullopt;
  // Compound productions are weighted up so that the budget tends to get used.
  std::vector<const Term*> options;
  std::vector<double> weights;
  for (const auto& p : c->productions) {
    if (min_size(p) > budget) continue;
    options.push_back(&p);
    bool compound = !p.args.empty() || p.kind == TermKind::Metavariable;
    weights.push_back(compound && budget > 1 ? 3.0 : 1.0);
  }
  if (c->identifiers && !scope.empty()) {
    options.push_back(nullptr);
    weights.push_back(1.0);
  }
  if (options.empty()) return std::nullopt;
  std::discrete_distribution<std::size_t> choose(weights.begin(), weights.end());
  for (int attempt = 0; attempt < 4; ++attempt) {
    const Term* p = options[choose(rng_)];
    if (!p) return Term::variable(scope[pick(0, scope.size() - 1)]);
    if (auto t = gen_production(*p, budget, scope)) return t;
  }
  return std::nullopt;
}

std::optional<Term> TermGenerator::gen_production(const Term& p, std::size_t budget, std::vector<std::string>& scope) {
  switch (p.kind) {
    case TermKind::Metavariable: return gen_category(p.meta.category, budget, scope);
    case TermKind::Constructor:
    case TermKind::Binder: {
      if (min_size(p) > budget) return std::nullopt;
      Term out = p;
      if (p.kind == TermKind::Binder) {
        if (binder_names_.empty()) return std::nullopt;
        out.bound = binder_names_[pick(0, binder_names_.size() - 1)];
        scope.push_back(out.bound);
      }
      // Each argument gets its minimum plus a random share of the slack.
      std::vector<std::size_t> share(p.args.size());
      std::size_t slack = budget - min_size(p);
      for (std::size_t i = 0; i < p.args.size(); ++i) share[i] = min_size(p.args[i]);
      if (!share.empty())
        for (std::size_t u = 0; u < slack; ++u) ++share[pick(0, share.size() - 1)];
      bool ok = true;
      for (std::size_t i = 0; i < p.args.size() && ok; ++i) {
        auto sub = gen_production(p.args[i], share[i], scope);
        if (!sub) ok = false;
        else out.args[i] = std::move(*sub);
      }
      if (p.kind == TermKind::Binder) scope.pop_back();
      if (!ok) return std::nullopt;
      return out;
    }
    case TermKind::Variable: return p;
    default: return std::nullopt;
  }
}

namespace {

class Enumerator {
 public:
  explicit Enumerator(const LanguageSpec& spec) : spec_(spec), mins_(category_minimums(spec)) {
    const auto* v = spec.variable_category();
    base_ = v ? v->metavariable : "x";
  }

  std::vector<Term> category(const std::string& name, std::size_t n) {
    std::vector<Term> out;
    const auto* c = spec_.find_category(name);
    if (!c || n == 0) return out;
    if (c->identifiers && n == 1)
      for (const auto& v : scope_) out.push_back(Term::variable(v));
    for (const auto& p : c->productions) {
      auto more = production(p, n);
      out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return out;
  }

 private:
  std::vector<Term> production(const Term& p, std::size_t n) {
    switch (p.kind) {
      case TermKind::Metavariable: return category(p.meta.category, n);
      case TermKind::Constructor:
      case TermKind::Binder: {
        if (production_min(p, mins_) > n) return {};
        Term shell = p;
        if (p.kind == TermKind::Binder) {
          shell.bound = base_ + std::to_string(scope_.size() + 1);
          scope_.push_back(shell.bound);
        }
        std::vector<Term> out;
        fill(shell, 0, n - 1, out);
        if (p.kind == TermKind::Binder) scope_.pop_back();
        return out;
      }
      default: return {};
    }
  }

  // Chooses sizes for the arguments from index i on, summing to `remaining`.
  void fill(Term& shell, std::size_t i, std::size_t remaining, std::vector<Term>& out) {
    if (i == shell.args.size()) {
      if (remaining == 0) out.push_back(shell);
      return;
    }
    std::size_t later = 0;
    for (std::size_t j = i + 1; j < shell.args.size(); ++j) later += production_min(shell.args[j], mins_);
    Term pattern = shell.args[i];
    for (std::size_t k = production_min(pattern, mins_); k + later <= remaining; ++k) {
      for (auto& a : production(pattern, k)) {
        shell.args[i] = std::move(a);
        fill(shell, i + 1, remaining - k, out);
      }
    }
    shell.args[i] = std::move(pattern);
  }

  const LanguageSpec& spec_;
  std::map<std::string, std::size_t> mins_;
  std::string base_;
  std::vector<std::string> scope_;
};

}  // namespace

std::vector<Term> enumerate_terms(const LanguageSpec& spec, const std::string& category, std::size_t size) {
  return Enumerator(spec).category(category, size);
}

}  // namespace langx

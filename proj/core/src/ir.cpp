#include "langx/ir.hpp"

#include <algorithm>
#include <cctype>

namespace langx {

Term Term::metavariable(Metavariable m) {
  Term t;
  t.kind = TermKind::Metavariable;
  t.meta = std::move(m);
  return t;
}

Term Term::constructor(std::string name, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Constructor;
  t.name = std::move(name);
  t.args = std::move(args);
  return t;
}

Term Term::binder(std::string name, std::string bound, std::vector<Term> args) {
  Term t;
  t.kind = TermKind::Binder;
  t.name = std::move(name);
  t.bound = std::move(bound);
  t.args = std::move(args);
  return t;
}

Term Term::variable(std::string name) {
  Term t;
  t.kind = TermKind::Variable;
  t.name = std::move(name);
  return t;
}

Term Term::hole() { return Term{}; }

Term Term::substitution(Term body, Term value, Term var) {
  Term t;
  t.kind = TermKind::Substitution;
  t.args = {std::move(body), std::move(value), std::move(var)};
  return t;
}

std::size_t Term::size() const {
  std::size_t n = 1;
  for (const auto& a : args) n += a.size();
  return n;
}

const char* to_string(Variance v) {
  switch (v) {
    case Variance::Covariant: return "co";
    case Variance::Contravariant: return "contra";
    case Variance::Invariant: return "inv";
  }
  return "?";
}

const GrammarCategory* LanguageSpec::find_category(std::string_view n) const {
  for (const auto& c : categories)
    if (c.name == n) return &c;
  return nullptr;
}

const GrammarCategory* LanguageSpec::variable_category() const {
  for (const auto& c : categories)
    if (c.identifiers) return &c;
  return nullptr;
}

namespace {

void collect_constants(const Term& t, std::set<std::string>& out) {
  if (t.is_constant()) out.insert(t.name);
  for (const auto& a : t.args) collect_constants(a, out);
}

bool is_suffix(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '\''; });
}

}  // namespace

std::set<std::string> LanguageSpec::constants() const {
  std::set<std::string> out;
  for (const auto& c : categories)
    for (const auto& p : c.productions) collect_constants(p, out);
  return out;
}

std::vector<std::string> LanguageSpec::base_types() const {
  std::vector<std::string> out;
  if (const auto* ty = find_category(kTypeCategory))
    for (const auto& p : ty->productions)
      if (p.is_constant()) out.push_back(p.name);
  return out;
}

std::optional<Metavariable> try_resolve_metavariable(std::string_view token, const LanguageSpec& spec) {
  const GrammarCategory* best = nullptr;
  for (const auto& c : spec.categories) {
    const auto& mv = c.metavariable;
    if (mv.empty() || mv.size() > token.size() || token.substr(0, mv.size()) != mv) continue;
    if (!is_suffix(token.substr(mv.size()))) continue;
    if (!best || mv.size() > best->metavariable.size()) best = &c;
  }
  if (!best) return std::nullopt;
  return Metavariable{best->metavariable, std::string(token.substr(best->metavariable.size())), best->name};
}

Metavariable resolve_metavariable(std::string_view token, const LanguageSpec& spec) {
  if (auto m = try_resolve_metavariable(token, spec)) return *m;
  throw UnknownMetavariable(std::string(token));
}

Metavariable fresh(const Metavariable& base, const std::set<std::string>& used) {
  for (int i = 1;; ++i) {
    Metavariable m{base.base, base.suffix + std::to_string(i), base.category};
    if (!used.count(m.token())) return m;
  }
}

const VarianceTable& default_variance() {
  using V = Variance;
  static const VarianceTable table{
      {"arrow", {V::Contravariant, V::Covariant}},
      {"Ref", {V::Invariant}},
      {"List", {V::Covariant}},
      {"prod", {V::Covariant, V::Covariant}},
      {"sum", {V::Covariant, V::Covariant}},
  };
  return table;
}

const std::vector<Variance>* variance_of(const LanguageSpec& spec, const std::string& constructor) {
  if (auto it = spec.variance.find(constructor); it != spec.variance.end()) return &it->second;
  const auto& d = default_variance();
  if (auto it = d.find(constructor); it != d.end()) return &it->second;
  return nullptr;
}

void for_each_metavariable(const Term& t, const std::function<void(const Metavariable&)>& fn) {
  if (t.is_meta()) fn(t.meta);
  for (const auto& a : t.args) for_each_metavariable(a, fn);
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Visits the terms of a formula in textual order.
void for_each_term(const Formula& f, const std::function<void(const Term&)>& fn) {
  std::visit(overloaded{
                 [&](const Typing& x) {
                   for (const auto& [v, ty] : x.env.extensions) fn(ty);
                   fn(x.subject);
                   fn(x.type);
                 },
                 [&](const Reduction& x) { fn(x.lhs); fn(x.rhs); },
                 [&](const MachineStep& x) {
                   fn(x.lhs.focus);
                   fn(x.lhs.continuation);
                   fn(x.rhs.focus);
                   fn(x.rhs.continuation);
                 },
                 [&](const Subtype& x) { fn(x.sub); fn(x.super); },
                 [&](const TypeEq& x) { fn(x.left); fn(x.right); },
                 [&](const Join& x) {
                   fn(x.result);
                   for (const auto& o : x.operands) fn(o);
                 },
                 [&](const Meet& x) {
                   fn(x.result);
                   for (const auto& o : x.operands) fn(o);
                 },
                 [&](const Lookup& x) { fn(x.var); fn(x.type); },
                 [&](const NotValue& x) { fn(x.term); },
             },
             f);
}

void term_tokens(const Term& t, const std::map<std::string, int>& binders, std::vector<std::string>& out) {
  switch (t.kind) {
    case TermKind::Metavariable: out.push_back(t.meta.token()); return;
    case TermKind::Binder: {
      auto it = binders.find(t.name);
      std::size_t pos = it == binders.end() ? 0 : static_cast<std::size_t>(it->second - 1);
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i == pos) out.push_back(t.bound);
        term_tokens(t.args[i], binders, out);
      }
      if (pos >= t.args.size()) out.push_back(t.bound);
      return;
    }
    default:
      for (const auto& a : t.args) term_tokens(a, binders, out);
  }
}

void formula_tokens(const Formula& f, const std::map<std::string, int>& binders, std::vector<std::string>& out) {
  if (const auto* ty = std::get_if<Typing>(&f)) {
    for (const auto& [v, t] : ty->env.extensions) {
      out.push_back(v);
      term_tokens(t, binders, out);
    }
    term_tokens(ty->subject, binders, out);
    term_tokens(ty->type, binders, out);
    return;
  }
  for_each_term(f, [&](const Term& t) { term_tokens(t, binders, out); });
}

std::vector<std::string> ordered_tokens(const InferenceRule& rule, const std::map<std::string, int>& binders) {
  std::vector<std::string> all;
  for (const auto& p : rule.premises) formula_tokens(p, binders, all);
  formula_tokens(rule.conclusion, binders, all);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& t : all)
    if (seen.insert(t).second) out.push_back(std::move(t));
  return out;
}

}  // namespace

void for_each_metavariable(const Formula& f, const std::function<void(const Metavariable&)>& fn) {
  for_each_term(f, [&](const Term& t) { for_each_metavariable(t, fn); });
}

std::vector<std::string> metavariable_tokens(const InferenceRule& rule) { return ordered_tokens(rule, {}); }

std::set<std::string> used_tokens(const InferenceRule& rule) {
  auto v = ordered_tokens(rule, {});
  return {v.begin(), v.end()};
}

Term rename(const Term& t, const Renaming& r) {
  Term out = t;
  if (t.is_meta()) {
    if (auto it = r.find(t.meta.token()); it != r.end()) out.meta = it->second;
    return out;
  }
  if (t.kind == TermKind::Binder)
    if (auto it = r.find(t.bound); it != r.end()) out.bound = it->second.token();
  for (auto& a : out.args) a = rename(a, r);
  return out;
}

Formula rename(const Formula& f, const Renaming& r) {
  auto rn = [&](const Term& t) { return rename(t, r); };
  auto rn_all = [&](std::vector<Term> ts) {
    for (auto& t : ts) t = rename(t, r);
    return ts;
  };
  return std::visit(
      overloaded{
          [&](const Typing& x) -> Formula {
            Typing y = x;
            for (auto& [v, ty] : y.env.extensions) {
              if (auto it = r.find(v); it != r.end()) v = it->second.token();
              ty = rn(ty);
            }
            y.subject = rn(x.subject);
            y.type = rn(x.type);
            return y;
          },
          [&](const Reduction& x) -> Formula { return Reduction{rn(x.lhs), rn(x.rhs)}; },
          [&](const MachineStep& x) -> Formula {
            return MachineStep{{rn(x.lhs.focus), rn(x.lhs.continuation)}, {rn(x.rhs.focus), rn(x.rhs.continuation)}};
          },
          [&](const Subtype& x) -> Formula { return Subtype{rn(x.sub), rn(x.super)}; },
          [&](const TypeEq& x) -> Formula { return TypeEq{rn(x.left), rn(x.right)}; },
          [&](const Join& x) -> Formula { return Join{rn(x.result), rn_all(x.operands)}; },
          [&](const Meet& x) -> Formula { return Meet{rn(x.result), rn_all(x.operands)}; },
          [&](const Lookup& x) -> Formula { return Lookup{rn(x.var), rn(x.type), x.env}; },
          [&](const NotValue& x) -> Formula { return NotValue{rn(x.term)}; },
      },
      f);
}

InferenceRule rename(const InferenceRule& rule, const Renaming& r) {
  InferenceRule out{rule.name, {}, rename(rule.conclusion, r)};
  for (const auto& p : rule.premises) out.premises.push_back(rename(p, r));
  return out;
}

InferenceRule canonicalize(const InferenceRule& rule, const LanguageSpec& spec) {
  std::map<std::string, int> counters;
  Renaming r;
  for (const auto& tok : ordered_tokens(rule, spec.binders)) {
    auto m = try_resolve_metavariable(tok, spec);
    if (!m) continue;
    int n = ++counters[m->base];
    r[tok] = Metavariable{m->base, std::to_string(n), m->category};
  }
  return rename(rule, r);
}

LanguageSpec canonicalize(const LanguageSpec& spec) {
  LanguageSpec out = spec;
  for (auto& r : out.rules) r = canonicalize(r, spec);
  return out;
}

const Term* typing_output(const Formula& f) {
  if (const auto* t = std::get_if<Typing>(&f)) return &t->type;
  return nullptr;
}

bool is_typing_rule(const InferenceRule& r) { return std::holds_alternative<Typing>(r.conclusion); }
bool is_reduction_rule(const InferenceRule& r) { return std::holds_alternative<Reduction>(r.conclusion); }
bool is_machine_rule(const InferenceRule& r) { return std::holds_alternative<MachineStep>(r.conclusion); }

std::string head_of(const Term& t) {
  if (t.kind == TermKind::Constructor || t.kind == TermKind::Binder) return t.name;
  return {};
}

Term plug(const Term& context, const Term& filler) {
  if (context.kind == TermKind::Hole) return filler;
  Term out = context;
  for (auto& a : out.args) a = plug(a, filler);
  return out;
}

}  // namespace langx

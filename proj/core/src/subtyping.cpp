#include "langx/subtyping.hpp"

#include <algorithm>
#include <map>

namespace langx {

namespace {

bool is_type_meta(const Term& t) { return t.is_meta() && t.meta.category == kTypeCategory; }

void count_type_metas(const Term& t, std::map<std::string, int>& counts, std::vector<Metavariable>& order) {
  if (is_type_meta(t)) {
    if (counts[t.meta.token()]++ == 0) order.push_back(t.meta);
    return;
  }
  for (const auto& a : t.args) count_type_metas(a, counts, order);
}

Term split_term(const Term& t, const std::set<std::string>& multi, std::set<std::string>& used,
                std::map<std::string, std::vector<Metavariable>>& assigned) {
  if (is_type_meta(t)) {
    if (!multi.count(t.meta.token())) return t;
    Metavariable m = fresh(t.meta, used);
    used.insert(m.token());
    assigned[t.meta.token()].push_back(m);
    return Term::metavariable(m);
  }
  Term out = t;
  for (auto& a : out.args) a = split_term(a, multi, used, assigned);
  return out;
}

// Tokens of the rule outside the output types of its typing premises.
std::set<std::string> tokens_outside_outputs(const InferenceRule& rule) {
  std::set<std::string> out;
  auto add = [&](const Metavariable& m) { out.insert(m.token()); };
  for (const auto& p : rule.premises) {
    if (const auto* ty = std::get_if<Typing>(&p)) {
      for (const auto& [v, t] : ty->env.extensions) for_each_metavariable(t, add);
      for_each_metavariable(ty->subject, add);
    } else {
      for_each_metavariable(p, add);
    }
  }
  for_each_metavariable(rule.conclusion, add);
  return out;
}

Term type_var(const std::string& base, const std::string& suffix) {
  return Term::metavariable(Metavariable{base, suffix, kTypeCategory});
}

struct TypeConstructor {
  std::string name;
  std::size_t arity;
  std::vector<Variance> marks;
};

std::vector<TypeConstructor> type_constructors(const LanguageSpec& spec) {
  std::vector<TypeConstructor> out;
  const auto* ty = spec.find_category(kTypeCategory);
  if (!ty) return out;
  for (const auto& p : ty->productions) {
    if (p.kind != TermKind::Constructor || p.args.empty()) continue;
    if (std::any_of(out.begin(), out.end(), [&](const TypeConstructor& c) { return c.name == p.name; })) continue;
    const auto* marks = variance_of(spec, p.name);
    if (!marks) throw MissingVariance(p.name);
    out.push_back({p.name, p.args.size(), *marks});
  }
  return out;
}

std::string type_base(const LanguageSpec& spec) {
  const auto* ty = spec.find_category(kTypeCategory);
  return ty ? ty->metavariable : "T";
}

}  // namespace

SplitResult split_equal_types(const std::vector<Formula>& premises, const std::set<std::string>& used) {
  std::map<std::string, int> counts;
  std::vector<Metavariable> order;
  for (const auto& p : premises)
    if (const Term* ty = typing_output(p)) count_type_metas(*ty, counts, order);

  std::set<std::string> multi;
  for (const auto& [tok, n] : counts)
    if (n >= 2) multi.insert(tok);

  std::set<std::string> taken = used;
  std::map<std::string, std::vector<Metavariable>> assigned;
  SplitResult result;
  for (const auto& p : premises) {
    if (const auto* ty = std::get_if<Typing>(&p)) {
      Typing t = *ty;
      t.type = split_term(ty->type, multi, taken, assigned);
      result.premises.emplace_back(std::move(t));
    } else {
      result.premises.push_back(p);
    }
  }
  for (const auto& m : order)
    if (multi.count(m.token())) result.varmap.push_back({m, assigned[m.token()]});
  return result;
}

SplitResult split_equal_types(const std::vector<Formula>& premises) {
  std::set<std::string> used;
  for (const auto& p : premises) for_each_metavariable(p, [&](const Metavariable& m) { used.insert(m.token()); });
  return split_equal_types(premises, used);
}

const char* to_string(SubtypingReason r) {
  return r == SubtypingReason::MultipleContravariant ? "MultipleContravariant" : "MixedUnsupported";
}

SubtypingError::SubtypingError(std::string rule, Metavariable variable, SubtypingReason reason,
                               std::vector<Occurrence> occurrences)
    : std::runtime_error("rule '" + rule + "': type variable '" + variable.token() +
                         "' cannot be given subtyping (" + to_string(reason) + ")"),
      rule_(std::move(rule)),
      variable_(std::move(variable)),
      reason_(reason),
      occurrences_(std::move(occurrences)) {}

InferenceRule add_subtyping(const InferenceRule& rule, const LanguageSpec& spec) {
  if (!is_typing_rule(rule)) return rule;

  auto split = split_equal_types(rule.premises, used_tokens(rule));
  if (split.varmap.empty()) return rule;

  const auto elsewhere = tokens_outside_outputs(rule);
  std::vector<Formula> generated;
  Renaming back;

  for (const auto& [orig, members] : split.varmap) {
    std::vector<Variance> marks;
    for (const auto& m : members) marks.push_back(collect_occurrences(m, split.premises, spec.variance).at(0).variance);
    auto count = [&](Variance v) { return std::count(marks.begin(), marks.end(), v); };
    auto as_term = [](const Metavariable& m) { return Term::metavariable(m); };

    if (count(Variance::Invariant) > 0) {
      for (std::size_t i = 0; i + 1 < members.size(); ++i)
        generated.emplace_back(TypeEq{as_term(members[i]), as_term(members[i + 1])});
      if (elsewhere.count(orig.token())) back[members.front().token()] = orig;
    } else if (count(Variance::Contravariant) == 1) {
      std::size_t c = static_cast<std::size_t>(std::find(marks.begin(), marks.end(), Variance::Contravariant) - marks.begin());
      for (std::size_t i = 0; i < members.size(); ++i)
        if (i != c) generated.emplace_back(Subtype{as_term(members[i]), as_term(members[c])});
      if (elsewhere.count(orig.token())) back[members[c].token()] = orig;
    } else if (count(Variance::Contravariant) == 0) {
      std::vector<Term> ops;
      for (const auto& m : members) ops.push_back(as_term(m));
      generated.emplace_back(Join{as_term(orig), std::move(ops)});
    } else {
      throw SubtypingError(rule.name, orig, SubtypingReason::MultipleContravariant,
                           collect_occurrences(orig, rule.premises, spec.variance));
    }
  }

  InferenceRule out{rule.name, std::move(split.premises), rule.conclusion};
  for (auto& g : generated) out.premises.push_back(std::move(g));
  return back.empty() ? out : rename(out, back);
}

LanguageSpec add_subtyping(const LanguageSpec& spec) {
  LanguageSpec out = spec;
  for (auto& r : out.rules) r = add_subtyping(r, spec);
  return out;
}

std::vector<InferenceRule> generate_subtype_relation(const LanguageSpec& spec) {
  std::vector<InferenceRule> out;
  const std::string T = type_base(spec);
  for (const auto& b : spec.base_types())
    out.push_back({"sub-refl-" + b, {}, Subtype{Term::constructor(b), Term::constructor(b)}});
  for (const auto& [a, b] : spec.base_subtypes)
    out.push_back({"sub-" + a + "-" + b, {}, Subtype{Term::constructor(a), Term::constructor(b)}});
  for (const auto& c : type_constructors(spec)) {
    InferenceRule r{"sub-" + c.name, {}, {}};
    std::vector<Term> lhs, rhs;
    for (std::size_t i = 0; i < c.arity; ++i) {
      auto n = std::to_string(i + 1);
      Term a = type_var(T, n), b = type_var(T, n + "'");
      switch (c.marks[i]) {
        case Variance::Covariant: r.premises.emplace_back(Subtype{a, b}); break;
        case Variance::Contravariant: r.premises.emplace_back(Subtype{b, a}); break;
        case Variance::Invariant: r.premises.emplace_back(TypeEq{a, b}); break;
      }
      lhs.push_back(a);
      rhs.push_back(b);
    }
    r.conclusion = Subtype{Term::constructor(c.name, lhs), Term::constructor(c.name, rhs)};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InferenceRule> generate_join_relation(const LanguageSpec& spec) {
  std::vector<InferenceRule> out;
  const std::string T = type_base(spec);
  BaseLattice lattice(spec);
  auto bases = spec.base_types();
  out.push_back({"join-refl", {}, Join{type_var(T, ""), {type_var(T, ""), type_var(T, "")}}});
  out.push_back({"meet-refl", {}, Meet{type_var(T, ""), {type_var(T, ""), type_var(T, "")}}});
  for (std::size_t i = 0; i < bases.size(); ++i) {
    for (std::size_t j = i + 1; j < bases.size(); ++j) {
      Term a = Term::constructor(bases[i]), b = Term::constructor(bases[j]);
      if (auto l = lattice.lub(bases[i], bases[j]))
        out.push_back({"join-" + bases[i] + "-" + bases[j], {}, Join{Term::constructor(*l), {a, b}}});
      if (auto g = lattice.glb(bases[i], bases[j]))
        out.push_back({"meet-" + bases[i] + "-" + bases[j], {}, Meet{Term::constructor(*g), {a, b}}});
    }
  }
  for (const auto& c : type_constructors(spec)) {
    for (bool is_join : {true, false}) {
      InferenceRule r{(is_join ? "join-" : "meet-") + c.name, {}, {}};
      std::vector<Term> lhs, rhs, res;
      for (std::size_t i = 0; i < c.arity; ++i) {
        auto n = std::to_string(i + 1);
        Term a = type_var(T, n), b = type_var(T, n + "'"), x = type_var(T, n + "''");
        lhs.push_back(a);
        rhs.push_back(b);
        if (c.marks[i] == Variance::Invariant) {
          r.premises.emplace_back(TypeEq{a, b});
          res.push_back(a);
          continue;
        }
        bool same = (c.marks[i] == Variance::Covariant) == is_join;
        if (same) r.premises.emplace_back(Join{x, {a, b}});
        else r.premises.emplace_back(Meet{x, {a, b}});
        res.push_back(x);
      }
      Term result = Term::constructor(c.name, res);
      std::vector<Term> ops{Term::constructor(c.name, lhs), Term::constructor(c.name, rhs)};
      if (is_join) r.conclusion = Join{result, ops};
      else r.conclusion = Meet{result, ops};
      out.push_back(std::move(r));
    }
  }
  return out;
}

// --- lattice and structural relations --------------------------------------

BaseLattice::BaseLattice(const LanguageSpec& spec) {
  for (const auto& b : spec.base_types()) {
    bases_.insert(b);
    leq_.emplace(b, b);
  }
  for (const auto& [a, b] : spec.base_subtypes) leq_.emplace(a, b);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<std::string, std::string>> add;
    for (const auto& [a, b] : leq_)
      for (const auto& [c, d] : leq_)
        if (b == c && !leq_.count({a, d})) add.emplace_back(a, d);
    for (auto& p : add) changed |= leq_.insert(std::move(p)).second;
  }
}

bool BaseLattice::leq(const std::string& a, const std::string& b) const { return a == b || leq_.count({a, b}); }

std::optional<std::string> BaseLattice::lub(const std::string& a, const std::string& b) const {
  std::vector<std::string> upper;
  for (const auto& c : bases_)
    if (leq(a, c) && leq(b, c)) upper.push_back(c);
  for (const auto& c : upper)
    if (std::all_of(upper.begin(), upper.end(), [&](const std::string& d) { return leq(c, d); })) return c;
  return std::nullopt;
}

std::optional<std::string> BaseLattice::glb(const std::string& a, const std::string& b) const {
  std::vector<std::string> lower;
  for (const auto& c : bases_)
    if (leq(c, a) && leq(c, b)) lower.push_back(c);
  for (const auto& c : lower)
    if (std::all_of(lower.begin(), lower.end(), [&](const std::string& d) { return leq(d, c); })) return c;
  return std::nullopt;
}

bool check_subtype(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice) {
  if (t1.is_constant() && t2.is_constant() && lattice.is_base(t1.name) && lattice.is_base(t2.name))
    return lattice.leq(t1.name, t2.name);
  if (t1.kind == TermKind::Constructor && t2.kind == TermKind::Constructor && t1.name == t2.name &&
      t1.args.size() == t2.args.size() && !t1.args.empty()) {
    const auto* marks = variance_of(spec, t1.name);
    if (!marks || marks->size() != t1.args.size()) return t1 == t2;
    for (std::size_t i = 0; i < t1.args.size(); ++i) {
      bool ok = false;
      switch ((*marks)[i]) {
        case Variance::Covariant: ok = check_subtype(t1.args[i], t2.args[i], spec, lattice); break;
        case Variance::Contravariant: ok = check_subtype(t2.args[i], t1.args[i], spec, lattice); break;
        case Variance::Invariant: ok = t1.args[i] == t2.args[i]; break;
      }
      if (!ok) return false;
    }
    return true;
  }
  return t1 == t2;
}

bool check_subtype(const Term& t1, const Term& t2, const LanguageSpec& spec) {
  return check_subtype(t1, t2, spec, BaseLattice(spec));
}

namespace {

std::optional<Term> bound(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice,
                          bool upper) {
  if (t1.is_constant() && t2.is_constant() && lattice.is_base(t1.name) && lattice.is_base(t2.name)) {
    auto r = upper ? lattice.lub(t1.name, t2.name) : lattice.glb(t1.name, t2.name);
    if (!r) return std::nullopt;
    return Term::constructor(*r);
  }
  if (t1.kind == TermKind::Constructor && t2.kind == TermKind::Constructor && t1.name == t2.name &&
      t1.args.size() == t2.args.size() && !t1.args.empty()) {
    const auto* marks = variance_of(spec, t1.name);
    if (!marks || marks->size() != t1.args.size()) {
      if (t1 == t2) return t1;
      return std::nullopt;
    }
    Term out = t1;
    for (std::size_t i = 0; i < t1.args.size(); ++i) {
      std::optional<Term> a;
      switch ((*marks)[i]) {
        case Variance::Covariant: a = bound(t1.args[i], t2.args[i], spec, lattice, upper); break;
        case Variance::Contravariant: a = bound(t1.args[i], t2.args[i], spec, lattice, !upper); break;
        case Variance::Invariant:
          if (t1.args[i] == t2.args[i]) a = t1.args[i];
          break;
      }
      if (!a) return std::nullopt;
      out.args[i] = std::move(*a);
    }
    return out;
  }
  if (t1 == t2) return t1;
  return std::nullopt;
}

}  // namespace

std::optional<Term> join(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice) {
  return bound(t1, t2, spec, lattice, true);
}

std::optional<Term> meet(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice) {
  return bound(t1, t2, spec, lattice, false);
}

}  // namespace langx

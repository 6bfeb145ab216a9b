#pragma once

// Independent oracles used by property tests and the acceptance suite.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "langx/ir.hpp"
#include "langx/subtyping.hpp"
#include "langx/variance.hpp"

namespace langx::test {

/// Decides t1 <: t2 by backward search over the rules produced by
/// generate_subtype_relation, treating them purely as data. It shares no
/// code with check_subtype.
class RuleSubtypeOracle {
 public:
  explicit RuleSubtypeOracle(const LanguageSpec& spec) : rules_(generate_subtype_relation(spec)) {}

  bool derivable(const Term& sub, const Term& super) const {
    for (const auto& r : rules_) {
      const auto* c = std::get_if<Subtype>(&r.conclusion);
      if (!c) continue;
      std::map<std::string, Term> s;
      if (!bind(c->sub, sub, s) || !bind(c->super, super, s)) continue;
      bool ok = true;
      for (const auto& p : r.premises) {
        if (const auto* st = std::get_if<Subtype>(&p)) ok = derivable(inst(st->sub, s), inst(st->super, s));
        else if (const auto* eq = std::get_if<TypeEq>(&p)) ok = inst(eq->left, s) == inst(eq->right, s);
        else ok = false;
        if (!ok) break;
      }
      if (ok) return true;
    }
    return false;
  }

  std::size_t rule_count() const { return rules_.size(); }

 private:
  static bool bind(const Term& pat, const Term& t, std::map<std::string, Term>& s) {
    if (pat.kind == TermKind::Metavariable) {
      auto [it, fresh] = s.emplace(pat.meta.token(), t);
      return fresh || it->second == t;
    }
    if (pat.kind != t.kind || pat.name != t.name || pat.args.size() != t.args.size()) return false;
    for (std::size_t i = 0; i < pat.args.size(); ++i)
      if (!bind(pat.args[i], t.args[i], s)) return false;
    return true;
  }

  static Term inst(const Term& pat, const std::map<std::string, Term>& s) {
    if (pat.kind == TermKind::Metavariable) return s.at(pat.meta.token());
    Term out = pat;
    for (auto& a : out.args) a = inst(a, s);
    return out;
  }

  std::vector<InferenceRule> rules_;
};

/// Type constructors with their arities, as declared by a Type category.
inline std::vector<std::pair<std::string, std::size_t>> type_constructors(const LanguageSpec& spec) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& p : spec.find_category(kTypeCategory)->productions)
    if (p.kind == TermKind::Constructor && !p.args.empty()) out.emplace_back(p.name, p.args.size());
  return out;
}

/// Every type term of depth at most `depth` built from `leaves` and `ctors`.
inline std::vector<Term> types_up_to(std::size_t depth, const std::vector<Term>& leaves,
                                     const std::vector<std::pair<std::string, std::size_t>>& ctors) {
  std::vector<Term> level = leaves;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<Term> next = leaves;
    for (const auto& [name, arity] : ctors) {
      std::vector<std::size_t> idx(arity, 0);
      while (true) {
        std::vector<Term> args;
        for (auto i : idx) args.push_back(level[i]);
        next.push_back(Term::constructor(name, std::move(args)));
        std::size_t k = 0;
        while (k < arity && ++idx[k] == level.size()) idx[k++] = 0;
        if (k == arity) break;
      }
    }
    level = std::move(next);
  }
  return level;
}

inline std::size_t count_meta(const Term& t) {
  std::size_t n = t.kind == TermKind::Metavariable ? 1 : 0;
  for (const auto& a : t.args) n += count_meta(a);
  return n;
}

inline Term replace_meta(const Term& t, const Term& with) {
  if (t.kind == TermKind::Metavariable) return with;
  Term out = t;
  for (auto& a : out.args) a = replace_meta(a, with);
  return out;
}

/// Variance of the single metavariable of `t`, read off the subtype relation:
/// covariant iff t[lo] <: t[hi], contravariant iff t[hi] <: t[lo], invariant
/// when neither holds.
inline Variance semantic_variance(const Term& t, const Term& lo, const Term& hi, const RuleSubtypeOracle& oracle) {
  Term a = replace_meta(t, lo), b = replace_meta(t, hi);
  bool up = oracle.derivable(a, b), down = oracle.derivable(b, a);
  if (up && !down) return Variance::Covariant;
  if (down && !up) return Variance::Contravariant;
  return Variance::Invariant;
}

}  // namespace langx::test

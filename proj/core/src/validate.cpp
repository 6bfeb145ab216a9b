#include <algorithm>
#include <map>

#include "langx/ir.hpp"

namespace langx {

namespace {

class Validator {
 public:
  explicit Validator(const LanguageSpec& spec) : spec_(spec) {}

  std::vector<Diagnostic> run() {
    check_categories();
    check_binders();
    check_arities();
    check_variance();
    check_context();
    check_values();
    check_lattice();
    check_rules();
    return std::move(out_);
  }

 private:
  void report(std::string kind, std::string rule, std::string category, std::string message) {
    out_.push_back({std::move(kind), std::move(rule), std::move(category), std::move(message)});
  }

  void check_categories() {
    std::set<std::string> names, metas;
    for (const auto& c : spec_.categories) {
      if (!names.insert(c.name).second)
        report("DuplicateCategory", "", c.name, "category '" + c.name + "' declared twice");
      if (!metas.insert(c.metavariable).second)
        report("DuplicateCategory", "", c.name, "metavariable '" + c.metavariable + "' used by two categories");
      for (const auto& p : c.productions)
        if (c.name != spec_.context_category && contains_hole(p))
          report("MisplacedHole", "", c.name, "hole outside the evaluation-context category");
    }
  }

  void check_binders() {
    for (const auto& [name, pos] : spec_.binders)
      if (pos < 1) report("BadBinder", "", "", "binder '" + name + "' has a non-positive position");
  }

  static bool contains_hole(const Term& t) {
    if (t.kind == TermKind::Hole) return true;
    return std::any_of(t.args.begin(), t.args.end(), contains_hole);
  }

  void record_arity(const Term& t, const std::string& rule, const std::string& category) {
    if (t.kind == TermKind::Constructor || t.kind == TermKind::Binder) {
      std::size_t n = t.args.size() + (t.kind == TermKind::Binder ? 1 : 0);
      auto [it, inserted] = arity_.emplace(t.name, n);
      if (!inserted && it->second != n) {
        report("ArityMismatch", rule, category,
               "constructor '" + t.name + "' used with " + std::to_string(n) + " argument(s), expected " +
                   std::to_string(it->second));
      }
      if (t.kind == TermKind::Binder) {
        auto b = spec_.binders.find(t.name);
        if (b != spec_.binders.end() && static_cast<std::size_t>(b->second) > n)
          report("BadBinder", rule, category, "binder position of '" + t.name + "' exceeds its arity");
      }
    }
    for (const auto& a : t.args) record_arity(a, rule, category);
  }

  void check_arities() {
    for (const auto& c : spec_.categories)
      for (const auto& p : c.productions) record_arity(p, "", c.name);
    for (const auto& r : spec_.rules) {
      auto visit = [&](const Formula& f) {
        if (const auto* ty = std::get_if<Typing>(&f))
          for (const auto& [v, t] : ty->env.extensions) record_arity(t, r.name, "");
        for_each_formula_term(f, [&](const Term& t) { record_arity(t, r.name, ""); });
      };
      for (const auto& p : r.premises) visit(p);
      visit(r.conclusion);
    }
  }

  template <class Fn>
  static void for_each_formula_term(const Formula& f, Fn&& fn) {
    if (const auto* x = std::get_if<Typing>(&f)) {
      fn(x->subject);
      fn(x->type);
    } else if (const auto* x = std::get_if<Reduction>(&f)) {
      fn(x->lhs);
      fn(x->rhs);
    } else if (const auto* x = std::get_if<MachineStep>(&f)) {
      fn(x->lhs.focus);
      fn(x->lhs.continuation);
      fn(x->rhs.focus);
      fn(x->rhs.continuation);
    } else if (const auto* x = std::get_if<Subtype>(&f)) {
      fn(x->sub);
      fn(x->super);
    } else if (const auto* x = std::get_if<TypeEq>(&f)) {
      fn(x->left);
      fn(x->right);
    } else if (const auto* x = std::get_if<Join>(&f)) {
      fn(x->result);
      for (const auto& o : x->operands) fn(o);
    } else if (const auto* x = std::get_if<Meet>(&f)) {
      fn(x->result);
      for (const auto& o : x->operands) fn(o);
    } else if (const auto* x = std::get_if<Lookup>(&f)) {
      fn(x->var);
      fn(x->type);
    } else if (const auto* x = std::get_if<NotValue>(&f)) {
      fn(x->term);
    }
  }

  // Type-position terms of a formula: typing outputs, environment types and
  // the operands of relational formulas.
  template <class Fn>
  static void for_each_type_term(const Formula& f, Fn&& fn) {
    if (const auto* x = std::get_if<Typing>(&f)) {
      for (const auto& [v, t] : x->env.extensions) fn(t);
      fn(x->type);
    } else if (const auto* x = std::get_if<Subtype>(&f)) {
      fn(x->sub);
      fn(x->super);
    } else if (const auto* x = std::get_if<TypeEq>(&f)) {
      fn(x->left);
      fn(x->right);
    } else if (const auto* x = std::get_if<Join>(&f)) {
      fn(x->result);
      for (const auto& o : x->operands) fn(o);
    } else if (const auto* x = std::get_if<Meet>(&f)) {
      fn(x->result);
      for (const auto& o : x->operands) fn(o);
    } else if (const auto* x = std::get_if<Lookup>(&f)) {
      fn(x->type);
    }
  }

  void require_variance(const Term& t, const std::string& rule) {
    if (t.kind == TermKind::Constructor && !t.args.empty()) {
      const auto* marks = variance_of(spec_, t.name);
      if (!marks) {
        if (missing_.insert(t.name).second)
          report("MissingVariance", rule, rule.empty() ? kTypeCategory : "",
                 "no variance declared for type constructor '" + t.name + "'");
      } else if (marks->size() != t.args.size()) {
        if (missing_.insert(t.name).second)
          report("VarianceArity", rule, "", "variance of '" + t.name + "' has " + std::to_string(marks->size()) +
                                                " mark(s) but the constructor takes " +
                                                std::to_string(t.args.size()));
      }
    }
    for (const auto& a : t.args) require_variance(a, rule);
  }

  void check_variance() {
    if (const auto* ty = spec_.find_category(kTypeCategory))
      for (const auto& p : ty->productions) require_variance(p, "");
    for (const auto& r : spec_.rules) {
      for (const auto& p : r.premises) for_each_type_term(p, [&](const Term& t) { require_variance(t, r.name); });
      for_each_type_term(r.conclusion, [&](const Term& t) { require_variance(t, r.name); });
    }
  }

  void check_context() {
    const auto* ctx = spec_.context();
    if (!ctx) return;
    for (const auto& p : ctx->productions) {
      if (p.kind == TermKind::Hole) continue;
      if (p.kind != TermKind::Constructor || p.args.empty()) {
        report("BadContext", "", ctx->name, "context production must be an operator applied to arguments");
        continue;
      }
      int holes = 0;
      for (const auto& a : p.args) {
        if (!a.is_meta()) {
          report("BadContext", "", ctx->name, "structured pattern inside context production of '" + p.name + "'");
          holes = -100;
          break;
        }
        if (a.meta.category == ctx->name) ++holes;
      }
      if (holes >= 0 && holes != 1)
        report("BadContext", "", ctx->name,
               "context production of '" + p.name + "' must contain exactly one hole, found " + std::to_string(holes));
    }
  }

  void check_values() {
    const auto* val = spec_.find_category(kValueCategory);
    const auto* exp = spec_.find_category(kExpressionCategory);
    if (!val || !exp) return;
    for (const auto& p : val->productions) {
      if (p.is_meta()) continue;
      bool found = std::any_of(exp->productions.begin(), exp->productions.end(), [&](const Term& e) {
        return e.kind == p.kind && e.name == p.name && e.args.size() == p.args.size();
      });
      if (!found)
        report("ValueNotExpression", "", val->name, "value production '" + p.name + "' is not an expression form");
    }
  }

  void check_lattice() {
    auto bases = spec_.base_types();
    std::set<std::string> base_set(bases.begin(), bases.end());
    std::map<std::string, std::set<std::string>> up;
    for (const auto& [a, b] : spec_.base_subtypes) {
      for (const auto* s : {&a, &b})
        if (!base_set.count(*s)) report("UnknownBaseType", "", kTypeCategory, "'" + *s + "' is not a base type");
      up[a].insert(b);
    }
    // transitive closure, then look for distinct mutually related pairs
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [a, ups] : up) {
        std::set<std::string> add;
        for (const auto& b : ups)
          if (auto it = up.find(b); it != up.end()) add.insert(it->second.begin(), it->second.end());
        for (const auto& c : add) changed |= ups.insert(c).second;
      }
    }
    for (const auto& [a, ups] : up)
      for (const auto& b : ups)
        if (a == b || (a < b && up.count(b) && up[b].count(a))) {
          report("IllFormedLattice", "", kTypeCategory, "base subtype axioms form a cycle through '" + a + "'");
          return;
        }
  }

  static void pattern_tokens(const Term& t, std::vector<std::string>& out) {
    if (t.is_meta()) out.push_back(t.meta.token());
    if (t.kind == TermKind::Binder) out.push_back(t.bound);
    for (const auto& a : t.args) pattern_tokens(a, out);
  }

  void check_linear(const std::vector<const Term*>& lhs, const std::string& rule) {
    std::vector<std::string> toks;
    for (const auto* t : lhs) pattern_tokens(*t, toks);
    std::set<std::string> seen;
    for (const auto& t : toks)
      if (!seen.insert(t).second) {
        report("NonlinearPattern", rule, "", "metavariable '" + t + "' repeated in left-hand side");
        return;
      }
  }

  void check_rules() {
    std::set<std::string> names;
    std::map<std::string, std::string> typing_heads;
    for (const auto& r : spec_.rules) {
      if (!names.insert(r.name).second) report("DuplicateRule", r.name, "", "rule '" + r.name + "' defined twice");
      for (const auto& p : r.premises)
        for_each_formula_term(p, [&](const Term& t) {
          if (contains_hole(t)) report("MisplacedHole", r.name, "", "hole inside an inference rule");
        });
      for (const auto& f : r.premises) check_env(f, r.name);
      check_env(r.conclusion, r.name);
      if (const auto* red = std::get_if<Reduction>(&r.conclusion)) {
        check_linear({&red->lhs}, r.name);
      } else if (const auto* m = std::get_if<MachineStep>(&r.conclusion)) {
        check_linear({&m->lhs.focus, &m->lhs.continuation}, r.name);
      } else if (const auto* ty = std::get_if<Typing>(&r.conclusion)) {
        std::string key = head_of(ty->subject);
        if (key.empty()) key = ty->subject.is_meta() ? "metavariable of " + ty->subject.meta.category : "?";
        auto [it, inserted] = typing_heads.emplace(key, r.name);
        if (!inserted)
          report("AmbiguousTyping", r.name, "",
                 "typing rules '" + it->second + "' and '" + r.name + "' share the subject form " + key);
      }
    }
  }

  void check_env(const Formula& f, const std::string& rule) {
    const auto* ty = std::get_if<Typing>(&f);
    if (!ty) return;
    std::set<std::string> vars;
    for (const auto& [v, t] : ty->env.extensions)
      if (!vars.insert(v).second) report("DuplicateExtension", rule, "", "environment extends '" + v + "' twice");
  }

  const LanguageSpec& spec_;
  std::vector<Diagnostic> out_;
  std::map<std::string, std::size_t> arity_;
  std::set<std::string> missing_;
};

}  // namespace

std::vector<Diagnostic> validate_spec(const LanguageSpec& spec) { return Validator(spec).run(); }

}  // namespace langx

#pragma once

// In-memory representation of language specifications: terms, formulas,
// inference rules, grammar categories and the specification itself.
// Every value here is immutable once built; transformations return new
// specifications.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace langx {

/// A rule-level variable ranging over a grammar category, e.g. `T12` is
/// base `T`, suffix `12`, category `Type`.
struct Metavariable {
  std::string base;
  std::string suffix;
  std::string category;

  std::string token() const { return base + suffix; }

  friend bool operator==(const Metavariable&, const Metavariable&) = default;
};

enum class TermKind {
  Metavariable,
  Constructor,
  Binder,
  Variable,      // object-level variable occurrence, e.g. `y` in (lam y B y)
  Hole,          // [.]
  Substitution,  // body[value/var], only on rule right-hand sides
};

/// First-order tree used for types, expressions, contexts and continuations.
struct Term {
  TermKind kind = TermKind::Hole;
  std::string name;        // constructor, binder or object variable name
  Metavariable meta;       // kind == Metavariable
  std::string bound;       // kind == Binder; a metavariable token inside patterns
  std::vector<Term> args;  // kind == Substitution: {body, value, variable}

  static Term metavariable(Metavariable m);
  static Term constructor(std::string name, std::vector<Term> args = {});
  static Term binder(std::string name, std::string bound, std::vector<Term> args);
  static Term variable(std::string name);
  static Term hole();
  static Term substitution(Term body, Term value, Term var);

  bool is_meta() const { return kind == TermKind::Metavariable; }
  bool is_constant() const { return kind == TermKind::Constructor && args.empty(); }
  bool is_constant(std::string_view n) const { return is_constant() && name == n; }

  /// Number of nodes; a binder's bound name is not a node.
  std::size_t size() const;

  friend bool operator==(const Term&, const Term&) = default;
};

struct EnvExpr {
  std::string root;
  std::vector<std::pair<std::string, Term>> extensions;

  friend bool operator==(const EnvExpr&, const EnvExpr&) = default;
};

struct MachineConfig {
  Term focus;
  Term continuation;

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

struct Typing {
  EnvExpr env;
  Term subject;
  Term type;
  friend bool operator==(const Typing&, const Typing&) = default;
};

struct Reduction {
  Term lhs;
  Term rhs;
  friend bool operator==(const Reduction&, const Reduction&) = default;
};

struct MachineStep {
  MachineConfig lhs;
  MachineConfig rhs;
  friend bool operator==(const MachineStep&, const MachineStep&) = default;
};

struct Subtype {
  Term sub;
  Term super;
  friend bool operator==(const Subtype&, const Subtype&) = default;
};

struct TypeEq {
  Term left;
  Term right;
  friend bool operator==(const TypeEq&, const TypeEq&) = default;
};

/// result = operands[0] \/ operands[1] \/ ...  (at least two operands)
struct Join {
  Term result;
  std::vector<Term> operands;
  friend bool operator==(const Join&, const Join&) = default;
};

/// result = operands[0] /\ operands[1] /\ ...  (documentation rules only)
struct Meet {
  Term result;
  std::vector<Term> operands;
  friend bool operator==(const Meet&, const Meet&) = default;
};

/// `x : T in G`, the environment lookup side condition of variable rules.
struct Lookup {
  Term var;
  Term type;
  std::string env;
  friend bool operator==(const Lookup&, const Lookup&) = default;
};

/// `notvalue t`, a side condition on machine rules.
struct NotValue {
  Term term;
  friend bool operator==(const NotValue&, const NotValue&) = default;
};

using Formula =
    std::variant<Typing, Reduction, MachineStep, Subtype, TypeEq, Join, Meet, Lookup, NotValue>;

struct InferenceRule {
  std::string name;
  std::vector<Formula> premises;
  Formula conclusion;

  friend bool operator==(const InferenceRule&, const InferenceRule&) = default;
};

enum class Variance { Covariant, Contravariant, Invariant };

const char* to_string(Variance v);

using VarianceTable = std::map<std::string, std::vector<Variance>>;

struct GrammarCategory {
  std::string name;
  std::string metavariable;
  bool identifiers = false;  // `%var`: ranges over object variable names
  std::vector<Term> productions;

  friend bool operator==(const GrammarCategory&, const GrammarCategory&) = default;
};

inline constexpr const char* kTypeCategory = "Type";
inline constexpr const char* kExpressionCategory = "Expression";
inline constexpr const char* kValueCategory = "Value";
inline constexpr const char* kContinuationCategory = "Continuation";
inline constexpr const char* kDefaultContextCategory = "Context";

struct LanguageSpec {
  std::string name;
  std::map<std::string, int> binders;  // constructor -> 1-based bound-variable position
  std::string context_category = kDefaultContextCategory;
  std::vector<GrammarCategory> categories;
  VarianceTable variance;
  std::vector<std::pair<std::string, std::string>> base_subtypes;
  std::vector<InferenceRule> rules;

  const GrammarCategory* find_category(std::string_view name) const;
  const GrammarCategory* variable_category() const;
  const GrammarCategory* context() const { return find_category(context_category); }

  /// Nullary constructors declared anywhere in the grammar.
  std::set<std::string> constants() const;
  /// Nullary constructors of the Type category.
  std::vector<std::string> base_types() const;

  friend bool operator==(const LanguageSpec&, const LanguageSpec&) = default;
};

class UnknownMetavariable : public std::runtime_error {
 public:
  explicit UnknownMetavariable(const std::string& token)
      : std::runtime_error("unknown metavariable '" + token + "'"), token_(token) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Binds `token` to the category whose metavariable is the longest prefix of
/// it, provided the remainder consists only of digits and primes.
std::optional<Metavariable> try_resolve_metavariable(std::string_view token, const LanguageSpec& spec);
Metavariable resolve_metavariable(std::string_view token, const LanguageSpec& spec);

/// `base` with the smallest positive integer suffix appended that is not in `used`.
Metavariable fresh(const Metavariable& base, const std::set<std::string>& used);

/// Built-in variance marks for arrow, Ref, List, prod and sum.
const VarianceTable& default_variance();
/// Declared entry if present, otherwise the built-in one, otherwise null.
const std::vector<Variance>* variance_of(const LanguageSpec& spec, const std::string& constructor);

// --- traversal helpers ---------------------------------------------------

void for_each_metavariable(const Term& t, const std::function<void(const Metavariable&)>& fn);
void for_each_metavariable(const Formula& f, const std::function<void(const Metavariable&)>& fn);

/// Metavariable tokens in order of first appearance (bound names and
/// environment extension variables included).
std::vector<std::string> metavariable_tokens(const InferenceRule& rule);
std::set<std::string> used_tokens(const InferenceRule& rule);

using Renaming = std::map<std::string, Metavariable>;
Term rename(const Term& t, const Renaming& r);
Formula rename(const Formula& f, const Renaming& r);
InferenceRule rename(const InferenceRule& rule, const Renaming& r);

/// Renumbers every metavariable of the rule by first appearance, per
/// category base (T1, T2, ... and e1, e2, ...), so that rules equal up to
/// consistent renaming compare equal.
InferenceRule canonicalize(const InferenceRule& rule, const LanguageSpec& spec);
LanguageSpec canonicalize(const LanguageSpec& spec);

/// Output-type position of a Typing formula, if it is one.
const Term* typing_output(const Formula& f);
bool is_typing_rule(const InferenceRule& r);
bool is_reduction_rule(const InferenceRule& r);
bool is_machine_rule(const InferenceRule& r);

/// Head name of a constructor/binder term, empty otherwise.
std::string head_of(const Term& t);

/// Replaces the single Hole of `context` with `filler`.
Term plug(const Term& context, const Term& filler);

// --- validation -----------------------------------------------------------

struct Diagnostic {
  std::string kind;     // e.g. "ArityMismatch", "MissingVariance"
  std::string rule;     // offending rule name, empty for grammar-level issues
  std::string category; // offending category, when grammar-level
  std::string message;
};

/// Checks the invariants of a specification; empty result means valid.
std::vector<Diagnostic> validate_spec(const LanguageSpec& spec);

}  // namespace langx

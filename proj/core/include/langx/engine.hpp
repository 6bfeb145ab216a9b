#pragma once

// Executing specifications: pattern matching, small-step reduction through
// evaluation contexts, CK machine runs, rule-driven type checking, and
// random/exhaustive generation of object terms.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "langx/ir.hpp"
#include "langx/subtyping.hpp"

namespace langx {

/// Metavariable token -> matched object term. Bound names map to Variable terms.
using Substitution = std::map<std::string, Term>;

// --- terms and categories --------------------------------------------------

/// True if `t` is derivable from the productions of `category`.
bool belongs(const Term& t, const std::string& category, const LanguageSpec& spec);
bool is_value(const Term& t, const LanguageSpec& spec);

std::set<std::string> free_variables(const Term& t);
/// body[value/var], renaming binders that would capture free variables of value.
Term substitute(const Term& body, const std::string& var, const Term& value);
bool alpha_equivalent(const Term& a, const Term& b);

/// Extends `s` so that s(pattern) = subject; nullopt if impossible.
std::optional<Substitution> match_pattern(const Term& pattern, const Term& subject, const LanguageSpec& spec,
                                          Substitution s = {});
/// Applies `s`, performing every e[v/x] node. Throws if a metavariable is unbound.
Term instantiate(const Term& pattern, const Substitution& s);
/// Applies `s` if every metavariable of `pattern` is bound.
std::optional<Term> try_instantiate(const Term& pattern, const Substitution& s);

// --- evaluation ------------------------------------------------------------

enum class StepKind {
  ContextualReduction,
  MachineStart,
  MachineOrder,
  MachineComputation,
  MachineRebuild,
};

const char* to_string(StepKind k);

struct TraceStep {
  StepKind kind = StepKind::ContextualReduction;
  std::string rule;
  std::variant<Term, MachineConfig> before;
  std::variant<Term, MachineConfig> after;
};

enum class Outcome { Value, Stuck, OutOfFuel };

const char* to_string(Outcome o);

struct EvalResult {
  Outcome outcome = Outcome::Stuck;
  Term term;  // the value, or the term that got stuck / was reached
  std::vector<TraceStep> trace;
  std::size_t steps = 0;
};

struct MachineResult {
  Outcome outcome = Outcome::Stuck;
  MachineConfig config;
  std::vector<TraceStep> trace;
  std::size_t steps = 0;
  std::size_t computation_steps = 0;
};

struct Decomposition {
  Term context;  // contains exactly one Hole; a bare Hole means the whole term
  Term redex;
};

inline constexpr std::size_t kDefaultFuel = 10000;

/// Small-step interpreter driven by the Context category and reduction rules.
class Interpreter {
 public:
  explicit Interpreter(const LanguageSpec& spec);

  /// Innermost decomposition whose redex matches a reduction rule; the
  /// whole term (with a bare Hole context) when there is none.
  Decomposition decompose(const Term& t) const;
  std::optional<std::pair<Term, TraceStep>> step(const Term& t) const;
  EvalResult eval(const Term& t, std::size_t fuel = kDefaultFuel, bool record_trace = true) const;

  const LanguageSpec& spec() const { return spec_; }

 private:
  std::optional<Decomposition> find_redex(const Term& t) const;
  const InferenceRule* matching_rule(const Term& redex, Substitution* out) const;
  bool premises_hold(const InferenceRule& r, const Substitution& s) const;

  const LanguageSpec& spec_;
  std::vector<Term> contexts_;
  std::string context_name_;
  std::vector<const InferenceRule*> reductions_;
};

/// Runs the machine rules of a derived specification.
class Machine {
 public:
  explicit Machine(const LanguageSpec& ck_spec);

  std::optional<std::pair<MachineConfig, TraceStep>> step(const MachineConfig& c) const;
  MachineResult run(const MachineConfig& c, std::size_t fuel = kDefaultFuel, bool record_trace = true) const;
  bool is_final(const MachineConfig& c) const;

 private:
  struct Entry {
    const InferenceRule* rule;
    std::string focus_head;  // empty: any
    std::string cont_head;
    StepKind kind;
  };

  const LanguageSpec& spec_;
  std::vector<Entry> rules_;
};

Decomposition decompose(const Term& t, const LanguageSpec& spec);
std::optional<std::pair<Term, TraceStep>> step(const Term& t, const LanguageSpec& spec);
EvalResult eval(const Term& t, const LanguageSpec& spec, std::size_t fuel = kDefaultFuel);
MachineResult ck_eval(const MachineConfig& config, const LanguageSpec& ck_spec, std::size_t fuel = kDefaultFuel);
/// Initial configuration <t, mt>.
MachineConfig initial_config(const Term& t);

// --- typing ----------------------------------------------------------------

enum class TypeErrorKind { NoRuleApplies, SubtypeFailure, NoJoin, UnboundVariable };

const char* to_string(TypeErrorKind k);

class TypeError : public std::runtime_error {
 public:
  TypeError(TypeErrorKind kind, Term subject, const std::string& message)
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}
  TypeErrorKind kind() const { return kind_; }
  const Term& subject() const { return subject_; }

 private:
  TypeErrorKind kind_;
  Term subject_;
};

using TypeEnv = std::vector<std::pair<std::string, Term>>;

/// Syntax-directed checker over the typing rules of a specification.
class Typechecker {
 public:
  explicit Typechecker(const LanguageSpec& spec);

  /// Throws TypeError.
  Term infer(const Term& t, const TypeEnv& env = {}) const;
  std::optional<Term> try_infer(const Term& t, const TypeEnv& env = {}) const;

 private:
  Term apply_rule(const InferenceRule& r, const Substitution& s0, const Term& t, const TypeEnv& env) const;

  const LanguageSpec& spec_;
  BaseLattice lattice_;
  std::map<std::string, std::vector<const InferenceRule*>> by_head_;
  std::vector<const InferenceRule*> variable_rules_;
  std::vector<const InferenceRule*> other_rules_;
};

Term typecheck(const Term& t, const LanguageSpec& spec);

// --- generation ------------------------------------------------------------

/// Grammar-directed random terms of a category, closed and of bounded size.
class TermGenerator {
 public:
  TermGenerator(const LanguageSpec& spec, std::uint64_t seed);

  /// A closed term of `category` with at most `max_size` nodes, or nullopt.
  std::optional<Term> generate(const std::string& category, std::size_t max_size);
  /// A closed term with exactly `size` nodes, or nullopt after a few tries.
  std::optional<Term> generate_sized(const std::string& category, std::size_t size);

 private:
  std::optional<Term> gen_category(const std::string& category, std::size_t budget, std::vector<std::string>& scope);
  std::optional<Term> gen_production(const Term& p, std::size_t budget, std::vector<std::string>& scope);
  std::size_t min_size(const Term& production) const;
  std::vector<std::string> binder_names_;
  std::size_t pick(std::size_t lo, std::size_t hi);

  const LanguageSpec& spec_;
  std::mt19937_64 rng_;
  std::map<std::string, std::size_t> min_category_;
};

/// Every closed term of `category` with exactly `size` nodes. Bound names
/// are chosen by nesting depth, so alpha-equivalent terms appear once.
std::vector<Term> enumerate_terms(const LanguageSpec& spec, const std::string& category, std::size_t size);

}  // namespace langx

#pragma once

// Adding algorithmic subtyping to the typing rules of a specification, plus
// the subtype and join relations those rules rely on.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "langx/ir.hpp"
#include "langx/variance.hpp"

namespace langx {

struct VarMapEntry {
  Metavariable original;
  std::vector<Metavariable> fresh;  // in premise order

  friend bool operator==(const VarMapEntry&, const VarMapEntry&) = default;
};

/// Ordered by first occurrence of the original variable.
using VarMap = std::vector<VarMapEntry>;

struct SplitResult {
  std::vector<Formula> premises;
  VarMap varmap;
};

/// Gives every occurrence of a type metavariable that appears more than once
/// across the output types of the typing premises its own fresh name. Fresh
/// names avoid `used` as well as each other.
SplitResult split_equal_types(const std::vector<Formula>& premises, const std::set<std::string>& used);
/// Same, with `used` taken from the premises themselves.
SplitResult split_equal_types(const std::vector<Formula>& premises);

enum class SubtypingReason { MultipleContravariant, MixedUnsupported };

const char* to_string(SubtypingReason r);

class SubtypingError : public std::runtime_error {
 public:
  SubtypingError(std::string rule, Metavariable variable, SubtypingReason reason, std::vector<Occurrence> occurrences);

  const std::string& rule() const { return rule_; }
  const Metavariable& variable() const { return variable_; }
  SubtypingReason reason() const { return reason_; }
  const std::vector<Occurrence>& occurrences() const { return occurrences_; }

 private:
  std::string rule_;
  Metavariable variable_;
  SubtypingReason reason_;
  std::vector<Occurrence> occurrences_;
};

/// Transforms one typing rule; other rules are returned unchanged.
InferenceRule add_subtyping(const InferenceRule& rule, const LanguageSpec& spec);
/// Transforms every typing rule of the specification.
LanguageSpec add_subtyping(const LanguageSpec& spec);

/// Reflexivity on base types, the declared base axioms, and one structural
/// rule per type constructor.
std::vector<InferenceRule> generate_subtype_relation(const LanguageSpec& spec);
/// Join and meet rules in the same style, for documentation.
std::vector<InferenceRule> generate_join_relation(const LanguageSpec& spec);

/// Reflexive-transitive closure of the declared base subtype axioms.
class BaseLattice {
 public:
  explicit BaseLattice(const LanguageSpec& spec);

  bool is_base(const std::string& t) const { return bases_.count(t) != 0; }
  bool leq(const std::string& a, const std::string& b) const;
  std::optional<std::string> lub(const std::string& a, const std::string& b) const;
  std::optional<std::string> glb(const std::string& a, const std::string& b) const;

 private:
  std::set<std::string> bases_;
  std::set<std::pair<std::string, std::string>> leq_;
};

/// Structural subtyping on ground types: reflexivity, base axioms and the
/// variance of each constructor. No transitivity rule is needed because base
/// axioms are closed transitively.
bool check_subtype(const Term& t1, const Term& t2, const LanguageSpec& spec);
bool check_subtype(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice);

/// Least upper bound / greatest lower bound of ground types, if one exists.
std::optional<Term> join(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice);
std::optional<Term> meet(const Term& t1, const Term& t2, const LanguageSpec& spec, const BaseLattice& lattice);

}  // namespace langx

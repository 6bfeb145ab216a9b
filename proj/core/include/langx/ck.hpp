#pragma once

// Derivation of a CK abstract machine from a reduction semantics given by
// evaluation contexts and reduction rules.

#include <stdexcept>
#include <string>
#include <vector>

#include "langx/ir.hpp"

namespace langx {

/// One continuation frame `op_i`, built from the evaluation context of `op`
/// whose hole sits at 1-based position `index`. `args` are the context's other
/// argument patterns; the trailing continuation slot is implicit.
struct ContinuationOp {
  std::string source_op;
  int index = 1;
  std::vector<Term> args;

  std::string name() const { return source_op + "_" + std::to_string(index); }

  friend bool operator==(const ContinuationOp&, const ContinuationOp&) = default;
};

enum class CkErrorKind {
  NoContextCategory,
  BadContext,
  NoStart,
  AmbiguousStart,
  OrderAmbiguity,
  NoFinalContinuation,
  PatternMismatch,
};

const char* to_string(CkErrorKind k);

class CkError : public std::runtime_error {
 public:
  CkError(CkErrorKind kind, std::string op, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + (op.empty() ? "" : " for '" + op + "'") + ": " + detail),
        kind_(kind),
        op_(std::move(op)) {}

  CkErrorKind kind() const { return kind_; }
  const std::string& op() const { return op_; }

 private:
  CkErrorKind kind_;
  std::string op_;
};

/// Continuation frames of every context production, in declaration order.
std::vector<ContinuationOp> continuation_ops(const LanguageSpec& spec);

/// `Continuation k ::= mt | (op_i args k) | ...`
GrammarCategory generate_continuation_grammar(const LanguageSpec& spec);

InferenceRule generate_start_rule(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                  const LanguageSpec& spec);

std::vector<InferenceRule> generate_order_rules(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                                const std::vector<Term>& contexts, const LanguageSpec& spec);

std::vector<InferenceRule> generate_computation_rules(const std::string& op,
                                                      const std::vector<ContinuationOp>& continuations,
                                                      const std::vector<InferenceRule>& reductions,
                                                      const LanguageSpec& spec);

/// The continuation whose value insertion leads to no other context.
const ContinuationOp& final_continuation(const std::string& op, const std::vector<ContinuationOp>& continuations,
                                         const std::vector<Term>& contexts, const LanguageSpec& spec);

/// Replaces the evaluation-context category by the Continuation category and
/// the reduction rules by machine rules; other rules are kept.
LanguageSpec derive_ck(const LanguageSpec& spec);

inline constexpr const char* kEmptyContinuation = "mt";

}  // namespace langx

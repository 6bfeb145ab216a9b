#pragma once

// Differential testing of a reduction semantics against a derived CK machine.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "langx/engine.hpp"

namespace langx {

struct CompareOptions {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::size_t max_size = 7;
  std::size_t fuel = kDefaultFuel;  // the machine gets three times as much
};

struct Verdict {
  EvalResult reduction;
  MachineResult machine;
  bool agree = false;
};

struct Counterexample {
  Term original;
  Term shrunk;
  Verdict verdict;  // for the shrunk term
};

struct CompareReport {
  std::vector<Term> terms;
  std::vector<bool> agree;
  std::size_t attempts = 0;
  std::size_t distinct = 0;
  std::optional<Counterexample> counterexample;

  std::size_t agreements() const;
};

/// Both sides produce alpha-equivalent values, or neither produces a value.
Verdict run_both(const Term& t, const Interpreter& source, const Machine& machine, std::size_t fuel);

/// Random closed terms of the Expression category that typecheck under `source`.
/// Distinct where possible; repeats fill the sample when the language is small.
std::vector<Term> well_typed_terms(const LanguageSpec& source, const CompareOptions& options, std::size_t* attempts = nullptr);

/// Greedily replaces subterms by smaller subterms while `failing` keeps holding.
Term shrink(const Term& t, const std::function<bool(const Term&)>& failing);

CompareReport compare_semantics(const LanguageSpec& source, const LanguageSpec& machine, const CompareOptions& options);

}  // namespace langx

#pragma once

// Reader and writer for the `.lang` text format.
//
//   language <Name>
//   binder <constructor> <position>        # bound variable position, 1-based
//   contexts <Category>                    # defaults to Context
//
//   grammar
//     <Category> <metavar> ::= <production> | <production> | ...
//
//   variance
//     <constructor> : <co|contra|inv> ...
//
//   subtype-base
//     <base> <: <base>
//
//   rule <name>
//     <premise>
//     ...
//     --------------------------------
//     <conclusion>
//
// Terms are prefix applications `(app e1 e2)`; `[.]` is the hole, `[a, b]`
// abbreviates `(cons a (cons b nil))`, and `e[v/x]` is substitution.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "langx/ir.hpp"

namespace langx {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::vector<std::string> expected;
  std::string kind = "ParseError";  // or the validation diagnostic kind
  std::string rule;
};

std::string to_string(const ParseError& e);

struct ParseResult {
  std::optional<LanguageSpec> spec;
  std::vector<ParseError> errors;

  bool ok() const { return spec.has_value() && errors.empty(); }
};

/// Parses and validates a specification. On failure every diagnosable error
/// is reported; malformed rules do not stop the parse of later blocks.
ParseResult parse_spec(std::string_view source, std::string file = "<input>");

/// Thrown by the single-term entry points below.
class TermSyntaxError : public std::runtime_error {
 public:
  TermSyntaxError(const std::string& msg, int column)
      : std::runtime_error(msg), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

/// An object-level term: declared constants become constructors, every other
/// identifier is an object variable.
Term parse_term(std::string_view text, const LanguageSpec& spec);
/// A rule-level pattern: identifiers resolve to metavariables or constants.
Term parse_pattern(std::string_view text, const LanguageSpec& spec);
Formula parse_formula(std::string_view text, const LanguageSpec& spec);

std::string print_term(const Term& t, const LanguageSpec& spec);
std::string print_config(const MachineConfig& c, const LanguageSpec& spec);
std::string print_formula(const Formula& f, const LanguageSpec& spec);
std::string print_rule(const InferenceRule& r, const LanguageSpec& spec);
/// Canonical rendering; parse_spec(print_spec(s)) yields s again.
std::string print_spec(const LanguageSpec& spec);

}  // namespace langx

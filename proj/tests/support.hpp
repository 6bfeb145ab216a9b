#pragma once

// Shared helpers for the test binaries: fixture loading and the reference-answer
// rule fragments under tests/reference_answers.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "langx/ir.hpp"
#include "langx/parser.hpp"

namespace langx::test {

inline std::string source_path(const std::string& rel) { return std::string(LANGX_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LanguageSpec parse_ok(const std::string& text, const std::string& file = "<test>") {
  auto r = parse_spec(text, file);
  if (!r.ok()) {
    std::string msg = "parse failed:";
    for (const auto& e : r.errors) msg += "\n  " + to_string(e);
    throw std::runtime_error(msg);
  }
  return *r.spec;
}

inline std::string fixture_path(const std::string& name) { return source_path("languages/" + name + ".lang"); }

inline LanguageSpec load_fixture(const std::string& name) {
  return parse_ok(read_text(fixture_path(name)), fixture_path(name));
}

inline const InferenceRule& rule_named(const LanguageSpec& spec, const std::string& name) {
  for (const auto& r : spec.rules)
    if (r.name == name) return r;
  throw std::runtime_error("no rule named " + name);
}

inline bool has_rule(const LanguageSpec& spec, const std::string& name) {
  for (const auto& r : spec.rules)
    if (r.name == name) return true;
  return false;
}

/// Rules from a tests/reference_answers file, read against the grammar of `base`.
inline std::vector<InferenceRule> answer_rules(const std::string& file, LanguageSpec base) {
  base.rules.clear();
  auto spec = parse_ok(print_spec(base) + "\n" + read_text(source_path("tests/reference_answers/" + file)), file);
  return spec.rules;
}

}  // namespace langx::test

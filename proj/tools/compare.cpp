#include "compare.hpp"

#include <algorithm>
#include <set>

#include "langx/parser.hpp"

namespace langx {

std::size_t CompareReport::agreements() const { return static_cast<std::size_t>(std::count(agree.begin(), agree.end(), true)); }

Verdict run_both(const Term& t, const Interpreter& source, const Machine& machine, std::size_t fuel) {
  Verdict v;
  v.reduction = source.eval(t, fuel, false);
  v.machine = machine.run(initial_config(t), 3 * fuel, false);
  bool a = v.reduction.outcome == Outcome::Value, b = v.machine.outcome == Outcome::Value;
  v.agree = a && b ? alpha_equivalent(v.reduction.term, v.machine.config.focus) : a == b;
  return v;
}

std::vector<Term> well_typed_terms(const LanguageSpec& source, const CompareOptions& options, std::size_t* attempts) {
  TermGenerator gen(source, options.seed);
  Typechecker checker(source);
  std::vector<Term> out;
  std::set<std::string> seen;
  std::size_t tries = 0;
  const std::size_t limit = std::max<std::size_t>(options.count * 500, 1000);
  // Distinct terms, round-robin over target sizes so small terms do not crowd
  // out the rest. A size that keeps missing drops out of the rotation. Values
  // agree trivially, so at most a quarter of the sample may be one.
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> misses(options.max_size + 1, 0);
  for (std::size_t s = 1; s <= options.max_size; ++s) sizes.push_back(s);
  std::size_t next = 0, values = 0;
  const std::size_t value_quota = options.count / 4;
  while (out.size() < options.count && tries < limit && !sizes.empty()) {
    ++tries;
    std::size_t slot = next++ % sizes.size();
    std::size_t s = sizes[slot];
    auto t = gen.generate_sized(kExpressionCategory, s);
    bool keep = t && checker.try_infer(*t) && !seen.count(print_term(*t, source));
    if (keep && is_value(*t, source)) {
      keep = values < value_quota;
      values += keep ? 1 : 0;
    }
    if (keep) {
      seen.insert(print_term(*t, source));
      out.push_back(std::move(*t));
      misses[s] = 0;
    } else if (++misses[s] >= 2000) {
      sizes.erase(sizes.begin() + static_cast<std::ptrdiff_t>(slot));
    }
  }
  if (attempts) *attempts = tries;
  // Small languages run out of distinct terms; repeat the sample to fill up.
  for (std::size_t i = 0, distinct = out.size(); distinct > 0 && out.size() < options.count; ++i) {
    Term copy = out[i % distinct];
    out.push_back(std::move(copy));
  }
  return out;
}

namespace {

void subterm_paths(const Term& t, std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    cur.push_back(i);
    subterm_paths(t.args[i], cur, out);
    cur.pop_back();
  }
}

Term replace_at(const Term& t, const std::vector<std::size_t>& path, std::size_t depth, const Term& with) {
  if (depth == path.size()) return with;
  Term out = t;
  out.args[path[depth]] = replace_at(t.args[path[depth]], path, depth + 1, with);
  return out;
}

const Term& at(const Term& t, const std::vector<std::size_t>& path) {
  const Term* cur = &t;
  for (auto i : path) cur = &cur->args[i];
  return *cur;
}

}  // namespace

Term shrink(const Term& t, const std::function<bool(const Term&)>& failing) {
  Term best = t;
  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<std::vector<std::size_t>> paths;
    std::vector<std::size_t> cur;
    subterm_paths(best, cur, paths);
    // Candidates: put a proper descendant of some position in that position's place.
    std::vector<Term> candidates;
    for (const auto& p : paths) {
      const Term& here = at(best, p);
      std::vector<std::vector<std::size_t>> inner;
      std::vector<std::size_t> c;
      subterm_paths(here, c, inner);
      for (const auto& q : inner)
        if (!q.empty()) candidates.push_back(replace_at(best, p, 0, at(here, q)));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Term& a, const Term& b) { return a.size() < b.size(); });
    for (const auto& c : candidates) {
      if (c.size() < best.size() && free_variables(c).empty() && failing(c)) {
        best = c;
        improved = true;
        break;
      }
    }
  }
  return best;
}

CompareReport compare_semantics(const LanguageSpec& source, const LanguageSpec& machine_spec, const CompareOptions& options) {
  CompareReport report;
  report.terms = well_typed_terms(source, options, &report.attempts);
  std::set<std::string> distinct;
  for (const auto& t : report.terms) distinct.insert(print_term(t, source));
  report.distinct = distinct.size();
  Interpreter interp(source);
  Machine machine(machine_spec);
  Typechecker checker(source);
  for (const auto& t : report.terms) {
    auto v = run_both(t, interp, machine, options.fuel);
    report.agree.push_back(v.agree);
    if (!v.agree && !report.counterexample) {
      auto failing = [&](const Term& c) { return checker.try_infer(c) && !run_both(c, interp, machine, options.fuel).agree; };
      Term small = shrink(t, failing);
      report.counterexample = Counterexample{t, small, run_both(small, interp, machine, options.fuel)};
    }
  }
  return report;
}

}  // namespace langx

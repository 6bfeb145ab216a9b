#include "langx/variance.hpp"

namespace langx {

Variance compose(Variance outer, Variance inner) {
  if (outer == Variance::Invariant || inner == Variance::Invariant) return Variance::Invariant;
  if (outer == Variance::Covariant) return inner;
  return inner == Variance::Contravariant ? Variance::Covariant : Variance::Contravariant;
}

namespace {

const std::vector<Variance>& marks_for(const std::string& ctor, const VarianceTable& table) {
  if (auto it = table.find(ctor); it != table.end()) return it->second;
  const auto& d = default_variance();
  if (auto it = d.find(ctor); it != d.end()) return it->second;
  throw MissingVariance(ctor);
}

void collect_paths(const Term& t, std::vector<std::size_t>& cur, std::vector<std::vector<std::size_t>>& out) {
  if (t.is_meta()) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    cur.push_back(i);
    collect_paths(t.args[i], cur, out);
    cur.pop_back();
  }
}

}  // namespace

const Term& at_path(const Term& ty, const std::vector<std::size_t>& path) {
  const Term* t = &ty;
  for (auto i : path) {
    if (i >= t->args.size()) throw std::out_of_range("path leaves the type term");
    t = &t->args[i];
  }
  return *t;
}

Variance occurrence_variance(const std::vector<std::size_t>& path, const Term& ty, const VarianceTable& table) {
  Variance v = Variance::Covariant;
  const Term* t = &ty;
  for (auto i : path) {
    if (i >= t->args.size()) throw std::out_of_range("path leaves the type term");
    const auto& marks = marks_for(t->name, table);
    if (i >= marks.size()) throw MissingVariance(t->name);
    v = compose(v, marks[i]);
    t = &t->args[i];
  }
  return v;
}

std::vector<std::vector<std::size_t>> metavariable_paths(const Term& ty) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  collect_paths(ty, cur, out);
  return out;
}

std::vector<Occurrence> collect_occurrences(const Metavariable& var, const std::vector<Formula>& premises,
                                            const VarianceTable& table) {
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i < premises.size(); ++i) {
    const Term* ty = typing_output(premises[i]);
    if (!ty) continue;
    for (auto& path : metavariable_paths(*ty)) {
      if (at_path(*ty, path).meta.token() != var.token()) continue;
      Variance v = occurrence_variance(path, *ty, table);
      out.push_back({i, std::move(path), v});
    }
  }
  return out;
}

}  // namespace langx

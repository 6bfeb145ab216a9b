#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "langx/ir.hpp"

namespace langx {

/// One appearance of a type metavariable in the output type of a typing premise.
struct Occurrence {
  std::size_t premise = 0;
  std::vector<std::size_t> path;  // argument indices from the output type's root
  Variance variance = Variance::Covariant;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

class MissingVariance : public std::runtime_error {
 public:
  explicit MissingVariance(const std::string& ctor)
      : std::runtime_error("no variance declared for type constructor '" + ctor + "'"), constructor_(ctor) {}
  const std::string& constructor() const { return constructor_; }

 private:
  std::string constructor_;
};

/// Variance of `outer` applied to a position of variance `inner`.
Variance compose(Variance outer, Variance inner);

/// Variance of the node reached from `ty` by following `path`.
/// Constructors on the path are looked up in `table`, then in the defaults.
Variance occurrence_variance(const std::vector<std::size_t>& path, const Term& ty, const VarianceTable& table);

/// Every occurrence of `var` in the output-type position of a Typing premise,
/// in premise order and pre-order within each type.
std::vector<Occurrence> collect_occurrences(const Metavariable& var, const std::vector<Formula>& premises,
                                            const VarianceTable& table);

/// Paths to all metavariable nodes of `ty`, in pre-order.
std::vector<std::vector<std::size_t>> metavariable_paths(const Term& ty);

const Term& at_path(const Term& ty, const std::vector<std::size_t>& path);

}  // namespace langx

#pragma once

#include <vector>

#include "antcsp/formula.hpp"
#include "antcsp/structure.hpp"

namespace antcsp {

using Tuple = std::vector<int>;

struct FrozenReport {
  // Per instance symbol, sorted nonhyperedges frozen into the relation.
  std::vector<std::vector<Tuple>> relations;
  // Frozen equalities b = b' with b < b' (reflexive pairs are implicit).
  std::vector<std::pair<int, int>> equalities;
  // Transitive closure: class index of each element, classes numbered by
  // least member.
  std::vector<int> class_of;
  std::vector<std::vector<int>> classes;

  bool empty() const;
  std::size_t frozen_tuple_count() const;
};

// A tuple (b_1..b_n) outside r^B is frozen when every F|_m-compatible
// assignment of its m distinct elements maps it into r^A.  Relations of
// arity > k are not tested, and neither is equality when k < 2.
FrozenReport frozen_tuples(const RelationalStructure& instance, const RelationalStructure& tmpl,
                           int k, const FormulaSet& F);

struct ReflectionResult {
  RelationalStructure structure;
  std::vector<int> quotient_map;  // source element -> result element
  int iterations = 1;
};

ReflectionResult one_step_reflection(const RelationalStructure& instance,
                                     const RelationalStructure& tmpl, int k,
                                     const FormulaSet& F);
// Iterates one-step reflection to a fixpoint.  iterations counts the steps
// that changed the structure, and is at least 1.
ReflectionResult full_reflection(const RelationalStructure& instance,
                                 const RelationalStructure& tmpl, int k, const FormulaSet& F);

struct ImpliedConstraints {
  std::vector<std::pair<int, Tuple>> tuples;  // (symbol, nonhyperedge)
  std::vector<std::pair<int, int>> equalities;
  bool empty() const { return tuples.empty() && equalities.empty(); }
};

// Nonhyperedges and distinct pairs that no homomorphism separates.  With no
// homomorphisms every one of them is listed.
ImpliedConstraints implied_constraints(const RelationalStructure& instance,
                                       const RelationalStructure& tmpl);
bool in_quasivariety(const RelationalStructure& instance, const RelationalStructure& tmpl);
bool in_universal_horn(const RelationalStructure& instance, const RelationalStructure& tmpl);

}  // namespace antcsp

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "antcsp/formula.hpp"
#include "antcsp/structure.hpp"

namespace antcsp {

// Tests F-compatibility of partial assignments from one instance into one
// template.  F_j is compiled lazily for each domain size j.
class CompatibilityChecker {
 public:
  CompatibilityChecker(const RelationalStructure& instance,
                       const RelationalStructure& tmpl, const FormulaSet& F);
  ~CompatibilityChecker();
  bool compatible(const PartialAssignment& nu) const;
  // dom must be sorted and duplicate-free.
  bool compatible(std::span<const int> dom, std::span<const int> values) const;

 private:
  struct Level;
  const Level& level(int j) const;
  RelationalStructure b_;
  RelationalStructure a_;
  FormulaSet F_;
  mutable std::map<int, std::unique_ptr<Level>> levels_;
};

bool is_compatible(const RelationalStructure& instance, const RelationalStructure& tmpl,
                   const PartialAssignment& nu, const FormulaSet& F);

struct RobustVerdict {
  enum class Outcome { Yes, No };
  enum class Reason { None, Unsatisfiable, NonExtendable };
  Outcome outcome = Outcome::Yes;
  Reason reason = Reason::None;
  std::vector<int> subset;  // set when NonExtendable
  PartialAssignment nu;     // set when NonExtendable
  int level = -1;           // failing level for the up-to variant

  bool yes() const { return outcome == Outcome::Yes; }
  static RobustVerdict ok() { return {}; }
  static RobustVerdict unsatisfiable() {
    return {Outcome::No, Reason::Unsatisfiable, {}, {}, -1};
  }
  static RobustVerdict non_extendable(std::vector<int> s, PartialAssignment nu) {
    return {Outcome::No, Reason::NonExtendable, std::move(s), std::move(nu), -1};
  }
  bool operator==(const RobustVerdict&) const = default;
};

// Satisfiable, and every F-compatible assignment on every k-element subset
// extends to a homomorphism (checked by seeded search).  The reported
// counterexample is the lexicographically least one.
RobustVerdict is_robust(const RelationalStructure& instance, const RelationalStructure& tmpl,
                        int k, const FormulaSet& F);
RobustVerdict is_robust_upto(const RelationalStructure& instance,
                             const RelationalStructure& tmpl, int k, const FormulaSet& F);
// Same contract; all homomorphisms are listed first and extendability is
// tested by membership of restrictions.
RobustVerdict brute_force_robust(const RelationalStructure& instance,
                                 const RelationalStructure& tmpl, int k,
                                 const FormulaSet& F);

// Element layout of a structure built from definition copies: open elements
// plus one family of private elements per source hyperedge.
struct FamilyLayout {
  struct Family {
    int source_hyperedge = -1;
    std::vector<int> slots;  // element for each open variable, repeats allowed
    std::vector<int> exist;  // private elements
  };
  std::vector<int> open;
  std::vector<Family> families;
};

// Exact robustness check for Boolean templates on structures made of many
// small families hanging off at most 24 open elements.  Rather than
// enumerating k-subsets it searches, over the 2^|open| open assignments, for
// a combination of at most k local restrictions with no common extension.
// Any returned counterexample is re-verified by seeded search.
RobustVerdict decomposed_robust(const RelationalStructure& instance,
                                const RelationalStructure& tmpl, int k,
                                const FormulaSet& F, const FamilyLayout& layout);

std::string to_string(const RobustVerdict& v);

}  // namespace antcsp

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "antcsp/formula.hpp"
#include "antcsp/structure.hpp"

namespace antcsp {

// A family of partial maps with domains of size at most j+1, read as a
// (j, j+1)-strategy.
struct Strategy {
  int j = 0;
  // sorted domain -> value tuples on it
  std::map<std::vector<int>, std::set<std::vector<int>>> members;

  bool contains(const std::vector<int>& domain, const std::vector<int>& values) const;
  bool contains(const PartialAssignment& f) const;
  void insert(const std::vector<int>& domain, const std::vector<int>& values);
  void erase(const std::vector<int>& domain, const std::vector<int>& values);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::vector<PartialAssignment> family() const;
  bool operator==(const Strategy&) const = default;
};

struct StrategyCheck {
  enum class Clause { None, Nonempty, Homomorphism, Restriction, Extension };
  Clause clause = Clause::None;
  PartialAssignment witness;   // the offending member
  std::vector<int> extension;  // elements it fails to extend to (Extension)

  bool ok() const { return clause == Clause::None; }
};

std::string to_string(StrategyCheck::Clause c);
std::string to_string(const StrategyCheck& c);

// Partial maps on at most j points extending to an F-compatible map on k
// points; a (j-1, j)-strategy candidate.  Instances with fewer than k
// elements use restrictions of their homomorphisms.
Strategy candidate_family(const RelationalStructure& instance, const RelationalStructure& tmpl,
                          int k, const FormulaSet& F, int j);

// First violation in a fixed order: nonemptiness, homomorphism,
// restriction, extension; members are scanned by domain then values.
StrategyCheck check_strategy(const Strategy& s, const RelationalStructure& instance,
                             const RelationalStructure& tmpl);

// Greatest (j, j+1)-strategy inside the partial homomorphisms on at most
// j+1 points, or nullopt when it is empty.
std::optional<Strategy> establish_consistency(const RelationalStructure& instance,
                                              const RelationalStructure& tmpl, int j);

enum class SeparatorVerdict { Accept, Reject };

// Accepts iff the candidate family on at most j+1 points is a
// (j, j+1)-strategy.
SeparatorVerdict ant_separator(const RelationalStructure& instance,
                               const RelationalStructure& tmpl, int k, const FormulaSet& F,
                               int j);

}  // namespace antcsp

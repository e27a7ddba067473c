#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "antcsp/structure.hpp"

namespace antcsp {

// Called with each solution in lexicographic order; return false to stop.
using SolutionVisitor = std::function<bool(const std::vector<int>&)>;

// Templates are limited to 64 elements (domains are bitmasks).
constexpr int kMaxTemplateSize = 64;

// Instance symbols must appear in the template with the same arity.
// Returns, for each instance symbol, the template symbol index.
std::vector<int> symbol_map(const Signature& instance, const Signature& tmpl);

std::optional<Homomorphism> find_homomorphism(const RelationalStructure& instance,
                                              const RelationalStructure& tmpl,
                                              const PartialAssignment& seed = {});

// Restricts each instance element to a bitmask of allowed template values.
std::optional<Homomorphism> find_homomorphism_in_domains(
    const RelationalStructure& instance, const RelationalStructure& tmpl,
    std::vector<std::uint64_t> domains);

void for_each_homomorphism(const RelationalStructure& instance,
                           const RelationalStructure& tmpl,
                           const PartialAssignment& seed,
                           const SolutionVisitor& visit);

std::vector<Homomorphism> enumerate_homomorphisms(const RelationalStructure& instance,
                                                  const RelationalStructure& tmpl);

std::size_t count_homomorphisms(const RelationalStructure& instance,
                                const RelationalStructure& tmpl);

bool is_homomorphism(const RelationalStructure& instance,
                     const RelationalStructure& tmpl, const std::vector<int>& map);

struct Quotient {
  RelationalStructure structure;
  std::vector<int> class_map;  // source element -> class id
};

// Classes are numbered by their least member.
Quotient quotient(const RelationalStructure& s,
                  const std::vector<std::vector<int>>& partition);
// Elements sharing a key are merged.
Quotient quotient_by_key(const RelationalStructure& s, const std::vector<int>& key);

}  // namespace antcsp

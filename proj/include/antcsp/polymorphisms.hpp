#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antcsp/structure.hpp"

namespace antcsp {

struct OperationTable {
  int arity = 0;
  int domain = 0;
  std::vector<int> table;  // row-major over A^arity, first argument most significant

  int operator()(std::span<const int> args) const;
  bool operator==(const OperationTable&) const = default;
};

// Terms over operation symbols 0.. and variables 0.. (x = 0, y = 1).
struct Term {
  int op = -1;            // -1: the term is the variable args[0]
  std::vector<int> args;  // variable indices
  static Term var(int v) { return {-1, {v}}; }
  static Term apply(int op, std::vector<int> args) { return {op, std::move(args)}; }
  bool operator==(const Term&) const = default;
};

struct IdentitySystem {
  std::vector<int> arities;  // per operation symbol
  int num_vars = 2;
  std::vector<std::pair<Term, Term>> equations;
  bool idempotent = true;  // adds f(x,...,x) = x for every symbol

  void validate() const;
};

namespace identities {
// f(y,x,...,x) = f(x,y,x,...,x) = ... = f(x,...,x,y)
IdentitySystem wnu(int n);
// f(y,x,...,x) = ... = f(x,...,x,y) = x
IdentitySystem nu(int n);
IdentitySystem quasi_wnu(int n);
IdentitySystem quasi_nu(int n);
// Arity 3 and 4 WNUs linked by w3(y,x,x) = w4(y,x,x,x).
IdentitySystem bw_pair();
// No identities: any n-ary polymorphism.
IdentitySystem any(int n);
}  // namespace identities

// A^n with product relations; element index = row-major code of the tuple.
RelationalStructure indicator_instance(const RelationalStructure& tmpl, int n);

// Lexicographically least tables satisfying the system, or nullopt after
// exhaustive search.
std::optional<std::vector<OperationTable>> find_polymorphism(const RelationalStructure& tmpl,
                                                             const IdentitySystem& spec);

bool check_identities(const std::vector<OperationTable>& tables, const IdentitySystem& spec);
bool check_preservation(const OperationTable& table, const RelationalStructure& tmpl);

std::vector<std::vector<int>> endomorphisms(const RelationalStructure& tmpl);
bool is_core(const RelationalStructure& tmpl);
// Elements of the least minimum-size endomorphism image, ascending.
std::vector<int> core_elements(const RelationalStructure& tmpl);
// Induced substructure on core_elements, renumbered in order.
RelationalStructure core_retract(const RelationalStructure& tmpl);
RelationalStructure induced_substructure(const RelationalStructure& s,
                                         const std::vector<int>& elements);

std::optional<std::pair<OperationTable, OperationTable>> has_bw_pair(
    const RelationalStructure& tmpl);

std::string to_string(const IdentitySystem& spec);

}  // namespace antcsp

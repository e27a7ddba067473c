#pragma once

#include <optional>
#include <string>
#include <vector>

#include "antcsp/formula.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/structure.hpp"

namespace antcsp {

struct ElementOrigin {
  enum class Kind { Open, Existential, TemplateCopy };
  Kind kind = Kind::Open;
  int source = -1;     // source element (Open) or template element (TemplateCopy)
  int hyperedge = -1;  // source hyperedge id (Existential)
  int position = -1;   // quantified variable index within the definition
  bool operator==(const ElementOrigin&) const = default;
};

struct HyperedgeOrigin {
  int source_hyperedge = -1;  // -1 for template-copy hyperedges
  int conjunct = -1;
  bool operator==(const HyperedgeOrigin&) const = default;
};

// Source hyperedges are numbered symbol by symbol in canonical tuple order.
struct ReductionOutput {
  RelationalStructure structure;
  std::vector<ElementOrigin> elements;
  // Indexed like the structure: per symbol, per canonical tuple.
  std::vector<std::vector<HyperedgeOrigin>> hyperedges;
  // Output element of each source element (after any pre-quotient).
  std::vector<int> source_map;
  FamilyLayout layout;
  bool canonical_no = false;  // con_reduce hit an identification conflict
};

ReductionOutput pp_reduce(const RelationalStructure& instance, const PpDefinitionSet& defs);

struct Literal {
  int var = 0;
  bool negated = false;
  bool operator==(const Literal&) const = default;
  auto operator<=>(const Literal&) const = default;
};

struct SignedClauseInstance {
  int num_vars = 0;
  int width = 3;
  std::vector<std::vector<Literal>> clauses;
  bool operator==(const SignedClauseInstance&) const = default;
};

void validate(const SignedClauseInstance& inst);
// Signature of all 2^width sign patterns (symbol "R<w>_<bits>").
Signature sat_signature(int width);
RelationalStructure to_structure(const SignedClauseInstance& inst);
SignedClauseInstance to_clauses(const RelationalStructure& s);

// DPLL with unit propagation; returns a satisfying assignment (0/1 per var).
std::optional<std::vector<int>> solve_clauses(const SignedClauseInstance& inst);
bool satisfies(const SignedClauseInstance& inst, const std::vector<int>& assignment);

SignedClauseInstance gottlob_amplify(const SignedClauseInstance& src, int k);

// Splits every clause into a chain of width-m clauses linked by fresh
// existential variables.  Source width w needs (w - 2(m-1)) divisible by
// m-2; for m = 3 this is the usual n-2 clauses over n-3 links.
ReductionOutput reduce_to_width(const SignedClauseInstance& src, int m);
ReductionOutput reduce_to_3sat(const SignedClauseInstance& src);
SignedClauseInstance output_clauses(const ReductionOutput& out);

struct ArrowDiagram {
  enum class Direction { Left, Right };
  struct Arrow {
    int boundary;  // 0 .. clause count
    Direction dir;
  };
  struct Interval {
    int left;   // boundary of the right-pointing arrow
    int right;  // boundary of the left-pointing arrow
    bool already_stabilized = false;
    int element = -1;  // chosen open element, or -1
    int value = -1;
  };
  int clauses = 0;
  std::vector<Arrow> arrows;
  std::vector<Interval> intervals;
  bool failure = false;
};

// Arrow analysis of one family of a reduce_to_width output.  nu may assign
// the family's open and existential elements.
ArrowDiagram arrow_diagram(const ReductionOutput& out, int family, const PartialAssignment& nu);

// Template over the signature plus one unary constant symbol per element.
// Returns the reduced instance over the plain signature; identification
// conflicts give the canonical NO instance.
ReductionOutput con_reduce(const RelationalStructure& instance, const RelationalStructure& tmpl,
                           int k, const FormulaSet& F);
FormulaSet build_G(const FormulaSet& F, const RelationalStructure& tmpl, int k);

struct LinearEquation {
  std::vector<std::pair<int, int>> terms;  // (variable, +1 or -1)
  int rhs = 0;
  bool operator==(const LinearEquation&) const = default;
};

struct LinearSystem {
  int modulus = 2;
  int g = 1;
  int num_vars = 0;
  std::vector<LinearEquation> eqs;
  bool operator==(const LinearSystem&) const = default;
};

void validate(const LinearSystem& sys);
// Each variable x becomes x_L, x_M, x_R (ids 3x, 3x+1, 3x+2).
LinearSystem triple_variables(const LinearSystem& sys);
// Width-9 equations from triple_variables become three width-4 equations
// defining u_L, u_M, u_R plus u_L + u_M + u_R = rhs.
LinearSystem regroup_to_width4(const LinearSystem& sys);
// Width-4 equations split through a fresh v into two width-3 equations.
LinearSystem regroup_to_width3(const LinearSystem& sys);

struct SolutionSpace {
  bool satisfiable = false;
  unsigned long long count = 0;
  int dimension = -1;  // log_p(count) when the modulus is prime and count > 0
};
SolutionSpace linear_solution_space(const LinearSystem& sys);

// Width-3 systems as structures over the linear(modulus, g) template.
RelationalStructure to_structure(const LinearSystem& sys);

SignedClauseInstance dimacs_import(const std::string& text);
std::string dimacs_export(const SignedClauseInstance& inst);

}  // namespace antcsp

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "antcsp/structure.hpp"

namespace antcsp {

struct Atom {
  enum class Kind { Rel, Eq };
  Kind kind = Kind::Rel;
  std::string rel;        // empty for Eq
  std::vector<int> args;  // variable ids; two for Eq

  static Atom relation(std::string name, std::vector<int> args) {
    return {Kind::Rel, std::move(name), std::move(args)};
  }
  static Atom eq(int a, int b) { return {Kind::Eq, {}, {a, b}}; }
  bool is_eq() const { return kind == Kind::Eq; }
  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;
};

// Variables 0..num_free-1 are free (x1..xk), the next num_exist are
// existentially quantified (y1..ym).
struct PpFormula {
  int num_free = 0;
  int num_exist = 0;
  std::vector<Atom> atoms;

  int num_vars() const { return num_free + num_exist; }
  bool is_free(int v) const { return v < num_free; }
  auto operator<=>(const PpFormula&) const = default;
  bool operator==(const PpFormula&) const = default;
};

using FormulaSet = std::vector<PpFormula>;

std::string to_string(const PpFormula& f);
std::string variable_name(const PpFormula& f, int v);

// Checks variable ranges and, when given, relation arities.
void validate(const PpFormula& f, const Signature* sig = nullptr);

// Canonical form: equalities with quantified variables substituted away,
// duplicate atoms and unused quantified variables removed, quantified
// variables renamed to the lexicographically least labelling among those
// produced by colour refinement.  Formulas that differ only by renaming of
// quantified variables get equal canonical forms.
PpFormula canonicalize(const PpFormula& f);

// Conjunction of formulas over the same free variables; quantified
// variables are renamed apart.
PpFormula conjoin(const std::vector<PpFormula>& parts, int num_free);
// Quantifies the free variables with index >= keep.
PpFormula project(const PpFormula& f, int keep);
// Replaces free variable i by new free variable iota[i] (of num_new).
PpFormula substitute(const PpFormula& f, const std::vector<int>& iota, int num_new);

struct EvalResult {
  bool holds = false;
  std::vector<int> witness;  // values of the quantified variables
};

// A formula bound to one structure for repeated evaluation.
class CompiledFormula {
 public:
  CompiledFormula(const PpFormula& f, const RelationalStructure& s,
                  bool lexicographic_witness = false);
  bool holds(std::span<const int> binding) const;
  EvalResult evaluate(std::span<const int> binding) const;
  const PpFormula& formula() const { return f_; }

 private:
  bool search(std::vector<int>& val, std::size_t level) const;

  PpFormula f_;
  const RelationalStructure* s_;
  std::vector<int> rep_;      // union-find representative per variable
  std::vector<int> order_;    // quantified representatives in search order
  std::vector<std::vector<int>> level_atoms_;  // atoms completed at a level
  std::vector<int> free_atoms_;                // atoms over free variables only
  std::vector<int> syms_;                      // structure symbol per atom
  std::vector<std::pair<int, int>> free_eqs_;
};

EvalResult eval_pp(const RelationalStructure& s, const PpFormula& f,
                   std::span<const int> binding);

// F_k: every substitution instance of every member into k variables,
// canonicalized, deduplicated and sorted.
FormulaSet instantiate(const FormulaSet& F, int k);

struct TypeFormula {
  int k = 0;
  FormulaSet members;  // sorted subset of F_k
  PpFormula conjunction() const;
  auto operator<=>(const TypeFormula&) const = default;
  bool operator==(const TypeFormula&) const = default;
};

// Evaluates F_k on tuples of one structure.
class TypeOracle {
 public:
  TypeOracle(const FormulaSet& F, int k, const RelationalStructure& s);
  const FormulaSet& members() const { return members_; }
  // Bitmask-free representation: indices of members holding at the tuple.
  std::vector<int> satisfied(std::span<const int> tuple) const;
  bool holds(int member, std::span<const int> tuple) const {
    return compiled_[member].holds(tuple);
  }
  TypeFormula type_of(std::span<const int> tuple) const;

 private:
  int k_;
  FormulaSet members_;
  std::vector<CompiledFormula> compiled_;
};

TypeFormula type_of(const RelationalStructure& s, std::span<const int> tuple,
                    const FormulaSet& F);

// F|_l: every (k,F)-type (the empty one included) with x_{l+1}..x_k quantified.
FormulaSet project_types(const FormulaSet& F, int k, int l);
FormulaSet closure_union(const FormulaSet& F, int k);

// Definitions of source symbols by pp-formulas over a target signature.  The
// free variables of a definition are its open variables.
struct PpDefinitionSet {
  Signature source;
  Signature target;
  std::map<std::string, PpFormula> defs;

  const PpFormula& at(const std::string& r) const;
  void validate() const;
};

PpFormula translate_to_target(const PpFormula& psi, const PpDefinitionSet& defs);
FormulaSet translate_all(const FormulaSet& F, const PpDefinitionSet& defs);

// 3SAT clauses defined in signed 1-in-3:
//   l1 | l2 | l3  <=>  Ey1..y4 r(~l1,y1,y2) & r(y2,l2,y3) & r(y3,y4,~l3)
PpDefinitionSet sat3_to_one_in_three();

struct ClawFormula {
  std::vector<std::string> talon;          // symbol of each talon copy
  std::vector<int> open_classes;           // identification class per talon open variable
  TypeFormula wrist;                       // over wrist variables
  std::vector<int> wrist_identification;   // open class per wrist variable or -1
  std::vector<int> free_choice;            // construction variables left free
  PpFormula formula;                       // canonical k-ary result over the target
};

struct ClawEnumeration {
  std::vector<ClawFormula> claws;  // distinct canonical formulas, construction order
  std::size_t constructions = 0;   // before deduplication
};

// Enumerates claws of arity k and bound l.  cap bounds the number of
// constructions (0 = unbounded); exceeding it throws BudgetExceeded.
ClawEnumeration enumerate_claws(const PpDefinitionSet& defs, const FormulaSet& F,
                                int k, int l, std::size_t cap = 0);
FormulaSet claw_formula_set(const PpDefinitionSet& defs, const FormulaSet& F, int k,
                            int l, std::size_t cap = 0);

// Decides claw membership by decomposing the formula into definition copies.
// Exact when every member of F is a single relational atom; otherwise it
// falls back to enumeration.
bool is_claw(const PpDefinitionSet& defs, const FormulaSet& F, int k, int l,
             const PpFormula& phi);

struct QuasiEquation {
  TypeFormula premise;
  Atom conclusion;  // over x1..xk
};

std::vector<QuasiEquation> kFq_theory(const RelationalStructure& a, int k,
                                      const FormulaSet& F);

// The fundamental relations of a signature as single-atom formulas.
FormulaSet fundamental_relations(const Signature& sig);

}  // namespace antcsp

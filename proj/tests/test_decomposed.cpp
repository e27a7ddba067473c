#include <gtest/gtest.h>

#include <random>

#include "antcsp/error.hpp"
#include "antcsp/reductions.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using namespace antcsp;

namespace {

void expect_agrees(const ReductionOutput& out, const RelationalStructure& tmpl, int k,
                   const FormulaSet& F, const std::string& what) {
  RobustVerdict fast = decomposed_robust(out.structure, tmpl, k, F, out.layout);
  RobustVerdict slow = brute_force_robust(out.structure, tmpl, k, F);
  ASSERT_EQ(fast.yes(), slow.yes()) << what << " k=" << k << " |F|=" << F.size();
  EXPECT_EQ(fast.reason, slow.reason) << what;
  if (fast.reason == RobustVerdict::Reason::NonExtendable) {
    EXPECT_EQ(static_cast<int>(fast.subset.size()), k);
    EXPECT_TRUE(is_compatible(out.structure, tmpl, fast.nu, F));
    EXPECT_FALSE(find_homomorphism(out.structure, tmpl, fast.nu).has_value());
  }
}

}  // namespace

TEST(Decomposed, AgreesOnChainOutputs) {
  std::mt19937 rng(11);
  auto tmpl = templates::nsat(3);
  FormulaSet fund = fundamental_relations(tmpl.signature());
  int no = 0, yes = 0;
  for (int i = 0; i < 80; ++i) {
    int width = 4 + static_cast<int>(rng() % 2);
    int vars = 2 + static_cast<int>(rng() % 2);
    int clauses = 1 + static_cast<int>(rng() % 2);
    auto src = oracle::random_clauses(vars, clauses, width, rng);
    auto out = reduce_to_3sat(src);
    for (int k = 1; k <= 3; ++k)
      for (const FormulaSet& F : {FormulaSet{}, fund}) {
        expect_agrees(out, tmpl, k, F, dimacs_export(src));
        (brute_force_robust(out.structure, tmpl, k, F).yes() ? yes : no)++;
      }
  }
  EXPECT_GT(yes, 0);
  EXPECT_GT(no, 0);
}

TEST(Decomposed, AgreesOnOneInThreeOutputs) {
  std::mt19937 rng(5);
  auto tmpl = templates::signed_one_in_three();
  auto defs = sat3_to_one_in_three();
  FormulaSet fund = fundamental_relations(tmpl.signature());
  for (int i = 0; i < 12; ++i) {
    auto src = oracle::random_clauses(2 + static_cast<int>(rng() % 2), 1 + static_cast<int>(rng() % 2), 3, rng);
    auto out = pp_reduce(to_structure(src), defs);
    for (int k = 1; k <= 2; ++k)
      for (const FormulaSet& F : {FormulaSet{}, fund})
        expect_agrees(out, tmpl, k, F, dimacs_export(src));
  }
}

TEST(Decomposed, AmplifiedChainIsRobust) {
  // Satisfiable sources through amplify(k=2) then the 3-chain stay
  // (2, empty)-robust; the brute force check agrees on a tiny case.
  SignedClauseInstance src{2, 3, {{{0, false}, {1, true}, {0, false}}}};
  src.clauses[0][2] = {1, false};
  auto out = reduce_to_3sat(gottlob_amplify(src, 2));
  auto v = decomposed_robust(out.structure, templates::nsat(3), 2, {}, out.layout);
  EXPECT_TRUE(v.yes()) << to_string(v);
}

TEST(Decomposed, UnsatisfiableAndErrors) {
  SignedClauseInstance unsat{1, 4, {}};
  for (unsigned p = 0; p < 2; ++p)
    unsat.clauses.push_back({{0, p == 1}, {0, p == 1}, {0, p == 1}, {0, p == 1}});
  auto out = reduce_to_3sat(unsat);
  auto v = decomposed_robust(out.structure, templates::nsat(3), 1, {}, out.layout);
  EXPECT_EQ(v.reason, RobustVerdict::Reason::Unsatisfiable);

  EXPECT_THROW(decomposed_robust(out.structure, templates::complete_graph(3), 1, {}, out.layout),
               InvalidArgument);
  FormulaSet complex = {{2, 1, {Atom::relation("R3_000", {0, 1, 2})}}};
  EXPECT_THROW(decomposed_robust(out.structure, templates::nsat(3), 1, complex, out.layout),
               InvalidArgument);
  FamilyLayout broken = out.layout;
  broken.families.pop_back();
  EXPECT_THROW(decomposed_robust(out.structure, templates::nsat(3), 1, {}, broken),
               InvalidArgument);
}

TEST(Decomposed, AgreesOnWidthFourChains) {
  std::mt19937 rng(23);
  auto tmpl = templates::nsat(4);
  FormulaSet fund = fundamental_relations(tmpl.signature());
  for (int i = 0; i < 15; ++i) {
    auto src = oracle::random_clauses(2 + static_cast<int>(rng() % 2), 1 + static_cast<int>(rng() % 2), 6, rng);
    auto out = reduce_to_width(src, 4);
    for (int k = 1; k <= 3; ++k)
      for (const FormulaSet& F : {FormulaSet{}, fund})
        expect_agrees(out, tmpl, k, F, dimacs_export(src));
  }
}

TEST(Decomposed, AgreesOnAmplifiedChains) {
  std::mt19937 rng(41);
  auto tmpl = templates::nsat(3);
  for (int i = 0; i < 3; ++i) {
    auto src = oracle::random_clauses(2, 1 + static_cast<int>(rng() % 2), 2, rng);
    auto out = reduce_to_3sat(gottlob_amplify(src, 1));
    for (int k = 1; k <= 2; ++k) expect_agrees(out, tmpl, k, {}, dimacs_export(src));
  }
}

TEST(Decomposed, AdjacentRepeatedVariableBreaksThreeRobustness) {
  // (x1 v x2 v x2): both x2 blocks can end and start on the same copy, so a
  // two-clause arrow interval holds one open element twice.
  auto tmpl = templates::nsat(3);
  FormulaSet fund = fundamental_relations(tmpl.signature());
  auto bad = reduce_to_3sat(gottlob_amplify(dimacs_import("p cnf 2 1\n1 2 2 0\n"), 3));
  auto v = decomposed_robust(bad.structure, tmpl, 3, fund, bad.layout);
  ASSERT_EQ(v.reason, RobustVerdict::Reason::NonExtendable);
  EXPECT_TRUE(is_compatible(bad.structure, tmpl, v.nu, fund));
  EXPECT_FALSE(find_homomorphism(bad.structure, tmpl, v.nu).has_value());

  auto good = reduce_to_3sat(gottlob_amplify(dimacs_import("p cnf 2 1\n2 1 -2 0\n"), 3));
  EXPECT_TRUE(decomposed_robust(good.structure, tmpl, 3, fund, good.layout).yes());
}

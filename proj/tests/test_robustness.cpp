#include <gtest/gtest.h>

#include <random>

#include "antcsp/error.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using namespace antcsp;

namespace {

FormulaSet edge_set() { return {{2, 0, {Atom::relation("E", {0, 1})}}}; }

RelationalStructure k3() { return templates::complete_graph(3); }

// Every k-subset in lexicographic order.
template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  oracle::for_each_map(k, n, [&](const std::vector<int>& s) {
    for (int i = 1; i < k; ++i)
      if (s[i] <= s[i - 1]) return;
    fn(s);
  });
}

struct Case {
  RelationalStructure b, a;
  int k;
  FormulaSet F;
};

std::vector<Case> random_cases(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<RelationalStructure> temps = {templates::complete_graph(2), k3(),
                                            templates::one_in_three()};
  std::vector<Case> out;
  for (int i = 0; i < count; ++i) {
    const auto& a = temps[i % 3];
    int n = 1 + (i / 3) % 6;
    int tries = a.signature()[0].arity == 3 ? 3 : 5;
    auto b = oracle::random_structure(a.signature(), n, tries, rng);
    int k = (i / 18) % 4;
    FormulaSet F = (i / 72) % 2 ? fundamental_relations(a.signature()) : FormulaSet{};
    out.push_back({b, a, k, F});
  }
  return out;
}

}  // namespace

TEST(Compatibility, Examples) {
  auto tri = k3();
  EXPECT_FALSE(is_compatible(tri, k3(), {{0, 0}, {1, 0}}, edge_set()));
  EXPECT_TRUE(is_compatible(tri, k3(), {{0, 0}, {1, 1}}, edge_set()));
  EXPECT_TRUE(is_compatible(tri, k3(), {}, edge_set()));
  EXPECT_THROW(is_compatible(tri, k3(), {{0, 3}}, edge_set()), InvalidArgument);
}

TEST(Compatibility, AgreesWithDefinition) {
  std::mt19937 rng(41);
  FormulaSet path{{2, 1, {Atom::relation("E", {0, 2}), Atom::relation("E", {2, 1})}}};
  std::vector<FormulaSet> Fs = {{}, edge_set(), path};
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 4;
    auto b = oracle::random_structure(k3().signature(), n, 5, rng);
    const auto& F = Fs[trial % 3];
    CompatibilityChecker cc(b, k3(), F);
    int k = 1 + trial % 3;
    if (k > n) continue;
    std::uniform_int_distribution<int> val(0, 2);
    for_each_subset(n, k, [&](const std::vector<int>& s) {
      std::vector<int> img(k);
      for (int& v : img) v = val(rng);
      EXPECT_EQ(cc.compatible(s, img), oracle::brute_compatible(b, k3(), s, img, F));
    });
  }
}

TEST(IsRobust, Examples) {
  auto tri = k3();
  EXPECT_TRUE(is_robust(tri, k3(), 2, edge_set()).yes());
  auto v = is_robust(tri, k3(), 2, {});
  EXPECT_FALSE(v.yes());
  EXPECT_EQ(v.reason, RobustVerdict::Reason::NonExtendable);
  EXPECT_EQ(v.subset, (std::vector<int>{0, 1}));
  EXPECT_EQ(v.nu, (PartialAssignment{{0, 0}, {1, 0}}));
  auto u = is_robust(templates::complete_graph(4), k3(), 0, {});
  EXPECT_EQ(u.reason, RobustVerdict::Reason::Unsatisfiable);
}

TEST(IsRobust, UpTo) {
  auto tri = k3();
  EXPECT_TRUE(is_robust_upto(tri, k3(), 2, edge_set()).yes());
  auto v = is_robust_upto(tri, k3(), 2, {});
  EXPECT_FALSE(v.yes());
  EXPECT_EQ(v.level, 2);
  EXPECT_TRUE(is_robust_upto(tri, k3(), 0, {}).yes());
  EXPECT_FALSE(is_robust_upto(templates::complete_graph(4), k3(), 0, {}).yes());
}

TEST(IsRobust, FewerElementsThanK) {
  // Vacuous subset quantifier: only satisfiability is tested.
  EXPECT_TRUE(is_robust(templates::complete_graph(2), k3(), 3, {}).yes());
  EXPECT_TRUE(brute_force_robust(templates::complete_graph(2), k3(), 3, {}).yes());
}

TEST(BruteForceRobust, AgreesOnExamples) {
  auto tri = k3();
  EXPECT_EQ(brute_force_robust(tri, k3(), 2, edge_set()), is_robust(tri, k3(), 2, edge_set()));
  EXPECT_EQ(brute_force_robust(tri, k3(), 2, {}), is_robust(tri, k3(), 2, {}));
  EXPECT_EQ(brute_force_robust(templates::complete_graph(4), k3(), 0, {}),
            is_robust(templates::complete_graph(4), k3(), 0, {}));
}

// The two library procedures and the definitional oracle agree.
TEST(IsRobust, OracleAgreement) {
  int yes = 0, no = 0;
  for (const auto& c : random_cases(240, 1234)) {
    auto fast = is_robust(c.b, c.a, c.k, c.F);
    auto slow = brute_force_robust(c.b, c.a, c.k, c.F);
    ASSERT_EQ(fast, slow) << to_string(fast) << " vs " << to_string(slow);
    ASSERT_EQ(fast.yes(), oracle::brute_robust(c.b, c.a, c.k, c.F));
    (fast.yes() ? yes : no)++;
  }
  // The sample exercises both outcomes.
  EXPECT_GT(yes, 20);
  EXPECT_GT(no, 20);
}

TEST(IsRobust, CounterexampleSoundness) {
  for (const auto& c : random_cases(240, 99)) {
    auto v = is_robust(c.b, c.a, c.k, c.F);
    if (v.reason != RobustVerdict::Reason::NonExtendable) continue;
    EXPECT_EQ(v.nu.domain(), v.subset);
    EXPECT_TRUE(oracle::brute_compatible(c.b, c.a, v.subset, v.nu.values(), c.F));
    EXPECT_FALSE(find_homomorphism(c.b, c.a, v.nu));
  }
}

TEST(IsRobust, MonotoneUnderProjection) {
  std::mt19937 rng(8);
  FormulaSet F = edge_set();
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    int n = 2 + trial % 5;
    auto b = oracle::random_structure(k3().signature(), n, 4, rng);
    int k = 1 + trial % 3;
    if (!is_robust(b, k3(), k, F).yes()) continue;
    ++checked;
    for (int l = 0; l <= k; ++l)
      EXPECT_TRUE(is_robust(b, k3(), l, project_types(F, k, l)).yes());
  }
  EXPECT_GT(checked, 10);
}

TEST(Compatibility, HomomorphismRestrictions) {
  for (const auto& c : random_cases(120, 5)) {
    if (c.k > c.b.size()) continue;
    CompatibilityChecker cc(c.b, c.a, c.F);
    for (const auto& h : oracle::all_homs(c.b, c.a))
      for_each_subset(c.b.size(), c.k, [&](const std::vector<int>& s) {
        std::vector<int> img;
        for (int x : s) img.push_back(h[x]);
        EXPECT_TRUE(cc.compatible(s, img));
      });
  }
}

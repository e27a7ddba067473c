#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "antcsp/error.hpp"
#include "antcsp/formula.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using oracle::brute_eval;

using namespace antcsp;

namespace antcsp {
void PrintTo(const PpFormula& f, std::ostream* os) { *os << to_string(f); }
}  // namespace antcsp

namespace {

PpFormula edge(int a, int b, int nf = 2) { return {nf, 0, {Atom::relation("E", {a, b})}}; }

// phi(x1,x2) = Ey E(x1,y) & E(y,x2)
PpFormula path2() {
  return {2, 1, {Atom::relation("E", {0, 2}), Atom::relation("E", {2, 1})}};
}

RelationalStructure k2() { return templates::complete_graph(2); }

PpFormula random_formula(const Signature& sig, int nf, int ne, int atoms, std::mt19937& rng) {
  PpFormula f{nf, ne, {}};
  int nv = nf + ne;
  if (nv == 0) return f;
  std::uniform_int_distribution<int> var(0, nv - 1), sym(0, static_cast<int>(sig.size()) - 1),
      coin(0, 9);
  for (int i = 0; i < atoms; ++i) {
    if (coin(rng) == 0) {
      f.atoms.push_back(Atom::eq(var(rng), var(rng)));
      continue;
    }
    const Symbol& s = sig[sym(rng)];
    std::vector<int> args(s.arity);
    for (int& a : args) a = var(rng);
    f.atoms.push_back(Atom::relation(s.name, args));
  }
  return f;
}

PpFormula rename_exist(const PpFormula& f, const std::vector<int>& perm) {
  PpFormula g = f;
  for (Atom& a : g.atoms)
    for (int& v : a.args)
      if (v >= f.num_free) v = f.num_free + perm[v - f.num_free];
  std::reverse(g.atoms.begin(), g.atoms.end());
  return g;
}

// Independent canonical form for Eq-free formulas: least sorted atom list
// over all renamings of the quantified variables.
std::vector<Atom> brute_canonical(const PpFormula& f) {
  std::vector<int> perm(f.num_exist);
  for (int i = 0; i < f.num_exist; ++i) perm[i] = i;
  std::vector<Atom> best;
  bool first = true;
  do {
    std::vector<Atom> atoms = rename_exist(f, perm).atoms;
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    if (first || atoms < best) best = atoms;
    first = false;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// The 6SAT clause x1|..|x6 chained into 3SAT clauses.
PpDefinitionSet chain6() {
  PpDefinitionSet d;
  d.source = Signature{{"R6_000000", 6}};
  d.target = templates::nsat(3).signature();
  // x1..x6 = 0..5, y1..y3 = 6..8
  d.defs["R6_000000"] = {6, 3,
                         {Atom::relation("R3_000", {0, 1, 6}),
                          Atom::relation("R3_100", {6, 2, 7}),
                          Atom::relation("R3_100", {7, 3, 8}),
                          Atom::relation("R3_100", {8, 4, 5})}};
  return d;
}

}  // namespace

TEST(EvalPp, Examples) {
  auto k3 = templates::complete_graph(3);
  std::vector<int> b00{0, 0};
  auto r = eval_pp(k3, path2(), b00);
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.witness, (std::vector<int>{1}));
  EXPECT_TRUE(eval_pp(k3, PpFormula{}, {}).holds);
  std::vector<int> b01{0, 1};
  EXPECT_FALSE(eval_pp(k2(), path2(), b01).holds);
}

TEST(EvalPp, BindingMismatch) {
  std::vector<int> one{0};
  EXPECT_THROW(eval_pp(k2(), path2(), one), InvalidArgument);
  std::vector<int> bad{0, 7};
  EXPECT_THROW(eval_pp(k2(), path2(), bad), InvalidArgument);
}

TEST(EvalPp, AgreesWithDirectEnumeration) {
  std::mt19937 rng(5);
  std::vector<RelationalStructure> ss = {templates::complete_graph(3), templates::cycle(4),
                                         templates::one_in_three(), templates::two_plus()};
  for (int trial = 0; trial < 300; ++trial) {
    const auto& s = ss[trial % ss.size()];
    int nf = trial % 3, ne = trial % 7;
    auto f = random_formula(s.signature(), nf, ne, 1 + trial % 5, rng);
    std::uniform_int_distribution<int> val(0, s.size() - 1);
    std::vector<int> binding(nf);
    for (int& b : binding) b = val(rng);
    std::vector<int> w;
    bool expect = brute_eval(s, f, binding, &w);
    auto got = eval_pp(s, f, binding);
    ASSERT_EQ(got.holds, expect) << to_string(f);
    if (expect) EXPECT_EQ(got.witness, w) << to_string(f);
  }
}

TEST(Instantiate, Examples) {
  FormulaSet F{edge(0, 1)};
  auto f2 = instantiate(F, 2);
  ASSERT_EQ(f2.size(), 4u);
  std::set<PpFormula> want{edge(0, 0), edge(0, 1), edge(1, 0), edge(1, 1)};
  EXPECT_EQ(std::set<PpFormula>(f2.begin(), f2.end()), want);
  auto f1 = instantiate(F, 1);
  ASSERT_EQ(f1.size(), 1u);
  EXPECT_EQ(f1[0], edge(0, 0, 1));
  EXPECT_TRUE(instantiate({}, 3).empty());
}

TEST(TypeOf, Examples) {
  auto tri = templates::complete_graph(3);
  FormulaSet F{edge(0, 1)};
  std::vector<int> ab{0, 1};
  auto t = type_of(tri, ab, F);
  std::set<PpFormula> want{edge(0, 1), edge(1, 0)};
  EXPECT_EQ(std::set<PpFormula>(t.members.begin(), t.members.end()), want);
  EXPECT_TRUE(type_of(tri, ab, {}).members.empty());

  StructureBuilder b(Signature{{"r", 3}}, 4);
  b.add(0, {0, 1, 2});
  FormulaSet R{{3, 0, {Atom::relation("r", {0, 1, 2})}}};
  std::vector<int> zw{2, 3};
  EXPECT_TRUE(type_of(b.build(), zw, R).members.empty());
}

// nu preserves every member of F_k true at b iff A satisfies the type at nu(b).
TEST(TypeOf, TypeEquivalenceProperty) {
  std::mt19937 rng(17);
  auto a = templates::complete_graph(3);
  FormulaSet F{edge(0, 1), path2()};
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2 + trial % 4, k = 1 + trial % 3;
    auto b = oracle::random_structure(a.signature(), n, 5, rng);
    std::uniform_int_distribution<int> el(0, n - 1), val(0, 2);
    std::vector<int> tup(k), img(k);
    for (int i = 0; i < k; ++i) {
      tup[i] = el(rng);
      img[i] = val(rng);
    }
    // Keep nu a function: equal elements get equal images.
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j)
        if (tup[i] == tup[j]) img[i] = img[j];
    bool lhs = true;
    for (const auto& phi : instantiate(F, k))
      if (brute_eval(b, phi, tup) && !brute_eval(a, phi, img)) lhs = false;
    auto tau = type_of(b, tup, F);
    EXPECT_EQ(lhs, brute_eval(a, tau.conjunction(), img));
  }
}

TEST(ProjectTypes, Examples) {
  auto e = project_types({}, 3, 2);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_TRUE(e[0].atoms.empty());
  FormulaSet F{edge(0, 1)};
  EXPECT_EQ(project_types(F, 2, 2).size(), 16u);
  auto s = project_types(F, 1, 0);
  ASSERT_EQ(s.size(), 2u);
  for (const auto& f : s) EXPECT_EQ(f.num_free, 0);
  EXPECT_THROW(project_types(F, 1, 2), InvalidArgument);
}

TEST(ClosureUnion, ComposesProjections) {
  FormulaSet F{edge(0, 1)};
  for (int k = 0; k <= 2; ++k) {
    std::set<PpFormula> want;
    for (int i = 0; i <= k; ++i)
      for (auto& f : project_types(F, k, i)) want.insert(f);
    auto got = closure_union(F, k);
    EXPECT_EQ(std::set<PpFormula>(got.begin(), got.end()), want);
    EXPECT_EQ(got.size(), want.size());
  }
  // Only the empty formula, once per arity.
  EXPECT_EQ(closure_union({}, 2).size(), 3u);
  auto c0 = closure_union(F, 0);
  ASSERT_EQ(c0.size(), 1u);
  EXPECT_EQ(c0[0], PpFormula{});
}

TEST(Canonicalize, IdempotentAndRenamingInvariant) {
  std::mt19937 rng(23);
  auto sig = templates::one_in_three().signature();
  for (int trial = 0; trial < 300; ++trial) {
    int ne = trial % 6;
    auto f = random_formula(sig, trial % 3, ne, 1 + trial % 5, rng);
    auto c = canonicalize(f);
    EXPECT_EQ(canonicalize(c), c) << to_string(f);
    std::vector<int> perm(ne);
    for (int i = 0; i < ne; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(canonicalize(rename_exist(f, perm)), c) << to_string(f);
  }
}

TEST(Translate, ClauseDefinitionShape) {
  auto defs = sat3_to_one_in_three();
  PpFormula clause{3, 0, {Atom::relation("R3_000", {0, 1, 2})}};
  auto t = translate_to_target(clause, defs);
  EXPECT_EQ(t.num_exist, 4);
  ASSERT_EQ(t.atoms.size(), 3u);
  EXPECT_EQ(to_string(t),
            "exists y1,y2,y3,y4: r_100(x1,y1,y2) & r_000(y2,x2,y3) & r_001(y3,y4,x3)");
  EXPECT_EQ(translate_to_target(PpFormula{}, defs), PpFormula{});
  PpFormula two{3, 0, {Atom::relation("R3_000", {0, 1, 2}), Atom::relation("R3_011", {2, 1, 0})}};
  auto t2 = translate_to_target(two, defs);
  EXPECT_EQ(t2.num_exist, 8);
  std::set<int> used;
  for (const auto& a : t2.atoms)
    for (int v : a.args)
      if (v >= 3) used.insert(v);
  EXPECT_EQ(used.size(), 8u);
  PpFormula missing{2, 0, {Atom::relation("E", {0, 1})}};
  EXPECT_THROW(translate_to_target(missing, defs), InvalidArgument);
}

TEST(Translate, PreservesSemanticsOn3Sat) {
  std::mt19937 rng(29);
  auto defs = sat3_to_one_in_three();
  auto sat = templates::nsat(3);
  auto oit = templates::signed_one_in_three();
  for (int trial = 0; trial < 150; ++trial) {
    int nf = 1 + trial % 3;
    auto f = random_formula(sat.signature(), nf, trial % 3, 1 + trial % 3, rng);
    auto t = translate_to_target(f, defs);
    oracle::for_each_map(nf, 2, [&](const std::vector<int>& b) {
      EXPECT_EQ(eval_pp(sat, f, b).holds, eval_pp(oit, t, b).holds) << to_string(f);
    });
  }
}

TEST(Claws, WorkedExampleAccepted) {
  auto defs = sat3_to_one_in_three();
  // free v1..v4 = 0..3; y1,x2,y3,x3 = 4..7
  PpFormula talon{4, 4,
                  {Atom::relation("r_100", {0, 4, 1}), Atom::relation("r_000", {1, 5, 6}),
                   Atom::relation("r_001", {6, 2, 7})}};
  EXPECT_TRUE(is_claw(defs, {}, 4, 12, talon));

  // Wrist sigma = clause(v1,x2,x3) from F, translated with four fresh variables.
  FormulaSet F{{3, 0, {Atom::relation("R3_000", {0, 1, 2})}}};
  PpFormula claw = talon;
  claw.num_exist = 8;
  claw.atoms.push_back(Atom::relation("r_100", {0, 8, 9}));
  claw.atoms.push_back(Atom::relation("r_000", {9, 5, 10}));
  claw.atoms.push_back(Atom::relation("r_001", {10, 11, 7}));
  EXPECT_TRUE(is_claw(defs, F, 4, 12, claw));
  // Without the wrist clause in F the formula needs two talon copies
  // and a quantified v-element of a non-talon copy, so fails at k=1.
  EXPECT_FALSE(is_claw(defs, {}, 1, 12, claw));
}

TEST(Claws, TrivialCase) {
  auto e = enumerate_claws(sat3_to_one_in_three(), {}, 0, 0);
  ASSERT_EQ(e.claws.size(), 1u);
  EXPECT_TRUE(e.claws[0].talon.empty());
  EXPECT_EQ(e.claws[0].formula, PpFormula{});
}

// Claws of arity 1 and bound 0 over the 6SAT chain: one talon copy with
// identified open variables and one variable left free.
TEST(Claws, ChainCountMatchesDirectEnumeration) {
  auto defs = chain6();
  const PpFormula& rho = defs.at("R6_000000");
  std::set<std::vector<Atom>> distinct;
  // All set partitions of the 6 open variables, by brute-force labelling.
  oracle::for_each_map(6, 6, [&](const std::vector<int>& lab) {
    // Only restricted growth strings.
    int mx = -1;
    for (int v : lab) {
      if (v > mx + 1) return;
      mx = std::max(mx, v);
    }
    int classes = mx + 1;
    int nv = classes + 3;
    for (int keep = 0; keep < nv; ++keep) {
      // Variable ids: class c -> c, y_i -> classes + i; then move keep to 0.
      auto id = [&](int v) {
        int raw = v < 6 ? lab[v] : classes + (v - 6);
        if (raw == keep) return 0;
        return raw < keep ? raw + 1 : raw;
      };
      PpFormula f{1, nv - 1, {}};
      for (const Atom& a : rho.atoms) {
        std::vector<int> args;
        for (int v : a.args) args.push_back(id(v));
        f.atoms.push_back(Atom::relation(a.rel, args));
      }
      distinct.insert(brute_canonical(f));
    }
  });
  auto e = enumerate_claws(defs, {}, 1, 0);
  EXPECT_EQ(e.claws.size(), distinct.size());
  for (const auto& c : e.claws) EXPECT_TRUE(is_claw(defs, {}, 1, 0, c.formula));
}

TEST(Claws, EnumeratedPassMembership) {
  auto defs = sat3_to_one_in_three();
  FormulaSet F{{3, 0, {Atom::relation("R3_000", {0, 1, 2})}}};
  for (auto [k, l] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}}) {
    auto e = enumerate_claws(defs, F, k, l);
    for (const auto& c : e.claws)
      ASSERT_TRUE(is_claw(defs, F, k, l, c.formula)) << k << " " << l << " " << to_string(c.formula);
  }
}

TEST(Claws, MembershipRejectsNonClaws) {
  auto defs = sat3_to_one_in_three();
  // A lone 1-in-3 atom is not a union of definition copies.
  PpFormula lone{3, 0, {Atom::relation("r_000", {0, 1, 2})}};
  EXPECT_FALSE(is_claw(defs, {}, 3, 3, lone));
  // Arity mismatch.
  EXPECT_FALSE(is_claw(defs, {}, 2, 3, PpFormula{}));
}

TEST(Theory, Examples) {
  FormulaSet F{edge(0, 1)};
  auto th = kFq_theory(k2(), 2, F);
  TypeFormula e12{2, {edge(0, 1)}};
  auto has = [&](const std::vector<QuasiEquation>& t, const TypeFormula& s, const Atom& a) {
    for (const auto& q : t)
      if (q.premise == s && q.conclusion == a) return true;
    return false;
  };
  EXPECT_TRUE(has(th, e12, Atom::relation("E", {1, 0})));
  TypeFormula empty{2, {}};
  EXPECT_TRUE(has(th, empty, Atom::eq(0, 0)));
  EXPECT_TRUE(has(th, e12, Atom::eq(1, 1)));
  auto th3 = kFq_theory(templates::complete_graph(3), 2, F);
  EXPECT_FALSE(has(th3, empty, Atom::relation("E", {0, 1})));
  // Every listed quasi-equation holds at every tuple.
  for (const auto& q : th3) {
    oracle::for_each_map(2, 3, [&](const std::vector<int>& t) {
      if (!brute_eval(templates::complete_graph(3), q.premise.conjunction(), t)) return;
      PpFormula c{2, 0, {q.conclusion}};
      EXPECT_TRUE(brute_eval(templates::complete_graph(3), c, t));
    });
  }
}

#include <gtest/gtest.h>

#include <random>

#include "antcsp/error.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using namespace antcsp;

namespace {

RelationalStructure triangle() { return templates::complete_graph(3); }

RelationalStructure one_in_three_gadget() {
  // r(x,y,z), r(x,y,w) with x,y,z,w = 0,1,2,3
  StructureBuilder b(Signature{{"r", 3}}, 4);
  b.add(0, {0, 1, 2});
  b.add(0, {0, 1, 3});
  return b.build();
}

}  // namespace

TEST(Structure, CanonicalRelations) {
  StructureBuilder b(Signature{{"E", 2}}, 3);
  b.add(0, {2, 1});
  b.add(0, {0, 1});
  b.add(0, {2, 1});
  auto s = b.build();
  ASSERT_EQ(s.relation(0).size(), 2u);
  EXPECT_EQ(s.relation(0)[0][0], 0);
  EXPECT_EQ(s.relation(0)[1][0], 2);
  EXPECT_TRUE(s.has(0, std::vector<int>{2, 1}));
  EXPECT_FALSE(s.has(0, std::vector<int>{1, 2}));
}

TEST(Structure, RejectsBadInput) {
  EXPECT_THROW(Signature({{"E", 2}, {"E", 3}}), InvalidArgument);
  EXPECT_THROW(Signature({{"E", 0}}), InvalidArgument);
  EXPECT_THROW(RelationalStructure(Signature{{"E", 2}}, 2, {{0, 2}}), InvalidArgument);
}

TEST(FindHomomorphism, TriangleWithSeed) {
  auto h = find_homomorphism(triangle(), templates::complete_graph(3), {{0, 0}, {1, 1}});
  ASSERT_TRUE(h);
  EXPECT_EQ(h->map, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(h->hyperedges_checked, 6u);
}

TEST(FindHomomorphism, EmptyInstance) {
  RelationalStructure empty(Signature{{"E", 2}}, 0, {{}});
  auto h = find_homomorphism(empty, templates::complete_graph(3));
  ASSERT_TRUE(h);
  EXPECT_TRUE(h->map.empty());
}

TEST(FindHomomorphism, K4ToK3Absent) {
  EXPECT_FALSE(find_homomorphism(templates::complete_graph(4), templates::complete_graph(3)));
  EXPECT_TRUE(oracle::all_homs(templates::complete_graph(4), templates::complete_graph(3)).empty());
}

TEST(FindHomomorphism, Errors) {
  RelationalStructure other(Signature{{"F", 2}}, 1, {{}});
  EXPECT_THROW(find_homomorphism(other, triangle()), InvalidArgument);
  EXPECT_THROW(find_homomorphism(triangle(), triangle(), {{0, 5}}), InvalidArgument);
}

TEST(FindHomomorphism, BudgetExceeded) {
  budget::Scope scope(5);
  EXPECT_THROW(enumerate_homomorphisms(templates::cycle(6), templates::complete_graph(3)),
               BudgetExceeded);
}

TEST(EnumerateHomomorphisms, Counts) {
  EXPECT_EQ(enumerate_homomorphisms(triangle(), templates::complete_graph(3)).size(), 6u);
  RelationalStructure point(Signature{{"E", 2}}, 1, {{}});
  EXPECT_EQ(enumerate_homomorphisms(point, templates::complete_graph(3)).size(), 3u);
  EXPECT_TRUE(enumerate_homomorphisms(templates::complete_graph(4),
                                      templates::complete_graph(3)).empty());
}

TEST(EnumerateHomomorphisms, LexicographicAndMatchesOracle) {
  std::mt19937 rng(7);
  std::vector<RelationalStructure> temps = {templates::complete_graph(2),
                                            templates::complete_graph(3)};
  for (int trial = 0; trial < 150; ++trial) {
    const auto& a = temps[trial % 2];
    auto b = oracle::random_structure(a.signature(), 1 + trial % 6, 6, rng);
    std::vector<std::vector<int>> got;
    for (auto& h : enumerate_homomorphisms(b, a)) got.push_back(h.map);
    EXPECT_EQ(got, oracle::all_homs(b, a));
  }
}

// find_homomorphism(B, A, s) succeeds iff some homomorphism extends s.
TEST(FindHomomorphism, SeededAgreesWithEnumeration) {
  std::mt19937 rng(11);
  std::vector<RelationalStructure> temps = {templates::complete_graph(3),
                                            templates::one_in_three()};
  for (int trial = 0; trial < 200; ++trial) {
    const auto& a = temps[trial % 2];
    int n = 1 + trial % 6;
    auto b = oracle::random_structure(a.signature(), n, 5, rng);
    auto homs = oracle::all_homs(b, a);
    PartialAssignment seed;
    std::uniform_int_distribution<int> el(0, n - 1), val(0, a.size() - 1);
    int sz = trial % 3;
    for (int i = 0; i < sz; ++i) seed.set(el(rng), val(rng));
    const std::vector<int>* least = nullptr;
    for (auto& h : homs) {
      bool ext = true;
      for (auto [x, v] : seed.entries()) ext &= h[x] == v;
      if (ext) {
        least = &h;
        break;
      }
    }
    auto got = find_homomorphism(b, a, seed);
    ASSERT_EQ(got.has_value(), least != nullptr);
    if (got) EXPECT_EQ(got->map, *least);
  }
}

TEST(Quotient, Examples) {
  auto g = templates::complete_graph(2);
  auto q = quotient(g, {{0}, {1}});
  EXPECT_EQ(q.structure, g);
  EXPECT_EQ(q.class_map, (std::vector<int>{0, 1}));

  StructureBuilder b(Signature{{"E", 2}}, 2);
  b.add(0, {0, 1});
  auto q2 = quotient(b.build(), {{0, 1}});
  EXPECT_EQ(q2.structure.size(), 1);
  EXPECT_TRUE(q2.structure.has(0, std::vector<int>{0, 0}));

  auto q3 = quotient(one_in_three_gadget(), {{0}, {1}, {2, 3}});
  EXPECT_EQ(q3.structure.size(), 3);
  EXPECT_EQ(q3.structure.relation(0).size(), 1u);
}

TEST(Quotient, MalformedPartition) {
  auto g = templates::complete_graph(3);
  EXPECT_THROW(quotient(g, {{0, 1}}), InvalidArgument);
  EXPECT_THROW(quotient(g, {{0, 1}, {1, 2}}), InvalidArgument);
  EXPECT_THROW(quotient(g, {{0, 1, 2, 3}}), InvalidArgument);
}

// h o q is a homomorphism whenever h is one from the quotient.
TEST(Quotient, CompositionProperty) {
  std::mt19937 rng(3);
  auto a = templates::complete_graph(3);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + trial % 5;
    auto b = oracle::random_structure(a.signature(), n, 5, rng);
    std::vector<int> key(n);
    std::uniform_int_distribution<int> k(0, n - 1);
    for (int& x : key) x = k(rng);
    auto q = quotient_by_key(b, key);
    for (auto& h : enumerate_homomorphisms(q.structure, a)) {
      std::vector<int> comp(n);
      for (int x = 0; x < n; ++x) comp[x] = h.map[q.class_map[x]];
      EXPECT_TRUE(oracle::maps_hyperedges(b, a, comp));
    }
  }
}

TEST(Determinism, RepeatedCallsIdentical) {
  auto b = templates::cycle(5);
  auto a = templates::complete_graph(3);
  auto h1 = enumerate_homomorphisms(b, a);
  auto h2 = enumerate_homomorphisms(b, a);
  ASSERT_EQ(h1.size(), h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) EXPECT_EQ(h1[i].map, h2[i].map);
}

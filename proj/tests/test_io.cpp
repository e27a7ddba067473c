#include <gtest/gtest.h>

#include <random>

#include "antcsp/error.hpp"
#include "antcsp/io.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using namespace antcsp;
using io::json;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, StructureRoundTrip) {
  std::mt19937 rng(2);
  for (auto a : {templates::complete_graph(3), templates::signed_one_in_three(), templates::two_plus()}) {
    for (int i = 0; i < 10; ++i) {
      auto b = oracle::random_structure(a.signature(), 1 + static_cast<int>(rng() % 5), 3, rng);
      auto back = io::structure_from_json(io::to_json(b));
      EXPECT_EQ(back, b);
      EXPECT_EQ(io::to_json(back).dump(), io::to_json(b).dump());
    }
  }
}

TEST(Io, LabelledUniverse) {
  auto j = io::parse(R"({"signature":[{"name":"E","arity":2}],"universe":["a","b","c"],
                         "relations":{"E":[["a","b"],[1,2]]}})");
  auto s = io::structure_from_json(j);
  EXPECT_EQ(s.size(), 3);
  EXPECT_EQ(s.relation("E").size(), 2u);
  EXPECT_EQ(s.label(1), "b");
  EXPECT_EQ(io::to_json(s)["universe"], json({"a", "b", "c"}));
}

TEST(Io, PositionPreciseErrors) {
  std::string oob = R"({"signature":[{"name":"E","arity":2}],"universe":3,"relations":{"E":[[0,1],[1,3]]}})";
  EXPECT_EQ(error_of([&] { io::structure_from_json(io::parse(oob)); }),
            "/relations/E/1/1: element 3 out of range 0..2");
  std::string arity = R"({"signature":[{"name":"E","arity":2}],"universe":3,"relations":{"E":[[0]]}})";
  EXPECT_EQ(error_of([&] { io::structure_from_json(io::parse(arity)); }),
            "/relations/E/0: tuple of length 1, arity is 2");
  std::string sym = R"({"signature":[],"universe":1,"relations":{"F":[]}})";
  EXPECT_EQ(error_of([&] { io::structure_from_json(io::parse(sym)); }),
            "/relations/F: symbol not in the signature");
  std::string syntax = "{\n  \"universe\": 3,\n  oops\n}";
  std::string msg = error_of([&] { io::parse(syntax, "k3.json"); });
  EXPECT_EQ(msg.rfind("k3.json:3:3: parse error", 0), 0u) << msg;
  EXPECT_EQ(error_of([&] { io::formula_from_json(io::parse(R"({"free":["x"],"atoms":[{"rel":"E","args":["x","z"]}]})")); }),
            "/atoms/0/args/1: undeclared variable 'z'");
}

TEST(Io, FormulaRoundTrip) {
  auto j = io::parse(R"({"free":["x1"],"exists":["y"],"atoms":[{"rel":"E","args":["x1","y"]},{"eq":["x1","y"]}]})");
  PpFormula f = io::formula_from_json(j);
  EXPECT_EQ(f.num_free, 1);
  EXPECT_EQ(f.num_exist, 1);
  ASSERT_EQ(f.atoms.size(), 2u);
  EXPECT_TRUE(f.atoms[1].is_eq());
  EXPECT_EQ(io::formula_from_json(io::to_json(f)), f);
  FormulaSet F = fundamental_relations(templates::signed_one_in_three().signature());
  EXPECT_EQ(io::formulas_from_json(io::to_json(F)), F);
  EXPECT_EQ(io::formulas_from_json(j).size(), 1u);
}

TEST(Io, OtherFormats) {
  auto sys = io::linear_system_from_json(
      io::parse(R"({"modulus":2,"g":1,"vars":3,"eqs":[{"terms":[[0,1],[1,1],[2,-1]],"rhs":1}]})"));
  EXPECT_EQ(sys.num_vars, 3);
  EXPECT_EQ(sys.eqs[0].terms[2], (std::pair<int, int>{2, -1}));
  EXPECT_EQ(io::linear_system_from_json(io::to_json(sys)), sys);

  OperationTable maj{3, 2, {0, 0, 0, 1, 0, 1, 1, 1}};
  EXPECT_EQ(io::operation_from_json(io::to_json(maj)), maj);
  EXPECT_EQ(error_of([] { io::operation_from_json(io::parse(R"({"arity":2,"domain":2,"table":[0,1,1]})")); }),
            "/table: expected 4 entries, found 3");

  PartialAssignment nu{{0, 1}, {3, 0}};
  EXPECT_EQ(io::assignment_from_json(io::to_json(nu)), nu);

  Strategy s;
  s.j = 1;
  s.insert({}, {});
  s.insert({0, 2}, {1, 0});
  EXPECT_EQ(io::strategy_from_json(io::to_json(s)), s);

  auto defs = sat3_to_one_in_three();
  auto back = io::definitions_from_json(io::to_json(defs));
  EXPECT_EQ(back.defs, defs.defs);
  EXPECT_EQ(back.target, defs.target);

  EXPECT_EQ(io::identities_from_string("wnu:3").arities, std::vector<int>{3});
  EXPECT_FALSE(io::identities_from_string("quasi-wnu:4").idempotent);
  EXPECT_EQ(io::identities_from_string("bwpair").arities, (std::vector<int>{3, 4}));
  EXPECT_THROW(io::identities_from_string("wnu"), InvalidArgument);
  EXPECT_THROW(io::identities_from_string("foo:3"), InvalidArgument);
  EXPECT_THROW(io::identities_from_string("wnu:3x"), InvalidArgument);
}

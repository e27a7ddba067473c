// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "antcsp/consistency.hpp"
#include "antcsp/error.hpp"
#include "antcsp/formula.hpp"
#include "antcsp/polymorphisms.hpp"
#include "antcsp/reductions.hpp"
#include "antcsp/reflection.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"
#include "oracles.hpp"

using namespace antcsp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run so counts stay meaningful.
struct Tally {
  Outcome out;
  void require(bool cond, const std::string& what) {
    if (!cond && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

struct Case {
  RelationalStructure b, a;
  int k;
  FormulaSet F;
};

std::vector<Case> oracle_cases() {
  std::mt19937 rng(2024);
  std::vector<RelationalStructure> temps = {templates::complete_graph(2),
                                            templates::complete_graph(3),
                                            templates::one_in_three()};
  std::vector<Case> out;
  for (int i = 0; i < 240; ++i) {
    const auto& a = temps[i % 3];
    int n = 1 + static_cast<int>(rng() % 6);
    int tries = a.signature()[0].arity == 3 ? 3 : 5;
    auto b = oracle::random_structure(a.signature(), n, tries, rng);
    int k = static_cast<int>(rng() % 4);
    FormulaSet F = rng() % 2 ? fundamental_relations(a.signature()) : FormulaSet{};
    out.push_back({b, a, k, F});
  }
  return out;
}

SignedClauseInstance cnf(int vars, std::vector<std::vector<int>> dimacs_style) {
  SignedClauseInstance inst{vars, 3, {}};
  for (const auto& c : dimacs_style) {
    std::vector<Literal> cl;
    for (int x : c) cl.push_back({std::abs(x) - 1, x < 0});
    inst.clauses.push_back(cl);
  }
  return inst;
}

bool brute_sat(const SignedClauseInstance& inst) { return !oracle::clause_solutions(inst).empty(); }

RelationalStructure graph_from_mask(int n, unsigned mask) {
  std::vector<std::pair<int, int>> edges;
  int bit = 0;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v, ++bit)
      if (mask >> bit & 1u) edges.push_back({u, v});
  return templates::graph(n, edges);
}

// Every clause over `vars` variables, in a fixed order.
std::vector<std::vector<Literal>> all_clauses(int vars) {
  std::vector<std::vector<Literal>> out;
  int lits = 2 * vars;
  for (int a = 0; a < lits; ++a)
    for (int b = 0; b < lits; ++b)
      for (int c = 0; c < lits; ++c)
        out.push_back({{a / 2, a % 2 == 1}, {b / 2, b % 2 == 1}, {c / 2, c % 2 == 1}});
  return out;
}

Outcome oracle_equivalence() {
  Tally t;
  int yes = 0, no = 0;
  for (const auto& c : oracle_cases()) {
    auto fast = is_robust(c.b, c.a, c.k, c.F);
    auto slow = brute_force_robust(c.b, c.a, c.k, c.F);
    t.require(fast.yes() == slow.yes(), "is_robust disagrees with brute_force_robust: " + to_string(fast));
    t.require(slow.yes() == oracle::brute_robust(c.b, c.a, c.k, c.F), "brute force disagrees with definition");
    (fast.yes() ? yes : no)++;
  }
  t.require(yes > 0 && no > 0, "sample lacks one outcome");
  t.out.detail = t.out.pass ? "240 instances agree (" + std::to_string(yes) + " robust, " +
                                  std::to_string(no) + " not)"
                            : t.out.detail;
  return t.out;
}

Outcome gottlob_k1() {
  Tally t;
  std::mt19937 rng(7);
  auto tmpl = templates::nsat(6);
  int sat = 0, unsat = 0;
  for (int i = 0; i < 20; ++i) {
    int vars = 1 + static_cast<int>(rng() % 4);
    int clauses = 1 + static_cast<int>(rng() % 3);
    auto src = oracle::random_clauses(vars, clauses, 3, rng);
    if (i % 5 == 4) {
      // One random clause plus a contradictory pair on a random variable.
      src.clauses.resize(1);
      int x = static_cast<int>(rng() % vars);
      src.clauses.push_back({{x, false}, {x, false}, {x, false}});
      src.clauses.push_back({{x, true}, {x, true}, {x, true}});
    }
    auto out = gottlob_amplify(src, 1);
    t.require(out.clauses.size() == 27 * src.clauses.size() && out.width == 6,
              "expansion factor differs from 27");
    auto s = to_structure(out);
    bool src_sat = brute_sat(src);
    t.require(src_sat == find_homomorphism(s, tmpl).has_value(), "satisfiability not preserved");
    if (src_sat) {
      ++sat;
      t.require(brute_force_robust(s, tmpl, 1, {}).yes(), "output not (1,empty)-robust: " + dimacs_export(src));
    } else {
      ++unsat;
    }
  }
  if (t.out.pass)
    t.out.detail = "factor 27; 20 sources (" + std::to_string(sat) + " sat, " + std::to_string(unsat) +
                   " unsat) behave";
  return t.out;
}

// Fixed tiny 3SAT sources: random ones plus hand-picked repeats and an unsatisfiable pair.
std::vector<SignedClauseInstance> chain_sources(int max_vars, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<SignedClauseInstance> out = {cnf(1, {{1, 1, 1}, {-1, -1, -1}}), cnf(2, {{1, -2, 2}})};
  while (static_cast<int>(out.size()) < count) {
    int vars = 1 + static_cast<int>(rng() % max_vars);
    out.push_back(oracle::random_clauses(vars, 1 + static_cast<int>(rng() % 2), 3, rng));
  }
  return out;
}

Outcome chain_k2() {
  Tally t;
  auto tmpl = templates::nsat(3);
  int sat = 0, unsat = 0;
  for (const auto& src : chain_sources(3, 16, 3)) {
    auto out = reduce_to_3sat(gottlob_amplify(src, 2));
    auto v = decomposed_robust(out.structure, tmpl, 2, {}, out.layout);
    if (brute_sat(src)) {
      ++sat;
      t.require(v.yes(), "not (2,empty)-robust: " + dimacs_export(src) + " " + to_string(v));
    } else {
      ++unsat;
      t.require(v.reason == RobustVerdict::Reason::Unsatisfiable &&
                    !solve_clauses(output_clauses(out)).has_value(),
                "unsatisfiable source gave satisfiable output");
    }
  }
  if (t.out.pass)
    t.out.detail = std::to_string(sat) + " sat sources robust, " + std::to_string(unsat) + " unsat stay unsat";
  return t.out;
}

Outcome chain_k3_fundamental() {
  Tally t;
  auto tmpl = templates::nsat(3);
  FormulaSet fund = fundamental_relations(tmpl.signature());
  int checked = 0, failed = 0;
  std::string bad;
  std::vector<SignedClauseInstance> sources = {cnf(2, {{1, 2, 2}}), cnf(2, {{2, 1, -2}}),
                                               cnf(2, {{1, -2, 1}}), cnf(1, {{1, 1, -1}}),
                                               cnf(2, {{1, 2, -1}, {-2, -1, 2}}), cnf(2, {{-1, 2, -2}})};
  for (const auto& src : sources) {
    if (!brute_sat(src)) continue;
    ++checked;
    auto out = reduce_to_3sat(gottlob_amplify(src, 3));
    auto v = decomposed_robust(out.structure, tmpl, 3, fund, out.layout);
    if (!v.yes()) {
      ++failed;
      std::string text = dimacs_export(src);
      bad += " [" + text.substr(text.find('\n') + 1) + "]";
    }
  }
  t.require(failed == 0, std::to_string(failed) + "/" + std::to_string(checked) +
                             " sources not (3,fundamental)-robust:" + bad);
  if (t.out.pass) t.out.detail = std::to_string(checked) + " sources robust";
  for (char& c : t.out.detail)
    if (c == '\n') c = ';';
  return t.out;
}

Outcome boundary_n4() {
  Tally t;
  auto tmpl = templates::nsat(4);
  std::vector<SignedClauseInstance> sources = {cnf(3, {{1, -2, 3}}), cnf(3, {{-1, -2, -3}, {1, 2, -3}})};
  for (const auto& src : sources) {
    auto out = reduce_to_width(gottlob_amplify(src, 3), 4);
    t.require(decomposed_robust(out.structure, tmpl, 3, {}, out.layout).yes(),
              "pipeline output not (3,empty)-robust");
    t.require(!decomposed_robust(out.structure, tmpl, 4, {}, out.layout).yes(),
              "pipeline output is (4,empty)-robust");
  }
  std::mt19937 rng(17);
  int instances = 0;
  for (int i = 0; i < 40; ++i) {
    // Clauses over four distinct variables; a tautological clause would be trivially robust.
    int vars = 4 + static_cast<int>(rng() % 3);
    SignedClauseInstance src{vars, 4, {}};
    for (int c = 1 + static_cast<int>(rng() % 2); c > 0; --c) {
      std::vector<int> order(vars);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<Literal> cl;
      for (int p = 0; p < 4; ++p) cl.push_back({order[p], rng() % 2 == 1});
      src.clauses.push_back(cl);
    }
    auto s = to_structure(src);
    t.require(!brute_force_robust(s, tmpl, 4, {}).yes(), "4SAT instance with clauses is (4,empty)-robust");
    ++instances;
  }
  SignedClauseInstance none{4, 4, {}};
  t.require(brute_force_robust(to_structure(none), tmpl, 4, {}).yes(), "empty instance not robust");
  if (t.out.pass)
    t.out.detail = "2 pipeline outputs 3-robust and not 4-robust; " + std::to_string(instances) +
                   " random 4SAT instances fail k=4";
  return t.out;
}

Outcome reflection_suite() {
  Tally t;
  auto one_in_three = templates::one_in_three();
  PpFormula shared{2, 2, {Atom::relation("r", {2, 3, 0}), Atom::relation("r", {2, 3, 1})}};
  StructureBuilder gb(Signature{{"r", 3}}, 4);
  gb.add(0, {0, 1, 2});
  gb.add(0, {0, 1, 3});
  auto gadget = gb.build();
  auto g = one_step_reflection(gadget, one_in_three, 2, {shared});
  t.require(g.quotient_map[2] == g.quotient_map[3] && g.structure.size() == 3, "gadget: z,w not merged");

  std::mt19937 rng(5);
  std::vector<RelationalStructure> temps = {templates::complete_graph(2), templates::complete_graph(3),
                                            one_in_three};
  int tested = 0, robust = 0;
  for (int i = 0; i < 150; ++i) {
    const auto& a = temps[i % 3];
    int ar = a.signature()[0].arity;
    int n = 2 + static_cast<int>(rng() % 3);
    auto b = oracle::random_structure(a.signature(), n, ar == 3 ? 2 : 3, rng);
    int k = std::max(2, ar) + static_cast<int>(rng() % 2);
    if (b.size() < k) k = std::max(2, b.size());
    FormulaSet F = rng() % 2 ? fundamental_relations(a.signature()) : FormulaSet{};
    ++tested;
    auto one = one_step_reflection(b, a, k, F);
    auto full = full_reflection(b, a, k, F);
    auto count = count_homomorphisms(b, a);
    t.require(count == count_homomorphisms(one.structure, a) && count == count_homomorphisms(full.structure, a),
              "homomorphism count changed");
    if (k < std::max(2, ar) || !is_robust_upto(b, a, k, F).yes()) continue;
    ++robust;
    t.require(one.structure == full.structure && one.quotient_map == full.quotient_map,
              "robust input: one-step differs from full reflection");
    t.require(implied_constraints(one.structure, a).empty(), "robust input: reflection has implied constraints");
    t.require(is_robust(one.structure, a, k, F).yes(), "robust input: reflection not robust");
  }
  t.require(robust > 0, "no robust inputs sampled");
  if (t.out.pass)
    t.out.detail = "gadget merges z,w; " + std::to_string(tested) + " inputs keep |Hom|, " +
                   std::to_string(robust) + " robust ones reflect in one step";
  return t.out;
}

Outcome pp_gap() {
  Tally t;
  auto defs = sat3_to_one_in_three();
  auto target = templates::signed_one_in_three();
  auto source = templates::nsat(3);
  FormulaSet claws = claw_formula_set(defs, {}, 1, 3);
  int total = 0, robust = 0;
  for (int vars = 1; vars <= 3; ++vars) {
    auto cls = all_clauses(vars);
    std::vector<SignedClauseInstance> insts = {{vars, 3, {}}};
    for (std::size_t i = 0; i < cls.size(); ++i) {
      insts.push_back({vars, 3, {cls[i]}});
      for (std::size_t j = i; j < cls.size(); ++j) insts.push_back({vars, 3, {cls[i], cls[j]}});
    }
    for (const auto& src : insts) {
      ++total;
      auto b = to_structure(src);
      auto out = pp_reduce(b, defs);
      bool sat = brute_sat(src);
      t.require(sat == find_homomorphism(out.structure, target).has_value(), "sat not preserved: " + dimacs_export(src));
      if (!sat || !is_robust_upto(b, source, 3, {}).yes()) continue;
      ++robust;
      t.require(is_robust(out.structure, target, 1, claws).yes(),
                "robustness not transferred: " + dimacs_export(src));
    }
  }
  t.require(robust > 0, "no robust sources");
  if (t.out.pass)
    t.out.detail = std::to_string(total) + " sources keep sat; " + std::to_string(robust) +
                   " (<=3,empty)-robust ones give (1," + std::to_string(claws.size()) + " claws)-robust outputs";
  return t.out;
}

Outcome polymorphisms() {
  Tally t;
  auto k3 = templates::complete_graph(3);
  t.require(!find_polymorphism(k3, identities::wnu(3)), "K3 has a 3-ary WNU");
  t.require(!find_polymorphism(k3, identities::wnu(4)), "K3 has a 4-ary WNU");
  auto k2 = templates::complete_graph(2);
  auto maj = find_polymorphism(k2, identities::nu(3));
  t.require(maj && check_preservation((*maj)[0], k2) && check_identities(*maj, identities::nu(3)),
            "K2 majority not found");
  auto z2 = templates::linear(2, 1);
  OperationTable x{3, 2, {}};
  for (int c = 0; c < 8; ++c) x.table.push_back((c >> 2 ^ c >> 1 ^ c) & 1);
  for (const char* sym : {"r_0", "r_1", "s_0", "s_1"}) t.require(z2.signature().find(sym) >= 0, "missing symbol");
  t.require(check_identities({x}, identities::wnu(3)) && check_preservation(x, z2),
            "xor is not a WNU polymorphism of Z2");
  t.require(!find_polymorphism(templates::one_in_three(), identities::wnu(3)), "1-in-3 has a 3-ary WNU");
  if (t.out.pass) t.out.detail = "K3 no WNU(3,4); K2 majority; xor WNU on Z2; 1-in-3 no WNU(3)";
  return t.out;
}

Outcome strategies() {
  Tally t;
  auto k2 = templates::complete_graph(2);
  t.require(!establish_consistency(templates::cycle(3), k2, 2), "C3 -> K2 accepted");
  t.require(establish_consistency(templates::cycle(4), k2, 2).has_value(), "C4 -> K2 rejected");
  int families = 0;
  for (const auto& c : oracle_cases()) {
    if (c.k < 1 || !is_robust(c.b, c.a, c.k, c.F).yes()) continue;
    for (int j = 1; j <= c.k; ++j) {
      auto chk = check_strategy(candidate_family(c.b, c.a, c.k, c.F, j), c.b, c.a);
      t.require(chk.ok(), "candidate family fails: " + to_string(chk));
      ++families;
    }
  }
  FormulaSet fund = fundamental_relations(k2.signature());
  int graphs = 0, accepted = 0, rejected = 0;
  for (int n = 1; n <= 6; ++n)
    for (unsigned mask = 0; mask < (1u << (n * (n - 1) / 2)); ++mask) {
      auto g = graph_from_mask(n, mask);
      ++graphs;
      bool sat = find_homomorphism(g, k2).has_value();
      for (const FormulaSet& F : {FormulaSet{}, fund}) {
        auto v = ant_separator(g, k2, 3, F, 2);
        if (!sat) {
          t.require(v == SeparatorVerdict::Reject, "unsatisfiable graph accepted");
          ++rejected;
        } else if (is_robust(g, k2, 3, F).yes()) {
          t.require(v == SeparatorVerdict::Accept, "robust graph rejected");
          ++accepted;
        }
      }
    }
  if (t.out.pass)
    t.out.detail = std::to_string(families) + " candidate families pass; " + std::to_string(graphs) +
                   " graphs: " + std::to_string(accepted) + " robust accepted, " + std::to_string(rejected) +
                   " unsat rejected";
  return t.out;
}

Outcome affine_chain() {
  Tally t;
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> coin(0, 1);
  int systems = 0;
  for (int m : {2, 3}) {
    for (int i = 0; i < 24; ++i) {
      int vars = 1 + i % 4;
      if (m == 3 && vars > 2) vars = 1 + i % 2;
      std::uniform_int_distribution<int> var(0, vars - 1);
      LinearSystem sys{m, 1, vars, {}};
      for (int e = 0; e < 1 + i % 3; ++e)
        sys.eqs.push_back({{{var(rng), 1}, {var(rng), 1}, {var(rng), coin(rng) ? 1 : -1}}, coin(rng)});
      ++systems;
      auto base = oracle::linear_count(sys);
      auto tripled = triple_variables(sys);
      auto sp = linear_solution_space(tripled);
      if (m == 2 && base > 0) {
        int d = linear_solution_space(sys).dimension;
        t.require(sp.dimension == 3 * d + 2 * (vars - d), "tripled dimension differs from 3d+2(|X|-d)");
      }
      unsigned long long scale = 1;
      for (int v = 0; v < 2 * vars; ++v) scale *= m;
      t.require(sp.count == base * scale, "tripling changed the solution count");
      auto w4 = regroup_to_width4(tripled);
      auto w3 = regroup_to_width3(w4);
      // The auxiliary variables are forced, so counts agree exactly.
      auto lin = templates::linear(m, 1);
      t.require(count_homomorphisms(to_structure(w3), lin) == sp.count, "width-3 stage changed the count");
      if (w4.num_vars <= (m == 2 ? 20 : 12))
        t.require(linear_solution_space(w4).count == sp.count, "width-4 stage changed the count");
      t.require((base > 0) == find_homomorphism(to_structure(w3), lin).has_value(), "satisfiability changed");
    }
  }
  if (t.out.pass) t.out.detail = std::to_string(systems) + " systems over Z2 and Z3";
  return t.out;
}

Outcome two_plus_separator() {
  Tally t;
  auto tmpl = templates::two_plus();
  std::mt19937 rng(101);
  int tested = 0, premise = 0;
  for (int i = 0; i < 300; ++i) {
    int n = 1 + static_cast<int>(rng() % 4);
    StructureBuilder b(tmpl.signature(), n);
    std::uniform_int_distribution<int> el(0, n - 1);
    int rs = static_cast<int>(rng() % 3);
    for (int j = 0; j < rs; ++j) b.add(0, {el(rng), el(rng), el(rng)});
    // Half the samples have s total, the rest a random subset of B^4.
    bool full = rng() % 2;
    int cells = n * n * n * n;
    for (int c = 0; c < cells; ++c)
      if (full || rng() % 4 != 0) b.add(1, {c % n, c / n % n, c / (n * n) % n, c / (n * n * n)});
    auto s = b.build();
    ++tested;
    if (!implied_constraints(s, tmpl).empty()) continue;
    ++premise;
    t.require(static_cast<int>(s.relation(1).size()) == cells, "s not total although nothing is implied");
  }
  t.require(premise > 0, "premise never held");
  if (t.out.pass)
    t.out.detail = std::to_string(tested) + " instances, " + std::to_string(premise) + " with no implied constraints";
  return t.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"Gottlob amplification k=1", gottlob_k1},
      {"amplify(2) + 3SAT chain", chain_k2},
      {"amplify(3) + 3SAT chain, fundamental relations", chain_k3_fundamental},
      {"4SAT boundary", boundary_n4},
      {"reflection suite", reflection_suite},
      {"pp-reduction robustness transfer", pp_gap},
      {"polymorphisms", polymorphisms},
      {"strategies", strategies},
      {"affine chain", affine_chain},
      {"2+ separator property", two_plus_separator},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}

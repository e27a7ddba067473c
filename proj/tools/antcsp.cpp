// Command-line front end.  Every subcommand prints one JSON run report (or
// a text rendering of it) and exits 0 for yes/accept/success, 1 for
// no/reject, 2 for usage or input errors and 3 when the budget runs out.

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "antcsp/consistency.hpp"
#include "antcsp/error.hpp"
#include "antcsp/io.hpp"
#include "antcsp/polymorphisms.hpp"
#include "antcsp/reductions.hpp"
#include "antcsp/reflection.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"

using namespace antcsp;
using io::json;

namespace {

enum Exit { kYes = 0, kNo = 1, kUsage = 2, kBudget = 3 };

std::string sha256(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

struct Report {
  std::string command;
  json inputs = json::array();
  std::string verdict;
  json result = json::object();

  std::string load(const std::string& role, const std::string& path) {
    std::string text = io::read_file(path);
    inputs.push_back({{"role", role}, {"path", path}, {"sha256", sha256(text)}});
    return text;
  }
  void note_builtin(const std::string& role, const std::string& name, const json& content) {
    inputs.push_back({{"role", role}, {"path", name}, {"sha256", sha256(content.dump())}});
  }
};

RelationalStructure load_structure(Report& r, const std::string& role, const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    RelationalStructure s = templates::by_name(spec.substr(8));
    r.note_builtin(role, spec, io::to_json(s));
    return s;
  }
  try {
    return io::structure_from_json(io::parse(r.load(role, spec), spec));
  } catch (const ParseError& e) {
    std::string m = e.what();
    throw ParseError(m.rfind(spec, 0) == 0 ? m : spec + ":" + m);
  }
}

template <class T, class Fn>
T load_json(Report& r, const std::string& role, const std::string& path, Fn&& from) {
  try {
    return from(io::parse(r.load(role, path), path));
  } catch (const ParseError& e) {
    std::string m = e.what();
    throw ParseError(m.rfind(path, 0) == 0 ? m : path + ":" + m);
  }
}

// "fundamental" or empty select built-in sets; otherwise a JSON file.
FormulaSet load_formulas(Report& r, const std::string& spec, const Signature& sig) {
  if (spec.empty()) return {};
  if (spec == "fundamental") {
    r.note_builtin("formulas", "fundamental", io::to_json(fundamental_relations(sig)));
    return fundamental_relations(sig);
  }
  return load_json<FormulaSet>(r, "formulas", spec, io::formulas_from_json);
}

SignedClauseInstance load_cnf(Report& r, const std::string& path) {
  try {
    return dimacs_import(r.load("cnf", path));
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.what());
  }
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

std::vector<int> parse_tuple(const std::string& text) {
  std::vector<int> t;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      t.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InvalidArgument("bad tuple '" + text + "'");
    }
  }
  return t;
}

std::string atom_string(const Atom& a) {
  auto v = [](int i) { return "x" + std::to_string(i + 1); };
  if (a.is_eq()) return v(a.args[0]) + "=" + v(a.args[1]);
  std::string s = a.rel + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + v(a.args[i]);
  return s + ")";
}

json formula_strings(const FormulaSet& F) {
  json out = json::array();
  for (const auto& f : F) out.push_back(to_string(f));
  return out;
}

struct Options {
  std::string tmpl, instance, formulas, defs, cnf, strategy, table, identities, out, tuple, system;
  int k = 1, j = 1, l = 1, steps = 1, width = 3, limit = 100;
  std::size_t cap = 0;
  bool upto = false, full = false, brute = false, with_g = false;
};

using Handler = std::function<int(Report&, const Options&)>;

int cmd_solve(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  auto h = find_homomorphism(b, a);
  if (h) r.result["homomorphism"] = h->map;
  return h ? kYes : kNo;
}

int cmd_homs(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  json list = json::array();
  std::size_t count = 0;
  for_each_homomorphism(b, a, {}, [&](const std::vector<int>& h) {
    if (static_cast<int>(list.size()) < o.limit) list.push_back(h);
    ++count;
    return true;
  });
  r.result["count"] = count;
  r.result["homomorphisms"] = std::move(list);
  return count ? kYes : kNo;
}

int cmd_robust(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  RobustVerdict v = o.upto    ? is_robust_upto(b, a, o.k, F)
                    : o.brute ? brute_force_robust(b, a, o.k, F)
                              : is_robust(b, a, o.k, F);
  r.result = io::to_json(v);
  r.result["k"] = o.k;
  return v.yes() ? kYes : kNo;
}

int cmd_reflect(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  ReflectionResult res;
  if (o.full) {
    res = full_reflection(b, a, o.k, F);
  } else {
    if (o.steps < 1) throw InvalidArgument("--steps must be at least 1");
    res = one_step_reflection(b, a, o.k, F);
    for (int s = 1; s < o.steps; ++s) {
      ReflectionResult next = one_step_reflection(res.structure, a, o.k, F);
      for (int& x : res.quotient_map) x = next.quotient_map[x];
      res.structure = std::move(next.structure);
      ++res.iterations;
    }
  }
  json out = io::to_json(res);
  write_out(o.out, out.dump(2) + "\n");
  r.result["reflection"] = out;
  r.result["iterations"] = res.iterations;
  return kYes;
}

int cmd_qvar(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  ImpliedConstraints c = implied_constraints(b, a);
  r.result["implied"] = io::to_json(c, b.signature());
  r.result["universal_horn"] = c.empty() && find_homomorphism(b, a).has_value();
  return c.empty() ? kYes : kNo;
}

int cmd_frozen(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  FrozenReport rep = frozen_tuples(b, a, o.k, F);
  r.result["frozen"] = io::to_json(rep, b.signature());
  r.result["count"] = rep.frozen_tuple_count() + rep.equalities.size();
  return kYes;
}

int finish_reduction(Report& r, const Options& o, const ReductionOutput& out) {
  json j = io::to_json(out);
  write_out(o.out, io::to_json(out.structure).dump(2) + "\n");
  r.result["output"] = j;
  r.result["elements"] = out.structure.size();
  r.result["hyperedges"] = out.structure.hyperedge_count();
  return kYes;
}

int cmd_reduce_pp(Report& r, const Options& o) {
  auto b = load_structure(r, "instance", o.instance);
  auto defs = load_json<PpDefinitionSet>(r, "defs", o.defs, io::definitions_from_json);
  return finish_reduction(r, o, pp_reduce(b, defs));
}

int cmd_reduce_gottlob(Report& r, const Options& o) {
  auto src = load_cnf(r, o.cnf);
  auto out = gottlob_amplify(src, o.k);
  std::string text = dimacs_export(out);
  write_out(o.out, text);
  r.result["vars"] = out.num_vars;
  r.result["width"] = out.width;
  r.result["clauses"] = out.clauses.size();
  r.result["dimacs"] = text;
  return kYes;
}

int cmd_reduce_to3sat(Report& r, const Options& o) {
  auto src = load_cnf(r, o.cnf);
  return finish_reduction(r, o, reduce_to_width(src, o.width));
}

int cmd_reduce_con(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, templates::with_constants(a).signature());
  int code = finish_reduction(r, o, con_reduce(b, a, o.k, F));
  if (o.with_g) r.result["G"] = formula_strings(build_G(F, a, o.k));
  return code;
}

int cmd_reduce_linear(Report& r, const Options& o) {
  auto sys = load_json<LinearSystem>(r, "system", o.system, io::linear_system_from_json);
  json stages = json::array();
  auto stage = [&](const char* name, const LinearSystem& s) {
    SolutionSpace sp = linear_solution_space(s);
    json st = {{"stage", name}, {"vars", s.num_vars}, {"equations", s.eqs.size()},
               {"satisfiable", sp.satisfiable}, {"count", sp.count}};
    if (sp.dimension >= 0) st["dimension"] = sp.dimension;
    stages.push_back(std::move(st));
  };
  stage("source", sys);
  LinearSystem t = triple_variables(sys);
  stage("tripled", t);
  LinearSystem w4 = regroup_to_width4(t);
  stage("width4", w4);
  LinearSystem w3 = regroup_to_width3(w4);
  stage("width3", w3);
  write_out(o.out, io::to_json(w3).dump(2) + "\n");
  r.result["stages"] = std::move(stages);
  r.result["output"] = io::to_json(w3);
  return kYes;
}

int cmd_claw(Report& r, const Options& o) {
  auto defs = load_json<PpDefinitionSet>(r, "defs", o.defs, io::definitions_from_json);
  FormulaSet F = load_formulas(r, o.formulas, defs.source);
  if (!o.table.empty()) {
    auto phi = load_json<PpFormula>(r, "formula", o.table,
                                    [](const json& j) { return io::formula_from_json(j); });
    bool yes = is_claw(defs, F, o.k, o.l, phi);
    r.result["claw"] = yes;
    return yes ? kYes : kNo;
  }
  ClawEnumeration e = enumerate_claws(defs, F, o.k, o.l, o.cap);
  FormulaSet out;
  for (const auto& c : e.claws) out.push_back(c.formula);
  r.result["constructions"] = e.constructions;
  r.result["count"] = out.size();
  r.result["claws"] = formula_strings(out);
  return kYes;
}

int cmd_types(Report& r, const Options& o) {
  auto s = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, s.signature());
  if (o.tuple.empty()) {
    FormulaSet Fk = instantiate(F, o.k);
    r.result["count"] = Fk.size();
    r.result["members"] = formula_strings(Fk);
    return kYes;
  }
  std::vector<int> t = parse_tuple(o.tuple);
  if (static_cast<int>(t.size()) != o.k) throw InvalidArgument("--tuple must have k entries");
  for (int x : t)
    if (x < 0 || x >= s.size()) throw InvalidArgument("--tuple element out of range");
  TypeFormula ty = type_of(s, t, F);
  r.result["tuple"] = t;
  r.result["type"] = formula_strings(ty.members);
  return kYes;
}

int cmd_theory(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  json out = json::array();
  for (const auto& q : kFq_theory(a, o.k, F))
    out.push_back(to_string(q.premise.conjunction()) + " -> " + atom_string(q.conclusion));
  r.result["count"] = out.size();
  r.result["quasi_equations"] = std::move(out);
  return kYes;
}

int cmd_strategy_candidate(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  Strategy s = candidate_family(b, a, o.k, F, o.j);
  write_out(o.out, io::to_json(s).dump(2) + "\n");
  r.result["strategy"] = io::to_json(s);
  r.result["size"] = s.size();
  return kYes;
}

int cmd_strategy_check(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  auto s = load_json<Strategy>(r, "strategy", o.strategy, io::strategy_from_json);
  StrategyCheck c = check_strategy(s, b, a);
  r.result["clause"] = to_string(c.clause);
  if (!c.ok()) {
    r.result["witness"] = io::to_json(c.witness);
    if (!c.extension.empty()) r.result["extension"] = c.extension;
  }
  return c.ok() ? kYes : kNo;
}

int cmd_strategy_establish(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  auto s = establish_consistency(b, a, o.j);
  if (s) {
    write_out(o.out, io::to_json(*s).dump(2) + "\n");
    r.result["strategy"] = io::to_json(*s);
    r.result["size"] = s->size();
  }
  return s ? kYes : kNo;
}

int cmd_strategy_separator(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto b = load_structure(r, "instance", o.instance);
  FormulaSet F = load_formulas(r, o.formulas, a.signature());
  bool accept = ant_separator(b, a, o.k, F, o.j) == SeparatorVerdict::Accept;
  r.result["separator"] = accept ? "accept" : "reject";
  return accept ? kYes : kNo;
}

int cmd_poly_find(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  IdentitySystem spec = io::identities_from_string(o.identities);
  r.result["identities"] = to_string(spec);
  auto t = find_polymorphism(a, spec);
  if (t) {
    json ops = json::array();
    for (const auto& op : *t) ops.push_back(io::to_json(op));
    r.result["operations"] = std::move(ops);
  }
  return t ? kYes : kNo;
}

int cmd_poly_check(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto ops = load_json<std::vector<OperationTable>>(r, "table", o.table, [](const json& j) {
    std::vector<OperationTable> v;
    if (j.is_array())
      for (const auto& e : j) v.push_back(io::operation_from_json(e));
    else
      v.push_back(io::operation_from_json(j));
    return v;
  });
  bool ok = true;
  json pres = json::array();
  for (const auto& op : ops) {
    bool p = check_preservation(op, a);
    pres.push_back(p);
    ok &= p;
  }
  r.result["preserves"] = std::move(pres);
  if (!o.identities.empty()) {
    bool id = check_identities(ops, io::identities_from_string(o.identities));
    r.result["identities"] = id;
    ok &= id;
  }
  return ok ? kYes : kNo;
}

int cmd_poly_core(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  bool core = is_core(a);
  r.result["core"] = core;
  r.result["core_elements"] = core_elements(a);
  return core ? kYes : kNo;
}

int cmd_poly_retract(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  RelationalStructure c = core_retract(a);
  write_out(o.out, io::to_json(c).dump(2) + "\n");
  r.result["core_elements"] = core_elements(a);
  r.result["retract"] = io::to_json(c);
  return kYes;
}

int cmd_poly_bwpair(Report& r, const Options& o) {
  auto a = load_structure(r, "template", o.tmpl);
  auto p = has_bw_pair(a);
  if (p) r.result["operations"] = {io::to_json(p->first), io::to_json(p->second)};
  return p ? kYes : kNo;
}

int cmd_dimacs_import(Report& r, const Options& o) {
  auto src = load_cnf(r, o.cnf);
  RelationalStructure s = to_structure(src);
  write_out(o.out, io::to_json(s).dump(2) + "\n");
  r.result["structure"] = io::to_json(s);
  return kYes;
}

int cmd_dimacs_export(Report& r, const Options& o) {
  auto s = load_structure(r, "instance", o.instance);
  std::string text = dimacs_export(to_clauses(s));
  write_out(o.out, text);
  r.result["dimacs"] = text;
  return kYes;
}

void print_text(const json& report) {
  std::cout << report["command"].get<std::string>() << ": " << report["verdict"].get<std::string>()
            << "\n";
  if (report.contains("error")) std::cout << "error: " << report["error"].get<std::string>() << "\n";
  for (auto it = report["result"].begin(); it != report["result"].end(); ++it) {
    std::string v = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    if (v.size() > 200) v = v.substr(0, 197) + "...";
    std::cout << "  " << it.key() << ": " << v << "\n";
  }
  std::cout << "  budget used: " << report["budget"]["used"].get<std::uint64_t>() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust satisfiability and constraint toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t budget_limit = 0;
  if (const char* env = std::getenv("ANTCSP_BUDGET")) budget_limit = std::strtoull(env, nullptr, 10);
  std::string seed_order = "lex";
  bool as_json = false, as_text = false;
  app.add_option("--budget", budget_limit, "search-node cap (0 = unlimited)");
  app.add_option("--seed-order", seed_order, "value order for searches (only 'lex')")
      ->check(CLI::IsMember({"lex"}));
  auto* fj = app.add_flag("--json", as_json, "JSON report (default)");
  app.add_flag("--text", as_text, "text report")->excludes(fj);

  Options o;
  std::map<CLI::App*, std::pair<std::string, Handler>> handlers;
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& desc,
                 const std::string& full, Handler h) {
    CLI::App* c = parent->add_subcommand(name, desc);
    handlers[c] = {full, std::move(h)};
    return c;
  };
  auto tmpl = [&](CLI::App* c) { c->add_option("--template", o.tmpl, "template file or builtin:NAME")->required(); };
  auto inst = [&](CLI::App* c) { c->add_option("--instance", o.instance, "instance file")->required(); };
  auto formulas = [&](CLI::App* c) { c->add_option("--formulas", o.formulas, "formula file or 'fundamental'"); };
  auto kopt = [&](CLI::App* c) { c->add_option("--k", o.k, "assignment size")->required(); };
  auto out = [&](CLI::App* c) { c->add_option("--out", o.out, "write the produced artifact here"); };

  auto* c = add(&app, "solve", "find a homomorphism", "solve", cmd_solve);
  tmpl(c), inst(c);
  c = add(&app, "homs", "enumerate homomorphisms", "homs", cmd_homs);
  tmpl(c), inst(c);
  c->add_option("--limit", o.limit, "homomorphisms to list");
  c = add(&app, "robust", "decide (k,F)-robust satisfiability", "robust", cmd_robust);
  tmpl(c), inst(c), kopt(c), formulas(c);
  c->add_flag("--upto", o.upto, "check every level up to k");
  c->add_flag("--brute", o.brute, "use the brute-force checker");
  c = add(&app, "reflect", "(k,F)-reflection", "reflect", cmd_reflect);
  tmpl(c), inst(c), kopt(c), formulas(c), out(c);
  auto* steps = c->add_option("--steps", o.steps, "one-step reflections to apply");
  c->add_flag("--full", o.full, "iterate to the fixpoint")->excludes(steps);
  c = add(&app, "qvar", "quasivariety membership", "qvar", cmd_qvar);
  tmpl(c), inst(c);
  c = add(&app, "frozen", "frozen tuples and equalities", "frozen", cmd_frozen);
  tmpl(c), inst(c), kopt(c), formulas(c);

  CLI::App* reduce = app.add_subcommand("reduce", "reductions");
  reduce->require_subcommand(1);
  c = add(reduce, "pp", "pp-definition reduction", "reduce pp", cmd_reduce_pp);
  inst(c), out(c);
  c->add_option("--defs", o.defs, "definition file")->required();
  c = add(reduce, "gottlob", "Gottlob amplification of a 3SAT file", "reduce gottlob", cmd_reduce_gottlob);
  c->add_option("--cnf", o.cnf, "DIMACS file")->required();
  kopt(c), out(c);
  c = add(reduce, "to3sat", "split clauses into chains", "reduce to3sat", cmd_reduce_to3sat);
  c->add_option("--cnf", o.cnf, "DIMACS file")->required();
  c->add_option("--width", o.width, "target clause width");
  out(c);
  c = add(reduce, "con", "remove constant relations", "reduce con", cmd_reduce_con);
  tmpl(c), inst(c), kopt(c), formulas(c), out(c);
  c->add_flag("--with-g", o.with_g, "also list the compatibility formulas");
  c = add(reduce, "linear-chain", "tripling and regrouping of a linear system", "reduce linear-chain",
          cmd_reduce_linear);
  c->add_option("--system", o.system, "linear system file")->required();
  out(c);

  c = add(&app, "claw", "enumerate or test claw formulas", "claw", cmd_claw);
  c->add_option("--defs", o.defs, "definition file")->required();
  formulas(c), kopt(c);
  c->add_option("--l", o.l, "wrist bound")->required();
  c->add_option("--cap", o.cap, "construction cap (0 = unbounded)");
  c->add_option("--check", o.table, "formula file to test for membership");
  c = add(&app, "types", "F_k members or the type of a tuple", "types", cmd_types);
  inst(c), kopt(c), formulas(c);
  c->add_option("--tuple", o.tuple, "comma separated elements");
  c = add(&app, "theory", "quasi-equations of the (k,F) theory", "theory", cmd_theory);
  tmpl(c), kopt(c), formulas(c);

  CLI::App* strat = app.add_subcommand("strategy", "local consistency strategies");
  strat->require_subcommand(1);
  c = add(strat, "candidate", "family of F-compatible partial maps", "strategy candidate",
          cmd_strategy_candidate);
  tmpl(c), inst(c), kopt(c), formulas(c), out(c);
  c->add_option("--j", o.j, "domain size bound")->required();
  c = add(strat, "check", "verify a strategy file", "strategy check", cmd_strategy_check);
  tmpl(c), inst(c);
  c->add_option("--strategy", o.strategy, "strategy file")->required();
  c = add(strat, "establish", "greatest (j,j+1)-strategy", "strategy establish", cmd_strategy_establish);
  tmpl(c), inst(c), out(c);
  c->add_option("--j", o.j, "strategy parameter")->required();
  c = add(strat, "separator", "bounded-width separator", "strategy separator", cmd_strategy_separator);
  tmpl(c), inst(c), kopt(c), formulas(c);
  c->add_option("--j", o.j, "strategy parameter")->required();

  CLI::App* poly = app.add_subcommand("poly", "polymorphisms and cores");
  poly->require_subcommand(1);
  c = add(poly, "find", "search for operations satisfying identities", "poly find", cmd_poly_find);
  tmpl(c);
  c->add_option("--identities", o.identities, "wnu:N, nu:N, quasi-wnu:N, quasi-nu:N, any:N or bwpair")
      ->required();
  c = add(poly, "check", "check operation tables", "poly check", cmd_poly_check);
  tmpl(c);
  c->add_option("--table", o.table, "operation table file (object or array)")->required();
  c->add_option("--identities", o.identities, "identities to verify");
  c = add(poly, "core", "is the template a core", "poly core", cmd_poly_core);
  tmpl(c);
  c = add(poly, "retract", "core retract", "poly retract", cmd_poly_retract);
  tmpl(c), out(c);
  c = add(poly, "bwpair", "WNU pair of arities 3 and 4", "poly bwpair", cmd_poly_bwpair);
  tmpl(c);

  CLI::App* dimacs = app.add_subcommand("dimacs", "DIMACS conversion");
  dimacs->require_subcommand(1);
  c = add(dimacs, "import", "DIMACS to structure", "dimacs import", cmd_dimacs_import);
  c->add_option("--cnf", o.cnf, "DIMACS file")->required();
  out(c);
  c = add(dimacs, "export", "structure to DIMACS", "dimacs export", cmd_dimacs_export);
  inst(c), out(c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  CLI::App* chosen = nullptr;
  for (auto& [sub, h] : handlers)
    if (sub->parsed()) chosen = sub;
  if (!chosen) {
    std::cerr << app.help();
    return kUsage;
  }
  auto& [name, handler] = handlers[chosen];

  Report r;
  r.command = name;
  int code = kUsage;
  std::string error;
  auto start = std::chrono::steady_clock::now();
  budget::Scope scope(budget_limit);
  try {
    code = handler(r, o);
    r.verdict = code == kYes ? "yes" : "no";
  } catch (const BudgetExceeded& e) {
    code = kBudget;
    r.verdict = "budget-exceeded";
    error = e.what();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  json report;
  report["command"] = r.command;
  report["inputs"] = r.inputs;
  report["verdict"] = r.verdict;
  report["result"] = r.result;
  if (!error.empty()) report["error"] = error;
  report["budget"] = {{"limit", budget_limit}, {"used", budget::used()}};
  report["timing"] = {{"wall_ms", ms}};
  if (as_text)
    print_text(report);
  else
    std::cout << report.dump(2) << "\n";
  return code;
}

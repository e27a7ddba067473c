// JSON-in, JSON-out bindings. The Python package wraps these with dict conversion.
#include <pybind11/pybind11.h>

#include "antcsp/consistency.hpp"
#include "antcsp/error.hpp"
#include "antcsp/io.hpp"
#include "antcsp/polymorphisms.hpp"
#include "antcsp/reductions.hpp"
#include "antcsp/reflection.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"

namespace py = pybind11;
using namespace antcsp;
using json = nlohmann::json;

namespace {

RelationalStructure structure(const std::string& text) {
  return io::structure_from_json(io::parse(text, "<structure>"));
}

// Empty text means no formulas, "fundamental" the template's fundamental relations.
FormulaSet formulas(const std::string& text, const RelationalStructure& tmpl) {
  if (text.empty()) return {};
  if (text == "fundamental") return fundamental_relations(tmpl.signature());
  return io::formulas_from_json(io::parse(text, "<formulas>"));
}

std::string dump(const json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_antcsp, m) {
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("set_budget", [](std::uint64_t limit) {
    budget::set_limit(limit);
    budget::reset_usage();
  });
  m.def("budget_used", [] { return budget::used(); });

  m.def("builtin", [](const std::string& name) { return dump(io::to_json(templates::by_name(name))); });

  m.def("solve", [](const std::string& inst, const std::string& tmpl) -> std::string {
    auto h = find_homomorphism(structure(inst), structure(tmpl));
    return h ? dump(json(h->map)) : "null";
  });
  m.def("count", [](const std::string& inst, const std::string& tmpl) {
    return count_homomorphisms(structure(inst), structure(tmpl));
  });

  m.def("is_robust", [](const std::string& inst, const std::string& tmpl, int k,
                        const std::string& F, bool upto, bool brute) {
    auto a = structure(tmpl);
    auto fs = formulas(F, a);
    auto b = structure(inst);
    RobustVerdict v = brute ? brute_force_robust(b, a, k, fs)
                      : upto ? is_robust_upto(b, a, k, fs)
                             : is_robust(b, a, k, fs);
    return dump(io::to_json(v));
  }, py::arg("instance"), py::arg("template"), py::arg("k"), py::arg("formulas") = "",
     py::arg("upto") = false, py::arg("brute") = false);

  m.def("frozen", [](const std::string& inst, const std::string& tmpl, int k, const std::string& F) {
    auto a = structure(tmpl);
    auto b = structure(inst);
    return dump(io::to_json(frozen_tuples(b, a, k, formulas(F, a)), b.signature()));
  });
  m.def("reflect", [](const std::string& inst, const std::string& tmpl, int k, const std::string& F,
                      bool full) {
    auto a = structure(tmpl);
    auto fs = formulas(F, a);
    auto b = structure(inst);
    return dump(io::to_json(full ? full_reflection(b, a, k, fs) : one_step_reflection(b, a, k, fs)));
  });
  m.def("implied", [](const std::string& inst, const std::string& tmpl) {
    auto b = structure(inst);
    return dump(io::to_json(implied_constraints(b, structure(tmpl)), b.signature()));
  });

  m.def("find_polymorphism", [](const std::string& tmpl, const std::string& ids) -> std::string {
    auto found = find_polymorphism(structure(tmpl), io::identities_from_string(ids));
    if (!found) return "null";
    json out = json::array();
    for (const auto& t : *found) out.push_back(io::to_json(t));
    return dump(out);
  });
  m.def("is_core", [](const std::string& tmpl) { return is_core(structure(tmpl)); });
  m.def("core_retract", [](const std::string& tmpl) { return dump(io::to_json(core_retract(structure(tmpl)))); });

  m.def("establish_consistency", [](const std::string& inst, const std::string& tmpl, int j) -> std::string {
    auto s = establish_consistency(structure(inst), structure(tmpl), j);
    return s ? dump(io::to_json(*s)) : "null";
  });
  m.def("ant_separator", [](const std::string& inst, const std::string& tmpl, int k,
                            const std::string& F, int j) {
    auto a = structure(tmpl);
    return ant_separator(structure(inst), a, k, formulas(F, a), j) == SeparatorVerdict::Accept;
  });

  m.def("dimacs_import", [](const std::string& text) { return dump(io::to_json(to_structure(dimacs_import(text)))); });
  m.def("dimacs_export", [](const std::string& inst) { return dimacs_export(to_clauses(structure(inst))); });
  m.def("gottlob", [](const std::string& cnf, int k) {
    return dump(io::to_json(to_structure(gottlob_amplify(dimacs_import(cnf), k))));
  });
  m.def("reduce_to_3sat", [](const std::string& cnf) {
    return dump(io::to_json(reduce_to_3sat(dimacs_import(cnf))));
  });
}

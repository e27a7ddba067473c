#pragma once

#include <string>

#include <json.hpp>

#include "antcsp/consistency.hpp"
#include "antcsp/formula.hpp"
#include "antcsp/polymorphisms.hpp"
#include "antcsp/reductions.hpp"
#include "antcsp/reflection.hpp"
#include "antcsp/structure.hpp"

namespace antcsp::io {

using json = nlohmann::json;

// Parses JSON text; syntax errors become ParseError with line and column.
json parse(const std::string& text, const std::string& source = "<input>");
std::string read_file(const std::string& path);

json to_json(const Signature& sig);
Signature signature_from_json(const json& j, const std::string& where = "");

// {"signature":[...], "universe": n or [labels], "relations": {...}}
json to_json(const RelationalStructure& s);
RelationalStructure structure_from_json(const json& j);

// {"free":[...], "exists":[...], "atoms":[{"rel":..,"args":[..]} | {"eq":[a,b]}]}
json to_json(const PpFormula& f);
PpFormula formula_from_json(const json& j, const std::string& where = "");
json to_json(const FormulaSet& F);
// An array of formulas, or a single formula object.
FormulaSet formulas_from_json(const json& j);

// {"source":[sig], "target":[sig], "defs":{"R": formula}}
json to_json(const PpDefinitionSet& d);
PpDefinitionSet definitions_from_json(const json& j);

json to_json(const LinearSystem& sys);
LinearSystem linear_system_from_json(const json& j);

json to_json(const OperationTable& t);
OperationTable operation_from_json(const json& j);

// [[element, value], ...]
json to_json(const PartialAssignment& nu);
PartialAssignment assignment_from_json(const json& j);

json to_json(const Strategy& s);
Strategy strategy_from_json(const json& j);

json to_json(const ReflectionResult& r);
json to_json(const FrozenReport& r, const Signature& sig);
json to_json(const ImpliedConstraints& c, const Signature& sig);
json to_json(const RobustVerdict& v);
json to_json(const ReductionOutput& out);

// "wnu:3", "nu:3", "quasi-wnu:3", "quasi-nu:3", "any:3" or "bwpair".
IdentitySystem identities_from_string(const std::string& text);

}  // namespace antcsp::io

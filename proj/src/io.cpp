#include "antcsp/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "antcsp/error.hpp"

namespace antcsp::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ParseError((where.empty() ? std::string("/") : where) + ": " + msg);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

std::string at(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string at(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte);
    std::string msg = e.what();
    auto p = msg.find("parse error");
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                     (p == std::string::npos ? msg : msg.substr(p)));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const Signature& sig) {
  json out = json::array();
  for (const auto& s : sig.symbols()) out.push_back({{"name", s.name}, {"arity", s.arity}});
  return out;
}

Signature signature_from_json(const json& j, const std::string& where) {
  std::vector<Symbol> syms;
  const json& arr = as_array(j, where);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string w = at(where, i);
    const json& name = field(arr[i], "name", w);
    if (!name.is_string()) fail(at(w, "name"), "expected a string");
    int arity = as_int(field(arr[i], "arity", w), at(w, "arity"));
    if (arity < 0) fail(at(w, "arity"), "negative arity");
    syms.push_back({name.get<std::string>(), arity});
  }
  try {
    return Signature(std::move(syms));
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

json to_json(const RelationalStructure& s) {
  json out;
  out["signature"] = to_json(s.signature());
  if (s.labels().empty())
    out["universe"] = s.size();
  else
    out["universe"] = s.labels();
  json rels = json::object();
  for (std::size_t i = 0; i < s.signature().size(); ++i) {
    json tuples = json::array();
    const Relation& r = s.relation(i);
    for (std::size_t t = 0; t < r.size(); ++t)
      tuples.push_back(std::vector<int>(r[t].begin(), r[t].end()));
    rels[s.signature()[i].name] = std::move(tuples);
  }
  out["relations"] = std::move(rels);
  return out;
}

RelationalStructure structure_from_json(const json& j) {
  Signature sig = signature_from_json(field(j, "signature", ""), "/signature");
  const json& u = field(j, "universe", "");
  int n = 0;
  std::vector<std::string> labels;
  std::map<std::string, int> by_label;
  if (u.is_number_integer()) {
    n = u.get<int>();
    if (n < 0) fail("/universe", "negative universe size");
  } else if (u.is_array()) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!u[i].is_string()) fail(at("/universe", i), "expected a string label");
      if (!by_label.emplace(u[i].get<std::string>(), static_cast<int>(i)).second)
        fail(at("/universe", i), "duplicate label");
      labels.push_back(u[i].get<std::string>());
    }
    n = static_cast<int>(labels.size());
  } else {
    fail("/universe", "expected a size or an array of labels");
  }
  std::vector<std::vector<int>> flat(sig.size());
  const json& rels = field(j, "relations", "");
  if (!rels.is_object()) fail("/relations", "expected an object");
  for (auto it = rels.begin(); it != rels.end(); ++it) {
    std::string w = at("/relations", it.key());
    int s = sig.find(it.key());
    if (s < 0) fail(w, "symbol not in the signature");
    const json& tuples = as_array(it.value(), w);
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      std::string wt = at(w, t);
      const json& tup = as_array(tuples[t], wt);
      if (static_cast<int>(tup.size()) != sig[s].arity)
        fail(wt, "tuple of length " + std::to_string(tup.size()) + ", arity is " +
                     std::to_string(sig[s].arity));
      for (std::size_t p = 0; p < tup.size(); ++p) {
        int e;
        if (tup[p].is_string() && !labels.empty()) {
          auto l = by_label.find(tup[p].get<std::string>());
          if (l == by_label.end()) fail(at(wt, p), "unknown element label");
          e = l->second;
        } else {
          e = as_int(tup[p], at(wt, p));
        }
        if (e < 0 || e >= n)
          fail(at(wt, p), "element " + std::to_string(e) + " out of range 0.." +
                              std::to_string(n - 1));
        flat[s].push_back(e);
      }
    }
  }
  return RelationalStructure(sig, n, std::move(flat), std::move(labels));
}

json to_json(const PpFormula& f) {
  json out;
  json free = json::array(), exists = json::array();
  for (int v = 0; v < f.num_free; ++v) free.push_back(variable_name(f, v));
  for (int v = f.num_free; v < f.num_vars(); ++v) exists.push_back(variable_name(f, v));
  out["free"] = std::move(free);
  out["exists"] = std::move(exists);
  json atoms = json::array();
  for (const Atom& a : f.atoms) {
    json args = json::array();
    for (int v : a.args) args.push_back(variable_name(f, v));
    if (a.is_eq())
      atoms.push_back({{"eq", std::move(args)}});
    else
      atoms.push_back({{"rel", a.rel}, {"args", std::move(args)}});
  }
  out["atoms"] = std::move(atoms);
  return out;
}

PpFormula formula_from_json(const json& j, const std::string& where) {
  std::map<std::string, int> var;
  PpFormula f;
  auto names = [&](const char* key, bool required) {
    if (!required && (!j.is_object() || !j.contains(key))) return 0;
    const json& arr = as_array(field(j, key, where), at(where, key));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) fail(at(at(where, key), i), "expected a variable name");
      if (!var.emplace(arr[i].get<std::string>(), static_cast<int>(var.size())).second)
        fail(at(at(where, key), i), "duplicate variable");
    }
    return static_cast<int>(arr.size());
  };
  f.num_free = names("free", true);
  f.num_exist = names("exists", false);
  const json& atoms = as_array(field(j, "atoms", where), at(where, "atoms"));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    std::string w = at(at(where, "atoms"), i);
    auto vars = [&](const json& arr, const std::string& wa) {
      std::vector<int> out;
      as_array(arr, wa);
      for (std::size_t p = 0; p < arr.size(); ++p) {
        if (!arr[p].is_string()) fail(at(wa, p), "expected a variable name");
        auto it = var.find(arr[p].get<std::string>());
        if (it == var.end()) fail(at(wa, p), "undeclared variable '" + arr[p].get<std::string>() + "'");
        out.push_back(it->second);
      }
      return out;
    };
    if (atoms[i].is_object() && atoms[i].contains("eq")) {
      auto a = vars(atoms[i]["eq"], at(w, "eq"));
      if (a.size() != 2) fail(at(w, "eq"), "equality needs two variables");
      f.atoms.push_back(Atom::eq(a[0], a[1]));
    } else {
      const json& rel = field(atoms[i], "rel", w);
      if (!rel.is_string()) fail(at(w, "rel"), "expected a symbol name");
      f.atoms.push_back(Atom::relation(rel.get<std::string>(), vars(field(atoms[i], "args", w), at(w, "args"))));
    }
  }
  return f;
}

json to_json(const FormulaSet& F) {
  json out = json::array();
  for (const auto& f : F) out.push_back(to_json(f));
  return out;
}

FormulaSet formulas_from_json(const json& j) {
  if (j.is_object()) return {formula_from_json(j, "")};
  FormulaSet F;
  const json& arr = as_array(j, "");
  for (std::size_t i = 0; i < arr.size(); ++i) F.push_back(formula_from_json(arr[i], at("", i)));
  return F;
}

json to_json(const PpDefinitionSet& d) {
  json defs = json::object();
  for (const auto& [name, f] : d.defs) defs[name] = to_json(f);
  return {{"source", to_json(d.source)}, {"target", to_json(d.target)}, {"defs", defs}};
}

PpDefinitionSet definitions_from_json(const json& j) {
  PpDefinitionSet d;
  d.source = signature_from_json(field(j, "source", ""), "/source");
  d.target = signature_from_json(field(j, "target", ""), "/target");
  const json& defs = field(j, "defs", "");
  if (!defs.is_object()) fail("/defs", "expected an object");
  for (auto it = defs.begin(); it != defs.end(); ++it)
    d.defs[it.key()] = formula_from_json(it.value(), at("/defs", it.key()));
  try {
    d.validate();
  } catch (const Error& e) {
    fail("/defs", e.what());
  }
  return d;
}

json to_json(const LinearSystem& sys) {
  json eqs = json::array();
  for (const auto& e : sys.eqs) {
    json terms = json::array();
    for (auto [v, c] : e.terms) terms.push_back({v, c});
    eqs.push_back({{"terms", terms}, {"rhs", e.rhs}});
  }
  return {{"modulus", sys.modulus}, {"g", sys.g}, {"vars", sys.num_vars}, {"eqs", eqs}};
}

LinearSystem linear_system_from_json(const json& j) {
  LinearSystem sys;
  sys.modulus = as_int(field(j, "modulus", ""), "/modulus");
  sys.g = j.contains("g") ? as_int(j["g"], "/g") : 1;
  sys.num_vars = as_int(field(j, "vars", ""), "/vars");
  const json& eqs = as_array(field(j, "eqs", ""), "/eqs");
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    std::string w = at("/eqs", i);
    LinearEquation e;
    const json& terms = as_array(field(eqs[i], "terms", w), at(w, "terms"));
    for (std::size_t t = 0; t < terms.size(); ++t) {
      std::string wt = at(at(w, "terms"), t);
      if (!terms[t].is_array() || terms[t].size() != 2) fail(wt, "expected [variable, coefficient]");
      e.terms.push_back({as_int(terms[t][0], at(wt, 0)), as_int(terms[t][1], at(wt, 1))});
    }
    e.rhs = as_int(field(eqs[i], "rhs", w), at(w, "rhs"));
    sys.eqs.push_back(std::move(e));
  }
  try {
    validate(sys);
  } catch (const InvalidArgument& e) {
    fail("", e.what());
  }
  return sys;
}

json to_json(const OperationTable& t) {
  return {{"arity", t.arity}, {"domain", t.domain}, {"table", t.table}};
}

OperationTable operation_from_json(const json& j) {
  OperationTable t;
  t.arity = as_int(field(j, "arity", ""), "/arity");
  t.domain = as_int(field(j, "domain", ""), "/domain");
  if (t.arity < 1) fail("/arity", "arity must be positive");
  if (t.domain < 1) fail("/domain", "domain must be nonempty");
  const json& tab = as_array(field(j, "table", ""), "/table");
  std::size_t cells = 1;
  for (int i = 0; i < t.arity; ++i) {
    cells *= static_cast<std::size_t>(t.domain);
    if (cells > (std::size_t{1} << 24)) fail("/table", "table too large");
  }
  if (tab.size() != cells)
    fail("/table", "expected " + std::to_string(cells) + " entries, found " + std::to_string(tab.size()));
  for (std::size_t i = 0; i < tab.size(); ++i) {
    int v = as_int(tab[i], at("/table", i));
    if (v < 0 || v >= t.domain) fail(at("/table", i), "value out of range");
    t.table.push_back(v);
  }
  return t;
}

json to_json(const PartialAssignment& nu) {
  json out = json::array();
  for (auto [x, v] : nu.entries()) out.push_back({x, v});
  return out;
}

PartialAssignment assignment_from_json(const json& j) {
  PartialAssignment nu;
  const json& arr = as_array(j, "");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    std::string w = at("", i);
    if (!arr[i].is_array() || arr[i].size() != 2) fail(w, "expected [element, value]");
    int x = as_int(arr[i][0], at(w, 0));
    if (nu.contains(x)) fail(w, "element assigned twice");
    nu.set(x, as_int(arr[i][1], at(w, 1)));
  }
  return nu;
}

json to_json(const Strategy& s) {
  json members = json::array();
  for (const auto& [d, vs] : s.members)
    members.push_back({{"domain", d}, {"values", std::vector<std::vector<int>>(vs.begin(), vs.end())}});
  return {{"j", s.j}, {"members", members}};
}

Strategy strategy_from_json(const json& j) {
  Strategy s;
  s.j = as_int(field(j, "j", ""), "/j");
  const json& members = as_array(field(j, "members", ""), "/members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    std::string w = at("/members", i);
    const json& dom = as_array(field(members[i], "domain", w), at(w, "domain"));
    std::vector<int> d;
    for (std::size_t p = 0; p < dom.size(); ++p) d.push_back(as_int(dom[p], at(at(w, "domain"), p)));
    if (!std::is_sorted(d.begin(), d.end()) || std::adjacent_find(d.begin(), d.end()) != d.end())
      fail(at(w, "domain"), "domain must be strictly increasing");
    const json& vals = as_array(field(members[i], "values", w), at(w, "values"));
    if (vals.empty()) s.members[d];
    for (std::size_t v = 0; v < vals.size(); ++v) {
      std::string wv = at(at(w, "values"), v);
      const json& row = as_array(vals[v], wv);
      if (row.size() != d.size()) fail(wv, "value tuple length differs from the domain");
      std::vector<int> r;
      for (std::size_t p = 0; p < row.size(); ++p) r.push_back(as_int(row[p], at(wv, p)));
      s.insert(d, r);
    }
  }
  return s;
}

json to_json(const ReflectionResult& r) {
  json out = to_json(r.structure);
  out["quotient_map"] = r.quotient_map;
  return out;
}

json to_json(const FrozenReport& r, const Signature& sig) {
  json rels = json::object();
  for (std::size_t s = 0; s < sig.size(); ++s)
    if (!r.relations[s].empty()) rels[sig[s].name] = r.relations[s];
  json eqs = json::array();
  for (auto [x, y] : r.equalities) eqs.push_back({x, y});
  return {{"relations", rels}, {"equalities", eqs}, {"classes", r.classes}};
}

json to_json(const ImpliedConstraints& c, const Signature& sig) {
  json tuples = json::array();
  for (const auto& [s, t] : c.tuples) tuples.push_back({{"rel", sig[s].name}, {"args", t}});
  json eqs = json::array();
  for (auto [x, y] : c.equalities) eqs.push_back({x, y});
  return {{"tuples", tuples}, {"equalities", eqs}};
}

json to_json(const RobustVerdict& v) {
  json out;
  out["robust"] = v.yes();
  switch (v.reason) {
    case RobustVerdict::Reason::None: out["reason"] = "none"; break;
    case RobustVerdict::Reason::Unsatisfiable: out["reason"] = "unsatisfiable"; break;
    case RobustVerdict::Reason::NonExtendable: out["reason"] = "non-extendable"; break;
  }
  if (v.reason == RobustVerdict::Reason::NonExtendable) {
    out["subset"] = v.subset;
    out["assignment"] = to_json(v.nu);
  }
  if (v.level >= 0) out["level"] = v.level;
  return out;
}

json to_json(const ReductionOutput& out) {
  json j;
  j["structure"] = to_json(out.structure);
  j["source_map"] = out.source_map;
  j["canonical_no"] = out.canonical_no;
  json elems = json::array();
  for (const auto& e : out.elements) {
    const char* kind = e.kind == ElementOrigin::Kind::Open          ? "open"
                       : e.kind == ElementOrigin::Kind::Existential ? "existential"
                                                                    : "template";
    json o = {{"kind", kind}};
    if (e.source >= 0) o["source"] = e.source;
    if (e.hyperedge >= 0) o["hyperedge"] = e.hyperedge;
    if (e.position >= 0) o["position"] = e.position;
    elems.push_back(std::move(o));
  }
  j["elements"] = std::move(elems);
  return j;
}

IdentitySystem identities_from_string(const std::string& text) {
  if (text == "bwpair") return identities::bw_pair();
  auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidArgument("identities must look like wnu:3 or bwpair");
  std::string name = text.substr(0, colon);
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidArgument("bad arity in '" + text + "'");
  }
  if (name == "wnu") return identities::wnu(n);
  if (name == "nu") return identities::nu(n);
  if (name == "quasi-wnu") return identities::quasi_wnu(n);
  if (name == "quasi-nu") return identities::quasi_nu(n);
  if (name == "any") return identities::any(n);
  throw InvalidArgument("unknown identity family '" + name + "'");
}

}  // namespace antcsp::io

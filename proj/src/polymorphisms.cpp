#include "antcsp/polymorphisms.hpp"

#include <algorithm>
#include <numeric>

#include "antcsp/error.hpp"
#include "antcsp/solver.hpp"

namespace antcsp {

namespace {

constexpr std::size_t kMaxIndicator = std::size_t{1} << 22;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) {
    r *= b;
    if (r > kMaxIndicator * 64) throw BudgetExceeded("budget exceeded: power too large");
  }
  return r;
}

std::size_t encode(std::span<const int> t, int base) {
  std::size_t c = 0;
  for (int v : t) c = c * base + static_cast<std::size_t>(v);
  return c;
}

void decode(std::size_t code, int base, std::vector<int>& out) {
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    out[i] = static_cast<int>(code % base);
    code /= base;
  }
}

// Value of a term under an assignment: an operation cell (op, code) or a
// plain domain value (op = -1).
struct Cell {
  int op;
  std::size_t code;
};

Cell eval(const Term& t, const std::vector<int>& vals, int base) {
  if (t.op < 0) return {-1, static_cast<std::size_t>(vals[t.args[0]])};
  std::size_t c = 0;
  for (int v : t.args) c = c * base + static_cast<std::size_t>(vals[v]);
  return {t.op, c};
}

IdentitySystem symmetric(int n, bool idem, bool near_unanimity) {
  if (n < 2) throw InvalidArgument("arity must be at least 2");
  IdentitySystem s;
  s.arities = {n};
  s.idempotent = idem;
  auto at = [n](int i) {
    std::vector<int> a(n, 0);
    a[i] = 1;
    return Term::apply(0, a);
  };
  for (int i = 0; i + 1 < n; ++i) s.equations.push_back({at(i), at(i + 1)});
  if (near_unanimity) s.equations.push_back({at(n - 1), Term::var(0)});
  return s;
}

}  // namespace

int OperationTable::operator()(std::span<const int> args) const {
  if (static_cast<int>(args.size()) != arity) throw InvalidArgument("wrong number of arguments");
  return table[encode(args, domain)];
}

void IdentitySystem::validate() const {
  if (num_vars < 1) throw InvalidArgument("identity system needs a variable");
  for (int a : arities)
    if (a < 1) throw InvalidArgument("operation arity must be positive");
  auto check = [&](const Term& t) {
    if (t.op < 0) {
      if (t.args.size() != 1 || t.args[0] < 0 || t.args[0] >= num_vars)
        throw InvalidArgument("malformed variable term");
      return;
    }
    if (t.op >= static_cast<int>(arities.size()))
      throw InvalidArgument("unknown operation symbol " + std::to_string(t.op));
    if (static_cast<int>(t.args.size()) != arities[t.op])
      throw InvalidArgument("term arity does not match its operation symbol");
    for (int v : t.args)
      if (v < 0 || v >= num_vars) throw InvalidArgument("term variable out of range");
  };
  for (const auto& [l, r] : equations) {
    check(l);
    check(r);
  }
}

namespace identities {
IdentitySystem wnu(int n) { return symmetric(n, true, false); }
IdentitySystem nu(int n) { return symmetric(n, true, true); }
IdentitySystem quasi_wnu(int n) { return symmetric(n, false, false); }
IdentitySystem quasi_nu(int n) { return symmetric(n, false, true); }
IdentitySystem any(int n) {
  IdentitySystem s;
  s.arities = {n};
  s.idempotent = false;
  return s;
}
IdentitySystem bw_pair() {
  IdentitySystem w3 = wnu(3), w4 = wnu(4);
  IdentitySystem s;
  s.arities = {3, 4};
  s.equations = w3.equations;
  for (auto [l, r] : w4.equations) {
    l.op = r.op = 1;
    s.equations.push_back({l, r});
  }
  s.equations.push_back({Term::apply(0, {1, 0, 0}), Term::apply(1, {1, 0, 0, 0})});
  return s;
}
}  // namespace identities

RelationalStructure indicator_instance(const RelationalStructure& tmpl, int n) {
  if (n < 1) throw InvalidArgument("indicator arity must be positive");
  const int na = tmpl.size();
  std::size_t size = ipow(na, n);
  if (size > kMaxIndicator) throw BudgetExceeded("budget exceeded: indicator instance too large");
  budget::charge(size);
  const Signature& sig = tmpl.signature();
  std::vector<std::vector<int>> rels(sig.size());
  std::vector<int> pick(n), col(n);
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Relation& r = tmpl.relation(s);
    const int ar = sig[s].arity;
    if (r.size() == 0) continue;
    std::size_t rows = ipow(r.size(), n);
    budget::charge(rows);
    for (std::size_t c = 0; c < rows; ++c) {
      decode(c, static_cast<int>(r.size()), pick);
      for (int j = 0; j < ar; ++j) {
        for (int i = 0; i < n; ++i) col[i] = r[pick[i]][j];
        rels[s].push_back(static_cast<int>(encode(col, na)));
      }
    }
  }
  return RelationalStructure(sig, static_cast<int>(size), std::move(rels));
}

std::optional<std::vector<OperationTable>> find_polymorphism(const RelationalStructure& tmpl,
                                                             const IdentitySystem& spec) {
  spec.validate();
  const int na = tmpl.size();
  if (na == 0) throw InvalidArgument("template must be nonempty");
  const int nops = static_cast<int>(spec.arities.size());
  std::vector<std::size_t> off(nops + 1, 0);
  std::vector<RelationalStructure> parts;
  for (int i = 0; i < nops; ++i) {
    parts.push_back(indicator_instance(tmpl, spec.arities[i]));
    off[i + 1] = off[i] + static_cast<std::size_t>(parts[i].size());
  }
  const std::size_t total = off[nops];
  if (total > kMaxIndicator) throw BudgetExceeded("budget exceeded: indicator instance too large");

  // Disjoint union of the indicator instances.
  const Signature& sig = tmpl.signature();
  std::vector<std::vector<int>> rels(sig.size());
  for (int i = 0; i < nops; ++i)
    for (std::size_t s = 0; s < sig.size(); ++s)
      for (int x : parts[i].relation(s).data()) rels[s].push_back(static_cast<int>(off[i]) + x);

  std::vector<int> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> seed(total, -1);
  bool contradiction = false;
  auto fix = [&](int x, int v) {
    if (seed[x] >= 0 && seed[x] != v) contradiction = true;
    seed[x] = v;
  };
  std::vector<int> diag;
  if (spec.idempotent)
    for (int i = 0; i < nops; ++i)
      for (int a = 0; a < na; ++a) {
        diag.assign(spec.arities[i], a);
        fix(static_cast<int>(off[i] + encode(diag, na)), a);
      }
  std::vector<int> vals(spec.num_vars);
  const std::size_t assigns = ipow(na, spec.num_vars);
  for (const auto& [lt, rt] : spec.equations)
    for (std::size_t c = 0; c < assigns; ++c) {
      decode(c, na, vals);
      Cell l = eval(lt, vals, na), r = eval(rt, vals, na);
      if (l.op < 0 && r.op < 0) {
        if (l.code != r.code) return std::nullopt;
        continue;
      }
      if (l.op < 0) std::swap(l, r);
      int x = static_cast<int>(off[l.op] + l.code);
      if (r.op < 0) {
        fix(x, static_cast<int>(r.code));
      } else {
        int y = static_cast<int>(off[r.op] + r.code);
        int rx = find(x), ry = find(y);
        if (rx != ry) parent[std::max(rx, ry)] = std::min(rx, ry);
      }
    }
  std::vector<int> key(total);
  for (std::size_t x = 0; x < total; ++x) key[x] = find(static_cast<int>(x));
  std::vector<int> class_seed(total, -1);
  for (std::size_t x = 0; x < total; ++x)
    if (seed[x] >= 0) {
      int& cs = class_seed[key[x]];
      if (cs >= 0 && cs != seed[x]) contradiction = true;
      cs = seed[x];
    }
  if (contradiction) return std::nullopt;

  RelationalStructure joint(sig, static_cast<int>(total), std::move(rels));
  Quotient q = quotient_by_key(joint, key);
  PartialAssignment pa;
  for (std::size_t x = 0; x < total; ++x)
    if (class_seed[key[x]] >= 0) pa.set(q.class_map[x], class_seed[key[x]]);

  std::optional<std::vector<int>> sol;
  for_each_homomorphism(q.structure, tmpl, pa, [&](const std::vector<int>& h) {
    sol = h;
    return false;
  });
  if (!sol) return std::nullopt;
  std::vector<OperationTable> out;
  for (int i = 0; i < nops; ++i) {
    OperationTable t{spec.arities[i], na, {}};
    for (std::size_t x = off[i]; x < off[i + 1]; ++x) t.table.push_back((*sol)[q.class_map[x]]);
    out.push_back(std::move(t));
  }
  return out;
}

bool check_identities(const std::vector<OperationTable>& tables, const IdentitySystem& spec) {
  spec.validate();
  if (tables.size() != spec.arities.size()) return false;
  int na = -1;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].arity != spec.arities[i]) return false;
    if (na >= 0 && tables[i].domain != na) return false;
    na = tables[i].domain;
    if (tables[i].table.size() != ipow(na, tables[i].arity)) return false;
  }
  if (na <= 0) return true;
  auto value = [&](const Cell& c) {
    return c.op < 0 ? static_cast<int>(c.code) : tables[c.op].table[c.code];
  };
  if (spec.idempotent)
    for (const auto& t : tables)
      for (int a = 0; a < na; ++a) {
        std::vector<int> diag(t.arity, a);
        if (t(diag) != a) return false;
      }
  std::vector<int> vals(spec.num_vars);
  for (const auto& [lt, rt] : spec.equations)
    for (std::size_t c = 0; c < ipow(na, spec.num_vars); ++c) {
      decode(c, na, vals);
      if (value(eval(lt, vals, na)) != value(eval(rt, vals, na))) return false;
    }
  return true;
}

bool check_preservation(const OperationTable& table, const RelationalStructure& tmpl) {
  if (table.domain != tmpl.size() || table.table.size() != ipow(tmpl.size(), table.arity))
    return false;
  return is_homomorphism(indicator_instance(tmpl, table.arity), tmpl, table.table);
}

std::vector<std::vector<int>> endomorphisms(const RelationalStructure& tmpl) {
  std::vector<std::vector<int>> out;
  for_each_homomorphism(tmpl, tmpl, {}, [&](const std::vector<int>& h) {
    budget::charge();
    out.push_back(h);
    return true;
  });
  return out;
}

bool is_core(const RelationalStructure& tmpl) {
  bool core = true;
  for_each_homomorphism(tmpl, tmpl, {}, [&](const std::vector<int>& h) {
    budget::charge();
    std::vector<int> s(h);
    std::sort(s.begin(), s.end());
    core = std::adjacent_find(s.begin(), s.end()) == s.end();
    return core;
  });
  return core;
}

std::vector<int> core_elements(const RelationalStructure& tmpl) {
  std::vector<int> best;
  for (const auto& h : endomorphisms(tmpl)) {
    std::vector<int> img(h);
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    if (best.empty() || img.size() < best.size() || (img.size() == best.size() && img < best))
      best = std::move(img);
  }
  return best;
}

RelationalStructure induced_substructure(const RelationalStructure& s,
                                         const std::vector<int>& elements) {
  std::vector<int> idx(s.size(), -1);
  for (std::size_t i = 0; i < elements.size(); ++i) idx[elements[i]] = static_cast<int>(i);
  const Signature& sig = s.signature();
  std::vector<std::vector<int>> rels(sig.size());
  for (std::size_t r = 0; r < sig.size(); ++r) {
    const Relation& rel = s.relation(r);
    for (std::size_t t = 0; t < rel.size(); ++t) {
      bool inside = true;
      for (int x : rel[t]) inside &= idx[x] >= 0;
      if (!inside) continue;
      for (int x : rel[t]) rels[r].push_back(idx[x]);
    }
  }
  std::vector<std::string> labels;
  if (!s.labels().empty())
    for (int e : elements) labels.push_back(s.labels()[e]);
  return RelationalStructure(sig, static_cast<int>(elements.size()), std::move(rels),
                             std::move(labels));
}

RelationalStructure core_retract(const RelationalStructure& tmpl) {
  return induced_substructure(tmpl, core_elements(tmpl));
}

std::optional<std::pair<OperationTable, OperationTable>> has_bw_pair(
    const RelationalStructure& tmpl) {
  auto t = find_polymorphism(tmpl, identities::bw_pair());
  if (!t) return std::nullopt;
  return std::pair{(*t)[0], (*t)[1]};
}

std::string to_string(const IdentitySystem& spec) {
  auto term = [](const Term& t) {
    static const char* names = "xyzuvw";
    auto var = [&](int v) { return v < 6 ? std::string(1, names[v]) : "v" + std::to_string(v); };
    if (t.op < 0) return var(t.args[0]);
    std::string s = "f" + std::to_string(t.op) + "(";
    for (std::size_t i = 0; i < t.args.size(); ++i) s += (i ? "," : "") + var(t.args[i]);
    return s + ")";
  };
  std::string out;
  for (const auto& [l, r] : spec.equations) {
    if (!out.empty()) out += "; ";
    out += term(l) + " = " + term(r);
  }
  if (spec.idempotent) out += out.empty() ? "idempotent" : "; idempotent";
  return out;
}

}  // namespace antcsp

#include "antcsp/reductions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "antcsp/error.hpp"
#include "antcsp/polymorphisms.hpp"
#include "antcsp/reflection.hpp"
#include "antcsp/solver.hpp"
#include "antcsp/templates.hpp"

namespace antcsp {

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  // Keeps the smaller id as representative.
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    p[b] = a;
  }
};

using EdgeKey = std::pair<int, std::vector<int>>;

// Builds the structure and reads back hyperedge provenance in canonical order.
void finish(ReductionOutput& out, const Signature& sig, int size,
            const std::vector<std::pair<EdgeKey, HyperedgeOrigin>>& edges) {
  StructureBuilder b(sig, size);
  std::map<EdgeKey, HyperedgeOrigin> origin;
  for (const auto& [key, o] : edges) {
    b.add(key.first, key.second);
    origin.emplace(key, o);
  }
  out.structure = b.build();
  out.hyperedges.assign(sig.size(), {});
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Relation& r = out.structure.relation(s);
    auto& dst = out.hyperedges[s];
    dst.reserve(r.size());
    std::vector<int> t;
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.assign(r[i].begin(), r[i].end());
      dst.push_back(origin.at({static_cast<int>(s), t}));
    }
  }
}

}  // namespace

ReductionOutput pp_reduce(const RelationalStructure& instance, const PpDefinitionSet& defs) {
  const Signature& src = instance.signature();
  const Signature& tgt = defs.target;
  for (std::size_t s = 0; s < src.size(); ++s) {
    if (instance.relation(s).empty()) continue;
    auto it = defs.defs.find(src[s].name);
    if (it == defs.defs.end())
      throw InvalidArgument("no definition for instance symbol '" + src[s].name + "'");
    if (it->second.num_free != src[s].arity)
      throw InvalidArgument("definition of '" + src[s].name + "' has " +
                            std::to_string(it->second.num_free) + " open variables, expected " +
                            std::to_string(src[s].arity));
    validate(it->second, &tgt);
  }

  // Raw elements: source universe, then fresh elements per hyperedge.
  std::vector<ElementOrigin> raw;
  for (int e = 0; e < instance.size(); ++e)
    raw.push_back({ElementOrigin::Kind::Open, e, -1, -1});
  struct RawEdge {
    int sym;
    std::vector<int> tuple;
    HyperedgeOrigin origin;
  };
  std::vector<RawEdge> raw_edges;
  std::vector<std::pair<int, int>> eqs;
  std::vector<FamilyLayout::Family> fams;
  int hyper = 0;
  for (std::size_t s = 0; s < src.size(); ++s) {
    const Relation& r = instance.relation(s);
    if (r.empty()) continue;
    const PpFormula& f = defs.defs.at(src[s].name);
    for (std::size_t i = 0; i < r.size(); ++i, ++hyper) {
      std::vector<int> var_elem(f.num_vars());
      FamilyLayout::Family fam;
      fam.source_hyperedge = hyper;
      for (int v = 0; v < f.num_free; ++v) {
        var_elem[v] = r[i][v];
        fam.slots.push_back(r[i][v]);
      }
      for (int v = 0; v < f.num_exist; ++v) {
        var_elem[f.num_free + v] = static_cast<int>(raw.size());
        fam.exist.push_back(static_cast<int>(raw.size()));
        raw.push_back({ElementOrigin::Kind::Existential, -1, hyper, v});
      }
      for (std::size_t a = 0; a < f.atoms.size(); ++a) {
        const Atom& at = f.atoms[a];
        if (at.is_eq()) {
          eqs.push_back({var_elem[at.args[0]], var_elem[at.args[1]]});
          continue;
        }
        RawEdge e{tgt.index_of(at.rel), {}, {hyper, static_cast<int>(a)}};
        for (int v : at.args) e.tuple.push_back(var_elem[v]);
        raw_edges.push_back(std::move(e));
      }
      fams.push_back(std::move(fam));
    }
  }

  UnionFind uf(static_cast<int>(raw.size()));
  for (auto [a, b] : eqs) uf.unite(a, b);
  std::vector<int> id(raw.size(), -1);
  int n = 0;
  ReductionOutput out;
  for (std::size_t e = 0; e < raw.size(); ++e)
    if (uf.find(static_cast<int>(e)) == static_cast<int>(e)) {
      id[e] = n++;
      out.elements.push_back(raw[e]);
    }
  auto img = [&](int e) { return id[uf.find(e)]; };

  std::vector<std::pair<EdgeKey, HyperedgeOrigin>> edges;
  for (auto& e : raw_edges) {
    for (int& x : e.tuple) x = img(x);
    edges.push_back({{e.sym, e.tuple}, e.origin});
  }
  finish(out, tgt, n, edges);

  for (int e = 0; e < instance.size(); ++e) out.source_map.push_back(img(e));
  std::vector<int> open = out.source_map;
  std::sort(open.begin(), open.end());
  open.erase(std::unique(open.begin(), open.end()), open.end());
  out.layout.open = open;
  for (auto& f : fams) {
    for (int& x : f.slots) x = img(x);
    for (int& x : f.exist) x = img(x);
    out.layout.families.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clause instances

void validate(const SignedClauseInstance& inst) {
  if (inst.num_vars < 0) throw InvalidArgument("negative variable count");
  if (inst.width < 1) throw InvalidArgument("clause width must be positive");
  for (std::size_t c = 0; c < inst.clauses.size(); ++c) {
    const auto& cl = inst.clauses[c];
    if (static_cast<int>(cl.size()) != inst.width)
      throw InvalidArgument("clause " + std::to_string(c) + " has width " +
                            std::to_string(cl.size()) + ", expected " +
                            std::to_string(inst.width));
    for (const Literal& l : cl)
      if (l.var < 0 || l.var >= inst.num_vars)
        throw InvalidArgument("clause " + std::to_string(c) + " uses variable " +
                              std::to_string(l.var) + " outside 0.." +
                              std::to_string(inst.num_vars - 1));
  }
}

Signature sat_signature(int width) {
  if (width < 1 || width > 16) throw InvalidArgument("clause width must lie in 1..16");
  std::vector<Symbol> syms;
  for (unsigned p = 0; p < (1u << width); ++p)
    syms.push_back({templates::sat_symbol(width, p), width});
  return Signature(syms);
}

namespace {

unsigned sign_pattern(const std::vector<Literal>& cl) {
  unsigned p = 0;
  for (const Literal& l : cl) p = (p << 1) | (l.negated ? 1u : 0u);
  return p;
}

}  // namespace

RelationalStructure to_structure(const SignedClauseInstance& inst) {
  validate(inst);
  StructureBuilder b(sat_signature(inst.width), inst.num_vars);
  std::vector<int> t(inst.width);
  for (const auto& cl : inst.clauses) {
    for (int i = 0; i < inst.width; ++i) t[i] = cl[i].var;
    b.add(static_cast<int>(sign_pattern(cl)), t);
  }
  return b.build();
}

SignedClauseInstance to_clauses(const RelationalStructure& s) {
  SignedClauseInstance inst;
  inst.num_vars = s.size();
  inst.width = -1;
  const Signature& sig = s.signature();
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const std::string& name = sig[i].name;
    int w = sig[i].arity;
    std::string expect = "R" + std::to_string(w) + "_";
    bool ok = name.size() == expect.size() + static_cast<std::size_t>(w) &&
              name.compare(0, expect.size(), expect) == 0;
    for (std::size_t j = expect.size(); ok && j < name.size(); ++j)
      ok = name[j] == '0' || name[j] == '1';
    if (!ok) throw InvalidArgument("symbol '" + name + "' is not a clause symbol R<w>_<signs>");
    if (inst.width == -1) inst.width = w;
    if (inst.width != w) throw InvalidArgument("clause symbols of mixed width");
    const Relation& r = s.relation(i);
    for (std::size_t t = 0; t < r.size(); ++t) {
      std::vector<Literal> cl;
      for (int p = 0; p < w; ++p) cl.push_back({r[t][p], name[expect.size() + p] == '1'});
      inst.clauses.push_back(std::move(cl));
    }
  }
  if (inst.width == -1) inst.width = 3;
  return inst;
}

bool satisfies(const SignedClauseInstance& inst, const std::vector<int>& a) {
  for (const auto& cl : inst.clauses) {
    bool sat = false;
    for (const Literal& l : cl)
      if ((a.at(l.var) != 0) != l.negated) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

namespace {

// Two-watched-literal DPLL with chronological backtracking.  Decisions take
// the least unassigned variable, value 0 first.
class Dpll {
 public:
  explicit Dpll(const SignedClauseInstance& inst) : n_(inst.num_vars) {
    val_.assign(n_, -1);
    watches_.assign(2 * static_cast<std::size_t>(n_), {});
    for (const auto& cl : inst.clauses) {
      std::vector<int> lits;
      for (const Literal& l : cl) lits.push_back(code(l));
      std::sort(lits.begin(), lits.end());
      lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
      bool taut = false;
      for (std::size_t i = 1; i < lits.size(); ++i)
        if ((lits[i] ^ 1) == lits[i - 1]) taut = true;
      if (taut) continue;
      if (lits.empty()) {
        trivially_unsat_ = true;
        continue;
      }
      if (lits.size() == 1) {
        units_.push_back(lits[0]);
        continue;
      }
      int id = static_cast<int>(clauses_.size());
      watches_[lits[0]].push_back(id);
      watches_[lits[1]].push_back(id);
      clauses_.push_back(std::move(lits));
    }
  }

  std::optional<std::vector<int>> run() {
    if (trivially_unsat_) return std::nullopt;
    for (int l : units_)
      if (!enqueue(l)) return std::nullopt;
    if (!propagate()) return std::nullopt;
    for (;;) {
      budget::charge();
      while (next_ < static_cast<std::size_t>(n_) && val_[next_] != -1) ++next_;
      if (next_ == static_cast<std::size_t>(n_)) {
        std::vector<int> out(n_);
        for (int v = 0; v < n_; ++v) out[v] = val_[v];
        return out;
      }
      decisions_.push_back({trail_.size(), false});
      enqueue(2 * static_cast<int>(next_) + 1);  // literal "var is 0"
      while (!propagate()) {
        // Flip the deepest unflipped decision.
        while (!decisions_.empty() && decisions_.back().flipped) {
          undo_to(decisions_.back().trail_pos);
          decisions_.pop_back();
        }
        if (decisions_.empty()) return std::nullopt;
        int lit = trail_[decisions_.back().trail_pos];
        undo_to(decisions_.back().trail_pos);
        decisions_.back().flipped = true;
        enqueue(lit ^ 1);
      }
    }
  }

 private:
  static int code(const Literal& l) { return 2 * l.var + (l.negated ? 1 : 0); }
  // Literal 2v is "v = 1", 2v+1 is "v = 0".
  int lit_value(int lit) const {
    int v = val_[lit >> 1];
    if (v == -1) return -1;
    return (lit & 1) ? 1 - v : v;
  }
  bool enqueue(int lit) {
    int cur = lit_value(lit);
    if (cur == 1) return true;
    if (cur == 0) return false;
    val_[lit >> 1] = (lit & 1) ? 0 : 1;
    trail_.push_back(lit);
    return true;
  }
  void undo_to(std::size_t pos) {
    while (trail_.size() > pos) {
      std::size_t v = static_cast<std::size_t>(trail_.back() >> 1);
      val_[v] = -1;
      next_ = std::min(next_, v);
      trail_.pop_back();
    }
    head_ = std::min(head_, pos);
  }
  bool propagate() {
    while (head_ < trail_.size()) {
      int falsified = trail_[head_++] ^ 1;
      auto& ws = watches_[falsified];
      for (std::size_t i = 0; i < ws.size();) {
        auto& cl = clauses_[ws[i]];
        if (cl[0] == falsified) std::swap(cl[0], cl[1]);
        if (lit_value(cl[0]) == 1) {
          ++i;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < cl.size(); ++j)
          if (lit_value(cl[j]) != 0) {
            std::swap(cl[1], cl[j]);
            watches_[cl[1]].push_back(ws[i]);
            ws[i] = ws.back();
            ws.pop_back();
            moved = true;
            break;
          }
        if (moved) continue;
        if (!enqueue(cl[0])) return false;
        ++i;
      }
    }
    return true;
  }

  struct Decision {
    std::size_t trail_pos;
    bool flipped;
  };
  int n_;
  std::vector<int> val_;
  std::vector<std::vector<int>> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int> units_;
  std::vector<int> trail_;
  std::vector<Decision> decisions_;
  std::size_t head_ = 0;
  std::size_t next_ = 0;
  bool trivially_unsat_ = false;
};

}  // namespace

std::optional<std::vector<int>> solve_clauses(const SignedClauseInstance& inst) {
  validate(inst);
  return Dpll(inst).run();
}

namespace {

std::vector<std::vector<int>> subsets_of_size(int n, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == r) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace

SignedClauseInstance gottlob_amplify(const SignedClauseInstance& src, int k) {
  validate(src);
  if (k < 0) throw InvalidArgument("k must be non-negative");
  const int copies = 2 * k + 1;
  SignedClauseInstance out;
  out.num_vars = src.num_vars * copies;
  out.width = src.width * (k + 1);
  auto subsets = subsets_of_size(copies, k + 1);
  const int w = src.width;
  for (const auto& cl : src.clauses) {
    std::vector<std::size_t> choice(w, 0);
    for (;;) {
      std::vector<Literal> wide;
      wide.reserve(out.width);
      for (int p = 0; p < w; ++p)
        for (int c : subsets[choice[p]])
          wide.push_back({cl[p].var * copies + c, cl[p].negated});
      out.clauses.push_back(std::move(wide));
      int p = w - 1;
      while (p >= 0 && ++choice[p] == subsets.size()) choice[p--] = 0;
      if (p < 0) break;
    }
  }
  return out;
}

ReductionOutput reduce_to_width(const SignedClauseInstance& src, int m) {
  validate(src);
  if (m < 3 || m > 8) throw InvalidArgument("target width must lie in 3..8");
  const int w = src.width;
  if (w <= m || (w - 2 * (m - 1)) < 0 || (w - 2 * (m - 1)) % (m - 2) != 0)
    throw InvalidArgument("cannot split width-" + std::to_string(w) + " clauses into width-" +
                          std::to_string(m) + " chains (need w > m and m-2 dividing w-2(m-1))");
  const int chain = (w - 2 * (m - 1)) / (m - 2) + 2;
  ReductionOutput out;
  for (int v = 0; v < src.num_vars; ++v) {
    out.elements.push_back({ElementOrigin::Kind::Open, v, -1, -1});
    out.source_map.push_back(v);
    out.layout.open.push_back(v);
  }
  Signature sig = templates::nsat(m).signature();
  std::vector<std::pair<EdgeKey, HyperedgeOrigin>> edges;
  int next = src.num_vars;
  for (std::size_t c = 0; c < src.clauses.size(); ++c) {
    const auto& cl = src.clauses[c];
    FamilyLayout::Family fam;
    fam.source_hyperedge = static_cast<int>(c);
    for (const Literal& l : cl) fam.slots.push_back(l.var);
    for (int j = 0; j < chain - 1; ++j) {
      fam.exist.push_back(next);
      out.elements.push_back({ElementOrigin::Kind::Existential, -1, static_cast<int>(c), j});
      ++next;
    }
    std::size_t pos = 0;
    for (int j = 0; j < chain; ++j) {
      std::vector<Literal> part;
      if (j > 0) part.push_back({fam.exist[j - 1], true});
      int take = m - (j > 0 ? 1 : 0) - (j < chain - 1 ? 1 : 0);
      for (int t = 0; t < take; ++t) part.push_back(cl[pos++]);
      if (j < chain - 1) part.push_back({fam.exist[j], false});
      std::vector<int> tuple;
      for (const Literal& l : part) tuple.push_back(l.var);
      edges.push_back({{static_cast<int>(sign_pattern(part)), tuple},
                       {static_cast<int>(c), j}});
    }
    out.layout.families.push_back(std::move(fam));
  }
  finish(out, sig, next, edges);
  return out;
}

ReductionOutput reduce_to_3sat(const SignedClauseInstance& src) {
  if (src.width < 4)
    throw InvalidArgument("reduce_to_3sat needs clause width at least 4, got " +
                          std::to_string(src.width));
  return reduce_to_width(src, 3);
}

SignedClauseInstance output_clauses(const ReductionOutput& out) {
  return to_clauses(out.structure);
}

// ---------------------------------------------------------------------------
// Arrow intervals

ArrowDiagram arrow_diagram(const ReductionOutput& out, int family, const PartialAssignment& nu) {
  if (family < 0 || family >= static_cast<int>(out.layout.families.size()))
    throw InvalidArgument("family index " + std::to_string(family) + " out of range");
  const auto& fam = out.layout.families[family];
  std::vector<int> members(fam.slots.begin(), fam.slots.end());
  members.insert(members.end(), fam.exist.begin(), fam.exist.end());
  for (auto [x, v] : nu.entries()) {
    if (std::find(members.begin(), members.end(), x) == members.end())
      throw InvalidArgument("element " + std::to_string(x) + " is not in family " +
                            std::to_string(family));
    if (v != 0 && v != 1) throw InvalidArgument("arrow analysis needs Boolean values");
  }

  // Clauses of the family in chain order, literals with signs.
  const int chain = static_cast<int>(fam.exist.size()) + 1;
  std::vector<std::vector<Literal>> clauses(chain);
  const Signature& sig = out.structure.signature();
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const std::string& name = sig[s].name;
    std::size_t us = name.find('_');
    const Relation& r = out.structure.relation(s);
    for (std::size_t t = 0; t < r.size(); ++t) {
      const HyperedgeOrigin& o = out.hyperedges[s][t];
      if (o.source_hyperedge != fam.source_hyperedge) continue;
      auto& cl = clauses.at(o.conjunct);
      for (int p = 0; p < sig[s].arity; ++p)
        cl.push_back({r[t][p], us != std::string::npos && name[us + 1 + p] == '1'});
    }
  }

  ArrowDiagram d;
  d.clauses = chain;
  d.arrows.push_back({0, ArrowDiagram::Direction::Right});
  for (int i = 1; i < chain; ++i)
    if (auto v = nu.get(fam.exist[i - 1]))
      d.arrows.push_back(
          {i, *v == 0 ? ArrowDiagram::Direction::Left : ArrowDiagram::Direction::Right});
  d.arrows.push_back({chain, ArrowDiagram::Direction::Left});

  auto is_exist = [&](int x) {
    return std::find(fam.exist.begin(), fam.exist.end(), x) != fam.exist.end();
  };
  PartialAssignment cur = nu;
  for (std::size_t a = 0; a + 1 < d.arrows.size(); ++a) {
    if (d.arrows[a].dir != ArrowDiagram::Direction::Right ||
        d.arrows[a + 1].dir != ArrowDiagram::Direction::Left)
      continue;
    ArrowDiagram::Interval iv{d.arrows[a].boundary, d.arrows[a + 1].boundary};
    std::vector<Literal> open;
    for (int c = iv.left; c < iv.right; ++c)
      for (const Literal& l : clauses[c])
        if (!is_exist(l.var)) open.push_back(l);
    for (const Literal& l : open)
      if (auto v = cur.get(l.var); v && (*v == 1) != l.negated) iv.already_stabilized = true;
    if (!iv.already_stabilized) {
      for (const Literal& l : open)
        if (!cur.contains(l.var)) {
          iv.element = l.var;
          iv.value = l.negated ? 0 : 1;
          cur.set(l.var, iv.value);
          break;
        }
      if (iv.element < 0) d.failure = true;
    }
    d.intervals.push_back(iv);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Linear systems

namespace {

bool is_prime(int m) {
  if (m < 2) return false;
  for (int d = 2; d * d <= m; ++d)
    if (m % d == 0) return false;
  return true;
}

int element_order(int g, int m) {
  int x = g % m, ord = 1;
  while (x != 0) {
    x = (x + g) % m;
    ++ord;
  }
  return ord;
}

}  // namespace

void validate(const LinearSystem& sys) {
  if (sys.modulus < 2 || sys.modulus > 64) throw InvalidArgument("modulus must lie in 2..64");
  if (sys.g <= 0 || sys.g >= sys.modulus)
    throw InvalidArgument("g must be a nonzero element of Z_m");
  if (!is_prime(element_order(sys.g, sys.modulus)))
    throw InvalidArgument("g must have prime order in Z_" + std::to_string(sys.modulus));
  if (sys.num_vars < 0) throw InvalidArgument("negative variable count");
  for (std::size_t e = 0; e < sys.eqs.size(); ++e) {
    const auto& eq = sys.eqs[e];
    if (eq.terms.size() > 9)
      throw InvalidArgument("equation " + std::to_string(e) + " has more than 9 terms");
    if (eq.rhs != 0 && eq.rhs != sys.g)
      throw InvalidArgument("equation " + std::to_string(e) + " has right-hand side " +
                            std::to_string(eq.rhs) + ", expected 0 or g");
    for (auto [v, c] : eq.terms) {
      if (v < 0 || v >= sys.num_vars)
        throw InvalidArgument("equation " + std::to_string(e) + " uses variable " +
                              std::to_string(v) + " out of range");
      if (c != 1 && c != -1)
        throw InvalidArgument("equation " + std::to_string(e) + " has coefficient " +
                              std::to_string(c) + ", expected +1 or -1");
    }
  }
}

LinearSystem triple_variables(const LinearSystem& sys) {
  validate(sys);
  for (const auto& eq : sys.eqs)
    if (eq.terms.size() > 3) throw InvalidArgument("tripling expects equations of width <= 3");
  LinearSystem out = sys;
  out.num_vars = 3 * sys.num_vars;
  for (auto& eq : out.eqs) {
    std::vector<std::pair<int, int>> t;
    for (auto [v, c] : eq.terms)
      for (int j = 0; j < 3; ++j) t.push_back({3 * v + j, c});
    eq.terms = std::move(t);
  }
  return out;
}

LinearSystem regroup_to_width4(const LinearSystem& sys) {
  validate(sys);
  LinearSystem out = sys;
  out.eqs.clear();
  for (const auto& eq : sys.eqs) {
    if (eq.terms.size() % 3 != 0)
      throw InvalidArgument("regrouping expects tripled equations (width a multiple of 3)");
    int u0 = out.num_vars;
    out.num_vars += 3;
    for (int j = 0; j < 3; ++j) {
      // Copy j of every source variable, minus u_j, equals 0.
      LinearEquation part;
      for (std::size_t i = j; i < eq.terms.size(); i += 3) part.terms.push_back(eq.terms[i]);
      part.terms.push_back({u0 + j, -1});
      out.eqs.push_back(part);
    }
    out.eqs.push_back({{{u0, 1}, {u0 + 1, 1}, {u0 + 2, 1}}, eq.rhs});
  }
  return out;
}

LinearSystem regroup_to_width3(const LinearSystem& sys) {
  validate(sys);
  LinearSystem out = sys;
  out.eqs.clear();
  for (const auto& eq : sys.eqs) {
    if (eq.terms.size() <= 3) {
      out.eqs.push_back(eq);
      continue;
    }
    if (eq.terms.size() != 4)
      throw InvalidArgument("regroup_to_width3 expects equations of width <= 4");
    // a + b + c + d = h becomes a + b - v = 0 and v + c + d = h.
    int v = out.num_vars++;
    out.eqs.push_back({{eq.terms[0], eq.terms[1], {v, -1}}, 0});
    out.eqs.push_back({{{v, 1}, eq.terms[2], eq.terms[3]}, eq.rhs});
  }
  return out;
}

SolutionSpace linear_solution_space(const LinearSystem& sys) {
  validate(sys);
  const int m = sys.modulus;
  const int n = sys.num_vars;
  // Each equation is checked once its last variable is assigned.
  std::vector<std::vector<int>> due(n);
  SolutionSpace res;
  for (std::size_t e = 0; e < sys.eqs.size(); ++e) {
    int last = -1;
    for (auto [v, c] : sys.eqs[e].terms) last = std::max(last, v);
    if (last < 0) {
      if (sys.eqs[e].rhs % m != 0) return res;
      continue;
    }
    due[last].push_back(static_cast<int>(e));
  }
  std::vector<int> val(n, 0);
  unsigned long long count = 0;
  auto rec = [&](auto&& self, int v) -> void {
    if (v == n) {
      ++count;
      return;
    }
    for (int x = 0; x < m; ++x) {
      budget::charge();
      val[v] = x;
      bool ok = true;
      for (int e : due[v]) {
        long s = 0;
        for (auto [u, c] : sys.eqs[e].terms) s += c * val[u];
        if (((s - sys.eqs[e].rhs) % m + m) % m != 0) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, v + 1);
    }
  };
  rec(rec, 0);
  res.count = count;
  res.satisfiable = count > 0;
  if (count > 0 && is_prime(m)) {
    unsigned long long c = count;
    int d = 0;
    while (c % m == 0) {
      c /= m;
      ++d;
    }
    if (c == 1) res.dimension = d;
  }
  return res;
}

RelationalStructure to_structure(const LinearSystem& sys) {
  validate(sys);
  RelationalStructure tmpl = templates::linear(sys.modulus, sys.g);
  StructureBuilder b(tmpl.signature(), sys.num_vars);
  const int m = sys.modulus;
  for (std::size_t e = 0; e < sys.eqs.size(); ++e) {
    auto terms = sys.eqs[e].terms;
    int rhs = sys.eqs[e].rhs;
    if (terms.size() != 3)
      throw InvalidArgument("equation " + std::to_string(e) +
                            " does not have width 3 and cannot be encoded as r_h/s_h");
    int neg = 0;
    for (auto& t : terms) neg += t.second < 0;
    if (neg >= 2) {
      for (auto& t : terms) t.second = -t.second;
      rhs = (m - rhs) % m;
      neg = 3 - neg;
    }
    if (rhs != 0 && rhs != sys.g)
      throw InvalidArgument("equation " + std::to_string(e) +
                            " normalizes to right-hand side outside {0, g}");
    std::string h = std::to_string(rhs);
    if (neg == 0) {
      b.add("s_" + h, {terms[0].first, terms[1].first, terms[2].first});
    } else {
      std::stable_partition(terms.begin(), terms.end(), [](auto& t) { return t.second > 0; });
      b.add("r_" + h, {terms[0].first, terms[1].first, terms[2].first});
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// DIMACS

SignedClauseInstance dimacs_import(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = false;
  int declared_vars = 0;
  long declared_clauses = 0;
  SignedClauseInstance inst;
  inst.width = -1;
  std::vector<Literal> cur;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok[0] == 'c' || tok[0] == '%') continue;
    if (tok == "p") {
      std::string fmt;
      if (header || !(ls >> fmt >> declared_vars >> declared_clauses) || fmt != "cnf" ||
          declared_vars < 0 || declared_clauses < 0)
        throw ParseError("line " + std::to_string(line_no) + ": bad 'p cnf V C' header");
      header = true;
      continue;
    }
    if (!header) throw ParseError("line " + std::to_string(line_no) + ": clause before header");
    do {
      long x;
      try {
        std::size_t used = 0;
        x = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad literal '" + tok + "'");
      }
      if (x == 0) {
        int w = static_cast<int>(cur.size());
        if (w == 0) throw ParseError("line " + std::to_string(line_no) + ": empty clause");
        if (inst.width == -1) inst.width = w;
        if (w != inst.width)
          throw ParseError("line " + std::to_string(line_no) + ": clause of width " +
                           std::to_string(w) + " after clauses of width " +
                           std::to_string(inst.width) +
                           "; width-n pipelines need uniform clauses (pad by repeating a "
                           "literal)");
        inst.clauses.push_back(std::move(cur));
        cur.clear();
        continue;
      }
      long v = x < 0 ? -x : x;
      if (v > declared_vars)
        throw ParseError("line " + std::to_string(line_no) + ": variable " + std::to_string(v) +
                         " exceeds declared count " + std::to_string(declared_vars));
      cur.push_back({static_cast<int>(v - 1), x < 0});
    } while (ls >> tok);
  }
  if (!cur.empty()) throw ParseError("unterminated final clause (missing 0)");
  if (!header) throw ParseError("missing 'p cnf' header");
  if (static_cast<long>(inst.clauses.size()) != declared_clauses)
    throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                     std::to_string(inst.clauses.size()));
  inst.num_vars = declared_vars;
  if (inst.width == -1) inst.width = 3;
  return inst;
}

std::string dimacs_export(const SignedClauseInstance& inst) {
  validate(inst);
  std::string out = "p cnf " + std::to_string(inst.num_vars) + " " +
                    std::to_string(inst.clauses.size()) + "\n";
  for (const auto& cl : inst.clauses) {
    for (const Literal& l : cl) {
      out += l.negated ? "-" : "";
      out += std::to_string(l.var + 1);
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

namespace {

// Splits a signature with constants into plain symbols and the constant
// value of each unary c<a> symbol (-1 for plain symbols).
std::vector<int> constant_values(const Signature& sig, const RelationalStructure& tmpl) {
  std::vector<int> val(sig.size(), -1);
  for (int a = 0; a < tmpl.size(); ++a) {
    int s = sig.find(templates::constant_symbol(a));
    if (s >= 0) val[s] = a;
  }
  return val;
}

// F together with the singleton unary relations c<a>(x).
FormulaSet with_singletons(const FormulaSet& F, const RelationalStructure& tmpl) {
  FormulaSet out = F;
  for (int a = 0; a < tmpl.size(); ++a)
    out.push_back({1, 0, {Atom::relation(templates::constant_symbol(a), {0})}});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

ReductionOutput con_reduce(const RelationalStructure& instance, const RelationalStructure& tmpl,
                           int k, const FormulaSet& F) {
  if (!is_core(tmpl)) throw InvalidArgument("template is not a core");
  const RelationalStructure tcon = templates::with_constants(tmpl);
  const Signature& plain = tmpl.signature();
  symbol_map(instance.signature(), tcon.signature());
  const int na = tmpl.size();

  ReflectionResult ref = one_step_reflection(instance, tcon, k, with_singletons(F, tmpl));
  const RelationalStructure& b = ref.structure;
  const Signature& sig = b.signature();
  const std::vector<int> cval = constant_values(sig, tmpl);
  const int nb = b.size();

  // Raw elements: the reflected instance, then the copy C_A.
  UnionFind uf(nb + na);
  for (std::size_t s = 0; s < sig.size(); ++s) {
    if (cval[s] < 0) continue;
    const Relation& r = b.relation(s);
    for (std::size_t i = 0; i < r.size(); ++i) uf.unite(r[i][0], nb + cval[s]);
  }
  ReductionOutput out;
  for (int a = 0; a < na; ++a)
    for (int c = a + 1; c < na; ++c)
      if (uf.find(nb + a) == uf.find(nb + c)) {
        // Two constants forced equal: A with a and c merged has no
        // homomorphism to the core A.
        std::vector<int> key(na);
        std::iota(key.begin(), key.end(), 0);
        key[c] = a;
        out.structure = quotient_by_key(tmpl, key).structure;
        for (int e = 0; e < out.structure.size(); ++e)
          out.elements.push_back({ElementOrigin::Kind::TemplateCopy, e < c ? e : e + 1, -1, -1});
        out.hyperedges.assign(plain.size(), {});
        for (std::size_t s = 0; s < plain.size(); ++s)
          out.hyperedges[s].assign(out.structure.relation(s).size(), HyperedgeOrigin{});
        out.canonical_no = true;
        return out;
      }

  std::vector<int> id(nb + na, -1);
  int n = 0;
  for (int e = 0; e < nb + na; ++e)
    if (uf.find(e) == e) {
      id[e] = n++;
      out.elements.push_back(e < nb ? ElementOrigin{ElementOrigin::Kind::Open, e, -1, -1}
                                    : ElementOrigin{ElementOrigin::Kind::TemplateCopy, e - nb, -1, -1});
    }
  auto img = [&](int e) { return id[uf.find(e)]; };
  for (int e = 0; e < instance.size(); ++e) out.source_map.push_back(img(ref.quotient_map[e]));
  for (auto& o : out.elements)
    if (o.kind == ElementOrigin::Kind::Open) {
      // Report the least source element landing on this reflected element.
      int src = -1;
      for (int e = 0; e < instance.size() && src < 0; ++e)
        if (ref.quotient_map[e] == o.source) src = e;
      o.source = src;
    }

  // Instance hyperedges are numbered over the reflected instance.
  std::vector<std::pair<EdgeKey, HyperedgeOrigin>> edges;
  int hyper = 0;
  std::vector<int> t;
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Relation& r = b.relation(s);
    if (cval[s] >= 0) {
      hyper += static_cast<int>(r.size());
      continue;
    }
    int ps = plain.index_of(sig[s].name);
    for (std::size_t i = 0; i < r.size(); ++i, ++hyper) {
      t.clear();
      for (int x : r[i]) t.push_back(img(x));
      edges.push_back({{ps, t}, {hyper, 0}});
    }
  }
  for (std::size_t s = 0; s < plain.size(); ++s) {
    const Relation& r = tmpl.relation(s);
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.clear();
      for (int x : r[i]) t.push_back(img(nb + x));
      edges.push_back({{static_cast<int>(s), t}, {}});
    }
  }
  finish(out, plain, n, edges);
  out.layout.open.resize(n);
  std::iota(out.layout.open.begin(), out.layout.open.end(), 0);
  return out;
}

FormulaSet build_G(const FormulaSet& F, const RelationalStructure& tmpl, int k) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const int na = tmpl.size();
  const Signature& plain = tmpl.signature();
  const FormulaSet full = with_singletons(F, tmpl);
  std::set<PpFormula> out;
  for (int p = std::max(0, k - na); p <= k; ++p) {
    const FormulaSet members = p == 0 ? FormulaSet{} : instantiate(full, p);
    if (members.size() > 24) throw BudgetExceeded("budget exceeded: too many types for build_G");
    const std::size_t subsets = std::size_t{1} << members.size();
    const int q = k - p;
    // Selected constants: increasing q-subsets of A, as bitmasks.
    std::vector<std::vector<int>> picks;
    for (unsigned m = 0; m < (1u << na); ++m)
      if (std::popcount(m) == q) {
        std::vector<int> sel;
        for (int a = 0; a < na; ++a)
          if (m >> a & 1) sel.push_back(a);
        picks.push_back(std::move(sel));
      }
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      TypeFormula tau{p, {}};
      for (std::size_t i = 0; i < members.size(); ++i)
        if (mask >> i & 1) tau.members.push_back(members[i]);
      const PpFormula sigma = tau.conjunction();
      for (const auto& sel : picks) {
        budget::charge();
        // Variables: x_1..x_p, the selected x_a, the other x_a, then the
        // quantified variables of sigma.
        std::vector<int> var_of_const(na, -1);
        int next = p;
        for (int a : sel) var_of_const[a] = next++;
        for (int a = 0; a < na; ++a)
          if (var_of_const[a] < 0) var_of_const[a] = next++;
        PpFormula d;
        d.num_free = k;
        d.num_exist = na - q + sigma.num_exist;
        for (std::size_t s = 0; s < plain.size(); ++s) {
          const Relation& r = tmpl.relation(s);
          for (std::size_t i = 0; i < r.size(); ++i) {
            std::vector<int> args;
            for (int x : r[i]) args.push_back(var_of_const[x]);
            d.atoms.push_back(Atom::relation(plain[s].name, std::move(args)));
          }
        }
        auto rename = [&](int v) { return v < p ? v : v - p + k + na - q; };
        for (const Atom& at : sigma.atoms) {
          if (at.is_eq()) {
            d.atoms.push_back(Atom::eq(rename(at.args[0]), rename(at.args[1])));
            continue;
          }
          bool constant = false;
          for (int a = 0; a < na && !constant; ++a)
            if (at.rel == templates::constant_symbol(a)) {
              d.atoms.push_back(Atom::eq(rename(at.args[0]), var_of_const[a]));
              constant = true;
            }
          if (constant) continue;
          std::vector<int> args;
          for (int v : at.args) args.push_back(rename(v));
          d.atoms.push_back(Atom::relation(at.rel, std::move(args)));
        }
        validate(d, &plain);
        out.insert(canonicalize(d));
      }
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace antcsp

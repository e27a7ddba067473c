#include "antcsp/formula.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "antcsp/error.hpp"
#include "antcsp/templates.hpp"

namespace antcsp {

std::string variable_name(const PpFormula& f, int v) {
  if (f.is_free(v)) return "x" + std::to_string(v + 1);
  return "y" + std::to_string(v - f.num_free + 1);
}

std::string to_string(const PpFormula& f) {
  std::string s;
  if (f.num_exist > 0) {
    s += "exists ";
    for (int j = 0; j < f.num_exist; ++j) {
      if (j) s += ",";
      s += variable_name(f, f.num_free + j);
    }
    s += ": ";
  }
  if (f.atoms.empty()) return s + "true";
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    const Atom& a = f.atoms[i];
    if (i) s += " & ";
    if (a.is_eq()) {
      s += variable_name(f, a.args[0]) + "=" + variable_name(f, a.args[1]);
    } else {
      s += a.rel + "(";
      for (std::size_t j = 0; j < a.args.size(); ++j) {
        if (j) s += ",";
        s += variable_name(f, a.args[j]);
      }
      s += ")";
    }
  }
  return s;
}

void validate(const PpFormula& f, const Signature* sig) {
  if (f.num_free < 0 || f.num_exist < 0)
    throw InvalidArgument("negative variable count in formula");
  for (const Atom& a : f.atoms) {
    if (a.is_eq() && a.args.size() != 2)
      throw InvalidArgument("equality atom needs two arguments");
    for (int v : a.args)
      if (v < 0 || v >= f.num_vars())
        throw InvalidArgument("formula atom uses an undeclared variable");
    if (!a.is_eq() && sig) {
      int i = sig->find(a.rel);
      if (i < 0) throw InvalidArgument("formula uses unknown symbol '" + a.rel + "'");
      if ((*sig)[i].arity != static_cast<int>(a.args.size()))
        throw InvalidArgument("arity mismatch for '" + a.rel + "' in formula");
    }
  }
}

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

// Canonical labelling of quantified variables by colour refinement with
// exhaustive branching on non-singleton cells.
class Labeller {
 public:
  Labeller(int nf, int ne, std::vector<Atom> atoms)
      : nf_(nf), ne_(ne), atoms_(std::move(atoms)) {
    std::set<std::string> names;
    for (const Atom& a : atoms_) names.insert(a.rel);
    int r = 0;
    for (const auto& n : names) rank_[n] = r++;
    occ_.resize(ne_);
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      for (std::size_t p = 0; p < atoms_[i].args.size(); ++p) {
        int v = atoms_[i].args[p];
        if (v >= nf_) occ_[v - nf_].push_back({static_cast<int>(i), static_cast<int>(p)});
      }
  }

  PpFormula run() {
    std::vector<int> col(ne_, 0);
    refine(col);
    best_.reset();
    branch(col);
    return *best_;
  }

 private:
  void refine(std::vector<int>& col) const {
    int ncol = count(col);
    while (true) {
      std::vector<std::vector<long long>> sig(ne_);
      for (int v = 0; v < ne_; ++v) {
        std::vector<std::vector<long long>> codes;
        for (auto [ai, p] : occ_[v]) {
          const Atom& a = atoms_[ai];
          std::vector<long long> c = {a.is_eq() ? 1 : 0, rank_.at(a.rel), p};
          for (int u : a.args) c.push_back(u < nf_ ? -(u + 1) : col[u - nf_]);
          codes.push_back(std::move(c));
        }
        std::sort(codes.begin(), codes.end());
        sig[v].push_back(col[v]);
        for (auto& c : codes) {
          sig[v].push_back(static_cast<long long>(c.size()));
          sig[v].insert(sig[v].end(), c.begin(), c.end());
        }
      }
      std::vector<std::vector<long long>> distinct = sig;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (int v = 0; v < ne_; ++v)
        col[v] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), sig[v]) -
                                  distinct.begin());
      int n2 = static_cast<int>(distinct.size());
      if (n2 == ncol) return;
      ncol = n2;
    }
  }

  static int count(const std::vector<int>& col) {
    std::set<int> s(col.begin(), col.end());
    return static_cast<int>(s.size());
  }

  // Individualise each member of the first non-trivial cell in turn,
  // skipping members in the orbit of an explored one under automorphisms
  // found so far that fix the current path.
  void branch(const std::vector<int>& col) {
    std::map<int, std::vector<int>> cells;
    for (int v = 0; v < ne_; ++v) cells[col[v]].push_back(v);
    for (auto& [c, members] : cells) {
      if (members.size() < 2) continue;
      std::vector<int> explored;
      for (int v : members) {
        if (!explored.empty() && same_orbit(explored, v)) continue;
        explored.push_back(v);
        std::vector<int> c2(ne_);
        for (int u = 0; u < ne_; ++u) c2[u] = col[u] * 2 + (u == v ? 0 : 1);
        refine(c2);
        path_.push_back(v);
        branch(c2);
        path_.pop_back();
      }
      return;
    }
    budget::charge();
    PpFormula f;
    f.num_free = nf_;
    f.num_exist = ne_;
    for (const Atom& a : atoms_) {
      Atom b = a;
      for (int& u : b.args)
        if (u >= nf_) u = nf_ + col[u - nf_];
      f.atoms.push_back(std::move(b));
    }
    std::sort(f.atoms.begin(), f.atoms.end());
    f.atoms.erase(std::unique(f.atoms.begin(), f.atoms.end()), f.atoms.end());
    auto [it, fresh] = leaves_.emplace(f, col);
    if (!fresh) {
      // Two labellings giving the same formula differ by an automorphism.
      std::vector<int> inv(ne_), g(ne_);
      for (int w = 0; w < ne_; ++w) inv[it->second[w]] = w;
      for (int v = 0; v < ne_; ++v) g[v] = inv[col[v]];
      autos_.push_back(std::move(g));
      return;
    }
    if (!best_ || f < *best_) best_ = std::move(f);
  }

  bool same_orbit(const std::vector<int>& explored, int v) const {
    std::vector<int> parent(ne_);
    for (int i = 0; i < ne_; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& g : autos_) {
      bool fixes = true;
      for (int p : path_) fixes &= g[p] == p;
      if (!fixes) continue;
      for (int i = 0; i < ne_; ++i) parent[find(i)] = find(g[i]);
    }
    for (int u : explored)
      if (find(u) == find(v)) return true;
    return false;
  }

  int nf_, ne_;
  std::vector<Atom> atoms_;
  std::map<std::string, long long> rank_;
  std::vector<std::vector<std::pair<int, int>>> occ_;
  std::optional<PpFormula> best_;
  std::map<PpFormula, std::vector<int>> leaves_;
  std::vector<std::vector<int>> autos_;
  std::vector<int> path_;
};

}  // namespace

PpFormula canonicalize(const PpFormula& f) {
  validate(f);
  int n = f.num_vars();
  UnionFind uf(n);
  for (const Atom& a : f.atoms)
    if (a.is_eq()) uf.unite(a.args[0], a.args[1]);
  // Least member of each class; free variables are smallest ids, so a class
  // containing a free variable is represented by one.
  std::vector<int> rep(n);
  for (int v = 0; v < n; ++v) rep[v] = uf.find(v);

  std::vector<Atom> atoms;
  for (const Atom& a : f.atoms) {
    if (a.is_eq()) continue;
    Atom b = a;
    for (int& u : b.args) u = rep[u];
    atoms.push_back(std::move(b));
  }
  for (int v = 0; v < f.num_free; ++v)
    if (rep[v] != v) atoms.push_back(Atom::eq(rep[v], v));
  // Duplicates would skew the refinement colours.
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());

  // Renumber the quantified variables that are still used.
  std::vector<int> newid(n, -1);
  int ne = 0;
  for (const Atom& a : atoms)
    for (int u : a.args)
      if (u >= f.num_free && newid[u] < 0) newid[u] = f.num_free + ne++;
  for (Atom& a : atoms)
    for (int& u : a.args)
      if (u >= f.num_free) u = newid[u];
  return Labeller(f.num_free, ne, std::move(atoms)).run();
}

PpFormula conjoin(const std::vector<PpFormula>& parts, int num_free) {
  PpFormula out;
  out.num_free = num_free;
  int next = num_free;
  for (const PpFormula& p : parts) {
    if (p.num_free != num_free)
      throw InvalidArgument("conjoined formulas must share their free variables");
    for (const Atom& a : p.atoms) {
      Atom b = a;
      for (int& u : b.args)
        if (u >= num_free) u = next + (u - num_free);
      out.atoms.push_back(std::move(b));
    }
    next += p.num_exist;
  }
  out.num_exist = next - num_free;
  return out;
}

PpFormula project(const PpFormula& f, int keep) {
  if (keep < 0 || keep > f.num_free)
    throw InvalidArgument("projection keeps more variables than are free");
  PpFormula g = f;
  g.num_exist += f.num_free - keep;
  g.num_free = keep;
  return g;
}

PpFormula substitute(const PpFormula& f, const std::vector<int>& iota, int num_new) {
  PpFormula g;
  g.num_free = num_new;
  g.num_exist = f.num_exist;
  for (const Atom& a : f.atoms) {
    Atom b = a;
    for (int& u : b.args) u = u < f.num_free ? iota[u] : num_new + (u - f.num_free);
    g.atoms.push_back(std::move(b));
  }
  return g;
}

CompiledFormula::CompiledFormula(const PpFormula& f, const RelationalStructure& s,
                                 bool lexicographic_witness)
    : f_(f), s_(&s) {
  validate(f, &s.signature());
  int n = f.num_vars();
  UnionFind uf(n);
  for (const Atom& a : f.atoms)
    if (a.is_eq()) uf.unite(a.args[0], a.args[1]);
  rep_.resize(n);
  for (int v = 0; v < n; ++v) rep_[v] = uf.find(v);
  for (int v = 0; v < f.num_free; ++v)
    if (rep_[v] != v) free_eqs_.push_back({rep_[v], v});

  std::vector<int> reps;
  for (int v = f.num_free; v < n; ++v)
    if (rep_[v] == v) reps.push_back(v);
  std::vector<int> rel_atoms;
  for (std::size_t i = 0; i < f.atoms.size(); ++i)
    if (!f.atoms[i].is_eq()) rel_atoms.push_back(static_cast<int>(i));
  syms_.assign(f.atoms.size(), -1);
  for (int i : rel_atoms) syms_[i] = s.signature().find(f.atoms[i].rel);

  if (lexicographic_witness) {
    order_ = reps;
  } else {
    // Greedy: next variable shares atoms with the most assigned variables.
    std::vector<char> assigned(n, 0);
    for (int v = 0; v < f.num_free; ++v) assigned[v] = 1;
    std::vector<char> used(reps.size(), 0);
    for (std::size_t step = 0; step < reps.size(); ++step) {
      int best = -1, best_score = -1;
      for (std::size_t j = 0; j < reps.size(); ++j) {
        if (used[j]) continue;
        int score = 0;
        for (int i : rel_atoms) {
          bool has = false;
          int known = 0;
          for (int u : f.atoms[i].args) {
            if (rep_[u] == reps[j]) has = true;
            else if (assigned[rep_[u]]) ++known;
          }
          if (has) score += 1 + 4 * known;
        }
        if (score > best_score) {
          best_score = score;
          best = static_cast<int>(j);
        }
      }
      used[best] = 1;
      assigned[reps[best]] = 1;
      order_.push_back(reps[best]);
    }
  }
  std::vector<int> level_of(n, -1);
  for (std::size_t l = 0; l < order_.size(); ++l) level_of[order_[l]] = static_cast<int>(l);
  level_atoms_.resize(order_.size());
  for (int i : rel_atoms) {
    int last = -1;
    for (int u : f.atoms[i].args) last = std::max(last, level_of[rep_[u]]);
    if (last < 0)
      free_atoms_.push_back(i);
    else
      level_atoms_[last].push_back(i);
  }
}

bool CompiledFormula::search(std::vector<int>& val, std::size_t level) const {
  if (level == order_.size()) return true;
  int v = order_[level];
  const auto& atoms = level_atoms_[level];
  std::vector<int> tup;
  auto check = [&](int ai) {
    const Atom& a = f_.atoms[ai];
    tup.resize(a.args.size());
    for (std::size_t p = 0; p < a.args.size(); ++p) tup[p] = val[rep_[a.args[p]]];
    return s_->has(syms_[ai], tup);
  };
  budget::charge();
  if (atoms.empty()) {
    for (int x = 0; x < s_->size(); ++x) {
      val[v] = x;
      if (search(val, level + 1)) return true;
    }
    return false;
  }
  // Candidates from the first atom completed here.
  const Atom& a0 = f_.atoms[atoms[0]];
  const Relation& rel = s_->relation(syms_[atoms[0]]);
  std::vector<int> cand;
  for (std::size_t t = 0; t < rel.size(); ++t) {
    auto row = rel[t];
    int x = -1;
    bool ok = true;
    for (std::size_t p = 0; p < a0.args.size() && ok; ++p) {
      int r = rep_[a0.args[p]];
      if (r == v) {
        if (x < 0) x = row[p];
        else if (x != row[p]) ok = false;
      } else if (val[r] != row[p]) {
        ok = false;
      }
    }
    if (ok) cand.push_back(x);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (int x : cand) {
    val[v] = x;
    bool ok = true;
    for (std::size_t i = 1; i < atoms.size() && ok; ++i) ok = check(atoms[i]);
    if (ok && search(val, level + 1)) return true;
  }
  return false;
}

EvalResult CompiledFormula::evaluate(std::span<const int> binding) const {
  if (static_cast<int>(binding.size()) != f_.num_free)
    throw InvalidArgument("binding does not cover exactly the free variables");
  EvalResult r;
  for (int b : binding)
    if (b < 0 || b >= s_->size()) throw InvalidArgument("binding value out of range");
  for (auto [a, b] : free_eqs_)
    if (binding[a] != binding[b]) return r;
  std::vector<int> val(f_.num_vars(), -1);
  for (int i = 0; i < f_.num_free; ++i) val[i] = binding[i];
  std::vector<int> tup;
  for (int ai : free_atoms_) {
    const Atom& a = f_.atoms[ai];
    tup.resize(a.args.size());
    for (std::size_t p = 0; p < a.args.size(); ++p) tup[p] = val[rep_[a.args[p]]];
    if (!s_->has(syms_[ai], tup)) return r;
  }
  if (!order_.empty() && s_->size() == 0) return r;
  if (!search(val, 0)) return r;
  r.holds = true;
  for (int v = f_.num_free; v < f_.num_vars(); ++v) r.witness.push_back(val[rep_[v]]);
  return r;
}

bool CompiledFormula::holds(std::span<const int> binding) const {
  return evaluate(binding).holds;
}

EvalResult eval_pp(const RelationalStructure& s, const PpFormula& f,
                   std::span<const int> binding) {
  return CompiledFormula(f, s, true).evaluate(binding);
}

FormulaSet instantiate(const FormulaSet& F, int k) {
  if (k < 0) throw InvalidArgument("k must be nonnegative");
  std::set<PpFormula> out;
  for (const PpFormula& phi : F) {
    int n = phi.num_free;
    if (n > 0 && k == 0) continue;
    std::vector<int> iota(n, 0);
    while (true) {
      budget::charge();
      out.insert(canonicalize(substitute(phi, iota, k)));
      int i = n - 1;
      while (i >= 0 && iota[i] == k - 1) iota[i--] = 0;
      if (i < 0) break;
      ++iota[i];
    }
  }
  return {out.begin(), out.end()};
}

PpFormula TypeFormula::conjunction() const { return conjoin(members, k); }

TypeOracle::TypeOracle(const FormulaSet& F, int k, const RelationalStructure& s)
    : k_(k), members_(instantiate(F, k)) {
  compiled_.reserve(members_.size());
  for (const auto& m : members_) compiled_.emplace_back(m, s);
}

std::vector<int> TypeOracle::satisfied(std::span<const int> tuple) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < compiled_.size(); ++i)
    if (compiled_[i].holds(tuple)) out.push_back(static_cast<int>(i));
  return out;
}

TypeFormula TypeOracle::type_of(std::span<const int> tuple) const {
  TypeFormula t;
  t.k = k_;
  for (int i : satisfied(tuple)) t.members.push_back(members_[i]);
  return t;
}

TypeFormula type_of(const RelationalStructure& s, std::span<const int> tuple,
                    const FormulaSet& F) {
  for (int b : tuple)
    if (b < 0 || b >= s.size()) throw InvalidArgument("tuple entry out of range");
  return TypeOracle(F, static_cast<int>(tuple.size()), s).type_of(tuple);
}

namespace {
constexpr int kMaxTypeBits = 24;

void check_type_count(std::size_t m) {
  if (m > kMaxTypeBits)
    throw BudgetExceeded("budget exceeded: 2^" + std::to_string(m) +
                         " types to enumerate");
  budget::charge(1ULL << m);
}
}  // namespace

FormulaSet project_types(const FormulaSet& F, int k, int l) {
  if (l < 0 || l > k) throw InvalidArgument("projection level must satisfy 0 <= l <= k");
  FormulaSet members = instantiate(F, k);
  check_type_count(members.size());
  std::set<PpFormula> out;
  std::size_t m = members.size();
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    std::vector<PpFormula> parts;
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1) parts.push_back(members[i]);
    out.insert(canonicalize(project(conjoin(parts, k), l)));
  }
  return {out.begin(), out.end()};
}

FormulaSet closure_union(const FormulaSet& F, int k) {
  std::set<PpFormula> out;
  for (int i = 0; i <= k; ++i)
    for (auto& f : project_types(F, k, i)) out.insert(f);
  return {out.begin(), out.end()};
}

const PpFormula& PpDefinitionSet::at(const std::string& r) const {
  auto it = defs.find(r);
  if (it == defs.end()) throw InvalidArgument("missing definition for '" + r + "'");
  return it->second;
}

void PpDefinitionSet::validate() const {
  for (const Symbol& s : source.symbols()) {
    const PpFormula& d = at(s.name);
    if (d.num_free != s.arity)
      throw InvalidArgument("definition of '" + s.name + "' has wrong free-variable count");
    antcsp::validate(d, &target);
  }
}

PpFormula translate_to_target(const PpFormula& psi, const PpDefinitionSet& defs) {
  PpFormula out;
  out.num_free = psi.num_free;
  int next = psi.num_vars();
  for (const Atom& a : psi.atoms) {
    if (a.is_eq()) {
      out.atoms.push_back(a);
      continue;
    }
    const PpFormula& d = defs.at(a.rel);
    if (d.num_free != static_cast<int>(a.args.size()))
      throw InvalidArgument("definition of '" + a.rel + "' has wrong arity");
    for (const Atom& b : d.atoms) {
      Atom c = b;
      for (int& u : c.args) u = u < d.num_free ? a.args[u] : next + (u - d.num_free);
      out.atoms.push_back(std::move(c));
    }
    next += d.num_exist;
  }
  out.num_exist = next - psi.num_free;
  return out;
}

FormulaSet translate_all(const FormulaSet& F, const PpDefinitionSet& defs) {
  FormulaSet out;
  for (const auto& f : F) out.push_back(translate_to_target(f, defs));
  return out;
}

PpDefinitionSet sat3_to_one_in_three() {
  PpDefinitionSet d;
  d.source = templates::nsat(3).signature();
  d.target = templates::signed_one_in_three().signature();
  for (unsigned p = 0; p < 8; ++p) {
    int s1 = (p >> 2) & 1, s2 = (p >> 1) & 1, s3 = p & 1;
    PpFormula f;
    f.num_free = 3;
    f.num_exist = 4;
    // x1,x2,x3 = 0,1,2; y1..y4 = 3..6
    f.atoms.push_back(Atom::relation("r_" + std::to_string(1 - s1) + "00", {0, 3, 4}));
    f.atoms.push_back(Atom::relation("r_0" + std::to_string(s2) + "0", {4, 1, 5}));
    f.atoms.push_back(Atom::relation("r_00" + std::to_string(1 - s3), {5, 6, 2}));
    d.defs[templates::sat_symbol(3, p)] = f;
  }
  return d;
}

FormulaSet fundamental_relations(const Signature& sig) {
  FormulaSet out;
  for (const Symbol& s : sig.symbols()) {
    PpFormula f;
    f.num_free = s.arity;
    std::vector<int> args(s.arity);
    std::iota(args.begin(), args.end(), 0);
    f.atoms.push_back(Atom::relation(s.name, args));
    out.push_back(f);
  }
  return out;
}

}  // namespace antcsp

#include <algorithm>
#include <numeric>
#include <set>

#include "antcsp/error.hpp"
#include "antcsp/formula.hpp"

namespace antcsp {

namespace {

// Restricted growth strings: all set partitions of n items.
template <class F>
void for_each_partition(int n, F&& fn) {
  std::vector<int> a(n, 0), mx(n, 0);
  while (true) {
    fn(a, n == 0 ? 0 : *std::max_element(a.begin(), a.end()) + 1);
    int i = n - 1;
    while (i > 0 && a[i] == mx[i] + 1) --i;
    if (i <= 0) return;
    ++a[i];
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      mx[j] = std::max(mx[j - 1], a[j - 1]);
    }
    mx[i] = std::max(mx[i - 1], a[i - 1]);
  }
}

template <class F>
void for_each_combination(int n, int k, F&& fn) {
  if (k > n) return;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    fn(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

struct Wrist {
  TypeFormula sigma;
  PpFormula translated;  // sigma over the target, free vars = wrist vars
};

}  // namespace

ClawEnumeration enumerate_claws(const PpDefinitionSet& defs, const FormulaSet& F,
                                int k, int l, std::size_t cap) {
  if (k < 0 || l < 0) throw InvalidArgument("claw arity and bound must be nonnegative");
  std::vector<std::string> names;
  for (const auto& [name, d] : defs.defs) names.push_back(name);

  std::vector<std::vector<Wrist>> wrists(l + 1);
  for (int lp = 0; lp <= l; ++lp) {
    FormulaSet members = instantiate(F, lp);
    if (members.size() > 20) throw BudgetExceeded("budget exceeded: too many wrist types");
    for (std::uint64_t mask = 0; mask < (1ULL << members.size()); ++mask) {
      Wrist w;
      w.sigma.k = lp;
      for (std::size_t i = 0; i < members.size(); ++i)
        if ((mask >> i) & 1) w.sigma.members.push_back(members[i]);
      w.translated = translate_to_target(w.sigma.conjunction(), defs);
      wrists[lp].push_back(std::move(w));
    }
  }

  ClawEnumeration out;
  std::set<PpFormula> seen;

  // Talon: nondecreasing sequence of definition indices.
  for (int t = 0; t <= k; ++t) {
    if (t > 0 && names.empty()) break;
    std::vector<int> seq(t, 0);
    while (true) {
      std::vector<const PpFormula*> copies;
      int total_open = 0, total_exist = 0;
      for (int i : seq) {
        copies.push_back(&defs.defs.at(names[i]));
        total_open += copies.back()->num_free;
        total_exist += copies.back()->num_exist;
      }
      for_each_partition(total_open, [&](const std::vector<int>& cls, int P) {
        // Variables: open classes 0..P-1, then talon existentials.
        std::vector<Atom> talon_atoms;
        int open_off = 0, exist_off = P;
        for (const PpFormula* d : copies) {
          for (const Atom& a : d->atoms) {
            Atom b = a;
            for (int& u : b.args)
              u = u < d->num_free ? cls[open_off + u] : exist_off + (u - d->num_free);
            talon_atoms.push_back(std::move(b));
          }
          open_off += d->num_free;
          exist_off += d->num_exist;
        }
        int base = P + total_exist;
        for (int lp = 0; lp <= l; ++lp) {
          for (const Wrist& w : wrists[lp]) {
            std::vector<int> ident(lp, -1);
            while (true) {
              std::vector<int> wvar(lp);
              int next = base;
              for (int i = 0; i < lp; ++i) wvar[i] = ident[i] >= 0 ? ident[i] : next++;
              int unquantified = next;  // all ids below are candidates
              std::vector<Atom> atoms = talon_atoms;
              const PpFormula& ws = w.translated;
              for (const Atom& a : ws.atoms) {
                Atom b = a;
                for (int& u : b.args)
                  u = u < ws.num_free ? wvar[u] : unquantified + (u - ws.num_free);
                atoms.push_back(std::move(b));
              }
              int total = unquantified + ws.num_exist;
              for_each_combination(unquantified, k, [&](const std::vector<int>& C) {
                ++out.constructions;
                budget::charge();
                if (cap && out.constructions > cap)
                  throw BudgetExceeded("budget exceeded: claw enumeration cap reached");
                std::vector<int> rename(total, -1);
                for (int i = 0; i < k; ++i) rename[C[i]] = i;
                int e = k;
                for (int v = 0; v < total; ++v)
                  if (rename[v] < 0) rename[v] = e++;
                PpFormula f;
                f.num_free = k;
                f.num_exist = total - k;
                for (const Atom& a : atoms) {
                  Atom b = a;
                  for (int& u : b.args) u = rename[u];
                  f.atoms.push_back(std::move(b));
                }
                PpFormula c = canonicalize(f);
                if (!seen.insert(c).second) return;
                ClawFormula claw;
                for (int i : seq) claw.talon.push_back(names[i]);
                claw.open_classes = cls;
                claw.wrist = w.sigma;
                claw.wrist_identification = ident;
                claw.free_choice = C;
                claw.formula = std::move(c);
                out.claws.push_back(std::move(claw));
              });
              int i = lp - 1;
              while (i >= 0 && ident[i] == P - 1) ident[i--] = -1;
              if (i < 0) break;
              ++ident[i];
            }
          }
        }
      });
      int i = t - 1;
      while (i >= 0 && seq[i] == static_cast<int>(names.size()) - 1) --i;
      if (i < 0) break;
      ++seq[i];
      for (int j = i + 1; j < t; ++j) seq[j] = seq[i];
    }
  }
  return out;
}

FormulaSet claw_formula_set(const PpDefinitionSet& defs, const FormulaSet& F, int k,
                            int l, std::size_t cap) {
  FormulaSet out;
  for (auto& c : enumerate_claws(defs, F, k, l, cap).claws) out.push_back(c.formula);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Copy {
  std::string sym;
  std::vector<int> open;     // image of each open variable
  std::vector<int> priv;     // image of each quantified definition variable
  std::vector<int> atoms;    // covered atom indices
};

// Splits the relational atoms of phi into images of definition copies whose
// quantified variables are private (distinct, and used by no other atom).
class Decomposer {
 public:
  Decomposer(const PpDefinitionSet& defs, const PpFormula& phi,
             std::function<bool(const std::vector<Copy>&)> accept)
      : defs_(defs), phi_(phi), accept_(std::move(accept)) {
    for (std::size_t i = 0; i < phi.atoms.size(); ++i)
      if (!phi.atoms[i].is_eq()) rel_.push_back(static_cast<int>(i));
    covered_.assign(phi.atoms.size(), 0);
    occ_.resize(phi.num_vars());
    for (std::size_t i = 0; i < phi.atoms.size(); ++i)
      for (int u : phi.atoms[i].args) occ_[u].push_back(static_cast<int>(i));
  }

  bool run() { return next_copy(); }

 private:
  bool next_copy() {
    int first = -1;
    for (int i : rel_)
      if (!covered_[i]) {
        first = i;
        break;
      }
    if (first < 0) return accept_(copies_);
    for (const auto& [name, d] : defs_.defs)
      for (std::size_t j = 0; j < d.atoms.size(); ++j) {
        const Atom& da = d.atoms[j];
        if (da.is_eq() || da.rel != phi_.atoms[first].rel) continue;
        std::vector<int> m(d.num_vars(), -1);
        std::vector<int> used;
        if (!unify(d, da, phi_.atoms[first], m)) continue;
        used.push_back(first);
        if (match_rest(name, d, m, used, 0, static_cast<int>(j))) return true;
      }
    return false;
  }

  bool unify(const PpFormula& d, const Atom& da, const Atom& pa, std::vector<int>& m) {
    for (std::size_t p = 0; p < da.args.size(); ++p) {
      int dv = da.args[p], pv = pa.args[p];
      if (m[dv] >= 0 && m[dv] != pv) return false;
      m[dv] = pv;
    }
    (void)d;
    return true;
  }

  // Matches the remaining definition atoms (all except skip) in order.
  bool match_rest(const std::string& name, const PpFormula& d, std::vector<int>& m,
                  std::vector<int>& used, std::size_t idx, int skip) {
    if (idx == d.atoms.size()) return finish(name, d, m, used);
    if (static_cast<int>(idx) == skip || d.atoms[idx].is_eq())
      return match_rest(name, d, m, used, idx + 1, skip);
    const Atom& da = d.atoms[idx];
    for (int i : rel_) {
      if (covered_[i] && std::find(used.begin(), used.end(), i) == used.end()) continue;
      const Atom& pa = phi_.atoms[i];
      if (pa.rel != da.rel) continue;
      std::vector<int> saved = m;
      if (!unify(d, da, pa, m)) {
        m = saved;
        continue;
      }
      bool fresh = std::find(used.begin(), used.end(), i) == used.end();
      if (fresh) used.push_back(i);
      if (match_rest(name, d, m, used, idx + 1, skip)) return true;
      if (fresh) used.pop_back();
      m = saved;
    }
    return false;
  }

  bool finish(const std::string& name, const PpFormula& d, const std::vector<int>& m,
              const std::vector<int>& used) {
    Copy c;
    c.sym = name;
    for (int v = 0; v < d.num_free; ++v) c.open.push_back(m[v]);
    std::set<int> privs;
    for (int v = d.num_free; v < d.num_vars(); ++v) {
      if (m[v] < 0) return false;  // quantified variable without atoms
      if (!privs.insert(m[v]).second) return false;
      c.priv.push_back(m[v]);
    }
    for (int v : c.open)
      if (privs.count(v)) return false;
    for (int w : c.priv)
      for (int ai : occ_[w])
        if (std::find(used.begin(), used.end(), ai) == used.end()) return false;
    c.atoms = used;
    for (int i : used) covered_[i] = 1;
    copies_.push_back(c);
    bool ok = next_copy();
    copies_.pop_back();
    for (int i : used) covered_[i] = 0;
    return ok;
  }

  const PpDefinitionSet& defs_;
  const PpFormula& phi_;
  std::function<bool(const std::vector<Copy>&)> accept_;
  std::vector<int> rel_;
  std::vector<char> covered_;
  std::vector<std::vector<int>> occ_;
  std::vector<Copy> copies_;
};

bool single_atom_members(const FormulaSet& F) {
  for (const auto& f : F)
    if (f.num_exist != 0 || f.atoms.size() != 1) return false;
  return true;
}

// Is the atom r(args) an instance of some member of F?
bool atom_in_F(const FormulaSet& F, const Atom& a) {
  for (const auto& f : F) {
    const Atom& m = f.atoms[0];
    if (m.kind != a.kind || m.rel != a.rel || m.args.size() != a.args.size()) continue;
    std::vector<int> img(f.num_free, -1);
    bool ok = true;
    for (std::size_t p = 0; p < m.args.size() && ok; ++p) {
      int v = m.args[p];
      if (img[v] >= 0 && img[v] != a.args[p]) ok = false;
      img[v] = a.args[p];
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace

bool is_claw(const PpDefinitionSet& defs, const FormulaSet& F, int k, int l,
             const PpFormula& phi0) {
  PpFormula phi = canonicalize(phi0);
  if (phi.num_free != k) return false;
  if (!single_atom_members(F)) {
    for (const auto& f : claw_formula_set(defs, F, k, l))
      if (f == phi) return true;
    return false;
  }
  std::vector<char> in_atom(phi.num_vars(), 0);
  for (const Atom& a : phi.atoms)
    for (int u : a.args) in_atom[u] = 1;
  std::vector<Atom> eqs;
  for (const Atom& a : phi.atoms)
    if (a.is_eq()) eqs.push_back(a);
  for (const Atom& e : eqs)
    if (!atom_in_F(F, e)) return false;

  auto accept = [&](const std::vector<Copy>& copies) {
    int m = static_cast<int>(copies.size());
    if (m > 20) return false;
    std::uint32_t forced = 0;
    for (int c = 0; c < m; ++c)
      for (int w : copies[c].priv)
        if (phi.is_free(w)) forced |= 1u << c;
    for (std::uint32_t talon = 0; talon < (1u << m); ++talon) {
      if ((talon & forced) != forced) continue;
      if (std::popcount(talon) > k) continue;
      std::set<int> wvars;
      bool ok = true;
      for (int c = 0; c < m && ok; ++c) {
        if ((talon >> c) & 1) continue;
        Atom a = Atom::relation(copies[c].sym, copies[c].open);
        if (!atom_in_F(F, a)) ok = false;
        wvars.insert(copies[c].open.begin(), copies[c].open.end());
      }
      if (!ok) continue;
      for (const Atom& e : eqs) wvars.insert(e.args.begin(), e.args.end());
      for (int v = 0; v < phi.num_free; ++v)
        if (!in_atom[v]) wvars.insert(v);
      if (static_cast<int>(wvars.size()) <= l) return true;
    }
    return false;
  };
  return Decomposer(defs, phi, accept).run();
}

std::vector<QuasiEquation> kFq_theory(const RelationalStructure& a, int k,
                                      const FormulaSet& F) {
  if (k < 0) throw InvalidArgument("k must be nonnegative");
  FormulaSet members = instantiate(F, k);
  if (members.size() > 20) throw BudgetExceeded("budget exceeded: too many types");
  std::size_t n = a.size();
  std::size_t tuples = 1;
  for (int i = 0; i < k; ++i) tuples *= n;
  budget::charge(tuples * (members.size() + 1));
  std::vector<std::vector<int>> all(tuples, std::vector<int>(k));
  for (std::size_t t = 0; t < tuples; ++t) {
    std::size_t x = t;
    for (int i = k - 1; i >= 0; --i) {
      all[t][i] = static_cast<int>(x % n);
      x /= n;
    }
  }
  std::vector<std::vector<char>> sat(members.size(), std::vector<char>(tuples));
  for (std::size_t m = 0; m < members.size(); ++m) {
    CompiledFormula cf(members[m], a);
    for (std::size_t t = 0; t < tuples; ++t) sat[m][t] = cf.holds(all[t]);
  }
  // Candidate conclusions and where they hold.
  std::vector<Atom> concl;
  for (const Symbol& s : a.signature().symbols()) {
    std::vector<int> idx(s.arity, 0);
    while (true) {
      concl.push_back(Atom::relation(s.name, idx));
      int i = s.arity - 1;
      while (i >= 0 && idx[i] == k - 1) idx[i--] = 0;
      if (i < 0 || k == 0) break;
      ++idx[i];
    }
    if (k == 0) concl.pop_back();
  }
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) concl.push_back(Atom::eq(i, j));
  std::vector<std::vector<char>> holds(concl.size(), std::vector<char>(tuples));
  for (std::size_t c = 0; c < concl.size(); ++c)
    for (std::size_t t = 0; t < tuples; ++t) {
      const Atom& at = concl[c];
      if (at.is_eq()) {
        holds[c][t] = all[t][at.args[0]] == all[t][at.args[1]];
      } else {
        std::vector<int> img;
        for (int u : at.args) img.push_back(all[t][u]);
        holds[c][t] = a.has(a.signature().index_of(at.rel), img);
      }
    }
  std::vector<QuasiEquation> out;
  for (std::uint64_t mask = 0; mask < (1ULL << members.size()); ++mask) {
    std::vector<char> in(tuples, 1);
    for (std::size_t m = 0; m < members.size(); ++m)
      if ((mask >> m) & 1)
        for (std::size_t t = 0; t < tuples; ++t) in[t] &= sat[m][t];
    TypeFormula sigma;
    sigma.k = k;
    for (std::size_t m = 0; m < members.size(); ++m)
      if ((mask >> m) & 1) sigma.members.push_back(members[m]);
    for (std::size_t c = 0; c < concl.size(); ++c) {
      bool all_hold = true;
      for (std::size_t t = 0; t < tuples && all_hold; ++t)
        if (in[t] && !holds[c][t]) all_hold = false;
      if (all_hold) out.push_back({sigma, concl[c]});
    }
  }
  return out;
}

}  // namespace antcsp

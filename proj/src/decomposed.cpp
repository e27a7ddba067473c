// Exact robustness for Boolean templates on structures made of families of
// private elements hanging off a small set of open elements.
//
// For an assignment sigma of the open elements, family f is satisfiable
// under sigma and a restriction pi of its private elements unless
// sigma|V_f lies in Forb(f, pi).  A partial assignment nu fails to extend iff
// every solution sigma of the open part that agrees with nu on open elements
// lies in the union of Forb(f, nu|f) over the families nu touches.  We
// search for such covers of cost at most k (cost = elements used) by
// branching on an uncovered sigma, with dominance pruning that is sound
// under the swap arguments noted below.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>

#include "antcsp/error.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"

namespace antcsp {

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t words_for(int nbits) {
  return nbits >= 6 ? (std::size_t{1} << (nbits - 6)) : 1;
}

std::uint64_t tail_mask(int nbits) {
  return nbits >= 6 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (1u << nbits)) - 1);
}

bool test_bit(const Bits& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1; }
void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }

bool any(const Bits& b) {
  for (auto w : b)
    if (w) return true;
  return false;
}

std::size_t popcount(const Bits& b) {
  std::size_t c = 0;
  for (auto w : b) c += std::popcount(w);
  return c;
}

bool subset_of(const Bits& a, const Bits& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & ~b[i]) return false;
  return true;
}

// Per-variable masks over the assignments of n Boolean variables.
struct Space {
  int n = 0;
  std::size_t words = 1;
  std::uint64_t tail = 0;
  std::vector<Bits> one;  // one[j]: assignments with bit j set

  explicit Space(int nvars) : n(nvars), words(words_for(nvars)), tail(tail_mask(nvars)) {
    for (int j = 0; j < n; ++j) {
      Bits m(words, 0);
      if (j < 6) {
        std::uint64_t pat = 0;
        for (int i = 0; i < 64; ++i)
          if ((i >> j) & 1) pat |= std::uint64_t{1} << i;
        for (auto& w : m) w = pat;
      } else {
        for (std::size_t w = 0; w < words; ++w)
          if ((w >> (j - 6)) & 1) m[w] = ~std::uint64_t{0};
      }
      m.back() &= tail;
      one.push_back(std::move(m));
    }
  }
  Bits full() const {
    Bits b(words, ~std::uint64_t{0});
    b.back() &= tail;
    return b;
  }
  // Calls fn(word, bits) for every word meeting the cube.
  template <class Fn>
  void for_cube(const std::vector<int>& vars, const std::vector<int>& val, Fn&& fn) const {
    std::uint64_t pat = tail;
    std::size_t hm = 0, hv = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      int j = vars[i];
      if (j < 6) {
        pat &= val[i] ? one[j][0] : ~one[j][0];
      } else {
        std::size_t bit = std::size_t{1} << (j - 6);
        if ((hm & bit) && (((hv & bit) != 0) != (val[i] != 0))) return;
        hm |= bit;
        if (val[i]) hv |= bit;
      }
    }
    if (!pat) return;
    std::size_t hfree = (words - 1) & ~hm;
    std::size_t sub = 0;
    do {
      if constexpr (std::is_same_v<decltype(fn(std::size_t{}, pat)), bool>) {
        if (fn(hv | sub, pat)) return;
      } else {
        fn(hv | sub, pat);
      }
      sub = (sub - hfree) & hfree;
    } while (sub != 0);
  }
  Bits flip(const Bits& b, int j) const {
    Bits r(words);
    if (j < 6) {
      int s = 1 << j;
      std::uint64_t m = one[j][0];
      for (std::size_t w = 0; w < words; ++w)
        r[w] = ((b[w] & m) >> s) | ((b[w] << s) & m);
      r.back() &= tail;
    } else {
      std::size_t d = std::size_t{1} << (j - 6);
      for (std::size_t w = 0; w < words; ++w) r[w] = b[w ^ d];
    }
    return r;
  }
};

using Clause = std::vector<std::pair<int, int>>;  // (open position, value)

// Every clause of `strong` contains a clause of `weak`: whenever the
// stronger set is triggered, so is the weaker one.
bool clauses_weaker(const std::vector<Clause>& strong, const std::vector<Clause>& weak) {
  for (const Clause& c : strong) {
    bool found = false;
    for (const Clause& d : weak)
      if (std::includes(c.begin(), c.end(), d.begin(), d.end())) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

void minimize(std::vector<Clause>& cs) {
  std::sort(cs.begin(), cs.end(), [](const Clause& a, const Clause& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::vector<Clause> out;
  for (const Clause& c : cs) {
    bool redundant = false;
    for (const Clause& d : out)
      if (std::includes(c.begin(), c.end(), d.begin(), d.end())) redundant = true;
    if (!redundant) out.push_back(c);
  }
  cs = std::move(out);
}

struct LocalEdge {
  int sym;
  std::vector<int> args;  // < nV: open position, else nV + private index
  bool relevant;
  auto operator<=>(const LocalEdge&) const = default;
};

struct Unit {
  int cost = 0;
  std::vector<std::pair<int, int>> pi;  // (private index, value)
  Bits forb;                            // over local open assignments
  std::vector<Clause> clauses;          // local open positions
  std::vector<int> ess;                 // essential local positions, ascending
  Bits tt;                              // forb over ess
};

struct Shape {
  int nV = 0, nP = 0;
  std::vector<LocalEdge> edges;
  Bits forb0;
  std::vector<Unit> units;
};

struct Option {
  int cost = 1;
  bool open_item = false;
  std::vector<int> vars;  // global open indices, ascending
  Bits tt;
  std::vector<Clause> clauses;                 // global open indices
  std::vector<std::pair<int, int>> units;      // (family, unit)
};

class Checker {
 public:
  Checker(const RelationalStructure& b, const RelationalStructure& a, int k, const FormulaSet& F,
          const FamilyLayout& layout)
      : b_(b), a_(a), k_(k), layout_(layout) {
    if (a.size() != 2) throw InvalidArgument("decomposed_robust needs a two-element template");
    if (k < 0) throw InvalidArgument("k must be nonnegative");
    read_formulas(F);
    sym_ = symbol_map(b.signature(), a.signature());
    build_tables();
    classify();
  }

  RobustVerdict run();

 private:
  void read_formulas(const FormulaSet& F);
  void build_tables();
  void classify();
  bool edge_holds(int bsym, const std::vector<int>& vals) const {
    const auto& t = table_[bsym];
    std::size_t code = 0;
    for (int v : vals) code = (code << 1) | static_cast<std::size_t>(v);
    return (t[code >> 6] >> (code & 63)) & 1;
  }
  bool relevant(int bsym, std::span<const int> tuple) const;
  int shape_of(int fam);
  void build_shape(Shape& sh);
  void build_options();
  bool search(const Bits& R, int budget);
  bool realize();
  bool compatible_set(const std::vector<int>& dom, const std::vector<int>& val);

  const RelationalStructure& b_;
  const RelationalStructure& a_;
  int k_;
  const FamilyLayout& layout_;
  std::vector<int> sym_;
  std::vector<Bits> table_;  // per B symbol, template tuples by code
  // Relevant (symbol name, argument-equality pattern) pairs from F.
  std::vector<std::pair<std::string, std::vector<int>>> patterns_;

  int nO_ = 0;
  std::vector<int> open_idx_;   // element -> open index or -1
  std::vector<int> family_of_;  // element -> family or -1
  std::vector<int> priv_idx_;   // element -> index within its family
  struct FamilyData {
    int shape = -1;
    std::vector<int> vpos;  // local open position -> global open index
    std::vector<std::pair<int, std::vector<int>>> edges;
  };
  std::vector<FamilyData> fams_;
  struct OpenEdge {
    int sym;
    std::vector<int> args;  // global open indices
    bool relevant;
  };
  std::vector<OpenEdge> open_edges_;
  bool has_clauses_ = false;

  std::map<std::vector<LocalEdge>, int> shape_index_;
  std::vector<Shape> shapes_;
  std::vector<Option> options_;

  // Search state.
  std::unique_ptr<Space> space_;
  std::vector<std::pair<int, int>> chosen_opens_;  // (open index, value)
  std::vector<int> chosen_;                        // unit option ids
  RobustVerdict found_;
  std::vector<std::vector<int>> incidence_;
};

void Checker::read_formulas(const FormulaSet& F) {
  for (const PpFormula& f : F) {
    if (f.num_exist != 0 || f.atoms.size() > 1)
      throw InvalidArgument(
          "decomposed_robust supports only single-atom quantifier-free members of F");
    if (f.atoms.empty() || f.atoms[0].is_eq()) continue;
    const Atom& at = f.atoms[0];
    std::vector<int> pat;
    for (std::size_t i = 0; i < at.args.size(); ++i) {
      int first = static_cast<int>(i);
      for (std::size_t j = 0; j < i; ++j)
        if (at.args[j] == at.args[i]) {
          first = static_cast<int>(j);
          break;
        }
      pat.push_back(first);
    }
    patterns_.push_back({at.rel, pat});
  }
}

bool Checker::relevant(int bsym, std::span<const int> tuple) const {
  const std::string& name = b_.signature()[bsym].name;
  for (const auto& [rel, pat] : patterns_) {
    if (rel != name || pat.size() != tuple.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < pat.size() && ok; ++i) ok = tuple[pat[i]] == tuple[i];
    if (ok) return true;
  }
  return false;
}

void Checker::build_tables() {
  const Signature& sig = b_.signature();
  for (std::size_t s = 0; s < sig.size(); ++s) {
    int ar = sig[s].arity;
    if (ar > 20) throw InvalidArgument("decomposed_robust supports arity at most 20");
    Bits t(words_for(ar), 0);
    const Relation& r = a_.relation(sym_[s]);
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t code = 0;
      for (int v : r[i]) code = (code << 1) | static_cast<std::size_t>(v);
      set_bit(t, code);
    }
    table_.push_back(std::move(t));
  }
}

void Checker::classify() {
  const int n = b_.size();
  open_idx_.assign(n, -1);
  family_of_.assign(n, -1);
  priv_idx_.assign(n, -1);
  for (int e : layout_.open) {
    if (e < 0 || e >= n) throw InvalidArgument("layout open element out of range");
    if (open_idx_[e] >= 0) throw InvalidArgument("layout lists an open element twice");
    open_idx_[e] = nO_++;
  }
  if (nO_ > 24) throw InvalidArgument("decomposed_robust supports at most 24 open elements");
  fams_.resize(layout_.families.size());
  for (std::size_t f = 0; f < layout_.families.size(); ++f) {
    const auto& fam = layout_.families[f];
    for (std::size_t i = 0; i < fam.exist.size(); ++i) {
      int e = fam.exist[i];
      if (e < 0 || e >= n) throw InvalidArgument("layout private element out of range");
      if (open_idx_[e] >= 0 || family_of_[e] >= 0)
        throw InvalidArgument("element " + std::to_string(e) +
                              " is listed as open or private more than once");
      family_of_[e] = static_cast<int>(f);
      priv_idx_[e] = static_cast<int>(i);
    }
    for (int e : fam.slots) {
      if (e < 0 || e >= n || open_idx_[e] < 0)
        throw InvalidArgument("family slot " + std::to_string(e) + " is not an open element");
      int o = open_idx_[e];
      if (std::find(fams_[f].vpos.begin(), fams_[f].vpos.end(), o) == fams_[f].vpos.end())
        fams_[f].vpos.push_back(o);
    }
  }
  const Signature& sig = b_.signature();
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Relation& r = b_.relation(s);
    for (std::size_t t = 0; t < r.size(); ++t) {
      int fam = -1;
      bool all_open = true;
      for (int x : r[t]) {
        if (family_of_[x] >= 0) {
          if (fam >= 0 && fam != family_of_[x])
            throw InvalidArgument("a hyperedge joins private elements of two families");
          fam = family_of_[x];
          all_open = false;
        } else if (open_idx_[x] < 0) {
          throw InvalidArgument("hyperedge element " + std::to_string(x) +
                                " is neither open nor private");
        }
      }
      std::vector<int> tuple(r[t].begin(), r[t].end());
      if (all_open) {
        OpenEdge oe{static_cast<int>(s), {}, relevant(static_cast<int>(s), r[t])};
        for (int x : tuple) oe.args.push_back(open_idx_[x]);
        open_edges_.push_back(std::move(oe));
      } else {
        fams_[fam].edges.push_back({static_cast<int>(s), std::move(tuple)});
      }
    }
  }
}

int Checker::shape_of(int f) {
  FamilyData& fd = fams_[f];
  const auto& fam = layout_.families[f];
  const int nV = static_cast<int>(fd.vpos.size());
  std::vector<LocalEdge> edges;
  for (const auto& [s, tuple] : fd.edges) {
    LocalEdge le{s, {}, relevant(s, tuple)};
    for (int x : tuple) {
      if (family_of_[x] >= 0) {
        le.args.push_back(nV + priv_idx_[x]);
      } else {
        auto it = std::find(fd.vpos.begin(), fd.vpos.end(), open_idx_[x]);
        if (it == fd.vpos.end())
          throw InvalidArgument("family hyperedge uses an open element outside its slots");
        le.args.push_back(static_cast<int>(it - fd.vpos.begin()));
      }
    }
    edges.push_back(std::move(le));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  // The key also records the sizes through a sentinel edge.
  edges.push_back({-1, {nV, static_cast<int>(fam.exist.size())}, false});
  auto it = shape_index_.find(edges);
  if (it != shape_index_.end()) return it->second;
  Shape sh;
  sh.nV = nV;
  sh.nP = static_cast<int>(fam.exist.size());
  sh.edges.assign(edges.begin(), edges.end() - 1);
  if (sh.nV > 16 || sh.nP > 12)
    throw InvalidArgument("family too large for decomposed_robust (" + std::to_string(sh.nV) +
                          " open slots, " + std::to_string(sh.nP) + " private elements)");
  build_shape(sh);
  int id = static_cast<int>(shapes_.size());
  shapes_.push_back(std::move(sh));
  shape_index_.emplace(std::move(edges), id);
  return id;
}

void Checker::build_shape(Shape& sh) {
  const int nV = sh.nV, nP = sh.nP;
  Space local(nV);
  const std::size_t W = local.words;
  const std::size_t nalpha = std::size_t{1} << nV;

  // For each edge and each assignment of its private positions, the open
  // assignments satisfying it.
  struct EdgeTable {
    std::vector<int> privs;
    std::vector<Bits> sat;
  };
  std::vector<EdgeTable> et;
  std::vector<int> vals;
  for (const LocalEdge& e : sh.edges) {
    EdgeTable t;
    for (int x : e.args)
      if (x >= nV && std::find(t.privs.begin(), t.privs.end(), x - nV) == t.privs.end())
        t.privs.push_back(x - nV);
    for (std::size_t pv = 0; pv < (std::size_t{1} << t.privs.size()); ++pv) {
      Bits s(W, 0);
      for (std::size_t alpha = 0; alpha < nalpha; ++alpha) {
        vals.clear();
        for (int x : e.args) {
          if (x < nV) {
            vals.push_back(static_cast<int>((alpha >> x) & 1));
          } else {
            auto p = std::find(t.privs.begin(), t.privs.end(), x - nV) - t.privs.begin();
            vals.push_back(static_cast<int>((pv >> p) & 1));
          }
        }
        if (edge_holds(e.sym, vals)) set_bit(s, alpha);
      }
      t.sat.push_back(std::move(s));
    }
    et.push_back(std::move(t));
  }

  // OR over all private assignments agreeing with each ternary code
  // (digit 2 = unconstrained).
  std::size_t codes = 1;
  for (int i = 0; i < nP; ++i) codes *= 3;
  std::vector<std::size_t> pow3(nP + 1, 1);
  for (int i = 1; i <= nP; ++i) pow3[i] = pow3[i - 1] * 3;
  std::vector<std::uint64_t> orr(codes * W);
  for (std::size_t c = 0; c < codes; ++c) {
    std::uint64_t* dst = &orr[c * W];
    int free_digit = -1;
    std::size_t beta = 0;
    for (int i = 0; i < nP; ++i) {
      std::size_t d = (c / pow3[i]) % 3;
      if (d == 2) {
        free_digit = i;
        break;
      }
      beta |= d << i;
    }
    if (free_digit >= 0) {
      const std::uint64_t* z = &orr[(c - 2 * pow3[free_digit]) * W];
      const std::uint64_t* o = &orr[(c - pow3[free_digit]) * W];
      for (std::size_t w = 0; w < W; ++w) dst[w] = z[w] | o[w];
      continue;
    }
    for (std::size_t w = 0; w < W; ++w) dst[w] = ~std::uint64_t{0};
    for (const EdgeTable& t : et) {
      std::size_t pv = 0;
      for (std::size_t p = 0; p < t.privs.size(); ++p) pv |= ((beta >> t.privs[p]) & 1) << p;
      const Bits& s = t.sat[pv];
      for (std::size_t w = 0; w < W; ++w) dst[w] &= s[w];
    }
    dst[W - 1] &= local.tail;
  }
  auto forb_of = [&](std::size_t c) {
    Bits f(W);
    for (std::size_t w = 0; w < W; ++w) f[w] = ~orr[c * W + w];
    f.back() &= local.tail;
    return f;
  };
  sh.forb0 = forb_of(codes - 1);

  std::vector<Unit> cand;
  for (std::size_t c = 0; c + 1 < codes; ++c) {
    Unit u;
    for (int i = 0; i < nP; ++i) {
      int d = static_cast<int>((c / pow3[i]) % 3);
      if (d != 2) u.pi.push_back({i, d});
    }
    u.cost = static_cast<int>(u.pi.size());
    if (u.cost > k_) continue;
    u.forb = forb_of(c);
    if (u.forb == sh.forb0) continue;
    bool invalid = false;
    for (const LocalEdge& e : sh.edges) {
      if (!e.relevant) continue;
      std::vector<int> opos;
      bool inside = true;
      for (int x : e.args) {
        if (x >= nV) {
          bool in = false;
          for (auto [p, v] : u.pi) in |= p == x - nV;
          inside &= in;
        } else if (std::find(opos.begin(), opos.end(), x) == opos.end()) {
          opos.push_back(x);
        }
      }
      if (!inside) continue;
      std::sort(opos.begin(), opos.end());
      for (std::size_t ov = 0; ov < (std::size_t{1} << opos.size()); ++ov) {
        vals.clear();
        for (int x : e.args) {
          if (x < nV) {
            auto p = std::find(opos.begin(), opos.end(), x) - opos.begin();
            vals.push_back(static_cast<int>((ov >> p) & 1));
          } else {
            for (auto [p, v] : u.pi)
              if (p == x - nV) vals.push_back(v);
          }
        }
        if (edge_holds(e.sym, vals)) continue;
        if (opos.empty()) invalid = true;
        Clause cl;
        for (std::size_t p = 0; p < opos.size(); ++p)
          cl.push_back({opos[p], static_cast<int>((ov >> p) & 1)});
        u.clauses.push_back(std::move(cl));
      }
    }
    if (invalid) continue;
    minimize(u.clauses);
    cand.push_back(std::move(u));
  }

  // Within-family dominance: a unit with no larger cost, a superset of
  // forbidden assignments and weaker incompatibility can replace another.
  std::vector<std::size_t> pc(cand.size());
  for (std::size_t i = 0; i < cand.size(); ++i) pc[i] = popcount(cand[i].forb);
  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (cand[x].cost != cand[y].cost) return cand[x].cost < cand[y].cost;
    if (pc[x] != pc[y]) return pc[x] > pc[y];
    if (cand[x].clauses.size() != cand[y].clauses.size())
      return cand[x].clauses.size() < cand[y].clauses.size();
    return x < y;
  });
  std::vector<std::size_t> kept;
  for (std::size_t x : order) {
    bool dominated = false;
    for (std::size_t y : kept) {
      if (cand[y].cost > cand[x].cost || pc[y] < pc[x]) continue;
      if (subset_of(cand[x].forb, cand[y].forb) &&
          clauses_weaker(cand[y].clauses, cand[x].clauses)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(x);
  }
  for (std::size_t x : kept) {
    Unit u = std::move(cand[x]);
    for (int j = 0; j < nV; ++j)
      if (local.flip(u.forb, j) != u.forb) u.ess.push_back(j);
    u.tt.assign(words_for(static_cast<int>(u.ess.size())), 0);
    for (std::size_t idx = 0; idx < (std::size_t{1} << u.ess.size()); ++idx) {
      std::size_t alpha = 0;
      for (std::size_t i = 0; i < u.ess.size(); ++i) alpha |= ((idx >> i) & 1) << u.ess[i];
      if (test_bit(u.forb, alpha)) set_bit(u.tt, idx);
    }
    sh.units.push_back(std::move(u));
  }
}

void Checker::build_options() {
  std::unordered_map<std::string, int> index;
  for (int o = 0; o < nO_; ++o)
    for (int v = 0; v < 2; ++v) {
      Option op;
      op.open_item = true;
      op.vars = {o};
      op.tt.assign(1, std::uint64_t{1} << (1 - v));  // forbidden when sigma(o) != v
      op.units = {{o, v}};
      options_.push_back(std::move(op));
    }
  std::string key;
  for (std::size_t f = 0; f < fams_.size(); ++f) {
    if (layout_.families[f].exist.empty()) continue;
    FamilyData& fd = fams_[f];
    fd.shape = shape_of(static_cast<int>(f));
    const Shape& sh = shapes_[fd.shape];
    for (std::size_t u = 0; u < sh.units.size(); ++u) {
      const Unit& un = sh.units[u];
      std::vector<std::pair<int, int>> gv;  // (global var, local ess index)
      for (std::size_t i = 0; i < un.ess.size(); ++i) gv.push_back({fd.vpos[un.ess[i]], static_cast<int>(i)});
      std::sort(gv.begin(), gv.end());
      Option op;
      op.cost = un.cost;
      for (auto [g, i] : gv) op.vars.push_back(g);
      op.tt.assign(words_for(static_cast<int>(gv.size())), 0);
      for (std::size_t idx = 0; idx < (std::size_t{1} << gv.size()); ++idx) {
        std::size_t old = 0;
        for (std::size_t i = 0; i < gv.size(); ++i) old |= ((idx >> i) & 1) << gv[i].second;
        if (test_bit(un.tt, old)) set_bit(op.tt, idx);
      }
      for (const Clause& c : un.clauses) {
        Clause g;
        for (auto [p, v] : c) g.push_back({fd.vpos[p], v});
        std::sort(g.begin(), g.end());
        op.clauses.push_back(std::move(g));
      }
      minimize(op.clauses);
      if (!op.clauses.empty()) has_clauses_ = true;
      key.clear();
      key += std::to_string(op.cost) + '|';
      for (int g : op.vars) key += std::to_string(g) + ',';
      key += '|';
      for (auto w : op.tt) key += std::to_string(w) + ',';
      key += '|';
      for (const Clause& c : op.clauses) {
        for (auto [g, v] : c) key += std::to_string(2 * g + v) + ',';
        key += ';';
      }
      auto [it, fresh] = index.emplace(key, static_cast<int>(options_.size()));
      if (fresh) {
        op.units = {{static_cast<int>(f), static_cast<int>(u)}};
        options_.push_back(std::move(op));
      } else if (static_cast<int>(options_[it->second].units.size()) < std::max(k_, 1)) {
        options_[it->second].units.push_back({static_cast<int>(f), static_cast<int>(u)});
      }
    }
  }
}

bool option_contains(const Option& op, std::uint32_t sigma) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < op.vars.size(); ++i) idx |= ((sigma >> op.vars[i]) & 1) << i;
  return test_bit(op.tt, idx);
}

bool triggered(const std::vector<Clause>& clauses,
               const std::vector<std::pair<int, int>>& opens) {
  for (const Clause& c : clauses) {
    bool all = true;
    for (const auto& lit : c)
      if (std::find(opens.begin(), opens.end(), lit) == opens.end()) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

bool Checker::search(const Bits& R, int budget) {
  budget::charge();
  std::size_t first = 0;
  while (first < R.size() && R[first] == 0) ++first;
  if (first == R.size()) return realize();
  if (budget == 0) return false;
  const std::uint32_t sigma =
      static_cast<std::uint32_t>(first * 64 + std::countr_zero(R[first]));
  const Space& sp = *space_;

  struct Cand {
    int id;
    Bits hit;  // forbidden part of R
    std::size_t count;
  };
  std::vector<Cand> cands;
  const std::size_t rcount = popcount(R);
  auto forb_in_R = [&](const Option& op) {
    Bits h(sp.words, 0);
    std::size_t minterms = popcount(op.tt);
    std::size_t cube_words =
        std::max<std::size_t>(1, (std::size_t{1} << (nO_ - static_cast<int>(op.vars.size()))) >> 6);
    if (minterms * cube_words <= rcount * op.vars.size()) {
      std::vector<int> val(op.vars.size());
      for (std::size_t idx = 0; idx < (std::size_t{1} << op.vars.size()); ++idx) {
        if (!test_bit(op.tt, idx)) continue;
        for (std::size_t i = 0; i < val.size(); ++i) val[i] = static_cast<int>((idx >> i) & 1);
        sp.for_cube(op.vars, val, [&](std::size_t w, std::uint64_t m) { h[w] |= m & R[w]; });
      }
    } else {
      for (std::size_t w = 0; w < sp.words; ++w)
        for (std::uint64_t x = R[w]; x; x &= x - 1) {
          std::uint32_t s = static_cast<std::uint32_t>(w * 64 + std::countr_zero(x));
          if (option_contains(op, s)) h[w] |= x & (~x + 1);
        }
    }
    return h;
  };

  for (std::size_t id = 0; id < options_.size(); ++id) {
    const Option& op = options_[id];
    if (op.cost > budget) continue;
    if (!option_contains(op, sigma)) continue;
    if (op.open_item) {
      int o = op.vars[0], v = op.units[0].second;
      bool clash = false;
      for (auto [p, w] : chosen_opens_) clash |= p == o;
      if (clash) continue;
      chosen_opens_.push_back({o, v});
      bool bad = false;
      for (int c : chosen_) bad |= triggered(options_[c].clauses, chosen_opens_);
      for (const OpenEdge& e : open_edges_) {
        if (!e.relevant || bad) continue;
        std::vector<int> vals;
        for (int x : e.args) {
          int val = -1;
          for (auto [p, w] : chosen_opens_)
            if (p == x) val = w;
          if (val < 0) break;
          vals.push_back(val);
        }
        if (vals.size() == e.args.size() && !edge_holds(e.sym, vals)) bad = true;
      }
      chosen_opens_.pop_back();
      if (bad) continue;
    } else {
      if (triggered(op.clauses, chosen_opens_)) continue;
      int uses = static_cast<int>(std::count(chosen_.begin(), chosen_.end(), static_cast<int>(id)));
      if (uses >= static_cast<int>(op.units.size())) continue;
    }
    if (op.cost == budget) {
      // Nothing can follow: the option must cover all of R on its own,
      // i.e. no allowed pattern of its variables meets R.
      bool covers = true;
      std::vector<int> val(op.vars.size());
      for (std::size_t idx = 0; idx < (std::size_t{1} << op.vars.size()) && covers; ++idx) {
        if (test_bit(op.tt, idx)) continue;
        for (std::size_t i = 0; i < val.size(); ++i) val[i] = static_cast<int>((idx >> i) & 1);
        sp.for_cube(op.vars, val, [&](std::size_t w, std::uint64_t m) {
          if (R[w] & m) covers = false;
          return !covers;
        });
      }
      if (!covers) continue;
      bool done;
      if (op.open_item) {
        chosen_opens_.push_back({op.vars[0], op.units[0].second});
        done = realize();
        chosen_opens_.pop_back();
      } else {
        chosen_.push_back(static_cast<int>(id));
        done = realize();
        chosen_.pop_back();
      }
      if (done) return true;
      continue;
    }
    Bits h = forb_in_R(op);
    std::size_t c = popcount(h);
    cands.push_back({static_cast<int>(id), std::move(h), c});
  }

  // Dominance at this node.  A unit option with at least k stored units can
  // stand in for any option it dominates, since a spare family is always
  // free.  Open items never stand in: their element may be needed later with
  // the other value.
  std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
    const Option& ox = options_[x.id];
    const Option& oy = options_[y.id];
    if (ox.cost != oy.cost) return ox.cost < oy.cost;
    if (x.count != y.count) return x.count > y.count;
    if (ox.clauses.size() != oy.clauses.size()) return ox.clauses.size() < oy.clauses.size();
    return x.id < y.id;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Option& ox = options_[cands[i].id];
    bool dominated = false;
    for (std::size_t j : kept) {
      const Option& oy = options_[cands[j].id];
      if (oy.cost > ox.cost || cands[j].count < cands[i].count) continue;
      if (oy.open_item || static_cast<int>(oy.units.size()) < k_) continue;
      if (!subset_of(cands[i].hit, cands[j].hit)) continue;
      if (!clauses_weaker(oy.clauses, ox.clauses)) continue;
      dominated = true;
      break;
    }
    if (!dominated) kept.push_back(i);
  }

  for (std::size_t i : kept) {
    const Cand& c = cands[i];
    const Option& op = options_[c.id];
    Bits next = R;
    for (std::size_t w = 0; w < sp.words; ++w) next[w] &= ~c.hit[w];
    bool done;
    if (op.open_item) {
      chosen_opens_.push_back({op.vars[0], op.units[0].second});
      done = search(next, budget - 1);
      chosen_opens_.pop_back();
    } else {
      chosen_.push_back(c.id);
      done = search(next, budget - op.cost);
      chosen_.pop_back();
    }
    if (done) return true;
  }
  return false;
}

bool Checker::compatible_set(const std::vector<int>& dom, const std::vector<int>& val) {
  if (incidence_.empty()) {
    incidence_.assign(b_.size(), {});
    const Signature& sig = b_.signature();
    int id = 0;
    for (std::size_t s = 0; s < sig.size(); ++s) {
      const Relation& r = b_.relation(s);
      for (std::size_t t = 0; t < r.size(); ++t, ++id)
        for (int x : r[t])
          if (incidence_[x].empty() || incidence_[x].back() != id) incidence_[x].push_back(id);
    }
  }
  auto value_of = [&](int x) {
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (dom[i] == x) return val[i];
    return -1;
  };
  // Edge ids are resolved by walking the relations again; domains are tiny.
  std::vector<int> ids;
  for (int x : dom) ids.insert(ids.end(), incidence_[x].begin(), incidence_[x].end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const Signature& sig = b_.signature();
  std::size_t base = 0, s = 0;
  for (int id : ids) {
    while (static_cast<std::size_t>(id) >= base + b_.relation(s).size()) {
      base += b_.relation(s).size();
      ++s;
    }
    auto t = b_.relation(s)[id - base];
    std::vector<int> vals;
    for (int x : t) {
      int v = value_of(x);
      if (v < 0) break;
      vals.push_back(v);
    }
    if (vals.size() != t.size()) continue;
    if (relevant(static_cast<int>(s), t) && !edge_holds(static_cast<int>(s), vals)) return false;
  }
  (void)sig;
  return true;
}

bool Checker::realize() {
  // One unit per chosen option, from pairwise distinct families.
  std::vector<int> fams_used;
  std::vector<std::pair<int, int>> pick(chosen_.size());
  auto assign = [&](auto&& self, std::size_t i) -> bool {
    if (i == chosen_.size()) {
      std::vector<std::pair<int, int>> entries;
      for (auto [o, v] : chosen_opens_) entries.push_back({layout_.open[o], v});
      for (auto [f, u] : pick) {
        const Unit& un = shapes_[fams_[f].shape].units[u];
        for (auto [p, v] : un.pi) entries.push_back({layout_.families[f].exist[p], v});
      }
      std::sort(entries.begin(), entries.end());
      std::vector<int> dom, val;
      for (auto [x, v] : entries) {
        dom.push_back(x);
        val.push_back(v);
      }
      if (!compatible_set(dom, val)) return false;
      // Pad to exactly k elements, keeping compatibility.
      auto pad = [&](auto&& pself, int from) -> bool {
        if (static_cast<int>(dom.size()) == k_) return true;
        for (int x = from; x < b_.size(); ++x) {
          if (std::find(dom.begin(), dom.end(), x) != dom.end()) continue;
          for (int v = 0; v < 2; ++v) {
            dom.push_back(x);
            val.push_back(v);
            if (compatible_set(dom, val) && pself(pself, x + 1)) return true;
            dom.pop_back();
            val.pop_back();
          }
        }
        return false;
      };
      if (static_cast<int>(dom.size()) > k_ || !pad(pad, 0)) return false;
      PartialAssignment nu;
      for (std::size_t j = 0; j < dom.size(); ++j) nu.set(dom[j], val[j]);
      if (find_homomorphism(b_, a_, nu))
        throw std::logic_error("decomposed_robust: counterexample failed re-verification");
      std::vector<int> subset = nu.domain();
      found_ = RobustVerdict::non_extendable(subset, nu);
      return true;
    }
    const Option& op = options_[chosen_[i]];
    for (auto [f, u] : op.units) {
      if (std::find(fams_used.begin(), fams_used.end(), f) != fams_used.end()) continue;
      fams_used.push_back(f);
      pick[i] = {f, u};
      bool ok = self(self, i + 1);
      fams_used.pop_back();
      if (ok) return true;
    }
    return false;
  };
  return assign(assign, 0);
}

RobustVerdict Checker::run() {
  build_options();
  space_ = std::make_unique<Space>(nO_);
  const Space& sp = *space_;
  Bits sol = sp.full();
  std::vector<int> vals;
  for (const OpenEdge& e : open_edges_) {
    std::vector<int> distinct;
    for (int x : e.args)
      if (std::find(distinct.begin(), distinct.end(), x) == distinct.end()) distinct.push_back(x);
    for (std::size_t a = 0; a < (std::size_t{1} << distinct.size()); ++a) {
      vals.clear();
      for (int x : e.args) {
        auto p = std::find(distinct.begin(), distinct.end(), x) - distinct.begin();
        vals.push_back(static_cast<int>((a >> p) & 1));
      }
      if (edge_holds(e.sym, vals)) continue;
      std::vector<int> cv;
      for (std::size_t p = 0; p < distinct.size(); ++p) cv.push_back(static_cast<int>((a >> p) & 1));
      sp.for_cube(distinct, cv, [&](std::size_t w, std::uint64_t m) { sol[w] &= ~m; });
    }
  }
  for (const FamilyData& fd : fams_) {
    if (fd.shape < 0) continue;
    const Shape& sh = shapes_[fd.shape];
    for (std::size_t alpha = 0; alpha < (std::size_t{1} << sh.nV); ++alpha) {
      if (!test_bit(sh.forb0, alpha)) continue;
      std::vector<int> cv;
      for (int j = 0; j < sh.nV; ++j) cv.push_back(static_cast<int>((alpha >> j) & 1));
      sp.for_cube(fd.vpos, cv, [&](std::size_t w, std::uint64_t m) { sol[w] &= ~m; });
    }
  }
  if (!any(sol)) return RobustVerdict::unsatisfiable();
  if (b_.size() < k_) return RobustVerdict::ok();
  if (search(sol, k_)) return found_;
  return RobustVerdict::ok();
}

}  // namespace

RobustVerdict decomposed_robust(const RelationalStructure& instance,
                                const RelationalStructure& tmpl, int k, const FormulaSet& F,
                                const FamilyLayout& layout) {
  Checker c(instance, tmpl, k, F, layout);
  return c.run();
}

}  // namespace antcsp

#include "antcsp/reflection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "antcsp/error.hpp"
#include "antcsp/solver.hpp"

namespace antcsp {

bool FrozenReport::empty() const { return frozen_tuple_count() == 0 && equalities.empty(); }

std::size_t FrozenReport::frozen_tuple_count() const {
  std::size_t n = 0;
  for (const auto& r : relations) n += r.size();
  return n;
}

namespace {

using Mask = std::vector<std::uint64_t>;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Decodes code into digits base n, most significant first.
void decode(std::size_t code, int n, std::vector<int>& out) {
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    out[i] = static_cast<int>(code % n);
    code /= n;
  }
}

bool includes_mask(const Mask& big, const Mask& small) {
  for (std::size_t i = 0; i < small.size(); ++i)
    if (small[i] & ~big[i]) return false;
  return true;
}

// Compatible value tuples of m-sets under F|_m, computed on demand.
class RestrictedCompatibility {
 public:
  RestrictedCompatibility(const RelationalStructure& b, const RelationalStructure& a, int k,
                          const FormulaSet& F)
      : b_(b), a_(a), k_(k), ob_(F, k, b), oa_(F, k, a) {
    words_ = (ob_.members().size() + 63) / 64;
    const int na = a.size();
    std::size_t total = ipow(na, k);
    budget::charge(total);
    sat_a_.resize(total);
    std::vector<int> t(k);
    for (std::size_t c = 0; c < total; ++c) {
      decode(c, na, t);
      sat_a_[c] = mask_of(oa_, t);
    }
  }

  // Allowed value codes (base |A|, first element most significant) for the
  // sorted distinct elements S.
  const std::vector<char>& allowed(const std::vector<int>& S) {
    auto it = cache_.find(S);
    if (it != cache_.end()) return it->second;
    const int m = static_cast<int>(S.size());
    const int nb = b_.size(), na = a_.size();
    std::set<Mask> types;
    std::vector<int> t(S.begin(), S.end());
    t.resize(k_);
    std::vector<int> ext(k_ - m);
    std::size_t exts = ipow(nb, k_ - m);
    for (std::size_t c = 0; c < exts; ++c) {
      budget::charge();
      decode(c, nb, ext);
      std::copy(ext.begin(), ext.end(), t.begin() + m);
      types.insert(mask_of(ob_, t));
    }
    std::size_t heads = ipow(na, m), tails = ipow(na, k_ - m);
    std::vector<char> ok(heads, 1);
    for (const Mask& tau : types)
      for (std::size_t h = 0; h < heads; ++h) {
        if (!ok[h]) continue;
        bool found = false;
        for (std::size_t e = 0; e < tails && !found; ++e)
          found = includes_mask(sat_a_[h * tails + e], tau);
        ok[h] = found;
      }
    return cache_.emplace(S, std::move(ok)).first->second;
  }

 private:
  Mask mask_of(const TypeOracle& o, std::span<const int> t) const {
    Mask m(words_, 0);
    for (int i : o.satisfied(t)) m[i >> 6] |= std::uint64_t{1} << (i & 63);
    return m;
  }

  const RelationalStructure& b_;
  const RelationalStructure& a_;
  int k_;
  TypeOracle ob_, oa_;
  std::size_t words_ = 0;
  std::vector<Mask> sat_a_;
  std::map<std::vector<int>, std::vector<char>> cache_;
};

// Distinct elements of t in ascending order, and the position of each entry.
std::vector<int> support(const Tuple& t, std::vector<int>& pos) {
  std::vector<int> s(t.begin(), t.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  pos.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    pos[i] = static_cast<int>(std::lower_bound(s.begin(), s.end(), t[i]) - s.begin());
  return s;
}

template <class Fn>
void for_each_tuple(int n, int arity, Fn&& fn) {
  Tuple t(arity, 0);
  std::size_t total = ipow(n, arity);
  for (std::size_t c = 0; c < total; ++c) {
    decode(c, n, t);
    fn(t);
  }
}

std::vector<std::vector<int>> closure_classes(int n, const std::vector<std::pair<int, int>>& eqs,
                                              std::vector<int>& class_of) {
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [x, y] : eqs) {
    int rx = find(x), ry = find(y);
    if (rx != ry) parent[std::max(rx, ry)] = std::min(rx, ry);
  }
  std::vector<std::vector<int>> classes;
  class_of.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (class_of[r] < 0) {
      class_of[r] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    class_of[i] = class_of[r];
    classes[class_of[i]].push_back(i);
  }
  return classes;
}

ReflectionResult apply(const RelationalStructure& b, const FrozenReport& rep) {
  const Signature& sig = b.signature();
  std::vector<std::vector<int>> flat(sig.size());
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const Relation& r = b.relation(s);
    for (std::size_t i = 0; i < r.size(); ++i) flat[s].insert(flat[s].end(), r[i].begin(), r[i].end());
    for (const Tuple& t : rep.relations[s]) flat[s].insert(flat[s].end(), t.begin(), t.end());
  }
  RelationalStructure enlarged(sig, b.size(), std::move(flat), b.labels());
  Quotient q = quotient(enlarged, rep.classes);
  return {std::move(q.structure), std::move(q.class_map), 1};
}

}  // namespace

FrozenReport frozen_tuples(const RelationalStructure& instance, const RelationalStructure& tmpl,
                           int k, const FormulaSet& F) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  const std::vector<int> smap = symbol_map(instance.signature(), tmpl.signature());
  RestrictedCompatibility rc(instance, tmpl, k, F);
  const Signature& sig = instance.signature();
  const int nb = instance.size(), na = tmpl.size();
  FrozenReport rep;
  rep.relations.resize(sig.size());
  std::vector<int> pos, vals, image;
  for (std::size_t s = 0; s < sig.size(); ++s) {
    const int ar = sig[s].arity;
    if (ar == 0 || ar > k) continue;
    const Relation& ra = tmpl.relation(smap[s]);
    for_each_tuple(nb, ar, [&](const Tuple& t) {
      if (instance.has(s, t)) return;
      std::vector<int> S = support(t, pos);
      const auto& ok = rc.allowed(S);
      vals.resize(S.size());
      image.resize(ar);
      for (std::size_t c = 0; c < ok.size(); ++c) {
        if (!ok[c]) continue;
        decode(c, na, vals);
        for (int i = 0; i < ar; ++i) image[i] = vals[pos[i]];
        if (!ra.contains(image)) return;
      }
      rep.relations[s].push_back(t);
    });
  }
  if (k >= 2)
    for (int x = 0; x < nb; ++x)
      for (int y = x + 1; y < nb; ++y) {
        const auto& ok = rc.allowed({x, y});
        bool frozen = true;
        for (std::size_t c = 0; c < ok.size() && frozen; ++c)
          if (ok[c] && c / na != c % na) frozen = false;
        if (frozen) rep.equalities.push_back({x, y});
      }
  rep.classes = closure_classes(nb, rep.equalities, rep.class_of);
  return rep;
}

ReflectionResult one_step_reflection(const RelationalStructure& instance,
                                     const RelationalStructure& tmpl, int k,
                                     const FormulaSet& F) {
  return apply(instance, frozen_tuples(instance, tmpl, k, F));
}

ReflectionResult full_reflection(const RelationalStructure& instance,
                                 const RelationalStructure& tmpl, int k, const FormulaSet& F) {
  ReflectionResult cur{instance, {}, 0};
  cur.quotient_map.resize(instance.size());
  for (int i = 0; i < instance.size(); ++i) cur.quotient_map[i] = i;
  for (;;) {
    FrozenReport rep = frozen_tuples(cur.structure, tmpl, k, F);
    if (rep.empty()) break;
    ReflectionResult next = apply(cur.structure, rep);
    for (int& x : cur.quotient_map) x = next.quotient_map[x];
    cur.structure = std::move(next.structure);
    ++cur.iterations;
  }
  cur.iterations = std::max(cur.iterations, 1);
  return cur;
}

ImpliedConstraints implied_constraints(const RelationalStructure& instance,
                                       const RelationalStructure& tmpl) {
  const std::vector<int> smap = symbol_map(instance.signature(), tmpl.signature());
  const Signature& sig = instance.signature();
  const int nb = instance.size(), na = tmpl.size();

  // Candidates: (symbol or -1 for equality, tuple).
  std::vector<std::pair<int, Tuple>> open;
  for (std::size_t s = 0; s < sig.size(); ++s) {
    if (sig[s].arity == 0) continue;
    budget::charge(ipow(nb, sig[s].arity));
    for_each_tuple(nb, sig[s].arity, [&](const Tuple& t) {
      if (!instance.has(s, t)) open.push_back({static_cast<int>(s), t});
    });
  }
  for (int x = 0; x < nb; ++x)
    for (int y = x + 1; y < nb; ++y) open.push_back({-1, {x, y}});

  auto separates = [&](const std::vector<int>& h, const std::pair<int, Tuple>& c) {
    if (c.first < 0) return h[c.second[0]] != h[c.second[1]];
    Tuple image(c.second.size());
    for (std::size_t i = 0; i < image.size(); ++i) image[i] = h[c.second[i]];
    return !tmpl.relation(smap[c.first]).contains(image);
  };

  ImpliedConstraints out;
  std::vector<bool> done(open.size(), false);
  std::vector<int> pos, vals;
  for (std::size_t i = 0; i < open.size(); ++i) {
    if (done[i]) continue;
    const auto& c = open[i];
    std::vector<int> S = support(c.second, pos);
    vals.resize(S.size());
    std::optional<Homomorphism> sep;
    std::size_t seeds = ipow(na, static_cast<int>(S.size()));
    for (std::size_t code = 0; code < seeds && !sep; ++code) {
      decode(code, na, vals);
      PartialAssignment seed;
      for (std::size_t j = 0; j < S.size(); ++j) seed.set(S[j], vals[j]);
      std::vector<int> h(nb, 0);
      for (std::size_t j = 0; j < S.size(); ++j) h[S[j]] = vals[j];
      if (!separates(h, c)) continue;
      sep = find_homomorphism(instance, tmpl, seed);
    }
    if (!sep) {
      done[i] = true;
      if (c.first < 0)
        out.equalities.push_back({c.second[0], c.second[1]});
      else
        out.tuples.push_back(c);
      continue;
    }
    for (std::size_t j = i; j < open.size(); ++j)
      if (!done[j] && separates(sep->map, open[j])) done[j] = true;
  }
  return out;
}

bool in_quasivariety(const RelationalStructure& instance, const RelationalStructure& tmpl) {
  return implied_constraints(instance, tmpl).empty();
}

bool in_universal_horn(const RelationalStructure& instance, const RelationalStructure& tmpl) {
  return in_quasivariety(instance, tmpl) && find_homomorphism(instance, tmpl).has_value();
}

}  // namespace antcsp

#include "antcsp/consistency.hpp"

#include <algorithm>

#include "antcsp/error.hpp"
#include "antcsp/robust.hpp"
#include "antcsp/solver.hpp"

namespace antcsp {

bool Strategy::contains(const std::vector<int>& domain, const std::vector<int>& values) const {
  auto it = members.find(domain);
  return it != members.end() && it->second.count(values) > 0;
}

bool Strategy::contains(const PartialAssignment& f) const {
  return contains(f.domain(), f.values());
}

void Strategy::insert(const std::vector<int>& domain, const std::vector<int>& values) {
  members[domain].insert(values);
}

void Strategy::erase(const std::vector<int>& domain, const std::vector<int>& values) {
  auto it = members.find(domain);
  if (it == members.end()) return;
  it->second.erase(values);
  if (it->second.empty()) members.erase(it);
}

std::size_t Strategy::size() const {
  std::size_t n = 0;
  for (const auto& [d, v] : members) n += v.size();
  return n;
}

std::vector<PartialAssignment> Strategy::family() const {
  std::vector<PartialAssignment> out;
  for (const auto& [d, vs] : members)
    for (const auto& v : vs) {
      PartialAssignment f;
      for (std::size_t i = 0; i < d.size(); ++i) f.set(d[i], v[i]);
      out.push_back(std::move(f));
    }
  return out;
}

std::string to_string(StrategyCheck::Clause c) {
  switch (c) {
    case StrategyCheck::Clause::None: return "ok";
    case StrategyCheck::Clause::Nonempty: return "Nonempty";
    case StrategyCheck::Clause::Homomorphism: return "Homomorphism";
    case StrategyCheck::Clause::Restriction: return "Restriction";
    case StrategyCheck::Clause::Extension: return "Extension";
  }
  return "?";
}

std::string to_string(const StrategyCheck& c) {
  std::string s = to_string(c.clause);
  if (c.ok() || c.clause == StrategyCheck::Clause::Nonempty) return s;
  s += " at " + to_string(c.witness);
  if (!c.extension.empty()) {
    s += " to {";
    for (std::size_t i = 0; i < c.extension.size(); ++i)
      s += (i ? "," : "") + std::to_string(c.extension[i]);
    s += "}";
  }
  return s;
}

namespace {

// Calls fn on every increasing m-subset of the given pool.
template <class Fn>
void for_each_subset(const std::vector<int>& pool, int m, Fn&& fn) {
  if (m > static_cast<int>(pool.size())) return;
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::vector<int> sub(m);
  for (;;) {
    for (int i = 0; i < m; ++i) sub[i] = pool[idx[i]];
    fn(sub);
    int i = m - 1;
    while (i >= 0 && idx[i] == static_cast<int>(pool.size()) - m + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int t = i + 1; t < m; ++t) idx[t] = idx[t - 1] + 1;
  }
}

template <class Fn>
void for_each_values(int na, int m, Fn&& fn) {
  std::vector<int> v(m, 0);
  for (;;) {
    fn(v);
    int i = m - 1;
    while (i >= 0 && v[i] == na - 1) v[i--] = 0;
    if (i < 0) return;
    ++v[i];
  }
}

std::vector<int> range(int n) {
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = i;
  return r;
}

// Adds every restriction of (dom, val) to at most `cap` points.
void add_restrictions(Strategy& s, const std::vector<int>& dom, const std::vector<int>& val,
                      int cap) {
  const int m = static_cast<int>(dom.size());
  std::vector<int> pos = range(m), d, v;
  for (int size = 0; size <= std::min(cap, m); ++size)
    for_each_subset(pos, size, [&](const std::vector<int>& p) {
      d.clear();
      v.clear();
      for (int i : p) {
        d.push_back(dom[i]);
        v.push_back(val[i]);
      }
      s.insert(d, v);
    });
}

class PartialHomCheck {
 public:
  PartialHomCheck(const RelationalStructure& b, const RelationalStructure& a)
      : b_(b), a_(a), smap_(symbol_map(b.signature(), a.signature())) {}

  // Value of every element (or -1) and the check over induced hyperedges.
  bool operator()(const std::vector<int>& dom, const std::vector<int>& val) const {
    std::vector<int> h(b_.size(), -1);
    for (std::size_t i = 0; i < dom.size(); ++i) h[dom[i]] = val[i];
    std::vector<int> img;
    for (std::size_t s = 0; s < b_.signature().size(); ++s) {
      const Relation& r = b_.relation(s);
      for (std::size_t t = 0; t < r.size(); ++t) {
        img.clear();
        bool inside = true;
        for (int x : r[t]) {
          if (h[x] < 0) {
            inside = false;
            break;
          }
          img.push_back(h[x]);
        }
        if (inside && !a_.relation(smap_[s]).contains(img)) return false;
      }
    }
    return true;
  }

 private:
  const RelationalStructure& b_;
  const RelationalStructure& a_;
  std::vector<int> smap_;
};

std::vector<int> merged(const std::vector<int>& dom, const std::vector<int>& extra) {
  std::vector<int> out(dom);
  out.insert(out.end(), extra.begin(), extra.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Whether some member on dom ∪ extra restricts to (dom, val).
bool has_extension(const Strategy& s, const std::vector<int>& dom, const std::vector<int>& val,
                   const std::vector<int>& extra) {
  std::vector<int> big = merged(dom, extra);
  auto it = s.members.find(big);
  if (it == s.members.end()) return false;
  std::vector<int> where(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i)
    where[i] = static_cast<int>(std::lower_bound(big.begin(), big.end(), dom[i]) - big.begin());
  for (const auto& g : it->second) {
    budget::charge();
    bool agrees = true;
    for (std::size_t i = 0; i < dom.size() && agrees; ++i) agrees = g[where[i]] == val[i];
    if (agrees) return true;
  }
  return false;
}

std::vector<int> outside(int n, const std::vector<int>& dom) {
  std::vector<int> out;
  for (int x = 0; x < n; ++x)
    if (!std::binary_search(dom.begin(), dom.end(), x)) out.push_back(x);
  return out;
}

// First extension set that (dom, val) fails to reach, if any.
std::optional<std::vector<int>> missing_extension(const Strategy& s, int n,
                                                  const std::vector<int>& dom,
                                                  const std::vector<int>& val) {
  const int room = s.j + 1 - static_cast<int>(dom.size());
  std::vector<int> pool = outside(n, dom);
  std::optional<std::vector<int>> bad;
  for (int i = 1; i <= room && !bad; ++i)
    for_each_subset(pool, i, [&](const std::vector<int>& e) {
      if (!bad && !has_extension(s, dom, val, e)) bad = e;
    });
  return bad;
}

std::optional<std::size_t> missing_restriction(const Strategy& s, const std::vector<int>& dom,
                                               const std::vector<int>& val) {
  std::vector<int> d, v;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    d = dom;
    v = val;
    d.erase(d.begin() + i);
    v.erase(v.begin() + i);
    if (!s.contains(d, v)) return i;
  }
  return std::nullopt;
}

PartialAssignment as_assignment(const std::vector<int>& dom, const std::vector<int>& val) {
  PartialAssignment f;
  for (std::size_t i = 0; i < dom.size(); ++i) f.set(dom[i], val[i]);
  return f;
}

}  // namespace

Strategy candidate_family(const RelationalStructure& instance, const RelationalStructure& tmpl,
                          int k, const FormulaSet& F, int j) {
  if (j < 1) throw InvalidArgument("j must be at least 1");
  if (j > k) throw InvalidArgument("j must not exceed k");
  Strategy s;
  s.j = j - 1;
  const int n = instance.size(), na = tmpl.size();
  if (n < k) {
    for_each_homomorphism(instance, tmpl, {}, [&](const std::vector<int>& h) {
      budget::charge();
      add_restrictions(s, range(n), h, j);
      return true;
    });
    return s;
  }
  CompatibilityChecker cc(instance, tmpl, F);
  for_each_subset(range(n), k, [&](const std::vector<int>& dom) {
    for_each_values(na, k, [&](const std::vector<int>& val) {
      budget::charge();
      if (cc.compatible(dom, val)) add_restrictions(s, dom, val, j);
    });
  });
  return s;
}

StrategyCheck check_strategy(const Strategy& s, const RelationalStructure& instance,
                             const RelationalStructure& tmpl) {
  StrategyCheck out;
  if (s.empty()) {
    out.clause = StrategyCheck::Clause::Nonempty;
    return out;
  }
  const int n = instance.size();
  for (const auto& [dom, vals] : s.members) {
    if (static_cast<int>(dom.size()) > s.j + 1)
      throw InvalidArgument("strategy member on more than j+1 points");
    for (int x : dom)
      if (x < 0 || x >= n) throw InvalidArgument("strategy member outside the instance");
    for (const auto& v : vals)
      for (int a : v)
        if (a < 0 || a >= tmpl.size()) throw InvalidArgument("strategy value outside the template");
  }
  PartialHomCheck hom(instance, tmpl);
  for (const auto& [dom, vals] : s.members)
    for (const auto& v : vals)
      if (!hom(dom, v)) {
        out.clause = StrategyCheck::Clause::Homomorphism;
        out.witness = as_assignment(dom, v);
        return out;
      }
  for (const auto& [dom, vals] : s.members)
    for (const auto& v : vals)
      if (missing_restriction(s, dom, v)) {
        out.clause = StrategyCheck::Clause::Restriction;
        out.witness = as_assignment(dom, v);
        return out;
      }
  for (const auto& [dom, vals] : s.members)
    for (const auto& v : vals)
      if (auto e = missing_extension(s, n, dom, v)) {
        out.clause = StrategyCheck::Clause::Extension;
        out.witness = as_assignment(dom, v);
        out.extension = *e;
        return out;
      }
  return out;
}

std::optional<Strategy> establish_consistency(const RelationalStructure& instance,
                                              const RelationalStructure& tmpl, int j) {
  if (j < 1) throw InvalidArgument("j must be at least 1");
  const int n = instance.size(), na = tmpl.size();
  PartialHomCheck hom(instance, tmpl);
  Strategy s;
  s.j = j;
  for (int m = 0; m <= std::min(j + 1, n); ++m)
    for_each_subset(range(n), m, [&](const std::vector<int>& dom) {
      for_each_values(na, m, [&](const std::vector<int>& val) {
        budget::charge();
        if (hom(dom, val)) s.insert(dom, val);
      });
    });
  for (bool changed = true; changed;) {
    changed = false;
    // Restriction pass, then extension pass.
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::pair<std::vector<int>, std::vector<int>>> drop;
      for (const auto& [dom, vals] : s.members)
        for (const auto& v : vals) {
          bool bad = pass == 0 ? missing_restriction(s, dom, v).has_value()
                               : missing_extension(s, n, dom, v).has_value();
          if (bad) drop.push_back({dom, v});
        }
      for (const auto& [d, v] : drop) s.erase(d, v);
      changed |= !drop.empty();
    }
  }
  if (!s.contains(std::vector<int>{}, std::vector<int>{})) return std::nullopt;
  return s;
}

SeparatorVerdict ant_separator(const RelationalStructure& instance,
                               const RelationalStructure& tmpl, int k, const FormulaSet& F,
                               int j) {
  if (j >= k) throw InvalidArgument("j must be less than k");
  Strategy s = candidate_family(instance, tmpl, k, F, j + 1);
  return check_strategy(s, instance, tmpl).ok() ? SeparatorVerdict::Accept
                                                : SeparatorVerdict::Reject;
}

}  // namespace antcsp

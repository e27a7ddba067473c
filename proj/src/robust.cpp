#include "antcsp/robust.hpp"

#include <set>

#include "antcsp/error.hpp"
#include "antcsp/solver.hpp"

namespace antcsp {

struct CompatibilityChecker::Level {
  std::vector<CompiledFormula> on_b;
  std::vector<CompiledFormula> on_a;
};

CompatibilityChecker::CompatibilityChecker(const RelationalStructure& instance,
                                           const RelationalStructure& tmpl,
                                           const FormulaSet& F)
    : b_(instance), a_(tmpl), F_(F) {}

CompatibilityChecker::~CompatibilityChecker() = default;

const CompatibilityChecker::Level& CompatibilityChecker::level(int j) const {
  auto it = levels_.find(j);
  if (it != levels_.end()) return *it->second;
  auto lv = std::make_unique<Level>();
  for (const PpFormula& f : instantiate(F_, j)) {
    lv->on_b.emplace_back(f, b_);
    lv->on_a.emplace_back(f, a_);
  }
  return *(levels_[j] = std::move(lv));
}

bool CompatibilityChecker::compatible(std::span<const int> dom,
                                      std::span<const int> values) const {
  for (int v : values)
    if (v < 0 || v >= a_.size())
      throw InvalidArgument("assignment value " + std::to_string(v) +
                            " outside the template universe");
  for (int x : dom)
    if (x < 0 || x >= b_.size())
      throw InvalidArgument("assignment element " + std::to_string(x) +
                            " outside the instance universe");
  const Level& lv = level(static_cast<int>(dom.size()));
  for (std::size_t i = 0; i < lv.on_b.size(); ++i)
    if (lv.on_b[i].holds(dom) && !lv.on_a[i].holds(values)) return false;
  return true;
}

bool CompatibilityChecker::compatible(const PartialAssignment& nu) const {
  auto d = nu.domain();
  auto v = nu.values();
  return compatible(d, v);
}

bool is_compatible(const RelationalStructure& instance, const RelationalStructure& tmpl,
                   const PartialAssignment& nu, const FormulaSet& F) {
  return CompatibilityChecker(instance, tmpl, F).compatible(nu);
}

namespace {

template <class Fn>
bool for_each_subset(int n, int k, Fn&& fn) {
  if (k > n) return true;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    if (!fn(c)) return false;
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return true;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

template <class Fn>
bool for_each_tuple(int n, int k, Fn&& fn) {
  std::vector<int> v(k, 0);
  if (k > 0 && n == 0) return true;
  while (true) {
    if (!fn(v)) return false;
    int i = k - 1;
    while (i >= 0 && v[i] == n - 1) v[i--] = 0;
    if (i < 0) return true;
    ++v[i];
  }
}

PartialAssignment make_nu(const std::vector<int>& dom, const std::vector<int>& val) {
  PartialAssignment nu;
  for (std::size_t i = 0; i < dom.size(); ++i) nu.set(dom[i], val[i]);
  return nu;
}

}  // namespace

RobustVerdict is_robust(const RelationalStructure& b, const RelationalStructure& a, int k,
                        const FormulaSet& F) {
  if (k < 0) throw InvalidArgument("k must be nonnegative");
  if (!find_homomorphism(b, a)) return RobustVerdict::unsatisfiable();
  if (b.size() < k) return RobustVerdict::ok();
  CompatibilityChecker cc(b, a, F);
  RobustVerdict out = RobustVerdict::ok();
  for_each_subset(b.size(), k, [&](const std::vector<int>& s) {
    return for_each_tuple(a.size(), k, [&](const std::vector<int>& val) {
      if (!cc.compatible(s, val)) return true;
      PartialAssignment nu = make_nu(s, val);
      if (find_homomorphism(b, a, nu)) return true;
      out = RobustVerdict::non_extendable(s, nu);
      return false;
    });
  });
  return out;
}

RobustVerdict is_robust_upto(const RelationalStructure& b, const RelationalStructure& a,
                             int k, const FormulaSet& F) {
  for (int l = 0; l <= k; ++l) {
    RobustVerdict v = is_robust(b, a, l, F);
    if (!v.yes()) {
      v.level = l;
      return v;
    }
  }
  return RobustVerdict::ok();
}

RobustVerdict brute_force_robust(const RelationalStructure& b, const RelationalStructure& a,
                                 int k, const FormulaSet& F) {
  if (k < 0) throw InvalidArgument("k must be nonnegative");
  std::vector<std::vector<int>> homs;
  for_each_homomorphism(b, a, {}, [&](const std::vector<int>& h) {
    homs.push_back(h);
    return true;
  });
  if (homs.empty()) return RobustVerdict::unsatisfiable();
  if (b.size() < k) return RobustVerdict::ok();
  CompatibilityChecker cc(b, a, F);
  RobustVerdict out = RobustVerdict::ok();
  for_each_subset(b.size(), k, [&](const std::vector<int>& s) {
    std::set<std::vector<int>> restrictions;
    std::vector<int> r(k);
    for (const auto& h : homs) {
      for (int i = 0; i < k; ++i) r[i] = h[s[i]];
      restrictions.insert(r);
    }
    return for_each_tuple(a.size(), k, [&](const std::vector<int>& val) {
      if (restrictions.count(val) || !cc.compatible(s, val)) return true;
      out = RobustVerdict::non_extendable(s, make_nu(s, val));
      return false;
    });
  });
  return out;
}

std::string to_string(const RobustVerdict& v) {
  if (v.yes()) return "yes";
  if (v.reason == RobustVerdict::Reason::Unsatisfiable) return "no (unsatisfiable)";
  std::string s = "no (non-extendable " + to_string(v.nu) + ")";
  if (v.level >= 0) s += " at level " + std::to_string(v.level);
  return s;
}

}  // namespace antcsp

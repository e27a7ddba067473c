#include "antcsp/solver.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>

#include "antcsp/error.hpp"

namespace antcsp {

std::vector<int> symbol_map(const Signature& instance, const Signature& tmpl) {
  std::vector<int> m(instance.size());
  for (std::size_t i = 0; i < instance.size(); ++i) {
    int j = tmpl.find(instance[i].name);
    if (j < 0)
      throw InvalidArgument("signature mismatch: template lacks symbol '" +
                            instance[i].name + "'");
    if (tmpl[j].arity != instance[i].arity)
      throw InvalidArgument("signature mismatch: arity of '" + instance[i].name +
                            "' differs");
    m[i] = j;
  }
  return m;
}

namespace {

// Backtracking over instance elements in increasing order with generalized
// arc consistency maintained on every hyperedge.
class Engine {
 public:
  Engine(const RelationalStructure& inst, const RelationalStructure& tmpl)
      : inst_(inst), tmpl_(tmpl), n_(inst.size()) {
    if (tmpl.size() > kMaxTemplateSize)
      throw InvalidArgument("template has more than 64 elements");
    auto sm = symbol_map(inst.signature(), tmpl.signature());
    full_ = tmpl.size() == 64 ? ~0ULL : ((1ULL << tmpl.size()) - 1);
    dom_.assign(n_, full_);
    var_cons_.resize(n_);
    for (std::size_t s = 0; s < inst.signature().size(); ++s) {
      const Relation& rel = inst.relation(s);
      for (std::size_t t = 0; t < rel.size(); ++t) {
        int id = static_cast<int>(cons_.size());
        Con c;
        c.trel = sm[s];
        c.off = static_cast<int>(scopes_.size());
        c.arity = rel.arity();
        auto tup = rel[t];
        scopes_.insert(scopes_.end(), tup.begin(), tup.end());
        for (int i = 0; i < c.arity; ++i)
          for (int j = 0; j < i; ++j)
            if (tup[i] == tup[j]) c.repeat = true;
        cons_.push_back(c);
        for (int i = 0; i < c.arity; ++i) {
          auto& vc = var_cons_[tup[i]];
          if (vc.empty() || vc.back() != id) vc.push_back(id);
        }
      }
    }
    in_queue_.assign(cons_.size(), 0);
  }

  void restrict_domains(const std::vector<std::uint64_t>& d) {
    for (int v = 0; v < n_; ++v) dom_[v] &= d[v];
  }

  bool initial_propagate() {
    for (int v = 0; v < n_; ++v)
      if (dom_[v] == 0) return false;
    for (std::size_t c = 0; c < cons_.size(); ++c) enqueue(static_cast<int>(c));
    return propagate();
  }

  // Depth-first search over vars (in the given order).  Returns true if the
  // visitor stopped the search; the assignment is then left in place.
  bool search(const std::vector<int>& vars, const SolutionVisitor& visit) {
    struct Frame {
      std::size_t pos;
      std::uint64_t remaining;
      std::size_t mark;
    };
    if (vars.empty()) return !visit(current());
    std::vector<Frame> stack;
    stack.push_back({0, dom_[vars[0]], trail_.size()});
    while (!stack.empty()) {
      Frame& f = stack.back();
      undo(f.mark);
      if (f.remaining == 0) {
        stack.pop_back();
        continue;
      }
      int a = std::countr_zero(f.remaining);
      f.remaining &= f.remaining - 1;
      std::size_t pos = f.pos;
      budget::charge();
      int v = vars[pos];
      set_dom(v, 1ULL << a);
      for (int c : var_cons_[v]) enqueue(c);
      if (!propagate()) continue;
      if (pos + 1 == vars.size()) {
        if (!visit(current())) return true;
        continue;
      }
      stack.push_back({pos + 1, dom_[vars[pos + 1]], trail_.size()});
    }
    return false;
  }

  std::vector<int> current() const {
    std::vector<int> m(n_);
    for (int v = 0; v < n_; ++v) m[v] = std::countr_zero(dom_[v]);
    return m;
  }

  // Connected components of the constraint hypergraph, each sorted.
  std::vector<std::vector<int>> components() const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const Con& c : cons_)
      for (int i = 1; i < c.arity; ++i) {
        int a = find(scopes_[c.off]), b = find(scopes_[c.off + i]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    std::vector<std::vector<int>> comps;
    std::vector<int> id(n_, -1);
    for (int v = 0; v < n_; ++v) {
      int r = find(v);
      if (id[r] < 0) {
        id[r] = static_cast<int>(comps.size());
        comps.emplace_back();
      }
      comps[id[r]].push_back(v);
    }
    return comps;
  }

 private:
  struct Con {
    int trel = 0;
    int off = 0;
    int arity = 0;
    bool repeat = false;
  };

  void enqueue(int c) {
    if (!in_queue_[c]) {
      in_queue_[c] = 1;
      queue_.push_back(c);
    }
  }

  void set_dom(int v, std::uint64_t d) {
    trail_.push_back({v, dom_[v]});
    dom_[v] = d;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      auto [v, d] = trail_.back();
      trail_.pop_back();
      dom_[v] = d;
    }
  }

  bool revise(int ci) {
    const Con& c = cons_[ci];
    const int* scope = scopes_.data() + c.off;
    const Relation& rel = tmpl_.relation(c.trel);
    std::uint64_t sup[64] = {};
    const int* data = rel.data().data();
    std::size_t m = rel.size();
    for (std::size_t t = 0; t < m; ++t) {
      const int* row = data + t * c.arity;
      bool ok = true;
      for (int i = 0; i < c.arity && ok; ++i)
        if (!((dom_[scope[i]] >> row[i]) & 1)) ok = false;
      if (ok && c.repeat)
        for (int i = 0; i < c.arity && ok; ++i)
          for (int j = 0; j < i; ++j)
            if (scope[i] == scope[j] && row[i] != row[j]) {
              ok = false;
              break;
            }
      if (!ok) continue;
      for (int i = 0; i < c.arity; ++i) sup[i] |= 1ULL << row[i];
    }
    for (int i = 0; i < c.arity; ++i) {
      int v = scope[i];
      std::uint64_t nd = dom_[v] & sup[i];
      if (nd == dom_[v]) continue;
      if (nd == 0) return false;
      set_dom(v, nd);
      for (int o : var_cons_[v])
        if (o != ci) enqueue(o);
    }
    return true;
  }

  bool propagate() {
    bool ok = true;
    while (!queue_.empty()) {
      int c = queue_.back();
      queue_.pop_back();
      in_queue_[c] = 0;
      if (ok && !revise(c)) ok = false;
    }
    return ok;
  }

  const RelationalStructure& inst_;
  const RelationalStructure& tmpl_;
  int n_;
  std::uint64_t full_;
  std::vector<std::uint64_t> dom_;
  std::vector<Con> cons_;
  std::vector<int> scopes_;
  std::vector<std::vector<int>> var_cons_;
  std::vector<char> in_queue_;
  std::vector<int> queue_;
  std::vector<std::pair<int, std::uint64_t>> trail_;
};

std::vector<std::uint64_t> seed_domains(const RelationalStructure& inst,
                                        const RelationalStructure& tmpl,
                                        const PartialAssignment& seed) {
  std::vector<std::uint64_t> d(inst.size(), ~0ULL);
  for (auto [x, v] : seed.entries()) {
    if (x < 0 || x >= inst.size())
      throw InvalidArgument("seed element " + std::to_string(x) +
                            " outside the instance universe");
    if (v < 0 || v >= tmpl.size())
      throw InvalidArgument("seed value " + std::to_string(v) +
                            " outside the template universe");
    d[x] = 1ULL << v;
  }
  return d;
}

}  // namespace

std::optional<Homomorphism> find_homomorphism_in_domains(
    const RelationalStructure& instance, const RelationalStructure& tmpl,
    std::vector<std::uint64_t> domains) {
  Engine e(instance, tmpl);
  e.restrict_domains(domains);
  if (!e.initial_propagate()) return std::nullopt;
  // Components are independent, so their lexicographically least solutions
  // combine into the least solution overall.
  for (const auto& comp : e.components())
    if (!e.search(comp, [](const std::vector<int>&) { return false; }))
      return std::nullopt;
  Homomorphism h{e.current(), instance.hyperedge_count()};
  return h;
}

std::optional<Homomorphism> find_homomorphism(const RelationalStructure& instance,
                                              const RelationalStructure& tmpl,
                                              const PartialAssignment& seed) {
  return find_homomorphism_in_domains(instance, tmpl,
                                      seed_domains(instance, tmpl, seed));
}

void for_each_homomorphism(const RelationalStructure& instance,
                           const RelationalStructure& tmpl,
                           const PartialAssignment& seed,
                           const SolutionVisitor& visit) {
  Engine e(instance, tmpl);
  e.restrict_domains(seed_domains(instance, tmpl, seed));
  if (!e.initial_propagate()) return;
  std::vector<int> order(instance.size());
  std::iota(order.begin(), order.end(), 0);
  e.search(order, visit);
}

std::vector<Homomorphism> enumerate_homomorphisms(const RelationalStructure& instance,
                                                  const RelationalStructure& tmpl) {
  std::vector<Homomorphism> out;
  std::size_t checked = instance.hyperedge_count();
  for_each_homomorphism(instance, tmpl, {}, [&](const std::vector<int>& m) {
    out.push_back({m, checked});
    return true;
  });
  return out;
}

std::size_t count_homomorphisms(const RelationalStructure& instance,
                                const RelationalStructure& tmpl) {
  std::size_t n = 0;
  for_each_homomorphism(instance, tmpl, {}, [&](const std::vector<int>&) {
    ++n;
    return true;
  });
  return n;
}

bool is_homomorphism(const RelationalStructure& instance,
                     const RelationalStructure& tmpl, const std::vector<int>& map) {
  if (static_cast<int>(map.size()) != instance.size()) return false;
  for (int v : map)
    if (v < 0 || v >= tmpl.size()) return false;
  auto sm = symbol_map(instance.signature(), tmpl.signature());
  std::vector<int> img;
  for (std::size_t s = 0; s < sm.size(); ++s) {
    const Relation& rel = instance.relation(s);
    for (std::size_t t = 0; t < rel.size(); ++t) {
      img.clear();
      for (int x : rel[t]) img.push_back(map[x]);
      if (!tmpl.has(sm[s], img)) return false;
    }
  }
  return true;
}

Quotient quotient_by_key(const RelationalStructure& s, const std::vector<int>& key) {
  if (static_cast<int>(key.size()) != s.size())
    throw InvalidArgument("quotient key has wrong length");
  std::map<int, int> ids;
  std::vector<int> cmap(s.size());
  std::vector<std::string> labels;
  for (int x = 0; x < s.size(); ++x) {
    auto [it, fresh] = ids.emplace(key[x], static_cast<int>(ids.size()));
    cmap[x] = it->second;
    if (fresh && !s.labels().empty()) labels.push_back(s.labels()[x]);
  }
  std::vector<std::vector<int>> rels(s.signature().size());
  for (std::size_t r = 0; r < rels.size(); ++r) {
    const auto& d = s.relation(r).data();
    rels[r].reserve(d.size());
    for (int x : d) rels[r].push_back(cmap[x]);
  }
  return {RelationalStructure(s.signature(), static_cast<int>(ids.size()),
                              std::move(rels), std::move(labels)),
          std::move(cmap)};
}

Quotient quotient(const RelationalStructure& s,
                  const std::vector<std::vector<int>>& partition) {
  std::vector<int> key(s.size(), -1);
  for (std::size_t c = 0; c < partition.size(); ++c) {
    if (partition[c].empty()) throw InvalidArgument("partition has an empty class");
    int least = *std::min_element(partition[c].begin(), partition[c].end());
    for (int x : partition[c]) {
      if (x < 0 || x >= s.size())
        throw InvalidArgument("partition element " + std::to_string(x) +
                              " outside the universe");
      if (key[x] != -1)
        throw InvalidArgument("partition classes overlap at element " +
                              std::to_string(x));
      key[x] = least;
    }
  }
  for (int x = 0; x < s.size(); ++x)
    if (key[x] == -1)
      throw InvalidArgument("partition does not cover element " + std::to_string(x));
  return quotient_by_key(s, key);
}

}  // namespace antcsp

#include "antcsp/structure.hpp"

#include <algorithm>

#include "antcsp/error.hpp"

namespace antcsp {

Signature::Signature(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const Symbol& s = symbols_[i];
    if (s.name.empty()) throw InvalidArgument("relation symbol with empty name");
    if (s.arity < 1)
      throw InvalidArgument("relation symbol '" + s.name + "' has arity < 1");
    if (!index_.emplace(s.name, static_cast<int>(i)).second)
      throw InvalidArgument("duplicate relation symbol '" + s.name + "'");
  }
}

int Signature::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int Signature::index_of(const std::string& name) const {
  int i = find(name);
  if (i < 0) throw InvalidArgument("unknown relation symbol '" + name + "'");
  return i;
}

int Signature::max_arity() const {
  int m = 0;
  for (const auto& s : symbols_) m = std::max(m, s.arity);
  return m;
}

Relation::Relation(int arity, std::vector<int> flat) : arity_(arity) {
  std::size_t n = flat.size() / arity;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(flat.begin() + a * arity,
                                        flat.begin() + (a + 1) * arity,
                                        flat.begin() + b * arity,
                                        flat.begin() + (b + 1) * arity);
  };
  auto same = [&](std::size_t a, std::size_t b) {
    return std::equal(flat.begin() + a * arity, flat.begin() + (a + 1) * arity,
                      flat.begin() + b * arity);
  };
  std::sort(order.begin(), order.end(), less);
  data_.reserve(flat.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && same(order[i], order[i - 1])) continue;
    data_.insert(data_.end(), flat.begin() + order[i] * arity,
                 flat.begin() + (order[i] + 1) * arity);
  }
}

bool Relation::contains(std::span<const int> t) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    auto row = (*this)[mid];
    if (std::lexicographical_compare(row.begin(), row.end(), t.begin(), t.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < size() && std::equal(t.begin(), t.end(), (*this)[lo].begin());
}

RelationalStructure::RelationalStructure(Signature sig, int size,
                                         std::vector<std::vector<int>> relations,
                                         std::vector<std::string> labels)
    : sig_(std::move(sig)), size_(size), labels_(std::move(labels)) {
  if (size < 0) throw InvalidArgument("negative universe size");
  if (relations.size() != sig_.size())
    throw InvalidArgument("relation count does not match signature");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != size)
    throw InvalidArgument("label count does not match universe size");
  rels_.reserve(relations.size());
  for (std::size_t i = 0; i < relations.size(); ++i) {
    int a = sig_[i].arity;
    if (relations[i].size() % a != 0)
      throw InvalidArgument("relation '" + sig_[i].name + "' has a ragged tuple");
    for (int v : relations[i])
      if (v < 0 || v >= size)
        throw InvalidArgument("relation '" + sig_[i].name + "' has entry " +
                              std::to_string(v) + " outside universe of size " +
                              std::to_string(size));
    rels_.emplace_back(a, std::move(relations[i]));
  }
}

const Relation& RelationalStructure::relation(const std::string& name) const {
  return rels_[sig_.index_of(name)];
}

std::size_t RelationalStructure::hyperedge_count() const {
  std::size_t n = 0;
  for (const auto& r : rels_) n += r.size();
  return n;
}

std::string RelationalStructure::label(int e) const {
  if (!labels_.empty()) return labels_[e];
  return std::to_string(e);
}

StructureBuilder::StructureBuilder(Signature sig, int size)
    : sig_(std::move(sig)), size_(size), rels_(sig_.size()) {}

void StructureBuilder::add(int sym, std::span<const int> tuple) {
  if (sym < 0 || sym >= static_cast<int>(sig_.size()))
    throw InvalidArgument("symbol index out of range");
  if (static_cast<int>(tuple.size()) != sig_[sym].arity)
    throw InvalidArgument("tuple arity mismatch for '" + sig_[sym].name + "'");
  rels_[sym].insert(rels_[sym].end(), tuple.begin(), tuple.end());
}

RelationalStructure StructureBuilder::build() const {
  return RelationalStructure(sig_, size_, rels_, labels_);
}

PartialAssignment::PartialAssignment(
    std::initializer_list<std::pair<int, int>> entries) {
  for (auto [x, v] : entries) set(x, v);
}

void PartialAssignment::set(int x, int value) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair<int, int>(x, INT32_MIN));
  if (it != entries_.end() && it->first == x)
    it->second = value;
  else
    entries_.insert(it, {x, value});
}

void PartialAssignment::erase(int x) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair<int, int>(x, INT32_MIN));
  if (it != entries_.end() && it->first == x) entries_.erase(it);
}

std::optional<int> PartialAssignment::get(int x) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair<int, int>(x, INT32_MIN));
  if (it != entries_.end() && it->first == x) return it->second;
  return std::nullopt;
}

std::vector<int> PartialAssignment::domain() const {
  std::vector<int> d;
  for (auto& e : entries_) d.push_back(e.first);
  return d;
}

std::vector<int> PartialAssignment::values() const {
  std::vector<int> d;
  for (auto& e : entries_) d.push_back(e.second);
  return d;
}

PartialAssignment PartialAssignment::restrict_to(std::span<const int> elems) const {
  PartialAssignment r;
  for (int x : elems)
    if (auto v = get(x)) r.set(x, *v);
  return r;
}

std::string to_string(const PartialAssignment& nu) {
  std::string s = "{";
  bool first = true;
  for (auto [x, v] : nu.entries()) {
    if (!first) s += ", ";
    first = false;
    s += std::to_string(x) + "->" + std::to_string(v);
  }
  return s + "}";
}

}  // namespace antcsp

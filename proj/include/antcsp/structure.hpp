#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace antcsp {

struct Symbol {
  std::string name;
  int arity = 0;
  bool operator==(const Symbol&) const = default;
};

// Ordered list of relation symbols.  Equality is built in and never listed.
class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<Symbol> symbols);
  Signature(std::initializer_list<Symbol> symbols)
      : Signature(std::vector<Symbol>(symbols)) {}

  std::size_t size() const { return symbols_.size(); }
  const Symbol& operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  // Index of the symbol or -1.
  int find(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws when absent
  int max_arity() const;
  bool operator==(const Signature& o) const { return symbols_ == o.symbols_; }

 private:
  std::vector<Symbol> symbols_;
  std::map<std::string, int> index_;
};

// Canonical (sorted, duplicate-free) set of tuples stored flat.
class Relation {
 public:
  Relation() = default;
  Relation(int arity, std::vector<int> flat);  // sorts and dedups

  int arity() const { return arity_; }
  std::size_t size() const { return arity_ == 0 ? 0 : data_.size() / arity_; }
  bool empty() const { return data_.empty(); }
  std::span<const int> operator[](std::size_t i) const {
    return {data_.data() + i * arity_, static_cast<std::size_t>(arity_)};
  }
  bool contains(std::span<const int> t) const;
  const std::vector<int>& data() const { return data_; }
  bool operator==(const Relation& o) const = default;

 private:
  int arity_ = 0;
  std::vector<int> data_;
};

class RelationalStructure {
 public:
  RelationalStructure() = default;
  // relations[i] holds the flat tuples of symbol i, in any order.
  RelationalStructure(Signature sig, int size,
                      std::vector<std::vector<int>> relations,
                      std::vector<std::string> labels = {});

  const Signature& signature() const { return sig_; }
  int size() const { return size_; }
  const Relation& relation(std::size_t sym) const { return rels_[sym]; }
  const Relation& relation(const std::string& name) const;
  bool has(std::size_t sym, std::span<const int> t) const {
    return rels_[sym].contains(t);
  }
  std::size_t hyperedge_count() const;
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(int e) const;

  // Ignores labels.
  bool operator==(const RelationalStructure& o) const {
    return size_ == o.size_ && sig_ == o.sig_ && rels_ == o.rels_;
  }

 private:
  Signature sig_;
  int size_ = 0;
  std::vector<Relation> rels_;
  std::vector<std::string> labels_;
};

class StructureBuilder {
 public:
  StructureBuilder(Signature sig, int size);
  void add(int sym, std::span<const int> tuple);
  void add(int sym, std::initializer_list<int> tuple) {
    add(sym, std::span<const int>(tuple.begin(), tuple.size()));
  }
  void add(const std::string& name, std::initializer_list<int> tuple) {
    add(sig_.index_of(name), tuple);
  }
  void set_labels(std::vector<std::string> labels) { labels_ = std::move(labels); }
  int size() const { return size_; }
  const Signature& signature() const { return sig_; }
  RelationalStructure build() const;

 private:
  Signature sig_;
  int size_;
  std::vector<std::vector<int>> rels_;
  std::vector<std::string> labels_;
};

// Map from a subset of the instance universe to the template universe,
// kept sorted by instance element.
class PartialAssignment {
 public:
  PartialAssignment() = default;
  PartialAssignment(std::initializer_list<std::pair<int, int>> entries);

  void set(int x, int value);
  void erase(int x);
  std::optional<int> get(int x) const;
  bool contains(int x) const { return get(x).has_value(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<int, int>>& entries() const { return entries_; }
  std::vector<int> domain() const;
  std::vector<int> values() const;
  // Restriction to the given elements (those not in the domain are skipped).
  PartialAssignment restrict_to(std::span<const int> elems) const;

  bool operator==(const PartialAssignment&) const = default;
  auto operator<=>(const PartialAssignment&) const = default;

 private:
  std::vector<std::pair<int, int>> entries_;
};

struct Homomorphism {
  std::vector<int> map;
  // Number of instance hyperedges verified against the template.
  std::size_t hyperedges_checked = 0;
};

std::string to_string(const PartialAssignment& nu);

}  // namespace antcsp

#include "antcsp/templates.hpp"

#include <algorithm>

#include "antcsp/error.hpp"

namespace antcsp::templates {

RelationalStructure graph(int n, const std::vector<std::pair<int, int>>& edges) {
  StructureBuilder b(Signature{{"E", 2}}, n);
  for (auto [u, v] : edges) {
    b.add(0, {u, v});
    b.add(0, {v, u});
  }
  return b.build();
}

RelationalStructure complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return graph(n, e);
}

RelationalStructure cycle(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return graph(n, e);
}

RelationalStructure loop() {
  StructureBuilder b(Signature{{"E", 2}}, 1);
  b.add(0, {0, 0});
  return b.build();
}

RelationalStructure one_in_three() {
  StructureBuilder b(Signature{{"r", 3}}, 2);
  b.add(0, {1, 0, 0});
  b.add(0, {0, 1, 0});
  b.add(0, {0, 0, 1});
  return b.build();
}

std::string sign_bits(unsigned pattern, int width) {
  std::string s(width, '0');
  for (int i = 0; i < width; ++i)
    if ((pattern >> (width - 1 - i)) & 1) s[i] = '1';
  return s;
}

RelationalStructure signed_one_in_three() {
  std::vector<Symbol> syms;
  for (unsigned p = 0; p < 8; ++p) syms.push_back({"r_" + sign_bits(p, 3), 3});
  StructureBuilder b(Signature(syms), 2);
  for (unsigned p = 0; p < 8; ++p)
    for (int t = 0; t < 8; ++t) {
      int x = (t >> 2) & 1, y = (t >> 1) & 1, z = t & 1;
      int ones = (x ^ ((p >> 2) & 1)) + (y ^ ((p >> 1) & 1)) + (z ^ (p & 1));
      if (ones == 1) b.add(static_cast<int>(p), {x, y, z});
    }
  return b.build();
}

std::string sat_symbol(int width, unsigned pattern) {
  return "R" + std::to_string(width) + "_" + sign_bits(pattern, width);
}

RelationalStructure nsat(int width) {
  if (width < 1 || width > 8)
    throw InvalidArgument("nSAT templates are materialized only for width 1..8");
  unsigned patterns = 1u << width;
  std::vector<Symbol> syms;
  for (unsigned p = 0; p < patterns; ++p) syms.push_back({sat_symbol(width, p), width});
  StructureBuilder b(Signature(syms), 2);
  std::vector<int> t(width);
  for (unsigned p = 0; p < patterns; ++p)
    for (unsigned v = 0; v < patterns; ++v) {
      // The clause is falsified only when every literal is false, i.e. v == p
      // bitwise (a negated literal is false when its variable is 1).
      if (v == p) continue;
      for (int i = 0; i < width; ++i) t[i] = (v >> (width - 1 - i)) & 1;
      b.add(static_cast<int>(p), t);
    }
  return b.build();
}

RelationalStructure linear(int m, int g) {
  if (m < 2 || m > 64)
    throw InvalidArgument("modulus must lie in 2..64");
  if (g <= 0 || g >= m) throw InvalidArgument("g must be a nonzero element of Z_m");
  std::vector<int> hs = {0, g};
  std::vector<Symbol> syms;
  for (int h : hs) syms.push_back({"r_" + std::to_string(h), 3});
  for (int h : hs) syms.push_back({"s_" + std::to_string(h), 3});
  StructureBuilder b(Signature(syms), m);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int i = 0; i < 2; ++i) {
        int h = hs[i];
        b.add(i, {x, y, ((x + y - h) % m + m) % m});
        b.add(2 + i, {x, y, ((h - x - y) % m + 2 * m) % m});
      }
  return b.build();
}

RelationalStructure two_plus() {
  StructureBuilder b(Signature{{"r", 3}, {"s", 4}}, 2);
  b.add(0, {1, 0, 0});
  b.add(0, {0, 1, 0});
  b.add(0, {0, 0, 1});
  for (int t = 0; t < 16; ++t)
    b.add(1, {(t >> 3) & 1, (t >> 2) & 1, (t >> 1) & 1, t & 1});
  return b.build();
}

std::string constant_symbol(int a) { return "c" + std::to_string(a); }

RelationalStructure with_constants(const RelationalStructure& a) {
  std::vector<Symbol> syms = a.signature().symbols();
  for (int x = 0; x < a.size(); ++x) syms.push_back({constant_symbol(x), 1});
  StructureBuilder b(Signature(syms), a.size());
  for (std::size_t s = 0; s < a.signature().size(); ++s) {
    const Relation& r = a.relation(s);
    for (std::size_t t = 0; t < r.size(); ++t) b.add(static_cast<int>(s), r[t]);
  }
  for (int x = 0; x < a.size(); ++x)
    b.add(static_cast<int>(a.signature().size()) + x, {x});
  return b.build();
}

RelationalStructure by_name(const std::string& name) {
  if (name == "k2") return complete_graph(2);
  if (name == "k3") return complete_graph(3);
  if (name == "k4") return complete_graph(4);
  if (name == "c5") return cycle(5);
  if (name == "loop") return loop();
  if (name == "one-in-three") return one_in_three();
  if (name == "signed-one-in-three") return signed_one_in_three();
  if (name == "two-plus") return two_plus();
  auto number = [&](std::size_t from, std::size_t len) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(name.substr(from, len), &used);
    } catch (const std::exception&) {
    }
    if (used == 0 || used != std::min(len, name.size() - from))
      throw InvalidArgument("unknown builtin structure '" + name + "'");
    return v;
  };
  if (name.rfind("nsat", 0) == 0) return nsat(number(4, std::string::npos));
  if (name.rfind("linear", 0) == 0) {
    // linear<m>g<g>, e.g. linear2g1
    auto g = name.find('g', 6);
    if (g == std::string::npos) throw InvalidArgument("builtin linear templates look like linear2g1");
    return linear(number(6, g - 6), number(g + 1, std::string::npos));
  }
  throw InvalidArgument("unknown builtin structure '" + name + "'");
}

}  // namespace antcsp::templates

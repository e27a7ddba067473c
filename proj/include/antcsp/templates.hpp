#pragma once

#include <string>
#include <vector>

#include "antcsp/structure.hpp"

namespace antcsp::templates {

// Undirected graphs use a symmetric binary relation E.
RelationalStructure complete_graph(int n);
RelationalStructure cycle(int n);
RelationalStructure graph(int n, const std::vector<std::pair<int, int>>& edges);
RelationalStructure loop();

// Positive 1-in-3 on {0,1} with the single ternary symbol r.
RelationalStructure one_in_three();
// 1-in-3 with one symbol r_abc per negation pattern: (x,y,z) is in r_abc iff
// exactly one of x^a, y^b, z^c equals 1.
RelationalStructure signed_one_in_three();

// Sign pattern string, e.g. bits "010" means the middle literal is negated.
std::string sign_bits(unsigned pattern, int width);
std::string sat_symbol(int width, unsigned pattern);  // "R3_010"
// nSAT on {0,1}: one symbol per sign pattern, each holding all non-falsifying tuples.
RelationalStructure nsat(int width);

// Z_m with relations r_h = {x+y-z=h} and s_h = {x+y+z=h} for h in {0, g}.
RelationalStructure linear(int modulus, int g);

// {0,1} with positive 1-in-3 r and the total 4-ary relation s.
RelationalStructure two_plus();

// Adds a unary singleton relation "c<a>" for every template element a.
RelationalStructure with_constants(const RelationalStructure& a);
std::string constant_symbol(int a);

// k2, k3, k4, c5, loop, one-in-three, signed-one-in-three, two-plus, nsat<w>, linear<m>g<g>.
RelationalStructure by_name(const std::string& name);

}  // namespace antcsp::templates

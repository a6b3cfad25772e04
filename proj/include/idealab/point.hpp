#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "idealab/rat.hpp"

namespace idealab {

// The four base sets ideals live on. Every expression, function, ideal and
// view is pinned to exactly one of these; mixing them is a hard error.
enum class Universe {
  Omega,        // natural numbers
  OmegaSq,      // pairs (m, n) of naturals, lexicographic
  OmegaTagged,  // (n, t) with t in {0, 1}; carrier of disjoint sums
  QUnit,        // rationals in [0, 1], enumerated by (denominator, numerator)
};

std::string universe_name(Universe u);

// One element of some universe. Interpretation depends on the universe:
//   Omega:       value x           (y unused, 0)
//   OmegaSq:     pair (x, y)
//   OmegaTagged: (x, tag y), y in {0, 1}
//   QUnit:       fraction x/y, reduced, 0 <= x <= y, y >= 1
struct Point {
  Int x{0};
  Int y{0};

  friend bool operator==(const Point&, const Point&) = default;
};

Point omega_pt(Int n);
Point pair_pt(Int m, Int n);
Point tagged_pt(Int n, int tag);
Point qunit_pt(Int p, Int q);  // reduces; throws if not in [0,1]

// Canonical order within a universe. Omega/OmegaSq/OmegaTagged are (x, y)
// lexicographic; QUnit is enumeration order (denominator, then numerator).
bool point_less(Universe u, const Point& a, const Point& b);

std::string point_str(Universe u, const Point& p);

// QUnit value as a rational (for interval arithmetic in nwd scoring).
Rat qunit_value(const Point& p);

// First N rationals of [0,1] in canonical enumeration order:
// 0/1, 1/1, 1/2, 1/3, 2/3, 1/4, 3/4, ...  (reduced fractions only).
std::vector<Point> qunit_enumerate(std::int64_t n);

// Position of a reduced fraction p/q in that enumeration (0-based).
Int qunit_index(const Point& p);

}  // namespace idealab

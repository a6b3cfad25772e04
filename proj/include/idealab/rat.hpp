#pragma once

#include <gmpxx.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idealab {

// All arithmetic in the engine is exact: arbitrary-precision integers and
// rationals, no floating point. Scores, masses, sequence values and interval
// endpoints are Rat; set-element coordinates are Int.
using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat make_rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// 2^k as a rational, k may be negative (dyadic interval widths).
Rat pow2(long k);

// b^e for integer base, e >= 0.
Int ipow(const Int& base, unsigned long e);

// r^e for rational base, e >= 0 (exact).
Rat rat_pow(const Rat& base, unsigned long e);

// Serialized form used everywhere (reports, CSV): "p/q", canonical, q >= 1.
// Integers still carry the denominator ("3/1") so the column type is uniform.
std::string to_pq_string(const Rat& r);
std::string to_string(const Int& n);

// Parses "p", "-p", "p/q". Returns nullopt on malformed input.
std::optional<Rat> rat_from_string(const std::string& s);

// Exact sum of f-terms by balanced (pairwise) folding. Sequential folding is
// quadratic in the digit size of harmonic-type sums; the balanced tree keeps
// GMP's subquadratic multiplication effective at 10^6 terms.
Rat balanced_sum(std::span<const Rat> terms);

// floor(log2(n)) for n >= 1.
unsigned long floor_log2(const Int& n);

}  // namespace idealab

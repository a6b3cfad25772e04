#include "idealab/point.hpp"

#include <numeric>
#include <stdexcept>

namespace idealab {

std::string universe_name(Universe u) {
  switch (u) {
    case Universe::Omega: return "omega";
    case Universe::OmegaSq: return "omega^2";
    case Universe::OmegaTagged: return "omega*2";
    case Universe::QUnit: return "Q[0,1]";
  }
  return "?";
}

Point omega_pt(Int n) { return Point{std::move(n), 0}; }
Point pair_pt(Int m, Int n) { return Point{std::move(m), std::move(n)}; }

Point tagged_pt(Int n, int tag) {
  if (tag != 0 && tag != 1) throw std::invalid_argument("tag must be 0 or 1");
  return Point{std::move(n), tag};
}

Point qunit_pt(Int p, Int q) {
  if (q <= 0) throw std::invalid_argument("fraction denominator must be >= 1");
  if (p < 0 || p > q) throw std::invalid_argument("fraction must lie in [0,1]");
  Int g;
  mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
  if (g > 1) {
    p /= g;
    q /= g;
  }
  return Point{std::move(p), std::move(q)};
}

bool point_less(Universe u, const Point& a, const Point& b) {
  if (u == Universe::QUnit) {
    if (a.y != b.y) return a.y < b.y;  // denominator first: enumeration order
    return a.x < b.x;
  }
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

std::string point_str(Universe u, const Point& p) {
  switch (u) {
    case Universe::Omega: return p.x.get_str();
    case Universe::OmegaSq:
      return "(" + p.x.get_str() + "," + p.y.get_str() + ")";
    case Universe::OmegaTagged:
      return "(" + p.x.get_str() + ";" + p.y.get_str() + ")";
    case Universe::QUnit: return p.x.get_str() + "/" + p.y.get_str();
  }
  return "?";
}

Rat qunit_value(const Point& p) { return make_rat(p.x, p.y); }

std::vector<Point> qunit_enumerate(std::int64_t n) {
  std::vector<Point> out;
  if (n <= 0) return out;
  out.reserve(static_cast<size_t>(n));
  out.push_back(Point{0, 1});
  if (n == 1) return out;
  out.push_back(Point{1, 1});
  Int q = 2;
  while (static_cast<std::int64_t>(out.size()) < n) {
    for (Int p = 1; p < q && static_cast<std::int64_t>(out.size()) < n; ++p) {
      Int g;
      mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
      if (g == 1) out.push_back(Point{p, q});
    }
    ++q;
  }
  return out;
}

namespace {
// Entries before denominator q: 2 (for 0/1, 1/1) + sum of phi(2..q-1).
// Grown on demand and kept for the process; denominators stay small because
// enumeration counts grow like 3q^2/pi^2.
std::int64_t entries_before(std::int64_t q) {
  static std::vector<std::int64_t> cum = {0, 0, 2};  // cum[q] = entries < q
  if (q < 2) return 0;
  while (static_cast<std::int64_t>(cum.size()) <= q) {
    const std::int64_t d = static_cast<std::int64_t>(cum.size()) - 1;
    std::int64_t phi = 0;
    for (std::int64_t p = 1; p < d; ++p)
      if (std::gcd(p, d) == 1) ++phi;
    cum.push_back(cum.back() + phi);
  }
  return cum[static_cast<size_t>(q)];
}
}  // namespace

Int qunit_index(const Point& pt) {
  // Denominator 1 holds the first two entries 0/1, 1/1.
  if (pt.y == 1) return pt.x;  // 0 -> 0, 1 -> 1
  if (!pt.y.fits_slong_p())
    throw std::invalid_argument("qindex: denominator too large to rank");
  const std::int64_t q = pt.y.get_si();
  const std::int64_t pnum = pt.x.get_si();
  std::int64_t idx = entries_before(q);
  // Rank of our numerator among coprimes of our denominator.
  for (std::int64_t p = 1; p < pnum; ++p)
    if (std::gcd(p, q) == 1) ++idx;
  return Int(idx);
}

}  // namespace idealab

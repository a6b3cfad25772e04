#include "idealab/rat.hpp"

#include <cctype>

namespace idealab {

Rat pow2(long k) {
  Rat r(1);
  if (k >= 0) {
    mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(k));
  } else {
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-k));
  }
  return r;
}

Int ipow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

Rat rat_pow(const Rat& base, unsigned long e) {
  Rat r;
  mpz_pow_ui(r.get_num_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), base.get_den().get_mpz_t(), e);
  // base is canonical, so num^e / den^e already is.
  return r;
}

std::string to_pq_string(const Rat& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_string(const Int& n) { return n.get_str(); }

std::optional<Rat> rat_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto slash = s.find('/');
  const std::string num = slash == std::string::npos ? s : s.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto digits = [](const std::string& t) {
    if (t.empty()) return false;
    size_t i = t[0] == '-' ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    return true;
  };
  if (!digits(num) || !digits(den)) return std::nullopt;
  Int d(den);
  if (d == 0) return std::nullopt;
  Rat r(Int(num), d);
  r.canonicalize();
  return r;
}

namespace {
Rat sum_range(std::span<const Rat> terms, size_t lo, size_t hi) {
  if (hi - lo == 0) return Rat(0);
  if (hi - lo == 1) return terms[lo];
  const size_t mid = lo + (hi - lo) / 2;
  return sum_range(terms, lo, mid) + sum_range(terms, mid, hi);
}
}  // namespace

Rat balanced_sum(std::span<const Rat> terms) {
  return sum_range(terms, 0, terms.size());
}

unsigned long floor_log2(const Int& n) {
  // mpz sizeinbase(2) is the bit length; floor(log2) is one less.
  return mpz_sizeinbase(n.get_mpz_t(), 2) - 1;
}

}  // namespace idealab

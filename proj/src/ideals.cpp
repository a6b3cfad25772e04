#include "idealab/ideals.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "lex.hpp"

namespace idealab::ideals {

using setexpr::SetExpr;
using setexpr::TriBool;

namespace {
IdealPtr inode(Ideal i) { return std::make_shared<const Ideal>(std::move(i)); }

void require_universe(const Ideal& ideal, Universe got, const char* where) {
  if (ideal.uni != got)
    throw UniverseError(std::string(where) + ": ideal " + name(ideal) + " lives on " +
                        universe_name(ideal.uni) + ", got " + universe_name(got));
}
}  // namespace

// ---- weight families ----

Rat WeightFamily::weight(const Int& n) const {
  switch (kind) {
    case Kind::Harmonic: return make_rat(1, Int(n + 1));
    case Kind::Power: {
      Int den = ipow(Int(n + 1), p);
      return make_rat(1, den);
    }
    case Kind::Geometric: {
      if (!n.fits_ulong_p())
        throw EvalError("geometric weight exponent too large: " + n.get_str());
      return rat_pow(r, n.get_ui());
    }
  }
  return Rat(0);
}

Rat WeightFamily::max_weight() const { return Rat(1); }

std::string WeightFamily::str() const {
  switch (kind) {
    case Kind::Harmonic: return "harmonic";
    case Kind::Power: return "pow," + std::to_string(p);
    case Kind::Geometric: return "geom," + to_pq_string(r);
  }
  return "?";
}

// ---- constructors ----

IdealPtr fin_ideal() { return inode(Ideal{.kind = Ideal::K::Fin}); }

IdealPtr summable_ideal(WeightFamily wf) {
  if (wf.kind == WeightFamily::Kind::Power && wf.p < 1)
    throw std::invalid_argument("summable(pow,p) needs p >= 1");
  if (wf.kind == WeightFamily::Kind::Geometric && !(wf.r > 0 && wf.r < 1))
    throw std::invalid_argument("summable(geom,r) needs 0 < r < 1");
  Ideal i{.kind = Ideal::K::Summable};
  i.wf = std::move(wf);
  return inode(std::move(i));
}

IdealPtr density_ideal() {
  return gdensity_ideal(Partition{Partition::Kind::Dyadic, 2}, false);
}

IdealPtr gdensity_ideal(Partition part, bool unit_weights) {
  Ideal i{.kind = Ideal::K::GDensity};
  i.part = std::move(part);
  i.unit_weights = unit_weights;
  return inode(std::move(i));
}

IdealPtr vdw_ideal() { return inode(Ideal{.kind = Ideal::K::Vdw}); }

IdealPtr edminus_ideal() {
  return inode(Ideal{.kind = Ideal::K::EdMinus, .uni = Universe::OmegaSq});
}

IdealPtr nwd_ideal() {
  return inode(Ideal{.kind = Ideal::K::Nwd, .uni = Universe::QUnit});
}

IdealPtr dsum_ideal(IdealPtr l, IdealPtr r) {
  if (l->uni != Universe::Omega || r->uni != Universe::Omega)
    throw UniverseError("dsum components must be omega ideals");
  Ideal i{.kind = Ideal::K::DSum, .uni = Universe::OmegaTagged};
  i.left = std::move(l);
  i.right = std::move(r);
  return inode(std::move(i));
}

IdealPtr fubini_ideal(IdealPtr l, IdealPtr r) {
  if (l->uni != Universe::Omega || r->uni != Universe::Omega)
    throw UniverseError("fubini components must be omega ideals");
  Ideal i{.kind = Ideal::K::Fubini, .uni = Universe::OmegaSq};
  i.left = std::move(l);
  i.right = std::move(r);
  return inode(std::move(i));
}

IdealPtr restrict_ideal(IdealPtr base, SetPtr a) {
  if (base->uni != a->uni)
    throw UniverseError("restrict: set lives on " + std::string(universe_name(a->uni)) +
                        ", ideal on " + universe_name(base->uni));
  Verdict v = decide(*base, a);
  if (v.kind != Verdict::K::Positive)
    throw std::invalid_argument(
        "restrict: base ideal does not certify the set positive (got " +
        std::string(v.kind == Verdict::K::In ? "In" : "Unknown") +
        "); restriction to a small set is not supported");
  Ideal i{.kind = Ideal::K::Restrict, .uni = base->uni};
  i.left = std::move(base);
  i.restrict_to = std::move(a);
  return inode(std::move(i));
}

std::string name(const Ideal& ideal) {
  switch (ideal.kind) {
    case Ideal::K::Fin: return "fin";
    case Ideal::K::Summable: return "summable(" + ideal.wf.str() + ")";
    case Ideal::K::GDensity:
      if (!ideal.unit_weights && ideal.part.kind == Partition::Kind::Dyadic)
        return "density";
      return "gdensity(" + ideal.part.str() + "," +
             (ideal.unit_weights ? "unit" : "card") + ")";
    case Ideal::K::Vdw: return "vdw";
    case Ideal::K::EdMinus: return "edminus";
    case Ideal::K::Nwd: return "nwd";
    case Ideal::K::DSum:
      return "dsum(" + name(*ideal.left) + "," + name(*ideal.right) + ")";
    case Ideal::K::Fubini:
      if (ideal.left->kind == Ideal::K::Fin && ideal.right->kind == Ideal::K::Fin)
        return "fin2";
      return "fubini(" + name(*ideal.left) + "," + name(*ideal.right) + ")";
    case Ideal::K::Restrict:
      return "restrict(" + name(*ideal.left) + "," + print(*ideal.restrict_to) + ")";
  }
  return "?";
}

Mode mode(const Ideal& ideal) {
  switch (ideal.kind) {
    case Ideal::K::Fin:
    case Ideal::K::Summable:
    case Ideal::K::Vdw:
    case Ideal::K::EdMinus:
    case Ideal::K::Nwd: return Mode::UnboundedMeansPositive;
    case Ideal::K::GDensity: return Mode::VanishingMeansSmall;
    case Ideal::K::DSum:
    case Ideal::K::Fubini: return Mode::Structural;
    case Ideal::K::Restrict: return mode(*ideal.left);
  }
  return Mode::Structural;
}

}  // namespace idealab::ideals

// ---- descriptor grammar ----

namespace idealab::detail {

ideals::IdealPtr parse_ideal_expr(Lexer& lx) {
  using namespace idealab::ideals;
  std::string n = lx.ident();
  if (n == "fin") return fin_ideal();
  if (n == "fin2") return fubini_ideal(fin_ideal(), fin_ideal());
  if (n == "vdw") return vdw_ideal();
  if (n == "edminus") return edminus_ideal();
  if (n == "nwd") return nwd_ideal();
  if (n == "density") return density_ideal();
  if (n == "summable") {
    lx.expect('(', "after summable");
    std::string fam = lx.ident();
    WeightFamily wf;
    if (fam == "harmonic") {
      wf.kind = WeightFamily::Kind::Harmonic;
    } else if (fam == "pow") {
      lx.expect(',', "after pow");
      Int p = lx.nat("exponent");
      if (lx.peek() == '/')
        lx.fail("power exponents must be integers (exact scores need rational weights)");
      if (p < 1 || !p.fits_ulong_p()) lx.fail("pow exponent must be a positive integer");
      wf.kind = WeightFamily::Kind::Power;
      wf.p = p.get_ui();
    } else if (fam == "geom") {
      lx.expect(',', "after geom");
      Rat r = detail::parse_rat(lx);
      if (!(r > 0 && r < 1)) lx.fail("geometric ratio must satisfy 0 < r < 1");
      wf.kind = WeightFamily::Kind::Geometric;
      wf.r = std::move(r);
    } else {
      lx.fail("unknown weight family '" + fam + "' (harmonic | pow,p | geom,r)");
    }
    lx.expect(')', "after summable family");
    return summable_ideal(std::move(wf));
  }
  if (n == "gdensity") {
    lx.expect('(', "after gdensity");
    Partition part = detail::parse_partition(lx);
    lx.expect(',', "after partition");
    std::string w = lx.ident();
    if (w != "card" && w != "unit") lx.fail("gdensity weights must be card or unit");
    lx.expect(')', "after gdensity arguments");
    return gdensity_ideal(std::move(part), w == "unit");
  }
  if (n == "dsum" || n == "fubini") {
    lx.expect('(', ("after " + n).c_str());
    IdealPtr l = parse_ideal_expr(lx);
    lx.expect(',', ("in " + n).c_str());
    IdealPtr r = parse_ideal_expr(lx);
    lx.expect(')', ("after " + n + " arguments").c_str());
    return n == "dsum" ? dsum_ideal(std::move(l), std::move(r))
                       : fubini_ideal(std::move(l), std::move(r));
  }
  if (n == "restrict") {
    lx.expect('(', "after restrict");
    IdealPtr base = parse_ideal_expr(lx);
    lx.expect(',', "in restrict");
    SetPtr a = detail::parse_set_expr(lx);
    lx.expect(')', "after restrict arguments");
    return restrict_ideal(std::move(base), std::move(a));
  }
  lx.fail("unknown ideal '" + n + "'");
}

}  // namespace idealab::detail

namespace idealab::ideals {

IdealPtr make_ideal(const std::string& descriptor) {
  detail::Lexer lx{descriptor};
  IdealPtr i = detail::parse_ideal_expr(lx);
  if (!lx.at_end()) lx.fail("trailing input after ideal descriptor");
  return i;
}

std::vector<std::int64_t> default_schedule(Universe u) {
  if (u == Universe::OmegaSq) return {10, 32, 100, 316, 1000};
  return {100, 1000, 10000, 100000, 1000000};
}

// ---- longest arithmetic progression ----

namespace {

struct ApBest {
  Int len = 0, a = 0, d = 0;
  void offer(const Int& L, const Int& a_, const Int& d_) {
    if (L > len || (L == len && (d_ < d || (d_ == d && a_ < a)))) {
      len = L;
      a = a_;
      d = d_;
    }
  }
};

// Quadratic sparse DP; only chains of length >= 3 are materialized.
template <class V, class MapT>
ApResult dp_longest(const std::vector<V>& x) {
  const size_t n = x.size();
  std::vector<MapT> dp(n);
  ApBest best;
  for (size_t j = 1; j < n; ++j) {
    for (size_t i = 0; i < j; ++i) {
      const V d = x[j] - x[i];
      long len = 0;
      if (auto it = dp[i].find(d); it != dp[i].end()) {
        len = it->second + 1;
      } else {
        // would x[i] - d close a 3-term progression?
        if (x[i] >= d && std::binary_search(x.begin(), x.begin() + i, V(x[i] - d)))
          len = 3;
      }
      if (len) {
        auto [it2, inserted] = dp[j].try_emplace(d, len);
        if (!inserted && it2->second < len) it2->second = len;
        best.offer(Int(len), Int(x[j] - V(len - 1) * d), Int(d));
      }
    }
  }
  return {best.len, best.a, best.d};
}

}  // namespace

ApResult longest_ap(const TruncationView& v) {
  if (v.uni != Universe::Omega)
    throw UniverseError("longest_ap expects an omega view");
  const auto& x = v.pts;
  const size_t n = x.size();
  if (n == 0) throw std::invalid_argument("longest_ap: empty view");
  if (n == 1) return {1, x[0].x, 0};

  // Longest run of consecutive integers (the best difference-1 progression).
  Int best_run = 1, best_run_start = x[0].x;
  {
    Int run = 1, start = x[0].x;
    for (size_t i = 1; i < n; ++i) {
      if (x[i].x == x[i - 1].x + 1) {
        ++run;
      } else {
        run = 1;
        start = x[i].x;
      }
      if (run > best_run) {
        best_run = run;
        best_run_start = start;
      }
    }
  }
  // A progression with difference d >= 2 fits at most span/2 + 1 terms, and
  // the d = 1 run wins ties; when the run is long enough the scan is settled.
  const Int span = x[n - 1].x - x[0].x;
  if (best_run >= 3 && 2 * (best_run - 1) >= span)
    return {best_run, best_run_start, 1};

  // Uniform gap: the whole view is one progression.
  {
    const Int d0 = x[1].x - x[0].x;
    bool uniform = true;
    for (size_t i = 2; i < n && uniform; ++i)
      uniform = (x[i].x - x[i - 1].x == d0);
    if (uniform) return {Int(static_cast<long>(n)), x[0].x, d0};
  }

  if (n > 65536)
    throw EvalError("longest_ap: view of " + std::to_string(n) +
                    " points exceeds the exact quadratic-search limit");

  ApResult r{0, 0, 0};
  // products (len-1)*d stay below 2^63 when values fit in 31 bits
  if (x.back().x < Int(1) << 31) {
    std::vector<long> xs(n);
    for (size_t i = 0; i < n; ++i) xs[i] = x[i].x.get_si();
    r = dp_longest<long, std::unordered_map<long, long>>(xs);
  } else {
    std::vector<Int> xs(n);
    for (size_t i = 0; i < n; ++i) xs[i] = x[i].x;
    r = dp_longest<Int, std::map<Int, long>>(xs);
  }
  if (r.len >= 3) return r;
  // No 3-term progression: the best pair is the minimal gap, leftmost.
  Int best_d = x[1].x - x[0].x, best_a = x[0].x;
  for (size_t i = 2; i < n; ++i) {
    Int d = x[i].x - x[i - 1].x;
    if (d < best_d) {
      best_d = d;
      best_a = x[i - 1].x;
    }
  }
  return {2, best_a, best_d};
}

// ---- van der Waerden search ----

namespace {

// Is there a coloring of {1..n} with no monochromatic len-term progression?
// DFS over positions; checks only progressions ending at the new position.
bool ap_free_coloring(int n, int len, int colors, std::vector<int>& coloring) {
  coloring.assign(n + 1, -1);
  if (n == 0) return true;
  coloring[1] = 0;  // color symmetry: pin the first position
  int i = 1;
  std::vector<int> next_color(n + 1, 0);
  next_color[1] = colors;  // position 1 never re-colored
  while (true) {
    if (i == n) return true;
    ++i;
    next_color[i] = 0;
    bool placed = false;
    while (!placed) {
      int c = next_color[i]++;
      if (c >= colors) {
        // backtrack
        coloring[i] = -1;
        --i;
        while (i >= 2 && next_color[i] >= colors) {
          coloring[i] = -1;
          --i;
        }
        if (i < 2) return false;
        continue;
      }
      coloring[i] = c;
      bool mono = false;
      for (int d = 1; i - (len - 1) * d >= 1 && !mono; ++d) {
        bool all = true;
        for (int t = 1; t < len && all; ++t) all = coloring[i - t * d] == c;
        mono = all;
      }
      if (!mono) placed = true;
    }
  }
}

}  // namespace

VdwSearchResult vdw_search(int length, int colors, int max_n) {
  if (length < 2 || colors < 2 || max_n < 1)
    throw std::invalid_argument("vdw_search needs length >= 2, colors >= 2, max >= 1");
  VdwSearchResult out;
  out.length = length;
  out.colors = colors;
  std::vector<int> coloring, last_good;
  for (int n = 1; n <= max_n; ++n) {
    if (ap_free_coloring(n, length, colors, coloring)) {
      last_good.assign(coloring.begin() + 1, coloring.end());
    } else {
      out.threshold = n;
      break;
    }
  }
  out.witness_coloring = std::move(last_good);
  return out;
}

// ---- scores ----

namespace {

Rat summable_mass(const WeightFamily& wf, const TruncationView& v) {
  std::vector<Rat> terms;
  terms.reserve(v.pts.size());
  for (const Point& p : v.pts) terms.push_back(wf.weight(p.x));
  return balanced_sum(terms);
}

std::vector<CellScore> density_cells(const Ideal& ideal, const TruncationView& v) {
  const Int cutoff(static_cast<long>(v.cutoff));
  std::vector<CellScore> out;
  // cells meeting [0, cutoff)
  std::vector<std::pair<Int, Int>> ranges;  // [lo, hi] per cell
  for (Int n = 0;; ++n) {
    auto [lo, hi] = ideal.part.cell_range(n);
    if (lo >= cutoff) break;
    ranges.emplace_back(lo, hi);
  }
  std::vector<Int> counts(ranges.size(), Int(0));
  for (const Point& p : v.pts) {
    auto cell = ideal.part.cell_of(p.x);
    if (cell && *cell < static_cast<long>(ranges.size())) ++counts[cell->get_ui()];
  }
  for (size_t n = 0; n < ranges.size(); ++n) {
    const auto& [lo, hi] = ranges[n];
    Rat mu = ideal.unit_weights ? Rat(counts[n])
                                : make_rat(counts[n], Int(hi - lo + 1));
    out.push_back({Int(static_cast<long>(n)), mu, hi < cutoff});
  }
  return out;
}

Rat edminus_max_section(const TruncationView& v) {
  Int best = 0, run = 0;
  const Point* prev = nullptr;
  for (const Point& p : v.pts) {
    if (prev && prev->x == p.x)
      ++run;
    else
      run = 1;
    if (run > best) best = run;
    prev = &p;
  }
  return Rat(best);
}

Rat nwd_run_score(const TruncationView& v) {
  if (v.cutoff < 1 || v.pts.empty()) return Rat(0);
  const unsigned long L = floor_log2(Int(v.cutoff));
  const size_t cells = size_t(1) << L;
  std::vector<char> hit(cells, 0);
  for (const Point& p : v.pts) {
    Int idx = (p.x << L) / p.y;
    if (idx >= static_cast<long>(cells)) idx = static_cast<long>(cells) - 1;
    hit[idx.get_ui()] = 1;
  }
  Rat score(0);
  std::vector<char> cur = hit;
  for (unsigned long k = 1; k <= L; ++k) {
    std::vector<char> nxt(cur.size() / 2);
    bool any = false;
    for (size_t j = 0; j < nxt.size(); ++j) {
      nxt[j] = cur[2 * j] && cur[2 * j + 1];
      any = any || nxt[j];
    }
    if (!any) break;
    score = Rat(static_cast<long>(k));
    cur = std::move(nxt);
  }
  return score;
}

SectionDiag section_profile(const TruncationView& v) {
  SectionDiag d;
  Int max_sec = 0;
  // views are sorted lexicographically, so sections are contiguous runs
  for (size_t i = 0; i < v.pts.size();) {
    size_t j = i;
    while (j < v.pts.size() && v.pts[j].x == v.pts[i].x) ++j;
    d.section_sizes.emplace_back(v.pts[i].x, Int(static_cast<long>(j - i)));
    if (d.section_sizes.back().second > max_sec) max_sec = d.section_sizes.back().second;
    i = j;
  }
  for (Int s = 1; s <= max_sec; s *= 2) {
    Int count = 0;
    for (const auto& [m, sz] : d.section_sizes)
      if (sz >= s) ++count;
    d.threshold_counts.emplace_back(s, count);
  }
  return d;
}

std::pair<TruncationView, TruncationView> split_tagged(const TruncationView& v) {
  TruncationView a, b;
  a.uni = b.uni = Universe::Omega;
  a.cutoff = b.cutoff = v.cutoff;
  for (const Point& p : v.pts) (p.y == 0 ? a : b).pts.push_back(omega_pt(p.x));
  return {std::move(a), std::move(b)};
}

}  // namespace

Score score(const Ideal& ideal, const TruncationView& v) {
  require_universe(ideal, v.uni, "score");
  Score s;
  switch (ideal.kind) {
    case Ideal::K::Fin:
      s.scalar = Rat(static_cast<long>(v.pts.size()));
      return s;
    case Ideal::K::Summable:
      s.scalar = summable_mass(ideal.wf, v);
      return s;
    case Ideal::K::Vdw:
      s.scalar = v.pts.empty() ? Rat(0) : Rat(longest_ap(v).len);
      return s;
    case Ideal::K::GDensity:
      s.kind = Score::K::Cells;
      s.cells = density_cells(ideal, v);
      return s;
    case Ideal::K::EdMinus:
      s.scalar = edminus_max_section(v);
      return s;
    case Ideal::K::Nwd:
      s.scalar = nwd_run_score(v);
      return s;
    case Ideal::K::DSum: {
      auto [a, b] = split_tagged(v);
      s.kind = Score::K::Pair;
      s.first = std::make_shared<const Score>(score(*ideal.left, a));
      s.second = std::make_shared<const Score>(score(*ideal.right, b));
      return s;
    }
    case Ideal::K::Fubini:
      s.kind = Score::K::Sections;
      s.sections = section_profile(v);
      return s;
    case Ideal::K::Restrict: {
      TruncationView w = setexpr::view_inter(v, truncate(*ideal.restrict_to, v.cutoff));
      return score(*ideal.left, w);
    }
  }
  return s;
}

// ---- decide ----

namespace {

using K = SetExpr::K;
using VK = Verdict::K;

Verdict v_in(std::string cert, std::optional<Rat> bound = std::nullopt) {
  Verdict v;
  v.kind = VK::In;
  v.certificate = std::move(cert);
  v.bound = std::move(bound);
  return v;
}

Verdict v_pos(std::string cert) {
  Verdict v;
  v.kind = VK::Positive;
  v.certificate = std::move(cert);
  return v;
}

Verdict v_unknown() { return Verdict{}; }

bool family_diverges(const WeightFamily& wf) {
  return wf.kind == WeightFamily::Kind::Harmonic ||
         (wf.kind == WeightFamily::Kind::Power && wf.p == 1);
}

// Exact card-based In certificates per ideal.
std::optional<Verdict> finite_in(const Ideal& ideal, const Int& k) {
  const std::string ks = k.get_str();
  switch (ideal.kind) {
    case Ideal::K::Fin:
      return v_in("finite: at most " + ks + " points", Rat(k));
    case Ideal::K::Summable:
      return v_in("finite: at most " + ks + " points, each of weight <= " +
                      to_pq_string(ideal.wf.max_weight()),
                  Rat(k) * ideal.wf.max_weight());
    case Ideal::K::Vdw:
      return v_in("finite: a progression inside " + ks + " points has length <= " + ks,
                  Rat(k));
    case Ideal::K::EdMinus:
      return v_in("finite: sections within " + ks + " points have size <= " + ks,
                  Rat(k));
    case Ideal::K::Nwd: {
      Rat b = k == 0 ? Rat(0) : Rat(Int(floor_log2(std::max(k, Int(1)))));
      return v_in("finite: " + ks + " points hit at most " + ks +
                      " dyadic cells per level, capping full runs",
                  b);
    }
    case Ideal::K::GDensity:
      return v_in("finite: meets only finitely many cells, so cell scores vanish");
    case Ideal::K::DSum:
      return v_in("finite: both tagged parts are finite");
    case Ideal::K::Fubini:
      return v_in("finite: finitely many nonempty sections, each finite");
    case Ideal::K::Restrict: return std::nullopt;  // handled by delegation
  }
  return std::nullopt;
}

Verdict decide_rec(const Ideal& ideal, const SetPtr& e);

// Union/Inter/Diff rules shared by every ideal (pure ideal algebra; only the
// UnboundedMeansPositive In-bound needs per-ideal combination).
std::optional<Verdict> combinator_rules(const Ideal& ideal, const SetPtr& e) {
  if (e->kind == K::Union) {
    Verdict vl = decide_rec(ideal, e->l);
    if (vl.kind == VK::Positive)
      return v_pos("union contains a positive part: " + vl.certificate);
    Verdict vr = decide_rec(ideal, e->r);
    if (vr.kind == VK::Positive)
      return v_pos("union contains a positive part: " + vr.certificate);
    if (vl.kind == VK::In && vr.kind == VK::In) {
      if (mode(ideal) != Mode::UnboundedMeansPositive)
        return v_in("union of two small sets: [" + vl.certificate + "] and [" +
                    vr.certificate + "]");
      // combine score bounds
      if (vl.bound && vr.bound) {
        switch (ideal.kind) {
          case Ideal::K::Fin:
          case Ideal::K::Summable:
          case Ideal::K::EdMinus:
            return v_in("union of two small sets: [" + vl.certificate + "] and [" +
                            vr.certificate + "]",
                        Rat(*vl.bound + *vr.bound));
          case Ideal::K::Vdw: {
            // A long progression 2-colored by the two parts contains a
            // monochromatic sub-progression; exact thresholds are the
            // van der Waerden numbers W(k,2), known up to k = 6.
            static const std::map<long, long> w2{{2, 3}, {3, 9}, {4, 35}, {5, 178}, {6, 1132}};
            Int lmax;
            mpz_fdiv_q(lmax.get_mpz_t(),
                       std::max(*vl.bound, *vr.bound).get_num().get_mpz_t(),
                       std::max(*vl.bound, *vr.bound).get_den().get_mpz_t());
            long k = lmax.fits_slong_p() ? lmax.get_si() + 1 : 1000;
            if (k < 2) k = 2;
            if (auto it = w2.find(k); it != w2.end())
              return v_in("union of two progression-bounded sets: any " +
                              std::to_string(it->second) +
                              "-term progression would force a monochromatic " +
                              std::to_string(k) + "-term sub-progression (W(" +
                              std::to_string(k) + ",2) = " + std::to_string(it->second) +
                              ")",
                          Rat(it->second - 1));
            return std::nullopt;  // beyond the known W(k,2) table
          }
          default: return std::nullopt;  // no sound bound combination known
        }
      }
      return std::nullopt;
    }
    return std::nullopt;
  }
  if (e->kind == K::Inter) {
    Verdict vl = decide_rec(ideal, e->l);
    if (vl.kind == VK::In)
      return v_in("subset of a small set: " + vl.certificate, vl.bound);
    Verdict vr = decide_rec(ideal, e->r);
    if (vr.kind == VK::In)
      return v_in("subset of a small set: " + vr.certificate, vr.bound);
    return std::nullopt;
  }
  if (e->kind == K::Diff) {
    Verdict vl = decide_rec(ideal, e->l);
    if (vl.kind == VK::In)
      return v_in("subset of a small set: " + vl.certificate, vl.bound);
    if (vl.kind == VK::Positive) {
      if (auto rb = setexpr::finite_card_bound(*e->r))
        return v_pos("positive set minus at most " + rb->get_str() +
                     " points stays positive: " + vl.certificate);
      Verdict vr = decide_rec(ideal, e->r);
      if (vr.kind == VK::In)
        return v_pos("difference of a positive set by a small set stays positive "
                     "(else the union of the difference and the small set would "
                     "be small): " + vl.certificate);
    }
    return std::nullopt;
  }
  return std::nullopt;
}

Verdict decide_fin(const Ideal&, const SetPtr& e) {
  if (setexpr::provably_infinite(*e)) return v_pos("infinite by construction");
  return v_unknown();
}

Verdict decide_summable(const Ideal& ideal, const SetPtr& e) {
  const WeightFamily& wf = ideal.wf;
  if (wf.kind == WeightFamily::Kind::Geometric) {
    Rat total = Rat(1) / (Rat(1) - wf.r);
    return v_in("geometric weights have finite total mass " + to_pq_string(total) +
                    " over the whole universe (improper ideal)",
                total);
  }
  switch (e->kind) {
    case K::AP:
    case K::Evens:
    case K::Odds: {
      const Int a = e->kind == K::AP ? e->a : Int(e->kind == K::Odds ? 1 : 0);
      const Int d = e->kind == K::AP ? e->b : Int(2);
      if (family_diverges(wf))
        return v_pos("the weight series along the progression {" + a.get_str() + " + k*" +
                     d.get_str() + "} diverges (harmonic comparison)");
      // pow p >= 2: sum <= 1/(a+1)^p + (1/d^p) * p/(p-1)
      Rat head = make_rat(1, ipow(Int(a + 1), wf.p));
      Rat tail = make_rat(1, ipow(d, wf.p)) * make_rat(Int(static_cast<long>(wf.p)),
                                                       Int(static_cast<long>(wf.p - 1)));
      Rat b = head + tail;
      return v_in("progression mass bounded by 1/(a+1)^p + d^-p * p/(p-1) = " +
                      to_pq_string(b),
                  b);
    }
    case K::Squares:
      return v_in("square masses: 1 + sum 1/(k^2+1) <= 3", Rat(3));
    case K::Powers: {
      Rat b = make_rat(e->a, Int(e->a - 1));
      return v_in("power masses bounded by the geometric series b/(b-1) = " +
                      to_pq_string(b),
                  b);
    }
    case K::Blocks: {
      Rat q = make_rat(e->a, Int(e->a - 1));
      Rat b = q * q;
      return v_in("block E_n has mass <= (n+1) * b^-n; total <= (b/(b-1))^2 = " +
                      to_pq_string(b),
                  b);
    }
    default: return v_unknown();
  }
}

Verdict decide_vdw(const Ideal&, const SetPtr& e) {
  switch (e->kind) {
    case K::AP:
    case K::Evens:
    case K::Odds:
      return v_pos("an infinite arithmetic progression contains progressions of "
                   "every length");
    case K::Blocks:
      return v_pos("block E_n is an (n+1)-term progression; lengths are unbounded");
    case K::Powers:
      return v_in("powers of b carry no 3-term progression: b^i + b^k = 2 b^j is "
                  "impossible mod b",
                  Rat(2));
    default: return v_unknown();
  }
}

Verdict decide_gdensity(const Ideal& ideal, const SetPtr& e) {
  const bool dyadic = ideal.part.kind == Partition::Kind::Dyadic;
  const bool unit = ideal.unit_weights;
  switch (e->kind) {
    case K::AP:
    case K::Evens:
    case K::Odds: {
      const Int d = e->kind == K::AP ? e->b : Int(2);
      if (unit)
        return v_pos("cell counts along the progression grow without bound "
                     "(cells get long, counts ~ |I_n|/" + d.get_str() + ")");
      return v_pos("cell scores stay >= 1/(2*" + d.get_str() +
                   ") once cells are longer than 2*" + d.get_str() +
                   "; they do not vanish");
    }
    case K::Blocks: {
      if (!dyadic && e->a == ideal.part.base)
        return v_pos(unit ? "every cell is fully occupied; counts n+1 grow"
                          : "every cell is fully occupied; cell scores are "
                            "constantly 1");
      if (dyadic && !unit)
        return v_in("at most (n+2)^2 block points below 2^(n+1), so cell scores "
                    "<= (n+2)^2 / 2^n vanish");
      if (dyadic && unit)
        return v_pos("block floors land in infinitely many dyadic cells with "
                     "counts ~ n; unit-weight scores do not vanish");
      return v_unknown();
    }
    case K::Powers: {
      if (dyadic && !unit)
        return v_in("at most 2 powers per dyadic cell, so cell scores <= 2/2^n "
                    "vanish");
      if (dyadic && unit)
        return v_pos("powers hit infinitely many dyadic cells; unit-weight "
                     "scores do not vanish");
      if (!dyadic && e->a == ideal.part.base) {
        if (unit)
          return v_pos("b^n lies in cell n for every n; unit-weight scores are "
                       "constantly >= 1");
        return v_in("exactly one power per cell, so cell scores <= 1/(n+1) vanish");
      }
      return v_unknown();
    }
    case K::Squares: {
      if (dyadic && !unit)
        return v_in("squares thin out: cell scores <= 2^(1 - n/2) vanish");
      if (dyadic && unit)
        return v_pos("squares hit infinitely many dyadic cells; unit-weight "
                     "scores do not vanish");
      if (!dyadic && !unit)
        return v_in("consecutive square gaps exceed cell lengths, so at most one "
                    "square per cell and scores <= 1/(n+1) vanish");
      return v_unknown();
    }
    default:
      if (unit && dyadic && setexpr::provably_infinite(*e))
        return v_pos("an infinite set meets infinitely many (finite) dyadic "
                     "cells; unit-weight scores do not vanish");
      return v_unknown();
  }
}

Verdict decide_edminus(const Ideal&, const SetPtr& e) {
  switch (e->kind) {
    case K::Tri:
      return v_pos("section at column m has size m+1; sections are unbounded");
    case K::Row:
      if (setexpr::provably_infinite(*e->l))
        return v_pos("one row carries an infinite section");
      return v_unknown();
    case K::Grid: {
      if (auto cb = setexpr::finite_card_bound(*e->r))
        return v_in("every section is contained in a fixed set of at most " +
                        cb->get_str() + " columns",
                    Rat(*cb));
      if (setexpr::provably_infinite(*e->r) &&
          setexpr::nonempty(*e->l) == TriBool::Yes)
        return v_pos("some row carries an infinite section");
      return v_unknown();
    }
    default: return v_unknown();
  }
}

Verdict decide_nwd(const Ideal&, const SetPtr& e) {
  switch (e->kind) {
    case K::QAll: return v_pos("dense in [0,1]");
    case K::QBall:
      if (setexpr::provably_infinite(*e))
        return v_pos("dense in a subinterval of [0,1]");
      return v_unknown();  // empty balls fall to the finite rule
    default: return v_unknown();
  }
}

Verdict decide_dsum(const Ideal& ideal, const SetPtr& e) {
  auto parts = setexpr::tagged_parts(*e);
  if (!parts) return v_unknown();
  Verdict v0 = decide_rec(*ideal.left, parts->first);
  if (v0.kind == VK::Positive)
    return v_pos("tag-0 part is positive for " + name(*ideal.left) + ": " +
                 v0.certificate);
  Verdict v1 = decide_rec(*ideal.right, parts->second);
  if (v1.kind == VK::Positive)
    return v_pos("tag-1 part is positive for " + name(*ideal.right) + ": " +
                 v1.certificate);
  if (v0.kind == VK::In && v1.kind == VK::In)
    return v_in("both tagged parts are small: [" + v0.certificate + "] and [" +
                v1.certificate + "]");
  return v_unknown();
}

Verdict decide_fubini(const Ideal& ideal, const SetPtr& e) {
  switch (e->kind) {
    case K::Tri:
      return v_in("every section is finite, hence in " + name(*ideal.right) +
                  "; no bad section indices remain");
    case K::Row:
      return v_in("at most one section index can be bad, and finite index sets "
                  "are in " + name(*ideal.left));
    case K::Grid: {
      Verdict vr = decide_rec(*ideal.right, e->r);
      if (vr.kind == VK::In)
        return v_in("every section is the same small column set: " + vr.certificate);
      if (vr.kind == VK::Positive) {
        Verdict vl = decide_rec(*ideal.left, e->l);
        if (vl.kind == VK::In)
          return v_in("sections are positive only over a small row set: " +
                      vl.certificate);
        if (vl.kind == VK::Positive)
          return v_pos("positive column sections over a positive row set: [" +
                       vl.certificate + "] x [" + vr.certificate + "]");
      }
      return v_unknown();
    }
    default: return v_unknown();
  }
}

}  // namespace

Rat scalar_summary(const Score& s) {
  switch (s.kind) {
    case Score::K::Scalar: return s.scalar;
    case Score::K::Cells: {
      Rat last(0);
      for (const CellScore& c : s.cells)
        if (c.complete) last = c.mu;
      return last;
    }
    case Score::K::Pair: return scalar_summary(*s.first) + scalar_summary(*s.second);
    case Score::K::Sections: {
      Int best = 0;
      for (const auto& [m, sz] : s.sections.section_sizes)
        if (sz > best) best = sz;
      return Rat(best);
    }
  }
  return Rat(0);
}

namespace {

std::vector<LabeledSeries> sample_diagnostics(const Ideal& ideal, const SetPtr& e) {
  const auto sched = default_schedule(ideal.uni);
  std::vector<LabeledSeries> out;
  switch (ideal.kind) {
    case Ideal::K::GDensity: {
      TruncationView v = truncate(*e, sched.back());
      LabeledSeries mu{"mu", {}};
      for (const CellScore& c : density_cells(ideal, v))
        if (c.complete) mu.entries.emplace_back(c.cell, c.mu);
      out.push_back(std::move(mu));
      return out;
    }
    case Ideal::K::DSum: {
      LabeledSeries s0{"tag0", {}}, s1{"tag1", {}};
      for (auto n : sched) {
        TruncationView v = truncate(*e, n);
        auto [a, b] = split_tagged(v);
        s0.entries.emplace_back(Int(static_cast<long>(n)),
                                scalar_summary(score(*ideal.left, a)));
        s1.entries.emplace_back(Int(static_cast<long>(n)),
                                scalar_summary(score(*ideal.right, b)));
      }
      out.push_back(std::move(s0));
      out.push_back(std::move(s1));
      return out;
    }
    case Ideal::K::Fubini: {
      LabeledSeries ge1{"cols_ge_1", {}}, mx{"max_section", {}};
      for (auto n : sched) {
        TruncationView v = truncate(*e, n);
        SectionDiag d = section_profile(v);
        ge1.entries.emplace_back(Int(static_cast<long>(n)),
                                 Rat(Int(static_cast<long>(d.section_sizes.size()))));
        Int best = 0;
        for (const auto& [m, sz] : d.section_sizes)
          if (sz > best) best = sz;
        mx.entries.emplace_back(Int(static_cast<long>(n)), Rat(best));
      }
      out.push_back(std::move(ge1));
      out.push_back(std::move(mx));
      return out;
    }
    default: {
      LabeledSeries s{"score", {}};
      for (auto n : sched) {
        TruncationView v = truncate(*e, n);
        s.entries.emplace_back(Int(static_cast<long>(n)), scalar_summary(score(ideal, v)));
      }
      out.push_back(std::move(s));
      return out;
    }
  }
}

Verdict decide_rec(const Ideal& ideal, const SetPtr& e) {
  if (ideal.kind == Ideal::K::Restrict) {
    Verdict v = decide_rec(*ideal.left, setexpr::simplify(
                                            setexpr::set_inter(e, ideal.restrict_to)));
    if (v.kind != VK::Unknown)
      v.certificate = "within the restriction: " + v.certificate;
    return v;
  }
  // geometric summable ideals are improper: everything is In
  if (ideal.kind == Ideal::K::Summable &&
      ideal.wf.kind == WeightFamily::Kind::Geometric)
    return decide_summable(ideal, e);

  if (auto k = setexpr::finite_card_bound(*e)) {
    if (auto v = finite_in(ideal, *k)) return *v;
  }

  Verdict v;
  switch (ideal.kind) {
    case Ideal::K::Fin: v = decide_fin(ideal, e); break;
    case Ideal::K::Summable: v = decide_summable(ideal, e); break;
    case Ideal::K::Vdw: v = decide_vdw(ideal, e); break;
    case Ideal::K::GDensity: v = decide_gdensity(ideal, e); break;
    case Ideal::K::EdMinus: v = decide_edminus(ideal, e); break;
    case Ideal::K::Nwd: v = decide_nwd(ideal, e); break;
    case Ideal::K::DSum: v = decide_dsum(ideal, e); break;
    case Ideal::K::Fubini: v = decide_fubini(ideal, e); break;
    case Ideal::K::Restrict: break;  // unreachable
  }
  if (v.kind != VK::Unknown) return v;
  if (auto c = combinator_rules(ideal, e)) return *c;
  return v_unknown();
}

}  // namespace

Verdict decide(const Ideal& ideal, const SetPtr& e) {
  require_universe(ideal, e->uni, "decide");
  Verdict v = decide_rec(ideal, setexpr::simplify(e));
  if (v.kind == VK::Unknown && v.diagnostics.empty())
    v.diagnostics = sample_diagnostics(ideal, e);
  return v;
}

}  // namespace idealab::ideals

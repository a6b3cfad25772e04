// Acceptance battery: eight criteria, one PASS/FAIL line each, exact values
// and time budgets pinned inline. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idealab/bw_engine.hpp"
#include "idealab/ideals.hpp"
#include "idealab/point.hpp"
#include "idealab/rat.hpp"
#include "idealab/reductions.hpp"
#include "idealab/report.hpp"
#include "idealab/setexpr.hpp"
#include "test_support.hpp"

namespace {

using namespace idealab;
using setexpr::SetPtr;
using setexpr::TruncationView;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

int g_failed = 0;

void criterion(int id, double limit_s, const std::function<std::string()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && limit_s > 0 && secs > limit_s) {
    ok = false;
    std::ostringstream os;
    os << "over time budget: " << secs << " s > " << limit_s << " s";
    detail = os.str();
  }
  if (!ok) ++g_failed;
  std::printf("criterion %d: %s — %s (%.1f s)\n", id, ok ? "PASS" : "FAIL",
              detail.c_str(), secs);
  std::fflush(stdout);
}

TruncationView view_of(std::vector<long> vals, std::int64_t cutoff) {
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  TruncationView v;
  v.uni = Universe::Omega;
  v.cutoff = cutoff;
  for (long x : vals) v.pts.push_back(omega_pt(Int(x)));
  return v;
}

// ---- criterion 1: longest-AP oracle equivalence ----

std::string check_ap_oracle() {
  // every subset of [0, 12)
  for (unsigned mask = 0; mask < 4096; ++mask) {
    std::vector<long> vals;
    for (int b = 0; b < 12; ++b)
      if (mask & (1u << b)) vals.push_back(b);
    if (vals.empty()) {
      bool threw = false;
      try {
        ideals::longest_ap(view_of(vals, 12));
      } catch (const std::invalid_argument&) {
        threw = true;
      }
      expect(threw, "empty view must be rejected");
      continue;
    }
    const auto want = testkit::brute_longest_ap(vals);
    const auto got = ideals::longest_ap(view_of(vals, 12));
    expect(got.len == want.len && got.a == want.a && got.d == want.d,
           "mismatch on exhaustive mask " + std::to_string(mask));
  }

  // seeded random subsets of [0, 64)
  std::mt19937_64 rng(20260816);
  const double densities[] = {0.08, 0.2, 0.35, 0.5, 0.75};
  int done = 0;
  while (done < 10000) {
    auto vals = testkit::random_subset(rng, 64, densities[done % 5]);
    if (vals.empty()) continue;
    const auto want = testkit::brute_longest_ap(vals);
    const auto got = ideals::longest_ap(view_of(vals, 64));
    expect(got.len == want.len && got.a == want.a && got.d == want.d,
           "mismatch on random trial " + std::to_string(done));
    ++done;
  }
  return "4096 exhaustive subsets of [0,12) and 10000 seeded subsets of [0,64) agree";
}

// ---- criterion 2: van der Waerden desk check ----

bool coloring_has_mono_ap3(unsigned mask, int n) {
  // positions 1..n; bit p-1 is the color of p
  for (int a = 1; a <= n; ++a)
    for (int d = 1; a + 2 * d <= n; ++d) {
      const int c0 = (mask >> (a - 1)) & 1;
      const int c1 = (mask >> (a + d - 1)) & 1;
      const int c2 = (mask >> (a + 2 * d - 1)) & 1;
      if (c0 == c1 && c1 == c2) return true;
    }
  return false;
}

std::string check_vdw_desk() {
  // independent exhaustive facts first
  int free8 = 0;
  for (unsigned mask = 0; mask < (1u << 8); ++mask)
    if (!coloring_has_mono_ap3(mask, 8)) ++free8;
  expect(free8 > 0, "no progression-free 2-coloring of {1..8} found");
  // the documented example {1,2,5,6} vs {3,4,7,8}
  const unsigned example = (1u << 2) | (1u << 3) | (1u << 6) | (1u << 7);
  expect(!coloring_has_mono_ap3(example, 8), "example coloring of {1..8} is not free");
  for (unsigned mask = 0; mask < (1u << 9); ++mask)
    expect(coloring_has_mono_ap3(mask, 9),
           "3-AP-free coloring of {1..9} exists: " + std::to_string(mask));

  // library search must agree
  const auto r = ideals::vdw_search(3, 2, 20);
  expect(r.threshold.has_value() && *r.threshold == 9,
         "library W(3,2) threshold is not 9");
  expect(r.witness_coloring.size() == 8, "witness coloring must color {1..8}");
  std::vector<long> cls[2];
  for (size_t i = 0; i < r.witness_coloring.size(); ++i)
    cls[r.witness_coloring[i] ? 1 : 0].push_back(static_cast<long>(i + 1));
  for (const auto& c : cls)
    expect(c.size() < 3 || testkit::brute_longest_ap(c).len < 3,
           "library witness coloring contains a 3-term AP");
  return "W(3,2) = 9; " + std::to_string(free8) +
         " free colorings of {1..8}, none of {1..9}; library witness is AP-free";
}

// ---- criterion 3: no 3-term AP crosses a block boundary ----

std::string check_block_lemma() {
  const auto view = setexpr::truncate(*setexpr::blocks(10), 1000000);
  expect(view.pts.size() == 21, "blocks(10) below 10^6 must hold 21 points");
  std::vector<long> pts;
  for (const auto& p : view.pts) pts.push_back(static_cast<long>(p.x.get_si()));
  std::set<long> have(pts.begin(), pts.end());
  auto block_of = [](long v) {
    long lo = 1;
    for (int n = 0;; ++n, lo *= 10)
      if (v >= lo && v <= lo + n) return n;
  };
  long cross = 0, within = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) {
      const long x = pts[i], y = pts[j], z = 2 * y - x;
      if (!have.count(z)) continue;
      const int bx = block_of(x), by = block_of(y), bz = block_of(z);
      if (bx == by && by == bz) ++within;
      else ++cross;
    }
  expect(within > 0, "expected within-block progressions to exist");
  expect(cross == 0, std::to_string(cross) + " cross-block 3-term APs found");
  return "21 points, 0 cross-block 3-term APs (" + std::to_string(within) +
         " within blocks)";
}

// ---- criterion 4: bw-check of vdw_blockindex ----

std::string series_text(const reductions::TrendSeries& s) {
  std::string t = "(";
  for (size_t i = 0; i < s.entries.size(); ++i)
    t += (i ? "," : "") + to_pq_string(s.entries[i].second);
  return t + ")";
}

std::string check_bw_blockindex() {
  const auto w = reductions::builtin_witness("vdw_blockindex");
  const auto a = setexpr::blocks(10);
  const std::vector<SetPtr> challenges = {setexpr::evens(), setexpr::odds(),
                                          setexpr::ap(0, 3)};
  const std::vector<std::int64_t> schedule = {100, 1000, 10000, 100000, 1000000};
  const auto rep = reductions::bw_check(w, a, challenges, schedule);
  expect(rep.rows.size() == 3, "expected three challenge rows");
  expect(!rep.any_violation, "violation reported: " + rep.summary);

  // exact W-scores of A ∩ f⁻¹[C] across the schedule
  const long frozen[3][5] = {
      {1, 3, 3, 5, 5}, {2, 2, 4, 4, 6}, {1, 1, 4, 4, 4}};
  std::string shown;
  for (size_t r = 0; r < 3; ++r) {
    const auto& row = rep.rows[r];
    expect(row.classification == "consistent",
           "row " + std::to_string(r) + " classified " + row.classification);
    const auto& e = row.j_scores.entries;
    expect(e.size() == 5, "row " + std::to_string(r) + " series length");
    for (size_t k = 0; k < 5; ++k)
      expect(e[k].second == Rat(frozen[r][k]),
             "row " + std::to_string(r) + " W-score series " +
                 series_text(row.j_scores));
    // growth shape: nondecreasing, strictly up overall, rising in the tail
    bool tail_rise = false;
    for (size_t k = 1; k < 5; ++k) {
      expect(e[k].second >= e[k - 1].second, "W-score series decreased");
      if (k >= 2 && e[k].second > e[k - 1].second) tail_rise = true;
    }
    expect(e.back().second > e.front().second, "W-score series did not grow");
    expect(tail_rise, "W-score series stalled in the tail");
    shown += (r ? " " : "") + series_text(row.j_scores);
  }
  return "3/3 challenges consistent; W-score series " + shown;
}

// ---- criterion 5: summable refuter at N = 2^20 ----

std::string check_refute_summable() {
  const std::int64_t n = std::int64_t(1) << 20;
  const auto r1 = reductions::refute_summable(setexpr::f_id(), n);
  const auto r2 = reductions::refute_summable(setexpr::f_id(), n);

  expect(r1.case_tag == "case1", "expected case1, got " + r1.case_tag);
  expect(r1.a_text == "range(0,1048576)", "A is " + r1.a_text);
  expect(r1.evidence.size() == 2 && r1.evidence[0].first == "preimage_mass" &&
             r1.evidence[1].first == "picks",
         "unexpected evidence layout");
  const Rat mass = Rat(2) - pow2(-19);
  expect(r1.evidence[0].second == mass, "preimage mass is not 2 - 2^-19");
  expect(r1.evidence[1].second == Rat(20), "expected 20 greedy picks");
  expect(r1.table.size() == 20, "expected 20 table rows");
  std::string c_text = "{";
  for (int k = 0; k < 20; ++k) {
    expect(r1.table[k].first == k && r1.table[k].second == pow2(-k),
           "table row " + std::to_string(k) + " mass is not 2^-" + std::to_string(k));
    c_text += (k ? "," : "") + Int((Int(1) << k) - 1).get_str();
  }
  c_text += "}";
  expect(r1.note.find(c_text) != std::string::npos,
         "challenge C is not {2^n - 1 : n < 20}");

  const std::string j1 = report::json_text(report::refuter_json(r1));
  const std::string j2 = report::json_text(report::refuter_json(r2));
  expect(j1 == j2, "two runs rendered different artifacts");
  return "case1, C = {2^n-1 : n < 20}, mass exactly " + to_pq_string(mass) +
         " < 2, byte-identical across runs";
}

// ---- criterion 6: extraction sanity ----

std::string check_extraction() {
  // counting ideal, alternating sequence, depth 10
  std::vector<Rat> alt;
  for (int i = 0; i < 1024; ++i) alt.push_back(Rat(i % 2));
  const auto fin = ideals::fin_ideal();
  const auto res = bw_engine::extract(fin, alt, 10);
  expect(res.b.size() * 2 >= alt.size(),
         "|B| = " + std::to_string(res.b.size()) + " < len/2");
  bool saw_eps = false;
  for (const auto& row : res.exclusions)
    if (row.eps == pow2(-10)) {
      saw_eps = true;
      expect(row.count == 0, "exclusion count at 2^-10 is " +
                                 std::to_string(row.count));
    }
  expect(saw_eps, "no exclusion row at eps = 2^-10");

  // summable ideal, powers-of-two indicator over [0, 2^20), depth 4
  const std::size_t len = std::size_t(1) << 20;
  std::vector<Rat> ind(len, Rat(0));
  for (std::size_t p = 1; p < len; p <<= 1) ind[p] = Rat(1);
  const auto summ = ideals::make_ideal("summable(harmonic)");
  const auto big = bw_engine::extract(summ, ind, 4);
  expect(big.prefix == "0000", "selected prefix " + big.prefix);
  expect(!big.trace.empty(), "missing trace");
  Rat selected, excluded_max(0);
  for (const auto& t : big.trace) {
    expect(t.chosen == 0, "branch selection left the zero branch");
    if (t.score1 > excluded_max) excluded_max = t.score1;
    selected = t.score0;
  }
  expect(selected > Rat(10),
         "selected branch score " + to_pq_string(selected) + " <= 10");
  expect(excluded_max <= Rat(2),
         "excluded branch score " + to_pq_string(excluded_max) + " > 2");
  return "alternating: |B| = " + std::to_string(res.b.size()) +
         ", 0 exclusions at 2^-10; indicator: selected score " +
         to_pq_string(selected) + " > 10, excluded <= " + to_pq_string(excluded_max);
}

// ---- criterion 7: diagonal double extraction on the row/column grid ----

std::string check_fin2() {
  const std::int64_t rows = 64, cols = 64;
  std::vector<std::vector<Rat>> dseq(rows);
  for (std::int64_t n = 0; n < rows; ++n)
    for (std::int64_t i = 0; i < cols; ++i)
      dseq[n].push_back(make_rat(1, Int(n + 2)) + make_rat(1, Int(i + 2)));

  const Rat eps = make_rat(1, 8);
  const auto res = bw_engine::fin2_extract(dseq, std::nullopt, {eps});
  expect(res.depth == 3, "default depth is " + std::to_string(res.depth));
  expect(res.lo <= Rat(0) && Rat(0) < res.hi,
         "outer interval [" + to_pq_string(res.lo) + ", " + to_pq_string(res.hi) +
             ") misses 0");
  expect(res.exclusions.size() == 1 && res.exclusions[0].eps == eps,
         "expected a single exclusion row at eps = 1/8");

  // exact recomputation of the grid profile with the library's interval
  auto dist = [&](const Rat& v) -> Rat {
    if (v < res.lo) return res.lo - v;
    if (v > res.hi) return v - res.hi;
    return Rat(0);
  };
  std::int64_t count = 0;
  for (std::int64_t n = 0; n < rows; ++n)
    for (std::int64_t i = 0; i < cols; ++i)
      if (dist(dseq[n][i]) >= eps) {
        ++count;
        expect(n <= 7 || i <= 7, "cell (" + std::to_string(n) + "," +
                                     std::to_string(i) +
                                     ") excluded outside the first 8 rows/columns");
      }
  expect(count == res.exclusions[0].grid_count,
         "library grid count " + std::to_string(res.exclusions[0].grid_count) +
             " != recomputed " + std::to_string(count));
  expect(count > 0, "exclusion profile is empty; the check has no teeth");
  return "outer interval [" + to_pq_string(res.lo) + ", " + to_pq_string(res.hi) +
         ") contains 0; " + std::to_string(count) +
         " excluded grid cells, all in the first 8 rows or columns";
}

// ---- criterion 8: property battery ----

std::string key_of(Universe u, const Point& p) { return point_str(u, p); }

void check_agreement(const SetPtr& e, const std::vector<Point>& ground,
                     std::int64_t cutoff) {
  const auto view = setexpr::truncate(*e, cutoff);
  std::set<std::string> in_view;
  for (const auto& p : view.pts) in_view.insert(key_of(e->uni, p));
  for (const auto& p : ground) {
    const bool c = setexpr::contains(*e, p);
    const bool t = in_view.count(key_of(e->uni, p)) > 0;
    expect(c == t, "contains/truncate disagree on " + key_of(e->uni, p) +
                       " for " + setexpr::print(*e));
  }
}

std::string check_properties() {
  // (a) contains/truncate agreement, exhaustive below the cutoff
  std::vector<Point> omega_pts, tagged_pts, q_pts, sq_pts;
  for (long i = 0; i < 256; ++i) omega_pts.push_back(omega_pt(Int(i)));
  for (long i = 0; i < 256; ++i)
    for (int t : {0, 1}) tagged_pts.push_back(tagged_pt(Int(i), t));
  q_pts = qunit_enumerate(256);
  for (long a = 0; a < 16; ++a)
    for (long b = 0; b < 16; ++b) sq_pts.push_back(pair_pt(Int(a), Int(b)));

  const std::vector<SetPtr> omega_corpus = {
      setexpr::evens(),
      setexpr::squares(),
      setexpr::powers(2),
      setexpr::blocks(3),
      setexpr::ap(5, 7),
      setexpr::set_union(setexpr::evens(), setexpr::squares()),
      setexpr::set_diff(setexpr::ap(0, 3), setexpr::squares()),
      setexpr::set_inter(setexpr::evens(), setexpr::range_set(10, 200)),
      setexpr::pre(setexpr::f_blockindex(3), setexpr::evens()),
      setexpr::img(setexpr::f_blockindex(3), setexpr::powers(3)),
      setexpr::pre(setexpr::f_mod(7), setexpr::finite_naturals({Int(1), Int(4)})),
  };
  for (const auto& e : omega_corpus) check_agreement(e, omega_pts, 256);
  check_agreement(setexpr::set_union(setexpr::tag0(setexpr::evens()),
                                     setexpr::tag1(setexpr::squares())),
                  tagged_pts, 256);
  check_agreement(setexpr::qball(make_rat(1, 2), make_rat(1, 4)), q_pts, 256);
  check_agreement(setexpr::grid(setexpr::evens(), setexpr::odds()), sq_pts, 16);

  // (b) monotonicity + subadditivity, 1000 seeded trials
  std::mt19937_64 rng(20260816);
  const auto harmonic = ideals::make_ideal("summable(harmonic)");
  const auto fin = ideals::fin_ideal();
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = testkit::random_subset(rng, 64, 0.35);
    const auto b = testkit::random_subset(rng, 64, 0.35);
    std::vector<long> u = a;
    u.insert(u.end(), b.begin(), b.end());
    const auto va = view_of(a, 64), vb = view_of(b, 64), vu = view_of(u, 64);
    for (const auto& ideal : {fin, harmonic}) {
      const Rat sa = ideals::scalar_summary(ideals::score(*ideal, va));
      const Rat sb = ideals::scalar_summary(ideals::score(*ideal, vb));
      const Rat su = ideals::scalar_summary(ideals::score(*ideal, vu));
      expect(sa <= su && sb <= su, "score not monotone under union");
      expect(su <= sa + sb, "score not subadditive");
    }
  }

  // (c) partition tree laws, exhaustive to depth 8
  using Tree = bw_engine::PartitionTree;
  std::function<void(const std::string&)> walk = [&](const std::string& s) {
    const auto iv = Tree::interval(s);
    expect(iv.second - iv.first == pow2(-static_cast<long>(s.size())),
           "interval width off at " + s);
    if (s.size() == 8) return;
    const auto l = Tree::interval(s + "0"), r = Tree::interval(s + "1");
    expect(l.first == iv.first && l.second == r.first && r.second == iv.second,
           "children do not partition " + (s.empty() ? "(root)" : s));
    walk(s + "0");
    walk(s + "1");
  };
  walk("");

  // (d) ⊕ and ⊗ decomposition on a decidable corpus
  using VK = ideals::Verdict::K;
  const auto dsum = ideals::dsum_ideal(fin, harmonic);
  const std::vector<SetPtr> parts = {
      setexpr::finite_naturals({Int(0), Int(1), Int(2), Int(3)}),
      setexpr::evens(), setexpr::powers(2)};
  for (const auto& l : parts)
    for (const auto& r : parts) {
      const auto vl = ideals::decide(*fin, l);
      const auto vr = ideals::decide(*harmonic, r);
      expect(vl.kind != VK::Unknown && vr.kind != VK::Unknown,
             "corpus component undecided");
      const auto both = ideals::decide(
          *dsum, setexpr::set_union(setexpr::tag0(l), setexpr::tag1(r)));
      const bool want_in = vl.kind == VK::In && vr.kind == VK::In;
      expect(both.kind == (want_in ? VK::In : VK::Positive),
             "direct-sum verdict disagrees with the components");
    }
  const auto fin2 = ideals::fubini_ideal(fin, fin);
  const std::vector<SetPtr> sides = {
      setexpr::finite_naturals({Int(0), Int(1), Int(2)}), setexpr::evens()};
  for (const auto& r : sides)
    for (const auto& c : sides) {
      const bool r_in = ideals::decide(*fin, r).kind == VK::In;
      const bool c_in = ideals::decide(*fin, c).kind == VK::In;
      const auto v = ideals::decide(*fin2, setexpr::grid(r, c));
      expect(v.kind == ((r_in || c_in) ? VK::In : VK::Positive),
             "product verdict disagrees with the rectangle rule");
    }

  // (e) report determinism
  const auto w = reductions::builtin_witness("identity(fin,summable(harmonic))");
  const std::vector<std::int64_t> sched = {100, 1000, 10000};
  const auto rep1 = reductions::bw_check(w, setexpr::ap(0, 1),
                                         {setexpr::powers(2)}, sched);
  const auto rep2 = reductions::bw_check(w, setexpr::ap(0, 1),
                                         {setexpr::powers(2)}, sched);
  expect(report::json_text(report::witness_json(rep1)) ==
             report::json_text(report::witness_json(rep2)),
         "witness artifacts differ across identical runs");
  expect(report::witness_csv(rep1) == report::witness_csv(rep2),
         "witness csv differs across identical runs");
  report::Json payload;
  payload["x"] = 1;
  const auto env1 = report::json_text(report::envelope("score", payload));
  const auto env2 = report::json_text(report::envelope("score", payload));
  expect(testkit::strip_generated_at(env1) == testkit::strip_generated_at(env2),
         "envelopes differ beyond the timestamp");
  const auto f1 = reductions::refute_summable(setexpr::f_id(), 4096);
  const auto f2 = reductions::refute_summable(setexpr::f_id(), 4096);
  expect(report::json_text(report::refuter_json(f1)) ==
             report::json_text(report::refuter_json(f2)),
         "refuter artifacts differ across identical runs");

  return "agreement (14 expressions, exhaustive N <= 256), 1000 score trials, "
         "tree laws to depth 8, sum/product decomposition, report determinism";
}

}  // namespace

int main() {
  criterion(1, 60, check_ap_oracle);
  criterion(2, 10, check_vdw_desk);
  criterion(3, 60, check_block_lemma);
  criterion(4, 0, check_bw_blockindex);
  criterion(5, 0, check_refute_summable);
  criterion(6, 0, check_extraction);
  criterion(7, 10, check_fin2);
  criterion(8, 0, check_properties);
  if (g_failed) {
    std::printf("%d of 8 criteria failed\n", g_failed);
    return 1;
  }
  std::printf("all 8 criteria passed\n");
  return 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "idealab/bw_engine.hpp"
#include "idealab/ideals.hpp"
#include "idealab/point.hpp"
#include "idealab/rat.hpp"
#include "idealab/reductions.hpp"
#include "idealab/setexpr.hpp"
#include "test_support.hpp"

using namespace idealab;
using namespace idealab::bw_engine;

namespace {

std::vector<Rat> alternating(std::int64_t len) {
  std::vector<Rat> seq;
  for (std::int64_t i = 0; i < len; ++i) seq.emplace_back(i % 2);
  return seq;
}

std::vector<Rat> power_indicator(std::int64_t len) {
  std::vector<Rat> seq(static_cast<size_t>(len), Rat(0));
  for (std::int64_t p = 1; p < len; p *= 2) seq[static_cast<size_t>(p)] = Rat(1);
  return seq;
}

}  // namespace

TEST_CASE("position enumeration by universe") {
  auto om = enumerate_positions(Universe::Omega, 5);
  REQUIRE(om.size() == 5);
  CHECK(om[3].x == 3);

  auto tg = enumerate_positions(Universe::OmegaTagged, 5);
  REQUIRE(tg.size() == 5);
  CHECK(tg[0].x == 0);
  CHECK(tg[0].y == 0);
  CHECK(tg[1].x == 0);
  CHECK(tg[1].y == 1);
  CHECK(tg[4].x == 2);
  CHECK(tg[4].y == 0);

  auto sq = enumerate_positions(Universe::OmegaSq, 9);  // 3x3, row-major
  REQUIRE(sq.size() == 9);
  CHECK(sq[5].x == 1);
  CHECK(sq[5].y == 2);

  auto qs = enumerate_positions(Universe::QUnit, 5);
  REQUIRE(qs.size() == 5);
  CHECK(make_rat(qs[2].x, qs[2].y) == make_rat(1, 2));
  CHECK(make_rat(qs[4].x, qs[4].y) == make_rat(2, 3));

  CHECK_THROWS_AS(enumerate_positions(Universe::Omega, -1), std::invalid_argument);
}

TEST_CASE("position rank inverts the enumeration") {
  for (Universe u : {Universe::Omega, Universe::OmegaTagged, Universe::OmegaSq,
                     Universe::QUnit}) {
    const std::int64_t len = 25;
    auto pts = enumerate_positions(u, len);
    for (std::int64_t i = 0; i < len; ++i) {
      CAPTURE(static_cast<int>(u));
      CAPTURE(i);
      CHECK(position_rank(u, pts[static_cast<size_t>(i)], len) == Int(i));
    }
  }
}

TEST_CASE("branch strings code nested dyadic intervals") {
  auto root = PartitionTree::interval("");
  CHECK(root.first == Rat(0));
  CHECK(root.second == Rat(1));

  auto iv = PartitionTree::interval("010");
  CHECK(iv.first == make_rat(1, 4));
  CHECK(iv.second == make_rat(3, 8));

  auto right = PartitionTree::interval("11");
  CHECK(right.second == Rat(1));
  CHECK(PartitionTree::interval_contains(right, Rat(1)));  // closed at 1
  auto left = PartitionTree::interval("0");
  CHECK_FALSE(PartitionTree::interval_contains(left, make_rat(1, 2)));
  CHECK(PartitionTree::interval_contains(left, Rat(0)));

  CHECK_THROWS_AS(PartitionTree::interval("012"), std::invalid_argument);
}

TEST_CASE("tree nodes split exactly into their children") {
  std::vector<Rat> seq;
  for (int i = 0; i < 64; ++i) seq.push_back(make_rat(i, 64));
  TruncationView a{Universe::Omega, 64, enumerate_positions(Universe::Omega, 64)};
  PartitionTree t = dyadic_tree(seq, a);
  REQUIRE(t.root.size() == 64);

  for (const std::string s : {"", "0", "1", "01", "10", "110"}) {
    auto parent = t.node(s);
    auto c0 = t.node(s + "0");
    auto c1 = t.node(s + "1");
    CHECK(parent.size() == c0.size() + c1.size());
    std::vector<std::int64_t> merged = c0;
    merged.insert(merged.end(), c1.begin(), c1.end());
    std::sort(merged.begin(), merged.end());
    CHECK(merged == parent);
  }
  // value 1 lands in the rightmost interval of every level
  std::vector<Rat> edge{Rat(1)};
  TruncationView ea{Universe::Omega, 1, enumerate_positions(Universe::Omega, 1)};
  PartitionTree et = dyadic_tree(edge, ea);
  CHECK(et.node("111").size() == 1);
}

TEST_CASE("tree construction validates its inputs") {
  std::vector<Rat> bad{Rat(2)};
  TruncationView a{Universe::Omega, 1, enumerate_positions(Universe::Omega, 1)};
  CHECK_THROWS_AS(dyadic_tree(bad, a), std::invalid_argument);

  std::vector<Rat> seq{Rat(0), Rat(1)};
  TruncationView beyond{Universe::Omega, 5, {omega_pt(Int(4))}};
  CHECK_THROWS_AS(dyadic_tree(seq, beyond), std::invalid_argument);
}

TEST_CASE("greedy descent keeps the even half of an alternating sequence") {
  auto fin = ideals::make_ideal("fin");
  std::vector<Rat> seq = alternating(64);
  TruncationView a{Universe::Omega, 64, enumerate_positions(Universe::Omega, 64)};
  PartitionTree t = dyadic_tree(seq, a);
  BranchResult br = select_branch(fin, t, 3);
  CHECK(br.prefix == "000");  // ties go to child 0, then zeros persist
  REQUIRE(br.trace.size() == 3);
  CHECK(br.trace[0].score0 == Rat(32));
  CHECK(br.trace[0].score1 == Rat(32));
  CHECK(br.trace[0].chosen == 0);
  REQUIRE(br.b.size() == 32);
  for (std::int64_t p : br.b) CHECK(p % 2 == 0);

  CHECK_THROWS_AS(select_branch(fin, t, 0), std::invalid_argument);
  PartitionTree empty_tree = t;
  empty_tree.root.clear();
  CHECK_THROWS_AS(select_branch(fin, empty_tree, 1), std::invalid_argument);
  CHECK_THROWS_AS(select_branch(ideals::make_ideal("nwd"), t, 1), UniverseError);
}

TEST_CASE("counting extraction on the alternating sequence") {
  auto fin = ideals::make_ideal("fin");
  ExtractionResult res = extract(fin, alternating(1024), 10);
  CHECK(res.ideal == "fin");
  CHECK(res.len == 1024);
  CHECK(res.prefix == std::string(10, '0'));
  CHECK(res.lo == Rat(0));
  CHECK(res.hi == pow2(-10));
  CHECK(res.b.size() == 512);
  // ladder climbs from the interval width to 1/2
  REQUIRE(res.exclusions.size() == 10);
  CHECK(res.exclusions.front().eps == pow2(-10));
  CHECK(res.exclusions.back().eps == make_rat(1, 2));
  for (const auto& row : res.exclusions) {
    CHECK(row.count == 0);  // every kept position has value 0
    CHECK(row.score == Rat(0));
  }
  CHECK_THROWS_AS(extract(fin, {}, 3), std::invalid_argument);
}

TEST_CASE("mass extraction discards a sparse indicator") {
  auto ideal = ideals::make_ideal("summable(harmonic)");
  ExtractionResult res = extract(ideal, power_indicator(4096), 3);
  CHECK(res.prefix == "000");
  // the kept branch carries nearly the whole harmonic mass of [0,4096)
  REQUIRE(!res.trace.empty());
  CHECK(res.trace.back().score0 > Rat(5));
  CHECK(res.trace.back().score0 > res.trace.back().score1);
  for (const auto& row : res.exclusions) CHECK(row.count == 0);
  // the power positions carry bounded mass: the rejected side at level 1
  CHECK(res.trace.front().score1 < Rat(2));
}

TEST_CASE("extraction accepts an explicit root index set") {
  auto fin = ideals::make_ideal("fin");
  std::vector<Rat> seq = alternating(32);
  // root = odd positions only: the branch must follow the ones
  std::vector<Point> odd_pts;
  for (std::int64_t i = 1; i < 32; i += 2) odd_pts.push_back(omega_pt(Int(i)));
  TruncationView root{Universe::Omega, 32, odd_pts};
  ExtractionResult res = extract(fin, seq, 4, root);
  CHECK(res.prefix == "1111");
  CHECK(res.b.size() == 16);
  CHECK(res.lo == Rat(1) - pow2(-4));
  CHECK(res.hi == Rat(1));
}

TEST_CASE("grid extraction on a constant grid keeps everything") {
  std::vector<std::vector<Rat>> grid(4, std::vector<Rat>(4, make_rat(1, 2)));
  Fin2ExtractionResult res = fin2_extract(grid);
  CHECK(res.rows == 4);
  CHECK(res.cols == 4);
  CHECK(res.depth == 1);  // floor(log2(4))/2
  CHECK(res.m.size() == 4);
  REQUIRE(res.row_b.size() == 4);
  for (const auto& rb : res.row_b) CHECK(rb.size() == 4);
  CHECK(res.a.size() == 16);
  // 1/2 sits inside [1/2,1], so nothing is ever excluded
  for (const auto& ex : res.exclusions) {
    CHECK(ex.a_count == 0);
    CHECK(ex.grid_count == 0);
    CHECK(ex.full_rows == 0);
    CHECK(ex.cols_beyond == 0);
  }
}

TEST_CASE("grid extraction splits a column-striped grid") {
  // value depends on the column parity only
  std::vector<std::vector<Rat>> grid(4, std::vector<Rat>(4));
  for (auto& row : grid)
    for (size_t c = 0; c < 4; ++c) row[c] = Rat(static_cast<long>(c % 2));
  Fin2ExtractionResult res = fin2_extract(grid, 1);
  CHECK(res.lo == Rat(0));
  CHECK(res.hi == make_rat(1, 2));
  CHECK(res.m.size() == 4);
  for (const auto& rb : res.row_b) {
    REQUIRE(rb.size() == 2);
    CHECK(rb[0] == 0);
    CHECK(rb[1] == 2);
  }
  REQUIRE(res.exclusions.size() == 1);  // ladder = {1/2}
  const auto& ex = res.exclusions[0];
  CHECK(ex.a_count == 0);
  CHECK(ex.grid_count == 8);  // the odd columns, every row
  REQUIRE(ex.grid_sections.size() == 2);
  CHECK(ex.grid_sections[0] == std::pair<std::int64_t, std::int64_t>{1, 4});
  CHECK(ex.grid_sections[1] == std::pair<std::int64_t, std::int64_t>{3, 4});
  CHECK(ex.full_rows == 0);
  CHECK(ex.cols_beyond == 2);
}

TEST_CASE("grid extraction structural invariants on a row-column mix") {
  std::vector<std::vector<Rat>> grid(16, std::vector<Rat>(16));
  for (size_t n = 0; n < 16; ++n)
    for (size_t i = 0; i < 16; ++i)
      grid[n][i] = make_rat(1, static_cast<long>(n + 2)) +
                   make_rat(1, static_cast<long>(i + 2));
  Fin2ExtractionResult res = fin2_extract(grid);
  CHECK(res.depth == 2);
  CHECK(res.lo < res.hi);
  CHECK(!res.m.empty());
  // A is assembled exactly from the selected rows' index sets
  size_t expect = 0;
  for (std::int64_t n : res.m) expect += res.row_b[static_cast<size_t>(n)].size();
  CHECK(res.a.size() == expect);
  for (const Point& p : res.a) {
    CHECK(p.x >= 0);
    CHECK(p.x < 16);
    CHECK(p.y >= 0);
    CHECK(p.y < 16);
  }
  // exclusion counts shrink as the radius grows
  for (size_t i = 1; i < res.exclusions.size(); ++i) {
    CHECK(res.exclusions[i].eps > res.exclusions[i - 1].eps);
    CHECK(res.exclusions[i].a_count <= res.exclusions[i - 1].a_count);
    CHECK(res.exclusions[i].grid_count <= res.exclusions[i - 1].grid_count);
  }
}

TEST_CASE("grid extraction validates its inputs") {
  std::vector<std::vector<Rat>> one_row(1, std::vector<Rat>(4, Rat(0)));
  CHECK_THROWS_AS(fin2_extract(one_row), std::invalid_argument);
  std::vector<std::vector<Rat>> ragged{{Rat(0), Rat(0)}, {Rat(0)}};
  CHECK_THROWS_AS(fin2_extract(ragged), std::invalid_argument);
  std::vector<std::vector<Rat>> ok(2, std::vector<Rat>(2, Rat(0)));
  CHECK_THROWS_AS(fin2_extract(ok, 0), std::invalid_argument);
}

TEST_CASE("transport along the identity keeps the index set") {
  auto fin = ideals::make_ideal("fin");
  ExtractionResult res = extract(fin, alternating(16), 2);
  reductions::Witness id = reductions::builtin_witness("identity");
  ExtractionResult moved = transport(id, res, alternating(16));
  CHECK(moved.b == res.b);
  CHECK(moved.ideal == "fin");
  CHECK(moved.prefix == res.prefix);
  CHECK(moved.lo == res.lo);
  CHECK(moved.hi == res.hi);
  REQUIRE(moved.source_exclusions.size() == res.exclusions.size());
  CHECK(moved.exclusions.size() == res.exclusions.size());
  for (size_t i = 0; i < moved.exclusions.size(); ++i) {
    CHECK(moved.exclusions[i].eps == res.exclusions[i].eps);
    CHECK(moved.exclusions[i].count == res.exclusions[i].count);
  }
  CHECK(moved.note.find("dropped") == std::string::npos);
}

TEST_CASE("transport into the tagged sum doubles the ranks") {
  auto fin = ideals::make_ideal("fin");
  ExtractionResult res = extract(fin, alternating(16), 2);  // b = evens
  reductions::Witness w = reductions::builtin_witness("oplus_left(fin,vdw)");
  std::vector<Rat> target_seq(16, Rat(0));
  ExtractionResult moved = transport(w, res, target_seq);
  CHECK(moved.uni == Universe::OmegaTagged);
  CHECK(moved.ideal == "dsum(fin,vdw)");
  // (k;0) has rank 2k; tagged cutoff for length 16 is 8, so k in {0,2,4,6}
  std::vector<std::int64_t> expect{0, 4, 8, 12};
  CHECK(moved.b == expect);
}

TEST_CASE("transport along the block-index witness lands on block ranks") {
  auto src = ideals::make_ideal("restrict(vdw,blocks(10))");
  // mark members of the block set with value 1
  std::vector<Rat> seq(128, Rat(0));
  auto blocks = setexpr::parse_set("blocks(10)");
  for (std::int64_t p = 0; p < 128; ++p)
    if (setexpr::contains(*blocks, omega_pt(Int(p))))
      seq[static_cast<size_t>(p)] = Rat(1);
  ExtractionResult res = extract(src, seq, 2);
  CHECK(res.prefix == "11");
  // the kept branch is exactly the block members below 128
  CHECK(res.b == std::vector<std::int64_t>{1, 10, 11, 100, 101, 102});

  reductions::Witness w = reductions::builtin_witness("vdw_blockindex");
  std::vector<Rat> target_seq(16, Rat(0));
  ExtractionResult moved = transport(w, res, target_seq);
  CHECK(moved.ideal == "fin");
  CHECK(moved.b == std::vector<std::int64_t>{0, 1, 2});
}

TEST_CASE("transport validates selector and universes") {
  auto fin = ideals::make_ideal("fin");
  ExtractionResult res = extract(fin, alternating(8), 1);
  reductions::Witness w = reductions::builtin_witness("identity");
  w.selector = nullptr;
  CHECK_THROWS_AS(transport(w, res, alternating(8)), std::invalid_argument);

  reductions::Witness ok = reductions::builtin_witness("identity");
  CHECK_THROWS_AS(transport(ok, res, {}), std::invalid_argument);
}

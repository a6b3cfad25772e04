#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "idealab/point.hpp"
#include "idealab/rat.hpp"
#include "idealab/setexpr.hpp"
#include "test_support.hpp"

using namespace idealab;
using namespace idealab::setexpr;

namespace {

std::vector<long> view_naturals(const TruncationView& v) {
  std::vector<long> out;
  for (const auto& p : v.pts) out.push_back(static_cast<long>(p.x.get_si()));
  return out;
}

}  // namespace

TEST_CASE("print-parse-print is a fixpoint on a grammar corpus") {
  const std::vector<std::string> corpus = {
      "evens",
      "odds",
      "squares",
      "ap(3,4)",
      "range(2,9)",
      "powers(2)",
      "blocks(10)",
      "block(10,3)",
      "{1,5,9}",
      "{}",
      "(evens|squares)",
      "(blocks(10)&range(0,200))",
      "(ap(0,1)\\odds)",
      "img(blockindex(10),blocks(10))",
      "pre(mod(3),{0})",
      "tag0(evens)",
      "tag1({7})",
      "tri",
      "grid(evens,range(0,4))",
      "row(5,powers(2))",
      "{(1,2),(3,4)}",
      "{(4;0),(4;1)}",
      "qall",
      "qball(1/2,1/8)",
      "{1/2,1/3,2/3}",
      "img(qindex,qall)",
      "pre(comp(mod(2),blockindex(10)),{0})",
  };
  for (const auto& text : corpus) {
    CAPTURE(text);
    SetPtr e = parse_set(text);
    const std::string printed = print(*e);
    SetPtr e2 = parse_set(printed);
    CHECK(print(*e2) == printed);
  }
}

TEST_CASE("function print-parse round trip") {
  for (const std::string text :
       {"id", "proj1", "pairc0", "blockindex(10)", "cellindex(dyadic)",
        "cellindex(blocks(3))", "mod(7)", "comp(mod(2),blockindex(10))", "qindex",
        "tagjoin(id,mod(2))", "table{0->9,3->1,default->0}"}) {
    CAPTURE(text);
    FuncPtr f = parse_func(text);
    CHECK(print(*parse_func(print(*f))) == print(*f));
  }
}

TEST_CASE("truncate matches contains on every prefix") {
  const std::vector<std::string> corpus = {
      "evens", "squares", "powers(2)", "blocks(10)", "(evens&squares)",
      "(ap(1,3)|powers(3))", "(ap(0,1)\\squares)", "pre(mod(5),{0,4})",
  };
  for (const auto& text : corpus) {
    SetPtr e = parse_set(text);
    for (std::int64_t n : {1, 2, 7, 64, 256}) {
      TruncationView v = truncate(*e, n);
      std::vector<long> expect;
      for (long x = 0; x < n; ++x)
        if (contains(*e, omega_pt(Int(x)))) expect.push_back(x);
      CHECK(view_naturals(v) == expect);
    }
  }
}

TEST_CASE("blocks(10) fixed windows") {
  SetPtr e = parse_set("blocks(10)");
  CHECK(view_naturals(truncate(*e, 20)) == std::vector<long>{1, 10, 11});
  // E_0={1}, E_1={10,11}, E_2={100,101,102}, E_3={1000..1003}
  CHECK(view_naturals(truncate(*e, 200)) ==
        std::vector<long>{1, 10, 11, 100, 101, 102});
  CHECK(contains(*e, omega_pt(Int(1003))));
  CHECK_FALSE(contains(*e, omega_pt(Int(1004))));
}

TEST_CASE("blockindex image and preimage") {
  FuncPtr f = parse_func("blockindex(10)");
  // apply is partial: defined exactly on the blocks
  CHECK_FALSE(apply(*f, omega_pt(Int(2))).has_value());
  auto v = apply(*f, omega_pt(Int(102)));
  REQUIRE(v.has_value());
  CHECK(v->x == 2);

  SetPtr pre_evens = parse_set("pre(blockindex(10),evens)");
  CHECK(view_naturals(truncate(*pre_evens, 10000)) ==
        std::vector<long>{1, 100, 101, 102});

  SetPtr img_blocks = parse_set("img(blockindex(10),blocks(10))");
  CHECK(view_naturals(truncate(*img_blocks, 5)) == std::vector<long>{0, 1, 2, 3, 4});
}

TEST_CASE("image of a finite set enumerates defined values only") {
  TruncationView v = truncate(*parse_set("range(0,200)"), 200);
  TruncationView iv = image_view(*parse_func("blockindex(10)"), v);
  CHECK(view_naturals(iv) == std::vector<long>{0, 1, 2});
}

TEST_CASE("universe checks reject mixed algebra") {
  CHECK_THROWS_AS(parse_set("(evens|qall)"), UniverseError);
  CHECK_THROWS_AS(parse_set("(tri&evens)"), UniverseError);
  CHECK_THROWS_AS(parse_set("img(proj1,evens)"), UniverseError);
  CHECK_THROWS_AS(parse_set("pre(blockindex(10),qall)"), UniverseError);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_set("ap(3)"), ParseError);
  CHECK_THROWS_AS(parse_set("unknowable"), ParseError);
  CHECK_THROWS_AS(parse_set("ap(0,0)"), ParseError);  // d >= 1
  CHECK_THROWS_AS(parse_set("{1,1/2}"), ParseError);  // mixed point forms
  CHECK_THROWS_AS(parse_func("mod(0)"), ParseError);
}

TEST_CASE("rational enumeration order") {
  // 0/1, 1/1, then by denominator, coprime numerators ascending
  auto pts = qunit_enumerate(8);
  std::vector<std::string> got;
  for (const auto& p : pts) got.push_back(point_str(Universe::QUnit, p));
  CHECK(got == std::vector<std::string>{"0/1", "1/1", "1/2", "1/3", "2/3", "1/4",
                                        "3/4", "1/5"});
  for (std::int64_t i = 0; i < 8; ++i) CHECK(qunit_index(pts[i]) == i);
}

TEST_CASE("qball membership is the open interval") {
  SetPtr b = parse_set("qball(1/2,1/8)");
  CHECK(contains(*b, qunit_enumerate(3)[2]));  // 1/2
  CHECK_FALSE(contains(*b, qunit_enumerate(2)[1]));  // 1/1
  TruncationView v = truncate(*b, 64);
  for (const auto& p : v.pts) {
    Rat x = make_rat(p.x, p.y);
    CHECK(x > make_rat(3, 8));
    CHECK(x < make_rat(5, 8));
  }
  CHECK(!v.pts.empty());
}

TEST_CASE("tagged and grid views follow the canonical point order") {
  TruncationView tv = truncate(*parse_set("(tag0(evens)|tag1(odds))"), 6);
  std::vector<std::string> got;
  for (const auto& p : tv.pts) got.push_back(point_str(Universe::OmegaTagged, p));
  CHECK(got == std::vector<std::string>{"(0;0)", "(1;1)", "(2;0)", "(3;1)",
                                        "(4;0)", "(5;1)"});

  TruncationView gv = truncate(*parse_set("grid({1,2},{0,2})"), 3);
  std::vector<std::string> gs;
  for (const auto& p : gv.pts) gs.push_back(point_str(Universe::OmegaSq, p));
  CHECK(gs == std::vector<std::string>{"(1,0)", "(1,2)", "(2,0)", "(2,2)"});
}

TEST_CASE("tri holds lower-triangle pairs") {
  SetPtr t = parse_set("tri");
  CHECK(contains(*t, pair_pt(Int(5), Int(5))));
  CHECK(contains(*t, pair_pt(Int(5), Int(0))));
  CHECK_FALSE(contains(*t, pair_pt(Int(5), Int(6))));
  CHECK(truncate(*t, 4).pts.size() == 4 + 3 + 2 + 1);
}

TEST_CASE("table functions override a default") {
  FuncPtr f = parse_func("table{0->9,3->1,default->0}");
  CHECK(apply(*f, omega_pt(Int(0)))->x == 9);
  CHECK(apply(*f, omega_pt(Int(3)))->x == 1);
  CHECK(apply(*f, omega_pt(Int(100)))->x == 0);
}

TEST_CASE("range boundaries are half-open") {
  SetPtr r = parse_set("range(2,5)");
  CHECK(view_naturals(truncate(*r, 10)) == std::vector<long>{2, 3, 4});
  CHECK(view_naturals(truncate(*r, 3)) == std::vector<long>{2});
}

TEST_CASE("simplify collapses identities used by the rule engine") {
  CHECK(print(*simplify(parse_set("(squares&ap(0,1))"))) == "squares");
  CHECK(print(*simplify(parse_set("(ap(0,1)&squares)"))) == "squares");
  CHECK(print(*simplify(parse_set("(blocks(10)&blocks(10))"))) == "blocks(10)");
  CHECK(print(*simplify(parse_set("pre(id,evens)"))) == "evens");
  CHECK(print(*simplify(parse_set("img(id,evens)"))) == "evens");
  CHECK(print(*simplify(parse_set("(evens\\evens)"))) == "{}");
}

TEST_CASE("finite_card_bound and provably_infinite") {
  CHECK(finite_card_bound(*parse_set("{1,2,3}")).value() == 3);
  CHECK(finite_card_bound(*parse_set("range(5,25)")).value() == 20);
  CHECK(finite_card_bound(*parse_set("block(10,4)")).value() == 5);
  CHECK_FALSE(finite_card_bound(*parse_set("evens")).has_value());
  CHECK(provably_infinite(*parse_set("squares")));
  CHECK(provably_infinite(*parse_set("(evens\\{0,2})")));
  CHECK_FALSE(provably_infinite(*parse_set("{1,2}")));
}

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "idealab/point.hpp"
#include "idealab/rat.hpp"

namespace idealab {

// Raised by the grammar front end; pos is a byte offset into the input.
struct ParseError : std::runtime_error {
  size_t pos;
  ParseError(const std::string& msg, size_t p) : std::runtime_error(msg), pos(p) {}
};

// Mixing universes (e.g. unioning an omega set with a rational set).
struct UniverseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation outside the decidable fragment (unbounded preimage search,
// oversized enumeration, ...). Always carries an explanation.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace setexpr {

struct SetExpr;
struct FuncExpr;
using SetPtr = std::shared_ptr<const SetExpr>;
using FuncPtr = std::shared_ptr<const FuncExpr>;

// Interval partition of (a cofinite subset of) omega used by cellindex() and
// the generalized-density ideals. Dyadic cells are [2^n, 2^(n+1)); block
// cells are {b^n, ..., b^n + n}.
struct Partition {
  enum class Kind { Dyadic, Blocks };
  Kind kind = Kind::Dyadic;
  Int base = 2;  // Blocks only

  std::optional<Int> cell_of(const Int& x) const;
  // Inclusive bounds [lo, hi] of cell n.
  std::pair<Int, Int> cell_range(const Int& n) const;
  std::string str() const;
  bool operator==(const Partition&) const = default;
};

struct FuncExpr {
  enum class K {
    Id,          // omega -> omega
    Proj1,       // omega^2 -> omega, (m,n) -> m
    PairC0,      // omega -> omega*2, i -> (i,0)
    TagJoin,     // omega*2 -> U, (n,0) -> f(n), (n,1) -> g(n)
    BlockIndex,  // partial omega -> omega, i -> n iff i in {b^n..b^n+n}
    CellIndex,   // partial omega -> omega, k -> n iff k in I_n
    Table,       // omega -> U, finite overrides + default
    Comp,        // x -> f(g(x))
    QIndex,      // Q[0,1] -> omega, enumeration rank
    Mod,         // omega -> omega, k -> k mod m
  };
  K kind{};
  Universe dom = Universe::Omega;
  Universe cod = Universe::Omega;
  Int base = 0;      // BlockIndex base / Mod modulus
  Partition part{};  // CellIndex
  std::vector<std::pair<Int, Point>> entries{};  // Table, sorted by key
  Point table_default{};                         // Table
  FuncPtr f{}, g{};  // TagJoin(f,g), Comp(f,g)
};

struct SetExpr {
  enum class K {
    Finite, Range, AP, Evens, Odds, Squares, Powers, Blocks, Block,
    Tri, Grid, Row,
    Union, Inter, Diff,
    Image, Preimage,
    Tag0, Tag1,
    QAll, QBall,
  };
  K kind{};
  Universe uni = Universe::Omega;
  Int a = 0, b = 0;          // numeric params (ap: a,d; range: a,b; block: base,n; row: m)
  Rat qa{}, qb{};            // qball: center, radius
  std::vector<Point> pts{};  // Finite, sorted canonical, unique
  SetPtr l{}, r{};           // children
  FuncPtr fn{};              // Image/Preimage
};

// ---- constructors (validate parameters and universes) ----
SetPtr finite(Universe u, std::vector<Point> pts);
SetPtr finite_naturals(const std::vector<Int>& values);
SetPtr range_set(Int a, Int b);  // half-open [a, b)
SetPtr ap(Int a, Int d);         // {a + kd}, d >= 1
SetPtr evens();
SetPtr odds();
SetPtr squares();
SetPtr powers(Int b);           // {b^n : n >= 0}, b >= 2
SetPtr blocks(Int b);           // union of E_n = {b^n..b^n+n}, b >= 2
SetPtr block(Int b, Int n);     // single E_n
SetPtr tri();                   // {(m,n) : n <= m}
SetPtr grid(SetPtr rows, SetPtr cols);
SetPtr row(Int m, SetPtr cols);
SetPtr set_union(SetPtr l, SetPtr r);
SetPtr set_inter(SetPtr l, SetPtr r);
SetPtr set_diff(SetPtr l, SetPtr r);
SetPtr img(FuncPtr f, SetPtr e);  // e in dom(f); result in cod(f)
SetPtr pre(FuncPtr f, SetPtr e);  // e in cod(f); result in dom(f)
SetPtr tag0(SetPtr e);
SetPtr tag1(SetPtr e);
SetPtr qall();
SetPtr qball(Rat center, Rat radius);  // {x : |x - c| < r}, within Q[0,1]

FuncPtr f_id();
FuncPtr f_proj1();
FuncPtr f_pairc0();
FuncPtr f_tagjoin(FuncPtr f, FuncPtr g);
FuncPtr f_blockindex(Int base);
FuncPtr f_cellindex(Partition p);
FuncPtr f_table(std::vector<std::pair<Int, Point>> entries, Point def);
// As f_table, with an explicit codomain (the parser infers it from the
// point literals; bare naturals give the default omega codomain).
FuncPtr f_table_typed(std::vector<std::pair<Int, Point>> entries, Point def,
                      Universe cod);
FuncPtr f_comp(FuncPtr f, FuncPtr g);
FuncPtr f_qindex();
FuncPtr f_mod(Int m);

// ---- grammar front end ----
SetPtr parse_set(const std::string& text);
FuncPtr parse_func(const std::string& text);
std::string print(const SetExpr& e);
std::string print(const FuncExpr& f);

// ---- evaluation ----

// Exact membership. Total on the decidable fragment; throws EvalError when a
// node has no computable membership rule (e.g. img over unbounded fibers).
bool contains(const SetExpr& e, const Point& p);

// f(p), or nullopt when p is outside f's domain of definition.
std::optional<Point> apply(const FuncExpr& f, const Point& p);

// Finite window of a set: the members among the first `cutoff` layer of the
// universe (omega: [0,N); omega^2: [0,N)x[0,N); omega*2: [0,N)x{0,1};
// Q[0,1]: the first N enumerated rationals). Sorted, unique.
struct TruncationView {
  Universe uni = Universe::Omega;
  std::int64_t cutoff = 0;
  std::vector<Point> pts;
};

TruncationView truncate(const SetExpr& e, std::int64_t cutoff);

// Pointwise image of a view: sorted defined f-values of v's points.
TruncationView image_view(const FuncExpr& f, const TruncationView& v);

// {p in v : f(p) defined and f(p) in target}.
TruncationView preimage_view(const FuncExpr& f, const SetExpr& target,
                             const TruncationView& v);

// view set helpers (same universe; canonical order preserved)
TruncationView view_inter(const TruncationView& a, const TruncationView& b);
bool view_contains(const TruncationView& v, const Point& p);

// ---- structural analysis (sound, incomplete; the rule engines build on these) ----
enum class TriBool { Yes, No, Unknown };

// Upper bound on |e| when e is provably finite.
std::optional<Int> finite_card_bound(const SetExpr& e);
bool provably_infinite(const SetExpr& e);
TriBool nonempty(const SetExpr& e);
// Does an Omega-set meet [lo, hi]? (inclusive bounds)
TriBool meets_range(const SetExpr& e, const Int& lo, const Int& hi);

// Tagged expressions that decompose into (tag-0 part, tag-1 part).
std::optional<std::pair<SetPtr, SetPtr>> tagged_parts(const SetExpr& e);

// Light sound rewrites applied before rule matching (pre(id,e) -> e,
// x & x -> x, ...). Never changes the denoted set.
SetPtr simplify(SetPtr e);

// Enumerated fiber f^-1(y) when it is provably finite and small (capped);
// nullopt when unbounded or over the cap.
std::optional<std::vector<Point>> fiber_points(const FuncExpr& f, const Point& y);

}  // namespace setexpr
}  // namespace idealab

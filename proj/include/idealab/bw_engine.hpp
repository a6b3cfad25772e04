#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idealab/ideals.hpp"
#include "idealab/reductions.hpp"

namespace idealab::bw_engine {

using ideals::IdealPtr;
using setexpr::SetPtr;
using setexpr::TruncationView;

// Positions index a sequence laid out in the universe's canonical enumeration
// order: omega by value; pairs row-major within a side*side square; tagged
// points as (0;0),(0;1),(1;0),...; rationals in first-N order.
std::vector<Point> enumerate_positions(Universe u, std::int64_t len);
Int position_rank(Universe u, const Point& p, std::int64_t len);

// Binary partition tree over an index set: node s keeps the positions whose
// sequence value lies in the dyadic interval coded by s. Intervals are
// half-open with the rightmost interval of every level closed, so each level
// partitions [0,1] exactly.
struct PartitionTree {
  Universe uni = Universe::Omega;
  std::int64_t view_cutoff = 0;    // truncation cutoff covering all positions
  std::vector<Rat> seq;            // value per position
  std::vector<std::int64_t> root;  // root index set, ascending
  // rationals have no closed-form position; cache their enumeration
  std::shared_ptr<const std::vector<Point>> qtable;

  // dyadic interval coded by s, as [lo, hi]; right-closed iff hi == 1
  static std::pair<Rat, Rat> interval(const std::string& s);
  static bool interval_contains(const std::pair<Rat, Rat>& iv, const Rat& x);

  Point point_at(std::int64_t position) const;
  std::vector<std::int64_t> node(const std::string& s) const;
  TruncationView view_of(const std::vector<std::int64_t>& positions) const;
};

// Values must lie in [0,1]; a's points must rank below seq's length.
PartitionTree dyadic_tree(const std::vector<Rat>& seq, const TruncationView& a);

struct LevelTrace {
  int level = 0;   // 1-based
  int chosen = 0;  // selected child bit
  Rat score0{}, score1{};
};

struct BranchResult {
  std::string prefix;
  std::vector<std::int64_t> b;  // root ∩ A_{x|L}
  std::vector<LevelTrace> trace;
};

// Greedy descent: larger score wins, ties go to child 0. A heuristic
// realization of an existence theorem; the trace lets callers audit near-ties.
BranchResult select_branch(const IdealPtr& ideal, const PartitionTree& tree,
                           int depth);

struct ExclusionRow {
  Rat eps{};
  std::int64_t count = 0;
  Rat score{};  // I-score of the positions at distance >= eps from the interval
};

struct ExtractionResult {
  std::string ideal;
  Universe uni = Universe::Omega;
  std::int64_t len = 0;
  std::string prefix;
  Rat lo{}, hi{};  // limit interval; reported as an interval, never a point
  std::vector<std::int64_t> b;
  std::vector<LevelTrace> trace;
  std::vector<ExclusionRow> exclusions;
  std::string note;
  // present on transported results: the exclusion rows of the original side
  std::vector<ExclusionRow> source_exclusions;
};

// Root defaults to every position of [0, len).
ExtractionResult extract(const IdealPtr& ideal, const std::vector<Rat>& seq,
                         int depth,
                         std::optional<TruncationView> root = std::nullopt);

struct Fin2Exclusion {
  Rat eps{};
  // profile over the assembled A: cells of A at distance >= eps from the
  // outer interval, with per-column section sizes (nonzero only)
  std::int64_t a_count = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> a_sections;
  // profile over the whole grid, same predicate
  std::int64_t grid_count = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> grid_sections;
  std::int64_t full_rows = 0;    // grid rows excluded in their entirety
  std::int64_t cols_beyond = 0;  // columns excluded somewhere past the last full row
};

struct Fin2ExtractionResult {
  std::int64_t rows = 0, cols = 0;
  int depth = 0;
  std::vector<std::vector<std::int64_t>> row_b;   // M_n per row
  std::vector<std::pair<Rat, Rat>> row_limits;    // per-row limit intervals
  std::vector<std::int64_t> m;                    // outer index set M
  Rat lo{}, hi{};                                 // outer limit interval
  std::vector<Point> a;                           // ∪_{n∈M} {n}×M_n
  std::vector<Fin2Exclusion> exclusions;
  std::string note;
};

// Diagonal extraction: counting ideal on every row, then on the sequence of
// row-limit midpoints. Depth defaults to max(1, floor(log2(min(R,C))/2)) so
// the dyadic resolution never outruns the sample count. Radii default to the
// ladder {width, 2*width, ...} capped at 1/2.
Fin2ExtractionResult fin2_extract(const std::vector<std::vector<Rat>>& dseq,
                                  std::optional<int> depth = std::nullopt,
                                  std::vector<Rat> radii = {});

// Re-index an extraction along a witness: B comes from the witness's
// B-selector applied to the extracted index set, and the exclusion ladder is
// recomputed for seq against the same limit interval. The original rows ride
// along in source_exclusions.
ExtractionResult transport(const reductions::Witness& w,
                           const ExtractionResult& result,
                           const std::vector<Rat>& seq);

}  // namespace idealab::bw_engine

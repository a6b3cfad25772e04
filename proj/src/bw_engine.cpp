#include "idealab/bw_engine.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace idealab::bw_engine {

namespace {

std::int64_t side_for(std::int64_t len) {
  std::int64_t s = 1;
  while (s * s < len) ++s;
  return s;
}

std::int64_t cutoff_for(Universe u, std::int64_t len) {
  switch (u) {
    case Universe::Omega:
    case Universe::QUnit: return len;
    case Universe::OmegaTagged: return (len + 1) / 2;
    case Universe::OmegaSq: return side_for(len);
  }
  return len;
}

// distance from x to the closure of the limit interval
Rat interval_dist(const Rat& x, const Rat& lo, const Rat& hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return Rat(0);
}

std::vector<Rat> default_ladder(const Rat& width) {
  std::vector<Rat> out;
  const Rat half = make_rat(1, 2);
  for (Rat eps = width; eps <= half; eps *= 2) out.push_back(eps);
  if (out.empty()) out.push_back(width);
  return out;
}

}  // namespace

std::vector<Point> enumerate_positions(Universe u, std::int64_t len) {
  if (len < 0) throw std::invalid_argument("negative sequence length");
  if (u == Universe::QUnit) return qunit_enumerate(len);
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(len));
  const std::int64_t side = u == Universe::OmegaSq ? side_for(len) : 0;
  for (std::int64_t i = 0; i < len; ++i) {
    switch (u) {
      case Universe::Omega: out.push_back(omega_pt(Int(i))); break;
      case Universe::OmegaTagged:
        out.push_back(tagged_pt(Int(i / 2), static_cast<int>(i % 2)));
        break;
      case Universe::OmegaSq:
        out.push_back(pair_pt(Int(i / side), Int(i % side)));
        break;
      case Universe::QUnit: break;  // handled above
    }
  }
  return out;
}

Int position_rank(Universe u, const Point& p, std::int64_t len) {
  switch (u) {
    case Universe::Omega: return p.x;
    case Universe::OmegaTagged: return Int(2 * p.x + p.y);
    case Universe::OmegaSq: {
      const std::int64_t side = side_for(len);
      if (p.y >= side) return Int(len);  // outside the square layout
      return Int(p.x * side + p.y);
    }
    case Universe::QUnit: return qunit_index(p);
  }
  return Int(len);
}

std::pair<Rat, Rat> PartitionTree::interval(const std::string& s) {
  Rat lo(0), hi(1);
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("branch strings are over {0,1}");
    const Rat mid = (lo + hi) / 2;
    if (c == '0') hi = mid;
    else lo = mid;
  }
  return {lo, hi};
}

bool PartitionTree::interval_contains(const std::pair<Rat, Rat>& iv, const Rat& x) {
  if (x < iv.first) return false;
  if (x < iv.second) return true;
  return iv.second == 1 && x == 1;  // rightmost interval of the level is closed
}

Point PartitionTree::point_at(std::int64_t position) const {
  switch (uni) {
    case Universe::Omega: return omega_pt(Int(position));
    case Universe::OmegaTagged:
      return tagged_pt(Int(position / 2), static_cast<int>(position % 2));
    case Universe::OmegaSq: {
      const std::int64_t side = view_cutoff;
      return pair_pt(Int(position / side), Int(position % side));
    }
    case Universe::QUnit: return (*qtable)[static_cast<size_t>(position)];
  }
  throw std::logic_error("unreachable universe");
}

std::vector<std::int64_t> PartitionTree::node(const std::string& s) const {
  const auto iv = interval(s);
  std::vector<std::int64_t> out;
  for (std::int64_t p : root)
    if (interval_contains(iv, seq[static_cast<size_t>(p)])) out.push_back(p);
  return out;
}

TruncationView PartitionTree::view_of(const std::vector<std::int64_t>& positions) const {
  TruncationView v;
  v.uni = uni;
  v.cutoff = view_cutoff;
  v.pts.reserve(positions.size());
  for (std::int64_t p : positions) v.pts.push_back(point_at(p));
  return v;
}

PartitionTree dyadic_tree(const std::vector<Rat>& seq, const TruncationView& a) {
  PartitionTree t;
  t.uni = a.uni;
  const std::int64_t len = static_cast<std::int64_t>(seq.size());
  for (const Rat& v : seq)
    if (v < 0 || v > 1)
      throw std::invalid_argument("sequence value " + to_pq_string(v) +
                                  " lies outside [0,1]");
  t.view_cutoff = cutoff_for(a.uni, len);
  if (a.uni == Universe::QUnit)
    t.qtable = std::make_shared<const std::vector<Point>>(qunit_enumerate(len));
  t.seq = seq;
  t.root.reserve(a.pts.size());
  for (const Point& p : a.pts) {
    Int r = position_rank(a.uni, p, len);
    if (r < 0 || r >= len)
      throw std::invalid_argument("index set reaches beyond the sequence (point " +
                                  point_str(a.uni, p) + ")");
    t.root.push_back(r.get_si());
  }
  return t;
}

BranchResult select_branch(const IdealPtr& ideal, const PartitionTree& tree,
                           int depth) {
  if (tree.root.empty())
    throw std::invalid_argument("select_branch: empty root index set");
  if (ideal->uni != tree.uni)
    throw UniverseError("select_branch: ideal universe does not match the tree");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");

  BranchResult br;
  std::vector<std::int64_t> cur = tree.root;
  for (int level = 1; level <= depth; ++level) {
    const auto iv0 = PartitionTree::interval(br.prefix + "0");
    std::vector<std::int64_t> c0, c1;
    for (std::int64_t p : cur) {
      if (PartitionTree::interval_contains(iv0, tree.seq[static_cast<size_t>(p)]))
        c0.push_back(p);
      else
        c1.push_back(p);
    }
    const Rat s0 = ideals::scalar_summary(ideals::score(*ideal, tree.view_of(c0)));
    const Rat s1 = ideals::scalar_summary(ideals::score(*ideal, tree.view_of(c1)));
    const int chosen = s1 > s0 ? 1 : 0;
    br.trace.push_back({level, chosen, s0, s1});
    cur = chosen ? std::move(c1) : std::move(c0);
    br.prefix += chosen ? '1' : '0';
  }
  br.b = std::move(cur);
  return br;
}

ExtractionResult extract(const IdealPtr& ideal, const std::vector<Rat>& seq,
                         int depth, std::optional<TruncationView> root) {
  const std::int64_t len = static_cast<std::int64_t>(seq.size());
  if (len == 0) throw std::invalid_argument("extract: empty sequence");
  TruncationView a = root ? std::move(*root)
                          : TruncationView{ideal->uni, cutoff_for(ideal->uni, len),
                                           enumerate_positions(ideal->uni, len)};
  PartitionTree tree = dyadic_tree(seq, a);
  BranchResult br = select_branch(ideal, tree, depth);

  ExtractionResult res;
  res.ideal = ideals::name(*ideal);
  res.uni = ideal->uni;
  res.len = len;
  res.prefix = br.prefix;
  auto iv = PartitionTree::interval(br.prefix);
  res.lo = iv.first;
  res.hi = iv.second;
  res.trace = std::move(br.trace);
  res.b = std::move(br.b);

  for (const Rat& eps : default_ladder(res.hi - res.lo)) {
    std::vector<std::int64_t> excl;
    for (std::int64_t p : res.b)
      if (interval_dist(seq[static_cast<size_t>(p)], res.lo, res.hi) >= eps)
        excl.push_back(p);
    ExclusionRow row;
    row.eps = eps;
    row.count = static_cast<std::int64_t>(excl.size());
    row.score = ideals::scalar_summary(ideals::score(*ideal, tree.view_of(excl)));
    res.exclusions.push_back(std::move(row));
  }
  res.note = "greedy branch selection: larger score wins, ties go to child 0; "
             "the trace carries both child scores per level";
  return res;
}

Fin2ExtractionResult fin2_extract(const std::vector<std::vector<Rat>>& dseq,
                                  std::optional<int> depth,
                                  std::vector<Rat> radii) {
  const std::int64_t rows = static_cast<std::int64_t>(dseq.size());
  if (rows < 2) throw std::invalid_argument("fin2_extract: need at least 2 rows");
  const std::int64_t cols = static_cast<std::int64_t>(dseq[0].size());
  if (cols < 2) throw std::invalid_argument("fin2_extract: need at least 2 columns");
  for (const auto& r : dseq)
    if (static_cast<std::int64_t>(r.size()) != cols)
      throw std::invalid_argument("fin2_extract: ragged rows");

  Fin2ExtractionResult out;
  out.rows = rows;
  out.cols = cols;
  out.depth = depth.value_or(std::max<int>(
      1, static_cast<int>(floor_log2(Int(std::min(rows, cols)))) / 2));
  if (out.depth < 1) throw std::invalid_argument("fin2_extract: depth must be >= 1");

  const IdealPtr fin = ideals::fin_ideal();
  std::vector<Rat> mids;
  mids.reserve(static_cast<size_t>(rows));
  for (std::int64_t n = 0; n < rows; ++n) {
    ExtractionResult r = extract(fin, dseq[static_cast<size_t>(n)], out.depth);
    out.row_b.push_back(std::move(r.b));
    out.row_limits.emplace_back(r.lo, r.hi);
    mids.push_back((r.lo + r.hi) / 2);
  }
  ExtractionResult outer = extract(fin, mids, out.depth);
  out.m = std::move(outer.b);
  out.lo = outer.lo;
  out.hi = outer.hi;

  for (std::int64_t n : out.m)
    for (std::int64_t i : out.row_b[static_cast<size_t>(n)])
      out.a.push_back(pair_pt(Int(n), Int(i)));

  if (radii.empty()) radii = default_ladder(out.hi - out.lo);
  for (const Rat& eps : radii) {
    Fin2Exclusion ex;
    ex.eps = eps;

    std::map<std::int64_t, std::int64_t> a_cols;
    for (std::int64_t n : out.m) {
      for (std::int64_t i : out.row_b[static_cast<size_t>(n)]) {
        const Rat& v = dseq[static_cast<size_t>(n)][static_cast<size_t>(i)];
        if (interval_dist(v, out.lo, out.hi) >= eps) {
          ++ex.a_count;
          ++a_cols[i];
        }
      }
    }
    ex.a_sections.assign(a_cols.begin(), a_cols.end());

    std::map<std::int64_t, std::int64_t> grid_cols;
    std::map<std::int64_t, std::int64_t> col_last_row;
    std::int64_t last_full_row = -1;
    for (std::int64_t n = 0; n < rows; ++n) {
      std::int64_t row_excluded = 0;
      for (std::int64_t i = 0; i < cols; ++i) {
        const Rat& v = dseq[static_cast<size_t>(n)][static_cast<size_t>(i)];
        if (interval_dist(v, out.lo, out.hi) >= eps) {
          ++ex.grid_count;
          ++grid_cols[i];
          col_last_row[i] = n;
          ++row_excluded;
        }
      }
      if (row_excluded == cols) {
        ++ex.full_rows;
        last_full_row = n;
      }
    }
    ex.grid_sections.assign(grid_cols.begin(), grid_cols.end());
    for (const auto& [i, last] : col_last_row)
      if (last > last_full_row) ++ex.cols_beyond;
    out.exclusions.push_back(std::move(ex));
  }
  out.note = "counting extraction per row, then over the row-limit midpoints; "
             "exclusion profiles reported both inside the assembled index set "
             "and over the whole grid";
  return out;
}

ExtractionResult transport(const reductions::Witness& w,
                           const ExtractionResult& result,
                           const std::vector<Rat>& seq) {
  if (!w.selector)
    throw std::invalid_argument("transport: witness " + w.name +
                                " has no B-selector");
  if (w.source->uni != result.uni)
    throw UniverseError(
        "transport: the extraction is not indexed by the witness's source universe");
  const std::int64_t len = static_cast<std::int64_t>(seq.size());
  if (len == 0) throw std::invalid_argument("transport: empty sequence");

  // rebuild the extracted index set as a finite set of source-universe points
  std::vector<Point> a_pts;
  a_pts.reserve(result.b.size());
  PartitionTree src_layout;
  src_layout.uni = result.uni;
  src_layout.view_cutoff = cutoff_for(result.uni, result.len);
  if (result.uni == Universe::QUnit)
    src_layout.qtable =
        std::make_shared<const std::vector<Point>>(qunit_enumerate(result.len));
  for (std::int64_t p : result.b) a_pts.push_back(src_layout.point_at(p));
  SetPtr a_set = setexpr::finite(w.source->uni, std::move(a_pts));

  SetPtr b_set = w.selector(a_set);
  if (b_set->uni != w.target->uni)
    throw UniverseError("transport: selector output landed outside the target universe");

  const std::int64_t cutoff = cutoff_for(w.target->uni, len);
  TruncationView bview = setexpr::truncate(*b_set, cutoff);
  std::vector<std::int64_t> positions;
  std::int64_t dropped = 0;
  for (const Point& p : bview.pts) {
    Int r = position_rank(w.target->uni, p, len);
    if (r < 0 || r >= len) {
      ++dropped;
      continue;
    }
    positions.push_back(r.get_si());
  }

  ExtractionResult res;
  res.ideal = ideals::name(*w.target);
  res.uni = w.target->uni;
  res.len = len;
  res.prefix = result.prefix;
  res.lo = result.lo;
  res.hi = result.hi;
  res.b = std::move(positions);
  res.source_exclusions = result.exclusions;

  PartitionTree dst_layout;
  dst_layout.uni = w.target->uni;
  dst_layout.view_cutoff = cutoff;
  if (w.target->uni == Universe::QUnit)
    dst_layout.qtable =
        std::make_shared<const std::vector<Point>>(qunit_enumerate(len));

  std::vector<Rat> ladder;
  for (const auto& row : result.exclusions) ladder.push_back(row.eps);
  if (ladder.empty()) ladder = default_ladder(res.hi - res.lo);
  for (const Rat& eps : ladder) {
    std::vector<std::int64_t> excl;
    for (std::int64_t p : res.b)
      if (interval_dist(seq[static_cast<size_t>(p)], res.lo, res.hi) >= eps)
        excl.push_back(p);
    ExclusionRow row;
    row.eps = eps;
    row.count = static_cast<std::int64_t>(excl.size());
    row.score =
        ideals::scalar_summary(ideals::score(*w.target, dst_layout.view_of(excl)));
    res.exclusions.push_back(std::move(row));
  }
  res.note = "transported along " + w.name +
             "; exclusion ladder recomputed against the original limit interval" +
             (dropped ? " (" + std::to_string(dropped) +
                            " selector points beyond the sequence dropped)"
                      : "");
  return res;
}

}  // namespace idealab::bw_engine

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idealab/ideals.hpp"
#include "idealab/rat.hpp"
#include "idealab/setexpr.hpp"

namespace idealab::reductions {

using ideals::IdealPtr;
using setexpr::FuncPtr;
using setexpr::SetPtr;

// A reduction witness: f maps the source ideal's universe into the target's.
// The B-selector, when present, maps a source-positive A to a B ⊆ f[A] that
// the target ideal should see as positive.
struct Witness {
  std::string name;
  FuncPtr f;
  IdealPtr source;  // the ideal whose positive sets are challenged
  IdealPtr target;  // the ideal receiving image sets
  std::function<SetPtr(const SetPtr&)> selector;  // may be empty
};

// Catalog:
//   identity | identity(I,J) | oplus_left(I,J) | fubini_proj(I,J) |
//   oplus_join(K,I,J,<func>,<func>) | vdw_blockindex | gden_cellindex(<partition>)
Witness builtin_witness(const std::string& descriptor);

// w1 reduces I to J, w2 reduces J to K; the composite reduces I to K with
// h(x) = w1.f(w2.f(x)). Selectors compose when both are present.
Witness compose(const Witness& w1, const Witness& w2);

// One observed score series. Scalar-mode ideals sample per cutoff; vanishing-
// mode ideals report per-cell values at the largest cutoff (per_cell = true,
// with completeness flags parallel to entries).
struct TrendSeries {
  std::string label;  // "score" or "mu"
  bool per_cell = false;
  std::vector<std::pair<Int, Rat>> entries;
  std::vector<bool> complete;
};

struct CheckRow {
  std::string a_text, b_text, c_text;
  TrendSeries i_scores;  // target-side evidence (C∩B, or the image in katetov mode)
  TrendSeries j_scores;  // source-side evidence (A∩f⁻¹[C], or A itself)
  std::string i_certificate, j_certificate;
  std::string classification;  // consistent | violated | skipped | inconclusive
  std::string note;
};

struct WitnessReport {
  std::string mode;  // "bw" | "katetov"
  std::string witness;
  std::vector<std::int64_t> schedule;
  std::vector<CheckRow> rows;
  std::string summary;
  bool any_violation = false;
};

// Empirical check of the subsequence-order condition: B from the selector
// (or b_override); each challenge C is scored as C∩B under the target and
// A∩f⁻¹[C] under the source. Requires decide(source, A) = Positive unless
// assume_positive. Violations embed certified or observed boundedness
// against target-side growth.
WitnessReport bw_check(const Witness& w, const SetPtr& a,
                       const std::vector<SetPtr>& challenges,
                       const std::vector<std::int64_t>& schedule,
                       std::optional<SetPtr> b_override = std::nullopt,
                       bool assume_positive = false);

// Empirical Katětov check: for each positive A, the target-side scores of
// the pointwise image of A's truncations.
WitnessReport katetov_check(const FuncPtr& f, const IdealPtr& target,
                            const IdealPtr& source,
                            const std::vector<SetPtr>& positives,
                            const std::vector<std::int64_t>& schedule);

// ---- constructive refuters ----

struct ResponderResult {
  SetPtr c;  // finite challenge set drawn from B
  std::vector<std::pair<std::string, Rat>> evidence;
  std::vector<std::pair<Int, Rat>> table;
  std::string note;
};

struct RefuterOutput {
  std::string construction;  // "summable" | "edminus" | "nwd"
  std::string case_tag;      // fiber | case1 | case2 | greedy | first_branch | unknown
  std::int64_t cutoff = 0;
  std::string a_text;
  SetPtr a;                                           // the constructed set
  std::vector<std::pair<std::string, Rat>> evidence;  // exact labeled numbers
  std::vector<std::pair<Int, Rat>> table;             // construction rows
  std::string note;
  // Deterministic challenge responder (empty when the case has none).
  std::function<ResponderResult(const SetPtr&)> responder;
};

// Weighted-fiber refuter: classifies f at the cutoff as one large fiber, a
// sparse-fiber greedy run (case1), or a fat-tail construction (case2).
RefuterOutput refute_summable(const FuncPtr& f, std::int64_t cutoff,
                              const Rat& target = Rat(10));

// Distinct-value grid refuter: A holds n+1 cells per row with globally fresh
// values where possible; the responder thins any B to one value per bundle.
RefuterOutput refute_edminus(const FuncPtr& f, std::int64_t cutoff);

// Dense-pick refuter on the rationals: one fresh-valued point per dyadic
// interval (level-major); the responder bisects to a convergent subsequence.
RefuterOutput refute_nwd(const FuncPtr& f, std::int64_t cutoff, int intervals = 64);

}  // namespace idealab::reductions

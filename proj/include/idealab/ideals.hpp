#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idealab/rat.hpp"
#include "idealab/setexpr.hpp"

namespace idealab::ideals {

using setexpr::Partition;
using setexpr::SetPtr;
using setexpr::TruncationView;

// How truncation scores relate to membership.
enum class Mode {
  UnboundedMeansPositive,  // positive iff scores unbounded (fin, summable, vdw, edminus, nwd)
  VanishingMeansSmall,     // small iff per-cell scores tend to 0 (density family)
  Structural,              // delegates to components (dsum, fubini)
};

// Closed-form weight families for the summable ideals. Exponents are kept
// integral so every weight is an exact rational.
struct WeightFamily {
  enum class Kind { Harmonic, Power, Geometric };
  Kind kind = Kind::Harmonic;
  unsigned long p = 1;  // Power: f(n) = 1/(n+1)^p, p >= 1
  Rat r;                // Geometric: f(n) = r^n, 0 < r < 1

  Rat weight(const Int& n) const;
  // f(0), the largest weight (families are nonincreasing).
  Rat max_weight() const;
  std::string str() const;
};

struct Ideal;
using IdealPtr = std::shared_ptr<const Ideal>;

struct Ideal {
  enum class K {
    Fin,       // finite sets on omega
    Summable,  // sum of weights finite
    GDensity,  // per-cell normalized counts vanish (density = dyadic+card)
    Vdw,       // bounded longest arithmetic progression
    EdMinus,   // bounded column sections on the triangular grid
    Nwd,       // nowhere dense in Q[0,1]
    DSum,      // tagged disjoint sum of two omega ideals
    Fubini,    // section-wise product of two omega ideals
    Restrict,  // base ideal relativized to a positive set
  };
  K kind{};
  Universe uni = Universe::Omega;
  WeightFamily wf{};            // Summable
  Partition part{};             // GDensity
  bool unit_weights = false;    // GDensity: w_n = 1 instead of |I_n|
  IdealPtr left{}, right{};     // DSum/Fubini components; Restrict base = left
  SetPtr restrict_to{};         // Restrict
};

// Catalog constructors. make_ideal parses the descriptor grammar:
//   fin | summable(harmonic) | summable(pow,p) | summable(geom,p/q) |
//   density | gdensity(<partition>,card|unit) | vdw | edminus | nwd |
//   fin2 | dsum(I,J) | fubini(I,J) | restrict(I,<setexpr>)
IdealPtr make_ideal(const std::string& descriptor);
IdealPtr fin_ideal();
IdealPtr summable_ideal(WeightFamily wf);
IdealPtr density_ideal();  // gdensity(dyadic, card)
IdealPtr gdensity_ideal(Partition part, bool unit_weights);
IdealPtr vdw_ideal();
IdealPtr edminus_ideal();
IdealPtr nwd_ideal();
IdealPtr dsum_ideal(IdealPtr l, IdealPtr r);
IdealPtr fubini_ideal(IdealPtr l, IdealPtr r);
// Requires decide(base, a) = Positive; throws std::invalid_argument otherwise.
IdealPtr restrict_ideal(IdealPtr base, SetPtr a);

std::string name(const Ideal& ideal);
Mode mode(const Ideal& ideal);  // Restrict reports its base's mode

// ---- scores ----

// One per-cell sample of a vanishing-mode score; `complete` marks cells that
// lie entirely below the truncation cutoff.
struct CellScore {
  Int cell;
  Rat mu;
  bool complete = true;
};

// Section diagnostics for fubini handles: a scalar would obscure the
// two-quantifier membership condition, so report the section profile.
struct SectionDiag {
  std::vector<std::pair<Int, Int>> section_sizes;     // (m, |v_(m)|), m < cutoff
  std::vector<std::pair<Int, Int>> threshold_counts;  // (s, #cols >= s), s = 1,2,4,...
};

struct Score {
  enum class K { Scalar, Cells, Pair, Sections };
  K kind = K::Scalar;
  Rat scalar;                    // Scalar
  std::vector<CellScore> cells;  // Cells
  std::shared_ptr<const Score> first, second;  // Pair (dsum)
  SectionDiag sections;          // Sections (fubini)
};

Score score(const Ideal& ideal, const TruncationView& v);

// Deterministic scalar view of any score, for sampled series and trend rows:
// scalars pass through, cell profiles give the last complete cell's value,
// pairs sum their halves, section profiles give the largest section.
Rat scalar_summary(const Score& s);

// ---- membership verdicts ----

struct LabeledSeries {
  std::string label;
  std::vector<std::pair<Int, Rat>> entries;  // (cutoff N or cell n, score)
};

struct Verdict {
  enum class K { In, Positive, Unknown };
  K kind = K::Unknown;
  std::string certificate;   // In/Positive: the machine-checked reason
  std::optional<Rat> bound;  // UnboundedMeansPositive In: all scores <= bound
  std::vector<LabeledSeries> diagnostics;  // Unknown: sampled evidence
};

// Sound, incomplete rule engine. Throws UniverseError on a universe
// mismatch; EvalError can propagate from diagnostics sampling.
Verdict decide(const Ideal& ideal, const SetPtr& e);

// ---- combinatorial scores ----

struct ApResult {
  Int len;
  Int a;  // first term
  Int d;  // difference (0 for singletons)
  friend bool operator==(const ApResult&, const ApResult&) = default;
};

// Longest arithmetic progression inside an omega view; ties broken by
// smallest difference, then smallest first term. Throws on empty views and
// on views too large for the exact search.
ApResult longest_ap(const TruncationView& v);

// Exhaustive coloring search: least n <= max_n such that every coloring of
// {1..n} with `colors` colors has a monochromatic `length`-term AP.
struct VdwSearchResult {
  int length = 0;
  int colors = 0;
  std::optional<int> threshold;  // W(length, colors) if <= max_n
  // A progression-free coloring of {1..threshold-1} (or of {1..max_n} when
  // no threshold was found): color index per position, 1-based positions.
  std::vector<int> witness_coloring;
};

VdwSearchResult vdw_search(int length, int colors, int max_n);

// Default truncation schedules (omega-squared universes use smaller cutoffs
// because views grow quadratically).
std::vector<std::int64_t> default_schedule(Universe u);

}  // namespace idealab::ideals

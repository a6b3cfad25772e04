#include "idealab/reductions.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lex.hpp"

namespace idealab::reductions {

using ideals::Ideal;
using ideals::Mode;
using ideals::Verdict;
using setexpr::Partition;
using setexpr::SetExpr;
using setexpr::TruncationView;

namespace {

using K = SetExpr::K;
using VK = Verdict::K;

// ---- trend predicates ----

bool last_three_equal(const TrendSeries& s) {
  const auto& e = s.entries;
  const size_t n = e.size();
  return n >= 3 && e[n - 1].second == e[n - 2].second &&
         e[n - 2].second == e[n - 3].second;
}

bool strong_growth(const TrendSeries& s) {
  const auto& e = s.entries;
  if (e.size() < 2) return false;
  const Rat& last = e.back().second;
  const Rat& mid = e[e.size() / 2].second;
  return last > 2 * mid && last > 10;
}

bool weak_growth(const TrendSeries& s) {
  const auto& e = s.entries;
  if (e.size() < 2) return false;
  for (size_t i = 1; i < e.size(); ++i)
    if (e[i].second < e[i - 1].second) return false;
  if (!(e.back().second > e.front().second)) return false;
  for (size_t i = std::max<size_t>(1, e.size() / 2); i < e.size(); ++i)
    if (e[i].second > e[i - 1].second) return true;
  return false;
}

struct VmsTrend {
  bool grows = false;
  bool bounded = false;
  long kstar = 0;
};

// Vanishing-mode trend from per-cell values: judged on the last three
// complete cells (an incomplete final cell would fake a vanishing dip).
VmsTrend classify_vms(const TrendSeries& s) {
  std::vector<Rat> comp;
  Rat gmax(0);
  for (size_t i = 0; i < s.entries.size(); ++i) {
    if (i < s.complete.size() && s.complete[i]) {
      comp.push_back(s.entries[i].second);
      if (comp.back() > gmax) gmax = comp.back();
    }
  }
  VmsTrend t;
  if (comp.size() < 3) return t;
  Rat tmin = comp[comp.size() - 3], tmax = tmin;
  for (size_t i = comp.size() - 2; i < comp.size(); ++i) {
    tmin = std::min(tmin, comp[i]);
    tmax = std::max(tmax, comp[i]);
  }
  for (long k = 1; k <= 64; ++k) {
    if (tmin > make_rat(1, k)) {
      t.grows = true;
      t.kstar = k;
      break;
    }
  }
  t.bounded = tmax < make_rat(1, 10) && 2 * tmax <= gmax;
  if (gmax == 0) t.bounded = true;  // vanished identically
  return t;
}

// ---- per-side evidence ----

struct SideTrend {
  bool positive_cert = false;
  bool small_cert = false;
  bool grew_strong = false;
  bool grew_weak = false;
  bool flat = false;
  std::string cert_text = "Unknown";
};

std::string verdict_text(const Verdict& v) {
  switch (v.kind) {
    case VK::Positive: return "Positive: " + v.certificate;
    case VK::In:
      return "In: " + v.certificate +
             (v.bound ? " (bound " + to_pq_string(*v.bound) + ")" : "");
    case VK::Unknown: return "Unknown";
  }
  return "Unknown";
}

TrendSeries observe_series(const IdealPtr& ideal,
                           const std::function<TruncationView(std::int64_t)>& viewer,
                           const std::vector<std::int64_t>& schedule) {
  TrendSeries s;
  if (ideals::mode(*ideal) == Mode::VanishingMeansSmall) {
    s.label = "mu";
    s.per_cell = true;
    ideals::Score sc = ideals::score(*ideal, viewer(schedule.back()));
    for (const auto& c : sc.cells) {
      s.entries.emplace_back(c.cell, c.mu);
      s.complete.push_back(c.complete);
    }
  } else {
    s.label = "score";
    for (auto n : schedule)
      s.entries.emplace_back(Int(static_cast<long>(n)),
                             ideals::scalar_summary(ideals::score(*ideal, viewer(n))));
  }
  return s;
}

SideTrend assess(const IdealPtr& ideal, const SetPtr& e, const TrendSeries& s) {
  SideTrend t;
  try {
    Verdict v = ideals::decide(*ideal, e);
    t.positive_cert = v.kind == VK::Positive;
    t.small_cert = v.kind == VK::In;
    t.cert_text = verdict_text(v);
  } catch (const EvalError& err) {
    t.cert_text = std::string("Unknown (structural evaluation unavailable: ") +
                  err.what() + ")";
  }
  if (s.per_cell) {
    VmsTrend vt = classify_vms(s);
    t.grew_strong = t.grew_weak = vt.grows;
    t.flat = vt.bounded;
  } else {
    t.grew_strong = strong_growth(s);
    t.grew_weak = weak_growth(s);
    t.flat = last_three_equal(s);
  }
  return t;
}

void require_increasing(const std::vector<std::int64_t>& schedule) {
  for (size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1])
      throw std::invalid_argument("schedule must be strictly increasing");
}

std::string summarize_rows(const std::vector<CheckRow>& rows) {
  size_t cons = 0, viol = 0, skip = 0, inc = 0;
  for (const auto& r : rows) {
    if (r.classification == "consistent") ++cons;
    else if (r.classification == "violated") ++viol;
    else if (r.classification == "skipped") ++skip;
    else ++inc;
  }
  return std::to_string(cons) + " consistent, " + std::to_string(viol) +
         " violated, " + std::to_string(skip) + " skipped, " +
         std::to_string(inc) + " inconclusive";
}

}  // namespace

// ---- witness catalog ----

namespace {

SetPtr gden_select(const Partition& part, const SetPtr& a) {
  SetPtr sa = setexpr::simplify(a);
  if (sa->kind == K::AP || sa->kind == K::Evens || sa->kind == K::Odds) {
    const Int start = sa->kind == K::AP ? sa->a : Int(sa->kind == K::Odds ? 1 : 0);
    const Int d = sa->kind == K::AP ? sa->b : Int(2);
    // first cell that is fully beyond the progression's start and at least
    // 2d long: from there every cell holds a point and has score >= 1/(2d)
    Int n0 = 0;
    while (true) {
      auto [lo, hi] = part.cell_range(n0);
      if (lo >= start && hi - lo + 1 >= 2 * d) break;
      ++n0;
    }
    return setexpr::set_diff(setexpr::ap(0, 1), setexpr::range_set(0, n0));
  }
  if (sa->kind == K::Blocks && part.kind == Partition::Kind::Blocks &&
      sa->a == part.base)
    return setexpr::ap(0, 1);  // every cell fully occupied
  return setexpr::img(setexpr::f_cellindex(part), a);
}

Witness make_oplus_join(IdealPtr k, IdealPtr i, IdealPtr j, setexpr::FuncPtr f,
                        setexpr::FuncPtr g) {
  Witness w;
  w.f = setexpr::f_tagjoin(f, g);
  if (w.f->cod != k->uni)
    throw UniverseError("oplus_join: branch codomains do not match the target ideal");
  w.target = std::move(k);
  w.source = ideals::dsum_ideal(i, j);
  w.name = "oplus_join(" + ideals::name(*w.target) + "," + ideals::name(*i) + "," +
           ideals::name(*j) + "," + print(*f) + "," + print(*g) + ")";
  IdealPtr il = i, ir = j;
  setexpr::FuncPtr ff = f, gg = g, hh = w.f;
  w.selector = [il, ir, ff, gg, hh](const SetPtr& a) -> SetPtr {
    if (auto parts = setexpr::tagged_parts(*a)) {
      if (ideals::decide(*il, parts->first).kind == VK::Positive)
        return setexpr::img(ff, parts->first);
      if (ideals::decide(*ir, parts->second).kind == VK::Positive)
        return setexpr::img(gg, parts->second);
    }
    return setexpr::img(hh, a);
  };
  return w;
}

}  // namespace

Witness builtin_witness(const std::string& descriptor) {
  detail::Lexer lx{descriptor};
  std::string n = lx.ident();
  Witness w;
  if (n == "identity") {
    IdealPtr target = ideals::fin_ideal(), source = ideals::fin_ideal();
    if (lx.try_eat('(')) {
      target = detail::parse_ideal_expr(lx);
      lx.expect(',', "in identity");
      source = detail::parse_ideal_expr(lx);
      lx.expect(')', "after identity arguments");
    }
    if (target->uni != Universe::Omega || source->uni != Universe::Omega)
      throw UniverseError("identity witnesses connect omega ideals");
    w.name = "identity(" + ideals::name(*target) + "," + ideals::name(*source) + ")";
    w.f = setexpr::f_id();
    w.target = std::move(target);
    w.source = std::move(source);
    w.selector = [](const SetPtr& a) { return a; };
  } else if (n == "oplus_left") {
    lx.expect('(', "after oplus_left");
    IdealPtr i = detail::parse_ideal_expr(lx);
    lx.expect(',', "in oplus_left");
    IdealPtr j = detail::parse_ideal_expr(lx);
    lx.expect(')', "after oplus_left arguments");
    w.target = ideals::dsum_ideal(i, j);
    w.source = std::move(i);
    w.f = setexpr::f_pairc0();
    w.name = "oplus_left(" + ideals::name(*w.source) + "," + ideals::name(*j) + ")";
    w.selector = [](const SetPtr& a) { return setexpr::tag0(a); };
  } else if (n == "fubini_proj") {
    lx.expect('(', "after fubini_proj");
    IdealPtr i = detail::parse_ideal_expr(lx);
    lx.expect(',', "in fubini_proj");
    IdealPtr j = detail::parse_ideal_expr(lx);
    lx.expect(')', "after fubini_proj arguments");
    if (i->uni != Universe::Omega || j->uni != Universe::Omega)
      throw UniverseError("fubini_proj components must be omega ideals");
    w.target = i;
    w.source = ideals::fubini_ideal(i, j);
    w.f = setexpr::f_proj1();
    w.name = "fubini_proj(" + ideals::name(*i) + "," + ideals::name(*j) + ")";
    w.selector = [](const SetPtr& a) { return setexpr::img(setexpr::f_proj1(), a); };
  } else if (n == "oplus_join") {
    lx.expect('(', "after oplus_join");
    IdealPtr k = detail::parse_ideal_expr(lx);
    lx.expect(',', "in oplus_join");
    IdealPtr i = detail::parse_ideal_expr(lx);
    lx.expect(',', "in oplus_join");
    IdealPtr j = detail::parse_ideal_expr(lx);
    lx.expect(',', "in oplus_join");
    setexpr::FuncPtr f = detail::parse_func_expr(lx);
    lx.expect(',', "in oplus_join");
    setexpr::FuncPtr g = detail::parse_func_expr(lx);
    lx.expect(')', "after oplus_join arguments");
    w = make_oplus_join(std::move(k), std::move(i), std::move(j), std::move(f),
                        std::move(g));
  } else if (n == "vdw_blockindex") {
    w.name = "vdw_blockindex";
    w.f = setexpr::f_blockindex(10);
    w.target = ideals::fin_ideal();
    w.source = ideals::restrict_ideal(ideals::vdw_ideal(), setexpr::blocks(10));
    setexpr::FuncPtr f = w.f;
    w.selector = [f](const SetPtr& a) { return setexpr::img(f, a); };
  } else if (n == "gden_cellindex") {
    lx.expect('(', "after gden_cellindex");
    Partition part = detail::parse_partition(lx);
    lx.expect(')', "after gden_cellindex argument");
    w.name = "gden_cellindex(" + part.str() + ")";
    w.f = setexpr::f_cellindex(part);
    w.target = ideals::fin_ideal();
    w.source = ideals::gdensity_ideal(part, false);
    w.selector = [part](const SetPtr& a) { return gden_select(part, a); };
  } else {
    lx.fail("unknown witness '" + n + "'");
  }
  if (!lx.at_end()) lx.fail("trailing input after witness descriptor");
  if (w.f->dom != w.source->uni || w.f->cod != w.target->uni)
    throw UniverseError("witness function universes do not match its ideals");
  return w;
}

Witness compose(const Witness& w1, const Witness& w2) {
  if (ideals::name(*w1.source) != ideals::name(*w2.target))
    throw std::invalid_argument("compose: chain mismatch: " +
                                ideals::name(*w1.source) + " vs " +
                                ideals::name(*w2.target));
  Witness w;
  w.f = setexpr::f_comp(w1.f, w2.f);
  w.source = w2.source;
  w.target = w1.target;
  w.name = "comp(" + w1.name + "," + w2.name + ")";
  if (w1.selector && w2.selector) {
    auto s1 = w1.selector, s2 = w2.selector;
    w.selector = [s1, s2](const SetPtr& a) { return s1(s2(a)); };
  }
  return w;
}

// ---- empirical checks ----

WitnessReport bw_check(const Witness& w, const SetPtr& a,
                       const std::vector<SetPtr>& challenges,
                       const std::vector<std::int64_t>& schedule_in,
                       std::optional<SetPtr> b_override, bool assume_positive) {
  std::vector<std::int64_t> schedule =
      schedule_in.empty() ? ideals::default_schedule(w.source->uni) : schedule_in;
  require_increasing(schedule);
  if (a->uni != w.source->uni)
    throw UniverseError("bw_check: the base set must live in the source universe");

  if (!assume_positive) {
    Verdict pv = ideals::decide(*w.source, a);
    if (pv.kind != VK::Positive)
      throw std::invalid_argument(
          "bw_check: decide(" + ideals::name(*w.source) + ", " + print(*a) +
          ") is not Positive (" + verdict_text(pv) +
          "); pass assume_positive to override");
  }

  SetPtr b;
  if (b_override) {
    b = *b_override;
  } else if (w.selector) {
    b = w.selector(a);
  } else {
    throw std::invalid_argument("bw_check: witness " + w.name +
                                " has no B-selector; supply B explicitly");
  }
  if (b->uni != w.target->uni)
    throw UniverseError("bw_check: B must live in the target universe");

  WitnessReport rep;
  rep.mode = "bw";
  rep.witness = w.name;
  rep.schedule = schedule;

  for (const SetPtr& c : challenges) {
    if (c->uni != w.target->uni)
      throw UniverseError("bw_check: challenge " + print(*c) +
                          " must live in the target universe");
    CheckRow row;
    row.a_text = print(*a);
    row.b_text = print(*b);
    row.c_text = print(*c);

    SetPtr icb = setexpr::set_inter(c, b);
    SetPtr jset = setexpr::set_inter(a, setexpr::pre(w.f, c));
    row.i_scores = observe_series(
        w.target, [&](std::int64_t n) { return setexpr::truncate(*icb, n); },
        schedule);
    row.j_scores = observe_series(
        w.source, [&](std::int64_t n) { return setexpr::truncate(*jset, n); },
        schedule);
    SideTrend ti = assess(w.target, icb, row.i_scores);
    SideTrend tj = assess(w.source, jset, row.j_scores);
    row.i_certificate = ti.cert_text;
    row.j_certificate = tj.cert_text;

    if (ti.small_cert || ti.flat) {
      row.classification = "skipped";
      row.note = "challenge misses B at scale (C∩B not observed positive)";
    } else {
      const bool i_pos = ti.positive_cert || ti.grew_strong;
      if (tj.positive_cert) {
        row.classification = "consistent";
        row.note = "source-side preimage certified positive";
      } else if ((tj.small_cert || tj.flat) && i_pos) {
        row.classification = "violated";
        row.note = "bounded source-side scores against growing target-side scores";
        rep.any_violation = true;
      } else if (tj.small_cert || tj.flat) {
        row.classification = "inconclusive";
        row.note = "source-side bounded but target-side growth not established";
      } else if (tj.grew_weak) {
        row.classification = "consistent";
        row.note = "source-side scores increase beyond earlier maxima";
      } else {
        row.classification = "inconclusive";
        row.note = "no certificate and no stable trend";
      }
    }
    rep.rows.push_back(std::move(row));
  }
  rep.summary = summarize_rows(rep.rows);
  return rep;
}

WitnessReport katetov_check(const FuncPtr& f, const IdealPtr& target,
                            const IdealPtr& source,
                            const std::vector<SetPtr>& positives,
                            const std::vector<std::int64_t>& schedule_in) {
  if (f->dom != source->uni || f->cod != target->uni)
    throw UniverseError("katetov_check: function universes do not match the ideals");
  std::vector<std::int64_t> schedule =
      schedule_in.empty() ? ideals::default_schedule(source->uni) : schedule_in;
  require_increasing(schedule);

  WitnessReport rep;
  rep.mode = "katetov";
  rep.witness = print(*f);
  rep.schedule = schedule;

  for (const SetPtr& a : positives) {
    if (a->uni != source->uni)
      throw UniverseError("katetov_check: " + print(*a) +
                          " must live in the source universe");
    CheckRow row;
    row.a_text = print(*a);
    SetPtr image = setexpr::img(f, a);
    row.b_text = print(*image);

    row.j_scores = observe_series(
        source, [&](std::int64_t n) { return setexpr::truncate(*a, n); }, schedule);
    // image scores are pointwise images of A's truncations
    row.i_scores = observe_series(
        target,
        [&](std::int64_t n) {
          return setexpr::image_view(*f, setexpr::truncate(*a, n));
        },
        schedule);
    SideTrend tj = assess(source, a, row.j_scores);
    SideTrend ti = assess(target, image, row.i_scores);
    row.i_certificate = ti.cert_text;
    row.j_certificate = tj.cert_text;

    if (tj.small_cert || tj.flat) {
      row.classification = "skipped";
      row.note = "base set not observed positive";
    } else if (ti.positive_cert) {
      row.classification = "consistent";
      row.note = "image certified positive";
    } else if ((ti.small_cert || ti.flat) && (tj.positive_cert || tj.grew_strong)) {
      row.classification = "violated";
      row.note = "image scores bounded while the base set is positive";
      rep.any_violation = true;
    } else if (ti.small_cert || ti.flat) {
      row.classification = "inconclusive";
      row.note = "image bounded but base-set positivity not established";
    } else if (ti.grew_weak) {
      row.classification = "consistent";
      row.note = "image scores increase beyond earlier maxima";
    } else {
      row.classification = "inconclusive";
      row.note = "no certificate and no stable trend";
    }
    rep.rows.push_back(std::move(row));
  }
  rep.summary = summarize_rows(rep.rows);
  return rep;
}

// ---- refuters ----

namespace {

Rat harmonic_weight(const Int& i) { return make_rat(1, Int(i + 1)); }

// Exact sum of 1/(e+1) over items[lo..hi); balanced so harmonic-style
// denominators merge in O(M(digits) log n) instead of quadratically.
Rat balanced_fiber_mass(const std::vector<std::pair<Int, Int>>& items, size_t lo,
                        size_t hi) {
  if (hi == lo) return Rat(0);
  if (hi - lo == 1) return harmonic_weight(items[lo].second);
  const size_t mid = lo + (hi - lo) / 2;
  return balanced_fiber_mass(items, lo, mid) + balanced_fiber_mass(items, mid, hi);
}

struct FiberData {
  // (value, element) pairs sorted by value then element; fiber i spans
  // items[group_start[i] .. group_start[i+1])
  std::vector<std::pair<Int, Int>> items;
  std::vector<size_t> group_start;
  std::vector<std::pair<Int, Rat>> mass;  // per fiber: (value, exact mass)
  Int outside_domain = 0;

  size_t fibers() const { return mass.size(); }
  size_t fiber_size(size_t i) const { return group_start[i + 1] - group_start[i]; }
};

FiberData collect_fibers(const setexpr::FuncExpr& f, std::int64_t cutoff) {
  FiberData fd;
  fd.items.reserve(static_cast<size_t>(cutoff));
  for (std::int64_t i = 0; i < cutoff; ++i) {
    auto v = setexpr::apply(f, omega_pt(Int(i)));
    if (!v) {
      ++fd.outside_domain;
      continue;
    }
    fd.items.emplace_back(v->x, Int(i));
  }
  std::sort(fd.items.begin(), fd.items.end());
  for (size_t i = 0; i < fd.items.size();) {
    size_t j = i;
    while (j < fd.items.size() && fd.items[j].first == fd.items[i].first) ++j;
    fd.group_start.push_back(i);
    fd.mass.emplace_back(fd.items[i].first, balanced_fiber_mass(fd.items, i, j));
    i = j;
  }
  fd.group_start.push_back(fd.items.size());
  return fd;
}

}  // namespace

RefuterOutput refute_summable(const FuncPtr& f, std::int64_t cutoff,
                              const Rat& target) {
  if (f->dom != Universe::Omega || f->cod != Universe::Omega)
    throw UniverseError("refute_summable expects an omega-to-omega function");
  if (cutoff < 2) throw std::invalid_argument("refute_summable: cutoff too small");

  RefuterOutput out;
  out.construction = "summable";
  out.cutoff = cutoff;
  FiberData fd = collect_fibers(*f, cutoff);
  if (fd.outside_domain > 0)
    out.evidence.emplace_back("points_outside_domain", Rat(fd.outside_domain));

  // fiber route: one fiber already carries positive mass
  size_t best = fd.fibers();
  for (size_t i = 0; i < fd.fibers(); ++i)
    if (best == fd.fibers() || fd.mass[i].second > fd.mass[best].second) best = i;
  if (best < fd.fibers() && fd.mass[best].second >= target) {
    out.case_tag = "fiber";
    out.a = setexpr::pre(f, setexpr::finite_naturals({fd.mass[best].first}));
    out.a_text = print(*out.a);
    out.evidence.emplace_back("fiber_value", Rat(fd.mass[best].first));
    out.evidence.emplace_back("fiber_mass", fd.mass[best].second);
    out.evidence.emplace_back("fiber_size",
                              Rat(Int(static_cast<long>(fd.fiber_size(best)))));
    out.note = "a single fiber carries mass >= " + to_pq_string(target) +
               "; its image is one point, so no infinite B inside the image exists";
    return out;
  }

  // case 1: greedy c_0 < c_1 < ... over observed values with mass(c_n) <= 2^-n
  const unsigned long picks_wanted = floor_log2(Int(cutoff));
  std::vector<Int> c_list;
  std::vector<std::pair<Int, Rat>> c_table;
  for (const auto& [v, m] : fd.mass) {
    const unsigned long n = c_list.size();
    if (n >= picks_wanted) break;
    if (m * pow2(static_cast<long>(n)) <= 1) {  // m <= 2^-n
      c_list.push_back(v);
      c_table.emplace_back(Int(static_cast<long>(n)), m);
    }
  }
  if (c_list.size() == picks_wanted) {
    out.case_tag = "case1";
    out.a = setexpr::range_set(0, cutoff);
    out.a_text = print(*out.a);
    out.table = c_table;
    Rat total(0);
    for (const auto& [n, m] : c_table) total += m;
    out.evidence.emplace_back("preimage_mass", total);
    out.evidence.emplace_back("picks", Rat(Int(static_cast<long>(c_list.size()))));
    out.note = "challenge C = " + print(*setexpr::finite_naturals(c_list)) +
               " has fiber masses <= 2^-n, so its preimage carries finite mass";
    auto masses = std::make_shared<std::vector<std::pair<Int, Rat>>>(
        std::move(fd.mass));
    out.responder = [masses](const SetPtr& b) {
      ResponderResult r;
      std::vector<Int> kept;
      for (const auto& [v, m] : *masses) {
        const unsigned long n = kept.size();
        if (m * pow2(static_cast<long>(n)) <= 1 &&
            setexpr::contains(*b, omega_pt(v))) {
          kept.push_back(v);
          r.table.emplace_back(Int(static_cast<long>(n)), m);
        }
      }
      Rat total(0);
      for (const auto& [n, m] : r.table) total += m;
      r.c = setexpr::finite_naturals(kept);
      r.evidence.emplace_back("preimage_mass", total);
      r.note = "greedy thinning of B to fibers of mass <= 2^-n";
      return r;
    };
    return out;
  }

  // case 2: a floor p under infinitely many fiber masses
  Rat q(0);
  for (size_t i = fd.fibers() / 2; i < fd.fibers(); ++i)
    q = std::max(q, fd.mass[i].second);
  const Rat p = q / 2;
  std::vector<size_t> z;  // fiber indices with mass above the floor
  for (size_t i = 0; i < fd.fibers(); ++i)
    if (fd.mass[i].second > p) z.push_back(i);

  if (p > 0 && z.size() >= 8) {
    out.case_tag = "case2";
    // least k with 1/(k+1) < p
    Int kp1 = p.get_den() / p.get_num() + 1;
    while (!(make_rat(1, kp1) < p)) ++kp1;
    const Int k = kp1 - 1;
    std::vector<Int> a_elems;
    std::map<Int, Rat> r_by_value;  // fiber value -> selected mass r_n
    for (size_t idx = 0; idx < z.size(); ++idx) {
      const Int n = k + Int(static_cast<long>(idx));
      const Rat threshold = make_rat(1, Int(n + 1));
      Rat sum(0);
      for (size_t e = fd.group_start[z[idx]]; e < fd.group_start[z[idx] + 1]; ++e) {
        if (sum >= threshold) break;
        sum += harmonic_weight(fd.items[e].second);
        a_elems.push_back(fd.items[e].second);
      }
      out.table.emplace_back(n, sum);
      r_by_value[fd.mass[z[idx]].first] = sum;
    }
    std::sort(a_elems.begin(), a_elems.end());
    out.a = setexpr::finite_naturals(a_elems);
    out.a_text = "selected elements of the fat fibers (|A| = " +
                 std::to_string(a_elems.size()) + ")";
    out.evidence.emplace_back("p_threshold", p);
    out.evidence.emplace_back("q_tail_max", q);
    out.evidence.emplace_back("k", Rat(k));
    out.evidence.emplace_back("z_count", Rat(Int(static_cast<long>(z.size()))));
    out.note = "per-fiber selected masses r_n >= 1/(n+1) while r_n -> 0; any "
               "infinite B thins to a challenge with summable preimage";
    auto rv = std::make_shared<std::map<Int, Rat>>(std::move(r_by_value));
    out.responder = [rv](const SetPtr& b) {
      ResponderResult r;
      std::vector<Int> kept;
      for (const auto& [v, rm] : *rv) {
        const unsigned long n = kept.size();
        if (rm * pow2(static_cast<long>(n)) <= 1 && setexpr::contains(*b, omega_pt(v))) {
          kept.push_back(v);
          r.table.emplace_back(Int(static_cast<long>(n)), rm);
        }
      }
      Rat total(0);
      for (const auto& [n, m] : r.table) total += m;
      r.c = setexpr::finite_naturals(kept);
      r.evidence.emplace_back("selected_mass", total);
      r.note = "thinned B to fibers whose selected masses are <= 2^-n";
      return r;
    };
    return out;
  }

  // not classifiable at this cutoff: report both partial constructions
  out.case_tag = "unknown";
  out.a = setexpr::range_set(0, cutoff);
  out.a_text = print(*out.a);
  out.table = c_table;
  if (best < fd.fibers()) {
    out.evidence.emplace_back("max_fiber_mass", fd.mass[best].second);
    out.evidence.emplace_back("max_fiber_value", Rat(fd.mass[best].first));
  }
  out.evidence.emplace_back("case1_picks",
                            Rat(Int(static_cast<long>(c_list.size()))));
  out.evidence.emplace_back("case1_picks_wanted",
                            Rat(Int(static_cast<long>(picks_wanted))));
  out.evidence.emplace_back("case2_p", p);
  out.evidence.emplace_back("case2_z_count", Rat(Int(static_cast<long>(z.size()))));
  out.note = "cutoff too small to classify: the greedy sparse-fiber run did not "
             "complete and no fat-fiber floor with >= 8 fibers was found";
  return out;
}

RefuterOutput refute_edminus(const FuncPtr& f, std::int64_t cutoff) {
  if (f->dom != Universe::OmegaSq || f->cod != Universe::Omega)
    throw UniverseError("refute_edminus expects a square-to-omega function");
  if (cutoff < 2) throw std::invalid_argument("refute_edminus: cutoff must be >= 2");

  RefuterOutput out;
  out.construction = "edminus";
  out.case_tag = "greedy";
  out.cutoff = cutoff;

  std::set<Int> used;
  // per row: the chosen columns and their values, in pick order
  std::vector<std::vector<std::pair<Int, Int>>> bundles;
  long fresh_rows = 0, rowlocal_rows = 0, degenerate_rows = 0;
  std::vector<Point> a_pts;
  for (std::int64_t n = 0; n < cutoff; ++n) {
    std::vector<std::pair<Int, Int>> picks;
    std::set<Int> picked_cols, row_values;
    const size_t want = static_cast<size_t>(n) + 1;
    for (std::int64_t kc = 0; kc < cutoff && picks.size() < want; ++kc) {
      auto v = setexpr::apply(*f, pair_pt(Int(n), Int(kc)));
      if (v && !used.count(v->x)) {
        picks.emplace_back(Int(kc), v->x);
        picked_cols.insert(Int(kc));
        row_values.insert(v->x);
        used.insert(v->x);
      }
    }
    bool rowlocal = false, degenerate = false;
    if (picks.size() < want) {
      rowlocal = true;  // fall back to freshness within the row only
      for (std::int64_t kc = 0; kc < cutoff && picks.size() < want; ++kc) {
        if (picked_cols.count(Int(kc))) continue;
        auto v = setexpr::apply(*f, pair_pt(Int(n), Int(kc)));
        if (v && !row_values.count(v->x)) {
          picks.emplace_back(Int(kc), v->x);
          picked_cols.insert(Int(kc));
          row_values.insert(v->x);
          used.insert(v->x);
        }
      }
    }
    if (picks.size() < want) {
      degenerate = true;  // accept repeated values on the least unused columns
      for (std::int64_t kc = 0; kc < cutoff && picks.size() < want; ++kc) {
        if (picked_cols.count(Int(kc))) continue;
        auto v = setexpr::apply(*f, pair_pt(Int(n), Int(kc)));
        if (v) {
          picks.emplace_back(Int(kc), v->x);
          picked_cols.insert(Int(kc));
        }
      }
    }
    if (degenerate) ++degenerate_rows;
    else if (rowlocal) ++rowlocal_rows;
    else ++fresh_rows;
    for (const auto& [kc, v] : picks) a_pts.push_back(pair_pt(Int(n), kc));
    out.table.emplace_back(Int(static_cast<long>(n)),
                           Rat(Int(static_cast<long>(row_values.size()))));
    bundles.push_back(std::move(picks));
  }
  std::sort(a_pts.begin(), a_pts.end(), [](const Point& x, const Point& y) {
    return point_less(Universe::OmegaSq, x, y);
  });
  out.a = setexpr::finite(Universe::OmegaSq, a_pts);
  out.a_text = "one bundle of n+1 chosen cells per row n (|A| = " +
               std::to_string(a_pts.size()) + ")";
  out.evidence.emplace_back("rows", Rat(Int(cutoff)));
  out.evidence.emplace_back("fresh_rows", Rat(Int(fresh_rows)));
  out.evidence.emplace_back("rowlocal_rows", Rat(Int(rowlocal_rows)));
  out.evidence.emplace_back("degenerate_rows", Rat(Int(degenerate_rows)));
  out.evidence.emplace_back("cells", Rat(Int(static_cast<long>(a_pts.size()))));
  out.note = degenerate_rows
                 ? "some rows could not receive distinct values (degenerate "
                   "bundles); sections of the thinned preimage may span those rows"
                 : "all bundle values pairwise distinct across the grid";

  auto shared_bundles =
      std::make_shared<std::vector<std::vector<std::pair<Int, Int>>>>(
          std::move(bundles));
  out.responder = [shared_bundles](const SetPtr& b) {
    ResponderResult r;
    std::set<Int> c_vals;
    for (const auto& bundle : *shared_bundles) {
      for (const auto& [kc, v] : bundle) {
        if (!c_vals.count(v) && setexpr::contains(*b, omega_pt(v))) {
          c_vals.insert(v);
          break;  // at most one value per bundle
        }
      }
    }
    std::vector<Int> c_list(c_vals.begin(), c_vals.end());
    r.c = setexpr::finite_naturals(c_list);
    Int max_section = 0;
    for (size_t n = 0; n < shared_bundles->size(); ++n) {
      Int section = 0;
      for (const auto& [kc, v] : (*shared_bundles)[n])
        if (c_vals.count(v)) ++section;
      if (section > 0)
        r.table.emplace_back(Int(static_cast<long>(n)), Rat(section));
      max_section = std::max(max_section, section);
    }
    r.evidence.emplace_back("c_size", Rat(Int(static_cast<long>(c_list.size()))));
    r.evidence.emplace_back("max_section", Rat(max_section));
    r.note = "one value kept per bundle; section sizes of A∩f⁻¹[C] listed per row";
    return r;
  };
  return out;
}

namespace {

struct DyadicInterval {
  int level = 1;
  Int index = 0;  // [index*2^-level, (index+1)*2^-level), last one closed
  Int denom() const { return Int(1) << static_cast<unsigned long>(level); }
  Rat lo() const { return make_rat(index, denom()); }
  Rat hi() const { return make_rat(Int(index + 1), denom()); }
  bool closed_right() const { return Int(index + 1) == denom(); }
  bool contains(const Rat& x) const {
    if (x < lo()) return false;
    return closed_right() ? x <= hi() : x < hi();
  }
};

std::vector<DyadicInterval> level_major_intervals(int count) {
  std::vector<DyadicInterval> out;
  for (int level = 1; static_cast<int>(out.size()) < count; ++level) {
    const Int cells = Int(1) << static_cast<unsigned long>(level);
    for (Int j = 0; j < cells && static_cast<int>(out.size()) < count; ++j)
      out.push_back({level, j});
  }
  return out;
}

}  // namespace

RefuterOutput refute_nwd(const FuncPtr& f, std::int64_t cutoff, int intervals) {
  if (f->dom != Universe::QUnit || f->cod != Universe::Omega)
    throw UniverseError("refute_nwd expects a rationals-to-omega function");
  if (cutoff < 2 || intervals < 1)
    throw std::invalid_argument("refute_nwd: cutoff must be >= 2, intervals >= 1");

  RefuterOutput out;
  out.construction = "nwd";
  out.cutoff = cutoff;

  const std::vector<Point> rats = qunit_enumerate(cutoff);
  const auto ivs = level_major_intervals(intervals);
  std::set<Int> used_values;
  std::set<std::pair<Int, Int>> used_points;
  struct Pick {
    Point p;
    Rat x;
    Int value;
    int level;
  };
  std::vector<Pick> picks;
  bool failed = false;
  for (const auto& iv : ivs) {
    bool found = false;
    for (const Point& p : rats) {
      if (used_points.count({p.x, p.y})) continue;
      Rat x = make_rat(p.x, p.y);
      if (!iv.contains(x)) continue;
      auto v = setexpr::apply(*f, p);
      if (!v || used_values.count(v->x)) continue;
      used_values.insert(v->x);
      used_points.insert({p.x, p.y});
      picks.push_back({p, x, v->x, iv.level});
      found = true;
      break;
    }
    if (!found) {
      failed = true;
      break;
    }
  }

  if (failed) {
    // fiber branch: some value's fiber must be dense; take the best one
    std::map<Int, std::vector<Point>> fibers;
    for (const Point& p : rats) {
      auto v = setexpr::apply(*f, p);
      if (v) fibers[v->x].push_back(p);
    }
    const Int* best_v = nullptr;
    Rat best_score(-1);
    Int best_size = 0;
    for (auto& [v, pts] : fibers) {
      std::sort(pts.begin(), pts.end(), [](const Point& x, const Point& y) {
        return point_less(Universe::QUnit, x, y);
      });
      TruncationView view{Universe::QUnit, cutoff, pts};
      Rat s = ideals::scalar_summary(ideals::score(*ideals::nwd_ideal(), view));
      if (s > best_score) {
        best_score = s;
        best_v = &v;
        best_size = Int(static_cast<long>(pts.size()));
      }
    }
    if (!best_v || best_score < 1)
      throw std::invalid_argument(
          "refute_nwd: cutoff too small to fill " + std::to_string(intervals) +
          " intervals or exhibit a dense fiber");
    out.case_tag = "first_branch";
    out.a = setexpr::pre(f, setexpr::finite_naturals({*best_v}));
    out.a_text = print(*out.a);
    out.evidence.emplace_back("fiber_value", Rat(*best_v));
    out.evidence.emplace_back("fiber_nwd_score", best_score);
    out.evidence.emplace_back("fiber_size", Rat(best_size));
    out.evidence.emplace_back(
        "picks_before_failure", Rat(Int(static_cast<long>(picks.size()))));
    out.note = "the greedy fresh-value scan stalled, so some fiber is dense at "
               "scale; its image is one point, leaving no infinite B inside it";
    return out;
  }

  out.case_tag = "greedy";
  std::vector<Point> a_pts;
  for (const auto& pk : picks) a_pts.push_back(pk.p);
  std::sort(a_pts.begin(), a_pts.end(), [](const Point& x, const Point& y) {
    return point_less(Universe::QUnit, x, y);
  });
  out.a = setexpr::finite(Universe::QUnit, a_pts);
  out.a_text = "one fresh-valued rational per dyadic interval (|A| = " +
               std::to_string(a_pts.size()) + ")";
  const int max_level = picks.empty() ? 0 : picks.back().level;
  for (int lv = 1; lv <= max_level; ++lv) {
    std::vector<Point> upto;
    for (const auto& pk : picks)
      if (pk.level <= lv) upto.push_back(pk.p);
    std::sort(upto.begin(), upto.end(), [](const Point& x, const Point& y) {
      return point_less(Universe::QUnit, x, y);
    });
    TruncationView view{Universe::QUnit, cutoff, upto};
    out.table.emplace_back(Int(lv),
                           ideals::scalar_summary(ideals::score(*ideals::nwd_ideal(), view)));
  }
  out.evidence.emplace_back("picks", Rat(Int(static_cast<long>(picks.size()))));
  out.evidence.emplace_back("levels", Rat(Int(max_level)));
  if (!out.table.empty())
    out.evidence.emplace_back("a_nwd_score", out.table.back().second);
  out.note = "A hits every dyadic interval down to the reported level, so its "
             "run scores climb; the responder bisects any B to a convergent "
             "challenge";

  auto shared_picks = std::make_shared<std::vector<Pick>>(std::move(picks));
  const std::int64_t n_cutoff = cutoff;
  out.responder = [shared_picks, n_cutoff](const SetPtr& b) {
    ResponderResult r;
    std::vector<const Pick*> cands;
    for (const auto& pk : *shared_picks)
      if (setexpr::contains(*b, omega_pt(pk.value))) cands.push_back(&pk);
    if (cands.empty()) {
      r.c = setexpr::finite_naturals({});
      r.note = "B contains none of the picked values";
      return r;
    }
    Rat lo(0), hi(1);
    int depth = 0;
    while (true) {
      const Rat mid = (lo + hi) / 2;
      std::vector<const Pick*> left, right;
      for (const Pick* pk : cands)
        (pk->x < mid ? left : right).push_back(pk);
      const auto& chosen = left.size() >= right.size() ? left : right;
      if (chosen.size() < 2) break;
      if (left.size() >= right.size()) hi = mid;
      else lo = mid;
      cands = chosen;
      ++depth;
      r.table.emplace_back(Int(depth), Rat(Int(static_cast<long>(cands.size()))));
    }
    std::vector<Int> c_vals;
    std::vector<Point> c_pts;
    for (const Pick* pk : cands) {
      c_vals.push_back(pk->value);
      c_pts.push_back(pk->p);
    }
    std::sort(c_vals.begin(), c_vals.end());
    std::sort(c_pts.begin(), c_pts.end(), [](const Point& x, const Point& y) {
      return point_less(Universe::QUnit, x, y);
    });
    r.c = setexpr::finite_naturals(c_vals);
    TruncationView view{Universe::QUnit, n_cutoff, c_pts};
    r.evidence.emplace_back("depth", Rat(Int(depth)));
    r.evidence.emplace_back("cluster_size",
                            Rat(Int(static_cast<long>(cands.size()))));
    r.evidence.emplace_back(
        "preimage_nwd_score",
        ideals::scalar_summary(ideals::score(*ideals::nwd_ideal(), view)));
    r.evidence.emplace_back("interval_lo", lo);
    r.evidence.emplace_back("interval_hi", hi);
    r.note = "nested bisection toward the densest half (ties go left); C is the "
             "f-image of the surviving convergent cluster";
    return r;
  };
  return out;
}

}  // namespace idealab::reductions

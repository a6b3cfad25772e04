#include "idealab/report.hpp"

#include <cstdio>
#include <ctime>
#include <sstream>

#include "idealab/point.hpp"
#include "idealab/setexpr.hpp"

namespace idealab::report {

namespace {

constexpr std::size_t kMaxListed = 10000;  // cap on serialized index lists

std::string approx_str(const Rat& r) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", r.get_d());
  return buf;
}

Json int_json(const Int& n) {
  if (n.fits_slong_p()) return Json(static_cast<std::int64_t>(n.get_si()));
  return Json(n.get_str());
}

Json series_json(const std::vector<std::pair<Int, Rat>>& entries,
                 const char* key) {
  Json arr = Json::array();
  for (const auto& [n, v] : entries) {
    Json row;
    row[key] = int_json(n);
    row["score"] = rat_json(v);
    arr.push_back(std::move(row));
  }
  return arr;
}

Json trend_json(const reductions::TrendSeries& t) {
  Json j;
  j["label"] = t.label;
  j["per_cell"] = t.per_cell;
  Json arr = Json::array();
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    Json row;
    row[t.per_cell ? "cell" : "N"] = int_json(t.entries[i].first);
    row["score"] = rat_json(t.entries[i].second);
    if (t.per_cell && i < t.complete.size()) row["complete"] = bool(t.complete[i]);
    arr.push_back(std::move(row));
  }
  j["entries"] = std::move(arr);
  return j;
}

Json evidence_json(const std::vector<std::pair<std::string, Rat>>& ev) {
  Json arr = Json::array();
  for (const auto& [name, v] : ev) {
    Json row;
    row["name"] = name;
    row["value"] = rat_json(v);
    arr.push_back(std::move(row));
  }
  return arr;
}

Json interval_json(const Rat& lo, const Rat& hi) {
  Json j;
  j["lo"] = rat_json(lo);
  j["hi"] = rat_json(hi);
  return j;
}

Json exclusion_rows_json(const std::vector<bw_engine::ExclusionRow>& rows) {
  Json arr = Json::array();
  for (const auto& row : rows) {
    Json r;
    r["eps"] = rat_json(row.eps);
    r["count"] = row.count;
    r["score"] = rat_json(row.score);
    arr.push_back(std::move(r));
  }
  return arr;
}

Json sections_json(const std::vector<std::pair<std::int64_t, std::int64_t>>& s) {
  Json arr = Json::array();
  for (const auto& [k, n] : s) arr.push_back(Json::array({k, n}));
  return arr;
}

std::string iso_utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// shared by tables: "p/q (~0.123)" with integers left bare
std::string rat_text(const Rat& r) {
  std::string pq = to_pq_string(r);
  if (r.get_den() == 1) return pq;
  return pq + " (~" + approx_str(r) + ")";
}

void series_lines(std::ostringstream& os, const std::string& indent,
                  const reductions::TrendSeries& t) {
  os << indent << t.label << (t.per_cell ? " per cell:" : " per cutoff:");
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    os << "  " << t.entries[i].first.get_str() << " -> "
       << to_pq_string(t.entries[i].second);
    if (t.per_cell && i < t.complete.size() && !t.complete[i]) os << "?";
  }
  os << "\n";
}

}  // namespace

Json rat_json(const Rat& r) {
  Json j;
  j["pq"] = to_pq_string(r);
  j["approx"] = r.get_d();
  return j;
}

Json verdict_json(const ideals::Verdict& v) {
  Json j;
  switch (v.kind) {
    case ideals::Verdict::K::In: j["verdict"] = "In"; break;
    case ideals::Verdict::K::Positive: j["verdict"] = "Positive"; break;
    case ideals::Verdict::K::Unknown: j["verdict"] = "Unknown"; break;
  }
  if (v.kind != ideals::Verdict::K::Unknown) j["certificate"] = v.certificate;
  if (v.bound) j["bound"] = rat_json(*v.bound);
  if (v.kind == ideals::Verdict::K::Unknown) {
    Json diag = Json::array();
    for (const auto& s : v.diagnostics) {
      Json d;
      d["label"] = s.label;
      d["entries"] = series_json(s.entries, "N");
      diag.push_back(std::move(d));
    }
    j["diagnostics"] = std::move(diag);
  }
  return j;
}

Json score_json(const ideals::Score& s) {
  Json j;
  switch (s.kind) {
    case ideals::Score::K::Scalar:
      j["kind"] = "scalar";
      j["value"] = rat_json(s.scalar);
      break;
    case ideals::Score::K::Cells: {
      j["kind"] = "cells";
      Json arr = Json::array();
      for (const auto& c : s.cells) {
        Json row;
        row["cell"] = int_json(c.cell);
        row["mu"] = rat_json(c.mu);
        row["complete"] = c.complete;
        arr.push_back(std::move(row));
      }
      j["cells"] = std::move(arr);
      break;
    }
    case ideals::Score::K::Pair:
      j["kind"] = "pair";
      j["first"] = score_json(*s.first);
      j["second"] = score_json(*s.second);
      break;
    case ideals::Score::K::Sections: {
      j["kind"] = "sections";
      Json sizes = Json::array();
      for (const auto& [m, n] : s.sections.section_sizes)
        sizes.push_back(Json::array({int_json(m), int_json(n)}));
      Json thr = Json::array();
      for (const auto& [t, n] : s.sections.threshold_counts)
        thr.push_back(Json::array({int_json(t), int_json(n)}));
      j["section_sizes"] = std::move(sizes);
      j["threshold_counts"] = std::move(thr);
      break;
    }
  }
  j["summary"] = rat_json(ideals::scalar_summary(s));
  return j;
}

Json ap_json(const ideals::ApResult& r) {
  Json j;
  j["len"] = int_json(r.len);
  j["first"] = int_json(r.a);
  j["difference"] = int_json(r.d);
  return j;
}

Json vdw_json(const ideals::VdwSearchResult& r) {
  Json j;
  j["length"] = r.length;
  j["colors"] = r.colors;
  if (r.threshold) j["threshold"] = *r.threshold;
  else j["threshold"] = nullptr;
  j["witness_coloring"] = r.witness_coloring;
  return j;
}

Json witness_json(const reductions::WitnessReport& rep) {
  Json j;
  j["mode"] = rep.mode;
  j["witness"] = rep.witness;
  j["schedule"] = rep.schedule;
  Json rows = Json::array();
  for (const auto& row : rep.rows) {
    Json r;
    r["A"] = row.a_text;
    r["B"] = row.b_text;
    r["C"] = row.c_text;
    r["schedule"] = rep.schedule;
    r["scores_I"] = trend_json(row.i_scores);
    r["scores_J"] = trend_json(row.j_scores);
    if (!row.i_certificate.empty()) r["i_certificate"] = row.i_certificate;
    if (!row.j_certificate.empty()) r["j_certificate"] = row.j_certificate;
    r["classification"] = row.classification;
    if (!row.note.empty()) r["note"] = row.note;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["summary"] = rep.summary;
  j["any_violation"] = rep.any_violation;
  return j;
}

Json responder_json(const reductions::ResponderResult& r) {
  Json j;
  j["C"] = setexpr::print(*r.c);
  j["evidence"] = evidence_json(r.evidence);
  j["table"] = series_json(r.table, "n");
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json refuter_json(const reductions::RefuterOutput& out) {
  Json j;
  j["construction"] = out.construction;
  j["case"] = out.case_tag;
  j["cutoff"] = out.cutoff;
  j["A"] = out.a_text;
  j["evidence"] = evidence_json(out.evidence);
  j["table"] = series_json(out.table, "n");
  if (!out.note.empty()) j["note"] = out.note;
  j["has_responder"] = bool(out.responder);
  return j;
}

Json extraction_json(const bw_engine::ExtractionResult& res) {
  Json j;
  j["ideal"] = res.ideal;
  j["universe"] = universe_name(res.uni);
  j["length"] = res.len;
  j["prefix"] = res.prefix;
  j["interval"] = interval_json(res.lo, res.hi);
  j["b_size"] = static_cast<std::int64_t>(res.b.size());
  if (res.b.size() > kMaxListed) {
    j["b"] = std::vector<std::int64_t>(res.b.begin(),
                                       res.b.begin() + kMaxListed);
    j["b_truncated"] = true;
  } else {
    j["b"] = res.b;
  }
  Json trace = Json::array();
  for (const auto& t : res.trace) {
    Json row;
    row["level"] = t.level;
    row["chosen"] = t.chosen;
    row["score0"] = rat_json(t.score0);
    row["score1"] = rat_json(t.score1);
    trace.push_back(std::move(row));
  }
  j["trace"] = std::move(trace);
  j["exclusions"] = exclusion_rows_json(res.exclusions);
  if (!res.source_exclusions.empty())
    j["source_exclusions"] = exclusion_rows_json(res.source_exclusions);
  if (!res.note.empty()) j["note"] = res.note;
  return j;
}

Json fin2_json(const bw_engine::Fin2ExtractionResult& res) {
  Json j;
  j["rows"] = res.rows;
  j["cols"] = res.cols;
  j["depth"] = res.depth;
  j["interval"] = interval_json(res.lo, res.hi);
  Json rows = Json::array();
  for (std::int64_t n = 0; n < res.rows; ++n) {
    Json r;
    r["row"] = n;
    r["limit"] = interval_json(res.row_limits[n].first, res.row_limits[n].second);
    r["m_size"] = static_cast<std::int64_t>(res.row_b[n].size());
    r["m"] = res.row_b[n];
    rows.push_back(std::move(r));
  }
  j["row_extractions"] = std::move(rows);
  j["a_size"] = static_cast<std::int64_t>(res.a.size());
  Json a = Json::array();
  const std::size_t a_n = std::min(res.a.size(), kMaxListed);
  for (std::size_t i = 0; i < a_n; ++i)
    a.push_back(Json::array({int_json(res.a[i].x), int_json(res.a[i].y)}));
  j["A"] = std::move(a);
  if (res.a.size() > kMaxListed) j["a_truncated"] = true;
  Json ex = Json::array();
  for (const auto& e : res.exclusions) {
    Json row;
    row["eps"] = rat_json(e.eps);
    row["a_count"] = e.a_count;
    row["a_sections"] = sections_json(e.a_sections);
    row["grid_count"] = e.grid_count;
    row["grid_sections"] = sections_json(e.grid_sections);
    row["full_rows"] = e.full_rows;
    row["cols_beyond"] = e.cols_beyond;
    ex.push_back(std::move(row));
  }
  j["exclusions"] = std::move(ex);
  if (!res.note.empty()) j["note"] = res.note;
  return j;
}

Json envelope(const std::string& command, Json payload) {
  Json j;
  j["version"] = "idealab/1";
  j["command"] = command;
  j["generated_at"] = iso_utc_now();
  for (auto& [key, value] : payload.items()) j[key] = std::move(value);
  return j;
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

std::string series_csv(const std::vector<std::pair<Int, Rat>>& series) {
  std::ostringstream os;
  os << "N,score_pq\n";
  for (const auto& [n, v] : series)
    os << n.get_str() << "," << to_pq_string(v) << "\n";
  return os.str();
}

std::string witness_csv(const reductions::WitnessReport& rep) {
  std::ostringstream os;
  os << "row,series,N,score_pq\n";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    for (const auto& [n, v] : rep.rows[i].i_scores.entries)
      os << i << ",I," << n.get_str() << "," << to_pq_string(v) << "\n";
    for (const auto& [n, v] : rep.rows[i].j_scores.entries)
      os << i << ",J," << n.get_str() << "," << to_pq_string(v) << "\n";
  }
  return os.str();
}

std::string verdict_table(const ideals::Verdict& v) {
  std::ostringstream os;
  switch (v.kind) {
    case ideals::Verdict::K::In: os << "verdict: In\n"; break;
    case ideals::Verdict::K::Positive: os << "verdict: Positive\n"; break;
    case ideals::Verdict::K::Unknown: os << "verdict: Unknown\n"; break;
  }
  if (!v.certificate.empty()) os << "certificate: " << v.certificate << "\n";
  if (v.bound) os << "bound: " << rat_text(*v.bound) << "\n";
  for (const auto& s : v.diagnostics) {
    os << s.label << ":";
    for (const auto& [n, val] : s.entries)
      os << "  " << n.get_str() << " -> " << to_pq_string(val);
    os << "\n";
  }
  return os.str();
}

std::string score_table(const ideals::Score& s) {
  std::ostringstream os;
  switch (s.kind) {
    case ideals::Score::K::Scalar:
      os << "score: " << rat_text(s.scalar) << "\n";
      break;
    case ideals::Score::K::Cells:
      os << "cell  mu\n";
      for (const auto& c : s.cells)
        os << c.cell.get_str() << (c.complete ? "  " : "? ")
           << rat_text(c.mu) << "\n";
      break;
    case ideals::Score::K::Pair:
      os << "first half:\n" << score_table(*s.first);
      os << "second half:\n" << score_table(*s.second);
      break;
    case ideals::Score::K::Sections:
      os << "column  section_size\n";
      for (const auto& [m, n] : s.sections.section_sizes)
        os << m.get_str() << "  " << n.get_str() << "\n";
      os << "threshold  columns_at_or_above\n";
      for (const auto& [t, n] : s.sections.threshold_counts)
        os << t.get_str() << "  " << n.get_str() << "\n";
      break;
  }
  os << "summary: " << rat_text(ideals::scalar_summary(s)) << "\n";
  return os.str();
}

std::string witness_table(const reductions::WitnessReport& rep) {
  std::ostringstream os;
  os << "mode: " << rep.mode << "\nwitness: " << rep.witness << "\nschedule:";
  for (auto n : rep.schedule) os << " " << n;
  os << "\n";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    os << "--- row " << i << " ---\n";
    os << "A = " << row.a_text << "\n";
    if (!row.b_text.empty()) os << "B = " << row.b_text << "\n";
    if (!row.c_text.empty()) os << "C = " << row.c_text << "\n";
    series_lines(os, "I ", row.i_scores);
    series_lines(os, "J ", row.j_scores);
    if (!row.i_certificate.empty()) os << "I certificate: " << row.i_certificate << "\n";
    if (!row.j_certificate.empty()) os << "J certificate: " << row.j_certificate << "\n";
    os << "classification: " << row.classification;
    if (!row.note.empty()) os << "  (" << row.note << ")";
    os << "\n";
  }
  os << "summary: " << rep.summary << "\n";
  return os.str();
}

std::string refuter_table(const reductions::RefuterOutput& out) {
  std::ostringstream os;
  os << "construction: " << out.construction << "\ncase: " << out.case_tag
     << "\ncutoff: " << out.cutoff << "\nA = " << out.a_text << "\n";
  for (const auto& [name, v] : out.evidence)
    os << name << " = " << rat_text(v) << "\n";
  if (!out.table.empty()) {
    os << "n  value\n";
    const std::size_t shown = std::min<std::size_t>(out.table.size(), 24);
    for (std::size_t i = 0; i < shown; ++i)
      os << out.table[i].first.get_str() << "  "
         << to_pq_string(out.table[i].second) << "\n";
    if (shown < out.table.size())
      os << "... (" << out.table.size() - shown << " more rows)\n";
  }
  if (!out.note.empty()) os << "note: " << out.note << "\n";
  return os.str();
}

std::string extraction_table(const bw_engine::ExtractionResult& res) {
  std::ostringstream os;
  os << "ideal: " << res.ideal << "\nuniverse: " << universe_name(res.uni)
     << "\nlength: " << res.len << "\nprefix: "
     << (res.prefix.empty() ? "(root)" : res.prefix) << "\ninterval: ["
     << to_pq_string(res.lo) << ", " << to_pq_string(res.hi) << ")\n";
  for (const auto& t : res.trace)
    os << "level " << t.level << ": score0 = " << rat_text(t.score0)
       << ", score1 = " << rat_text(t.score1) << " -> " << t.chosen << "\n";
  os << "selected " << res.b.size() << " positions\n";
  if (!res.exclusions.empty()) {
    os << "eps  excluded  score\n";
    for (const auto& row : res.exclusions)
      os << to_pq_string(row.eps) << "  " << row.count << "  "
         << rat_text(row.score) << "\n";
  }
  if (!res.source_exclusions.empty()) {
    os << "source eps  excluded  score\n";
    for (const auto& row : res.source_exclusions)
      os << to_pq_string(row.eps) << "  " << row.count << "  "
         << rat_text(row.score) << "\n";
  }
  if (!res.note.empty()) os << "note: " << res.note << "\n";
  return os.str();
}

std::string fin2_table(const bw_engine::Fin2ExtractionResult& res) {
  std::ostringstream os;
  os << "grid: " << res.rows << " x " << res.cols << "\ndepth: " << res.depth
     << "\nouter interval: [" << to_pq_string(res.lo) << ", "
     << to_pq_string(res.hi) << ")\n";
  const std::int64_t shown = std::min<std::int64_t>(res.rows, 16);
  for (std::int64_t n = 0; n < shown; ++n)
    os << "row " << n << ": " << res.row_b[n].size() << " columns, limit ["
       << to_pq_string(res.row_limits[n].first) << ", "
       << to_pq_string(res.row_limits[n].second) << "), midpoint "
       << to_pq_string(res.m[n]) << "\n";
  if (shown < res.rows) os << "... (" << res.rows - shown << " more rows)\n";
  os << "A holds " << res.a.size() << " grid points\n";
  if (!res.exclusions.empty()) {
    os << "eps  over_A  over_grid  full_rows  cols_beyond\n";
    for (const auto& e : res.exclusions)
      os << to_pq_string(e.eps) << "  " << e.a_count << "  " << e.grid_count
         << "  " << e.full_rows << "  " << e.cols_beyond << "\n";
  }
  if (!res.note.empty()) os << "note: " << res.note << "\n";
  return os.str();
}

}  // namespace idealab::report

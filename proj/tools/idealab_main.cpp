// idealab: exact-arithmetic engine for ideals on countable sets.
// One subcommand per process; reports are written atomically.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "idealab/bw_engine.hpp"
#include "idealab/ideals.hpp"
#include "idealab/point.hpp"
#include "idealab/rat.hpp"
#include "idealab/reductions.hpp"
#include "idealab/report.hpp"
#include "idealab/setexpr.hpp"

namespace {

using namespace idealab;
using report::Json;

// flag-grammar violations detected past CLI parsing; exit 2
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rat parse_rat_flag(const std::string& flag, const std::string& text) {
  try {
    Rat r(text, 10);
    if (r.get_den() == 0) throw UsageError(flag + ": zero denominator in '" + text + "'");
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw UsageError(flag + ": cannot parse rational '" + text + "'");
  }
}

void check_schedule(const std::vector<std::int64_t>& schedule) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) throw UsageError("--schedule: cutoffs must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      throw UsageError("--schedule: cutoffs must be strictly increasing");
  }
}

void atomic_write(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    os << text;
    if (!os.flush()) throw std::runtime_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move report into place at '" + path + "'");
  }
}

struct Sink {
  std::string format = "table";  // json | csv | table
  std::string out_path;          // empty -> stdout
  std::optional<long> seed;      // echoed into JSON payloads
};

// The artifact goes to --out (or stdout); a one-line digest always reaches
// the terminal so scripted runs still log progress.
void deliver(const Sink& sink, const std::string& command, Json payload,
             const std::string& csv, const std::string& table,
             const std::string& digest) {
  std::string text;
  if (sink.format == "json") {
    if (sink.seed) payload["seed"] = *sink.seed;
    text = report::json_text(report::envelope(command, std::move(payload)));
  } else if (sink.format == "csv") {
    if (csv.empty()) throw UsageError("--format csv is not available for " + command);
    text = csv;
  } else {
    text = table;
  }
  if (sink.out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    atomic_write(sink.out_path, text);
    std::printf("%s -> %s\n", digest.c_str(), sink.out_path.c_str());
  }
}

std::vector<Rat> generator_sequence(const std::string& gen, std::int64_t len,
                                    Universe uni) {
  std::vector<Rat> seq;
  seq.reserve(static_cast<std::size_t>(len));
  if (gen == "alt") {
    for (std::int64_t i = 0; i < len; ++i) seq.push_back(Rat(i % 2));
  } else if (gen == "harmonic") {
    for (std::int64_t i = 0; i < len; ++i) seq.push_back(make_rat(1, Int(i + 1)));
  } else if (gen.rfind("indicator:", 0) == 0) {
    auto set = setexpr::parse_set(gen.substr(10));
    const auto pts = bw_engine::enumerate_positions(uni, len);
    for (const auto& p : pts)
      seq.push_back(Rat(setexpr::contains(*set, p) ? 1 : 0));
  } else {
    throw UsageError("--gen: unknown sequence generator '" + gen +
                     "' (alt | harmonic | indicator:<setexpr>)");
  }
  return seq;
}

// CSV rows "index,value_pq", indices 0..n-1 in order; a header line is allowed
std::vector<Rat> load_sequence_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("--seq-file: cannot open '" + path + "'");
  std::vector<Rat> seq;
  std::string line;
  std::int64_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row == 0 && seq.empty() && !std::isdigit(static_cast<unsigned char>(line[0])))
      continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw UsageError("--seq-file: missing comma in line '" + line + "'");
    const std::string idx = line.substr(0, comma);
    if (idx != std::to_string(seq.size()))
      throw UsageError("--seq-file: expected index " + std::to_string(seq.size()) +
                       ", found '" + idx + "'");
    seq.push_back(parse_rat_flag("--seq-file", line.substr(comma + 1)));
    ++row;
  }
  if (seq.empty()) throw UsageError("--seq-file: no rows in '" + path + "'");
  return seq;
}

// CSV rows "n,i,value_pq" covering a full grid in row-major order
std::vector<std::vector<Rat>> load_grid_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("--seq-file: cannot open '" + path + "'");
  std::vector<std::vector<Rat>> grid;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first && !std::isdigit(static_cast<unsigned char>(line[0]))) {
      first = false;
      continue;
    }
    first = false;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw UsageError("--seq-file: grid rows need 'n,i,value_pq', got '" + line + "'");
    const std::string n_text = line.substr(0, c1);
    const std::string i_text = line.substr(c1 + 1, c2 - c1 - 1);
    std::size_t n = 0, i = 0;
    try {
      n = std::stoul(n_text);
      i = std::stoul(i_text);
    } catch (const std::exception&) {
      throw UsageError("--seq-file: bad grid indices in '" + line + "'");
    }
    if (n == grid.size() && i == 0) grid.emplace_back();
    if (n + 1 != grid.size() || i != grid.back().size())
      throw UsageError("--seq-file: grid rows must arrive in row-major order");
    grid.back().push_back(parse_rat_flag("--seq-file", line.substr(c2 + 1)));
  }
  if (grid.empty()) throw UsageError("--seq-file: no rows in '" + path + "'");
  return grid;
}

std::string verdict_digest(const ideals::Verdict& v) {
  switch (v.kind) {
    case ideals::Verdict::K::In: return "In";
    case ideals::Verdict::K::Positive: return "Positive";
    default: return "Unknown";
  }
}

int run_decide(const Sink& sink, const std::string& ideal_text,
               const std::string& set_text) {
  auto ideal = ideals::make_ideal(ideal_text);
  auto set = setexpr::parse_set(set_text);
  auto verdict = ideals::decide(*ideal, set);
  Json payload;
  payload["ideal"] = ideals::name(*ideal);
  payload["set"] = setexpr::print(*set);
  Json vj = report::verdict_json(verdict);  // named: items() must not outlive it
  for (auto& [k, v] : vj.items()) payload[k] = std::move(v);
  std::string table = "ideal: " + ideals::name(*ideal) + "\nset: " +
                      setexpr::print(*set) + "\n" + report::verdict_table(verdict);
  deliver(sink, "decide", std::move(payload), "", table,
          "decide: " + verdict_digest(verdict));
  return 0;
}

int run_score(const Sink& sink, const std::string& ideal_text,
              const std::string& set_text, std::optional<std::int64_t> n,
              std::vector<std::int64_t> schedule) {
  auto ideal = ideals::make_ideal(ideal_text);
  auto set = setexpr::parse_set(set_text);
  Json payload;
  payload["ideal"] = ideals::name(*ideal);
  payload["set"] = setexpr::print(*set);
  if (n) {
    auto sc = ideals::score(*ideal, setexpr::truncate(*set, *n));
    payload["N"] = *n;
    payload["score"] = report::score_json(sc);
    const Rat s = ideals::scalar_summary(sc);
    deliver(sink, "score", std::move(payload),
            "N,score_pq\n" + std::to_string(*n) + "," + to_pq_string(s) + "\n",
            "N = " + std::to_string(*n) + "\n" + report::score_table(sc),
            "score at N=" + std::to_string(*n) + ": " + to_pq_string(s));
    return 0;
  }
  if (schedule.empty()) schedule = ideals::default_schedule(ideal->uni);
  check_schedule(schedule);
  std::vector<std::pair<Int, Rat>> series;
  for (auto cutoff : schedule) {
    auto sc = ideals::score(*ideal, setexpr::truncate(*set, cutoff));
    series.emplace_back(Int(cutoff), ideals::scalar_summary(sc));
  }
  payload["schedule"] = schedule;
  Json arr = Json::array();
  for (const auto& [cutoff, value] : series) {
    Json row;
    row["N"] = static_cast<std::int64_t>(cutoff.get_si());
    row["score"] = report::rat_json(value);
    arr.push_back(std::move(row));
  }
  payload["series"] = std::move(arr);
  std::ostringstream table;
  table << "ideal: " << ideals::name(*ideal) << "\nset: " << setexpr::print(*set)
        << "\nN  score\n";
  for (const auto& [cutoff, value] : series)
    table << cutoff.get_str() << "  " << to_pq_string(value) << "\n";
  deliver(sink, "score", std::move(payload), report::series_csv(series),
          table.str(), "score series over " + std::to_string(series.size()) + " cutoffs");
  return 0;
}

int run_ap(const Sink& sink, const std::string& set_text, std::int64_t n) {
  auto set = setexpr::parse_set(set_text);
  auto r = ideals::longest_ap(setexpr::truncate(*set, n));
  Json payload;
  payload["set"] = setexpr::print(*set);
  payload["N"] = n;
  payload["ap"] = report::ap_json(r);
  std::string table = "set: " + setexpr::print(*set) + "\nN: " + std::to_string(n) +
                      "\nlongest AP: length " + r.len.get_str() + ", first " +
                      r.a.get_str() + ", difference " + r.d.get_str() + "\n";
  deliver(sink, "ap", std::move(payload), "", table,
          "longest AP length " + r.len.get_str());
  return 0;
}

int run_vdw_search(const Sink& sink, int length, int colors, int max_n) {
  if (length < 3) throw UsageError("--length: need at least 3");
  if (colors < 2) throw UsageError("--colors: need at least 2");
  if (max_n < 1) throw UsageError("--max: need at least 1");
  auto r = ideals::vdw_search(length, colors, max_n);
  Json payload = report::vdw_json(r);
  std::ostringstream table;
  table << "W(" << length << "," << colors << "): ";
  if (r.threshold) table << *r.threshold << "\n";
  else table << "not found up to " << max_n << "\n";
  table << "progression-free coloring:";
  for (std::size_t i = 0; i < r.witness_coloring.size(); ++i)
    table << " " << i + 1 << ":" << r.witness_coloring[i];
  table << "\n";
  deliver(sink, "vdw-search", std::move(payload), "", table.str(),
          r.threshold ? "W = " + std::to_string(*r.threshold) : "no threshold found");
  return 0;
}

int deliver_witness_report(const Sink& sink, const std::string& command,
                           const reductions::WitnessReport& rep) {
  Json payload = report::witness_json(rep);
  deliver(sink, command, std::move(payload), report::witness_csv(rep),
          report::witness_table(rep), command + ": " + rep.summary);
  return rep.any_violation ? 1 : 0;
}

int run_bw_check(const Sink& sink, const std::string& witness_text,
                 const std::string& a_text, const std::vector<std::string>& c_texts,
                 const std::string& b_text, std::vector<std::int64_t> schedule,
                 bool assume_positive) {
  auto w = reductions::builtin_witness(witness_text);
  auto a = setexpr::parse_set(a_text);
  if (c_texts.empty()) throw UsageError("--C: need at least one challenge set");
  std::vector<setexpr::SetPtr> challenges;
  for (const auto& t : c_texts) challenges.push_back(setexpr::parse_set(t));
  std::optional<setexpr::SetPtr> b_override;
  if (!b_text.empty()) b_override = setexpr::parse_set(b_text);
  if (schedule.empty()) schedule = ideals::default_schedule(w.target->uni);
  check_schedule(schedule);
  auto rep = reductions::bw_check(w, a, challenges, schedule, b_override, assume_positive);
  return deliver_witness_report(sink, "bw-check", rep);
}

int run_katetov_check(const Sink& sink, const std::string& func_text,
                      const std::string& target_text, const std::string& source_text,
                      const std::vector<std::string>& a_texts,
                      std::vector<std::int64_t> schedule) {
  auto f = setexpr::parse_func(func_text);
  auto target = ideals::make_ideal(target_text);
  auto source = ideals::make_ideal(source_text);
  if (a_texts.empty()) throw UsageError("--A: need at least one source-positive set");
  std::vector<setexpr::SetPtr> positives;
  for (const auto& t : a_texts) positives.push_back(setexpr::parse_set(t));
  if (schedule.empty()) schedule = ideals::default_schedule(target->uni);
  check_schedule(schedule);
  auto rep = reductions::katetov_check(f, target, source, positives, schedule);
  return deliver_witness_report(sink, "katetov-check", rep);
}

int run_refute(const Sink& sink, const std::string& construction,
               const std::string& func_text, std::int64_t n,
               const std::string& target_text, int intervals,
               const std::string& challenge_text) {
  auto f = setexpr::parse_func(func_text);
  reductions::RefuterOutput out;
  if (construction == "summable") {
    out = reductions::refute_summable(f, n, parse_rat_flag("--target", target_text));
  } else if (construction == "edminus") {
    out = reductions::refute_edminus(f, n);
  } else if (construction == "nwd") {
    if (intervals < 1) throw UsageError("--intervals: need at least 1");
    out = reductions::refute_nwd(f, n, intervals);
  } else {
    throw UsageError("--construction: unknown '" + construction +
                     "' (summable | edminus | nwd)");
  }
  Json payload = report::refuter_json(out);
  std::string table = report::refuter_table(out);
  if (!challenge_text.empty()) {
    if (!out.responder)
      throw UsageError("--challenge: case '" + out.case_tag + "' has no responder");
    auto resp = out.responder(setexpr::parse_set(challenge_text));
    payload["challenge"] = challenge_text;
    payload["responder"] = report::responder_json(resp);
    table += "challenge: " + challenge_text + "\nresponse C = " +
             setexpr::print(*resp.c) + "\n";
    for (const auto& [name, v] : resp.evidence)
      table += name + " = " + to_pq_string(v) + "\n";
    if (!resp.note.empty()) table += "note: " + resp.note + "\n";
  }
  deliver(sink, "refute", std::move(payload), "", table,
          "refute " + construction + ": " + out.case_tag);
  return 0;
}

int run_extract(const Sink& sink, const std::string& ideal_text,
                const std::string& gen, const std::string& seq_file,
                std::int64_t n, int depth) {
  if (depth < 1) throw UsageError("--depth: need at least 1");
  auto ideal = ideals::make_ideal(ideal_text);
  std::vector<Rat> seq;
  if (!seq_file.empty()) {
    seq = load_sequence_csv(seq_file);
  } else {
    if (n < 2) throw UsageError("--N: sequence length must be >= 2");
    seq = generator_sequence(gen, n, ideal->uni);
  }
  auto res = bw_engine::extract(ideal, seq, depth);
  Json payload;
  payload["generator"] = seq_file.empty() ? gen : "file:" + seq_file;
  Json ej = report::extraction_json(res);  // named: items() must not outlive it
  for (auto& [k, v] : ej.items()) payload[k] = std::move(v);
  deliver(sink, "extract", std::move(payload), "", report::extraction_table(res),
          "extract: " + std::to_string(res.b.size()) + " positions into [" +
              to_pq_string(res.lo) + ", " + to_pq_string(res.hi) + ")");
  return 0;
}

int run_fin2_extract(const Sink& sink, const std::string& gen,
                     const std::string& seq_file, std::int64_t rows,
                     std::int64_t cols, std::optional<int> depth,
                     const std::vector<std::string>& eps_texts) {
  std::vector<std::vector<Rat>> dseq;
  if (!seq_file.empty()) {
    dseq = load_grid_csv(seq_file);
  } else if (gen == "rowcol") {
    if (rows < 2 || cols < 2) throw UsageError("--rows/--cols: need at least 2");
    dseq.assign(static_cast<std::size_t>(rows), {});
    for (std::int64_t r = 0; r < rows; ++r) {
      dseq[r].reserve(static_cast<std::size_t>(cols));
      for (std::int64_t c = 0; c < cols; ++c)
        dseq[r].push_back(make_rat(1, Int(r + 2)) + make_rat(1, Int(c + 2)));
    }
  } else {
    throw UsageError("--gen: unknown grid generator '" + gen + "' (rowcol)");
  }
  if (depth && *depth < 1) throw UsageError("--depth: need at least 1");
  std::vector<Rat> radii;
  for (const auto& t : eps_texts) radii.push_back(parse_rat_flag("--eps", t));
  auto res = bw_engine::fin2_extract(dseq, depth, radii);
  Json payload;
  payload["generator"] = seq_file.empty() ? gen : "file:" + seq_file;
  Json fj = report::fin2_json(res);  // named: items() must not outlive it
  for (auto& [k, v] : fj.items()) payload[k] = std::move(v);
  deliver(sink, "fin2-extract", std::move(payload), "", report::fin2_table(res),
          "fin2-extract: outer interval [" + to_pq_string(res.lo) + ", " +
              to_pq_string(res.hi) + ")");
  return 0;
}

// re-render a saved JSON artifact; table mode prints a top-level digest
int run_report(const Sink& sink, const std::string& in_path) {
  std::ifstream is(in_path, std::ios::binary);
  if (!is) throw UsageError("--in: cannot open '" + in_path + "'");
  Json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw UsageError("--in: not a JSON report: " + std::string(e.what()));
  }
  if (!j.is_object() || j.value("version", "") != "idealab/1")
    throw UsageError("--in: missing idealab/1 version marker");
  std::string text;
  if (sink.format == "json") {
    text = report::json_text(j);
  } else if (sink.format == "csv") {
    if (!j.contains("series"))
      throw UsageError("--format csv: artifact has no score series");
    std::ostringstream os;
    os << "N,score_pq\n";
    for (const auto& row : j["series"])
      os << row["N"].dump() << "," << row["score"]["pq"].get<std::string>() << "\n";
    text = os.str();
  } else {
    std::ostringstream os;
    for (const auto& [key, value] : j.items()) {
      if (value.is_string()) os << key << ": " << value.get<std::string>() << "\n";
      else if (value.is_primitive()) os << key << ": " << value.dump() << "\n";
      else if (value.is_array())
        os << key << ": " << value.size() << " entries\n";
      else os << key << ": " << value.dump() << "\n";
    }
    text = os.str();
  }
  if (sink.out_path.empty()) std::fputs(text.c_str(), stdout);
  else {
    atomic_write(sink.out_path, text);
    std::printf("report %s -> %s\n", j.value("command", "?").c_str(),
                sink.out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idealab: exact-arithmetic engine for ideals on countable sets"};
  app.require_subcommand(1);

  Sink sink;
  std::string ideal_text = "fin", set_text, func_text = "id";
  std::vector<std::int64_t> schedule;
  std::int64_t big_n = 1000;
  int depth = 1;

  auto add_common = [&](CLI::App* sub, bool with_schedule = false) {
    sub->add_option("--format", sink.format, "json | csv | table")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    sub->add_option("--out", sink.out_path, "write the artifact to this path");
    sub->add_option("--seed", sink.seed, "fixes randomized generators");
    if (with_schedule)
      sub->add_option("--schedule", schedule, "comma-separated cutoffs")
          ->delimiter(',');
  };

  auto* decide = app.add_subcommand("decide", "membership verdict for a set");
  decide->add_option("--ideal", ideal_text, "ideal descriptor")->required();
  decide->add_option("--set", set_text, "set expression")->required();
  add_common(decide);

  std::optional<std::int64_t> score_n;
  auto* score = app.add_subcommand("score", "truncation score or score series");
  score->add_option("--ideal", ideal_text, "ideal descriptor")->required();
  score->add_option("--set", set_text, "set expression")->required();
  score->add_option("--N", score_n, "single cutoff (otherwise a series)");
  add_common(score, true);

  auto* ap = app.add_subcommand("ap", "longest arithmetic progression in a view");
  ap->add_option("--set", set_text, "set expression")->required();
  ap->add_option("--N", big_n, "truncation cutoff")->required();
  add_common(ap);

  int vdw_length = 3, vdw_colors = 2, vdw_max = 100;
  auto* vdw = app.add_subcommand("vdw-search", "exhaustive coloring threshold search");
  vdw->add_option("--length", vdw_length, "progression length")->required();
  vdw->add_option("--colors", vdw_colors, "number of colors")->required();
  vdw->add_option("--max", vdw_max, "largest n to test");
  add_common(vdw);

  std::string witness_text, a_text, b_text, target_text, source_text;
  std::vector<std::string> c_texts, a_texts;
  bool assume_positive = false;
  auto* bw = app.add_subcommand("bw-check", "subsequence-order witness check");
  bw->add_option("--witness", witness_text, "witness descriptor")->required();
  bw->add_option("--A", a_text, "source-positive set")->required();
  bw->add_option("--C", c_texts, "challenge set (repeatable)");
  bw->add_option("--B", b_text, "override the selected B");
  bw->add_flag("--assume-positive", assume_positive,
               "skip the source-side positivity gate");
  add_common(bw, true);

  auto* kat = app.add_subcommand("katetov-check", "pointwise-image order check");
  kat->add_option("--func", func_text, "map from source universe to target")->required();
  kat->add_option("--target", target_text, "target ideal descriptor")->required();
  kat->add_option("--source", source_text, "source ideal descriptor")->required();
  kat->add_option("--A", a_texts, "source-positive set (repeatable)");
  add_common(kat, true);

  std::string construction, refute_target = "10", challenge_text;
  int intervals = 64;
  auto* refute = app.add_subcommand("refute", "constructive non-reducibility witness");
  refute->add_option("--construction", construction, "summable | edminus | nwd")
      ->required();
  refute->add_option("--func", func_text, "candidate reduction map")->required();
  refute->add_option("--N", big_n, "construction cutoff")->required();
  refute->add_option("--target", refute_target, "mass target (summable)");
  refute->add_option("--intervals", intervals, "dyadic intervals to fill (nwd)");
  refute->add_option("--challenge", challenge_text, "run the responder on this set");
  add_common(refute);

  std::string gen = "alt", seq_file;
  auto* extract = app.add_subcommand("extract", "dyadic subsequence extraction");
  extract->add_option("--ideal", ideal_text, "ideal steering the extraction");
  extract->add_option("--gen", gen, "alt | harmonic | indicator:<setexpr>");
  extract->add_option("--seq-file", seq_file, "CSV sequence 'index,value_pq'");
  extract->add_option("--N", big_n, "sequence length");
  extract->add_option("--depth", depth, "bisection depth")->required();
  add_common(extract);

  std::int64_t grid_rows = 64, grid_cols = 64;
  std::optional<int> fin2_depth;
  std::vector<std::string> eps_texts;
  auto* fin2 = app.add_subcommand("fin2-extract", "row-wise double extraction");
  fin2->add_option("--gen", gen, "rowcol");
  fin2->add_option("--seq-file", seq_file, "CSV grid 'n,i,value_pq'");
  fin2->add_option("--rows", grid_rows, "grid rows");
  fin2->add_option("--cols", grid_cols, "grid columns");
  fin2->add_option("--depth", fin2_depth, "bisection depth per row");
  fin2->add_option("--eps", eps_texts, "exclusion radius p/q (repeatable)");
  add_common(fin2);

  std::string in_path;
  auto* rep = app.add_subcommand("report", "re-render a saved JSON artifact");
  rep->add_option("--in", in_path, "path to a JSON report")->required();
  add_common(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (decide->parsed()) return run_decide(sink, ideal_text, set_text);
    if (score->parsed()) return run_score(sink, ideal_text, set_text, score_n, schedule);
    if (ap->parsed()) return run_ap(sink, set_text, big_n);
    if (vdw->parsed()) return run_vdw_search(sink, vdw_length, vdw_colors, vdw_max);
    if (bw->parsed())
      return run_bw_check(sink, witness_text, a_text, c_texts, b_text, schedule,
                          assume_positive);
    if (kat->parsed())
      return run_katetov_check(sink, func_text, target_text, source_text, a_texts,
                               schedule);
    if (refute->parsed())
      return run_refute(sink, construction, func_text, big_n, refute_target,
                        intervals, challenge_text);
    if (extract->parsed())
      return run_extract(sink, ideal_text, gen, seq_file, big_n, depth);
    if (fin2->parsed())
      return run_fin2_extract(sink, gen, seq_file, grid_rows, grid_cols, fin2_depth,
                              eps_texts);
    if (rep->parsed()) return run_report(sink, in_path);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const idealab::ParseError& e) {
    std::fprintf(stderr, "usage error: bad expression at byte %zu: %s\n", e.pos,
                 e.what());
    return 2;
  } catch (const idealab::UniverseError& e) {
    std::fprintf(stderr, "universe error: %s\n", e.what());
    return 3;
  } catch (const idealab::EvalError& e) {
    std::fprintf(stderr, "evaluation error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

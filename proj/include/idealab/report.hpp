#pragma once

#include <string>
#include <utility>
#include <vector>

#include "idealab/bw_engine.hpp"
#include "idealab/ideals.hpp"
#include "idealab/reductions.hpp"
#include "json.hpp"

namespace idealab::report {

using Json = nlohmann::ordered_json;

// Rationals serialize as the exact "p/q" plus a display-only decimal; the
// decimal never feeds back into computation.
Json rat_json(const Rat& r);

Json verdict_json(const ideals::Verdict& v);
Json score_json(const ideals::Score& s);
Json ap_json(const ideals::ApResult& r);
Json vdw_json(const ideals::VdwSearchResult& r);
Json witness_json(const reductions::WitnessReport& rep);
Json refuter_json(const reductions::RefuterOutput& out);
Json responder_json(const reductions::ResponderResult& r);
// index lists longer than 10000 entries are truncated with a flag; sizes are
// always reported in full
Json extraction_json(const bw_engine::ExtractionResult& res);
Json fin2_json(const bw_engine::Fin2ExtractionResult& res);

// versioned envelope; generated_at is the only nondeterministic field and
// stays at the top level so consumers can strip it before comparing
Json envelope(const std::string& command, Json payload);
std::string json_text(const Json& j);

std::string series_csv(const std::vector<std::pair<Int, Rat>>& series);
std::string witness_csv(const reductions::WitnessReport& rep);

std::string verdict_table(const ideals::Verdict& v);
std::string score_table(const ideals::Score& s);
std::string witness_table(const reductions::WitnessReport& rep);
std::string refuter_table(const reductions::RefuterOutput& out);
std::string extraction_table(const bw_engine::ExtractionResult& res);
std::string fin2_table(const bw_engine::Fin2ExtractionResult& res);

}  // namespace idealab::report

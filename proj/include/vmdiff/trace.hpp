#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmdiff/eaa.hpp"

namespace vmdiff {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kTraceFormatVersion = 1;

// Doubles in CSV output carry 17 significant digits so parsed values
// round-trip exactly.
std::string format_double(double v);

nlohmann::json params_to_json(const FusionParams& p);
FusionParams params_from_json(const nlohmann::json& j);

nlohmann::json breakdown_to_json(const ScoreBreakdown& b);
ScoreBreakdown breakdown_from_json(const nlohmann::json& j);

nlohmann::json candidate_to_json(const Candidate& c);
Candidate candidate_from_json(const nlohmann::json& j);

// JSONL trace: one header line, one line per candidate, one result line.
std::string render_search_trace(const nlohmann::json& header_config, const EAAResult& result);

// Single-candidate trace written by the fuse command. candidate may be null
// when no provider was available to score the output.
std::string render_fuse_trace(const nlohmann::json& header_config, const Candidate* candidate);

struct ParsedTrace {
  nlohmann::json header;
  std::vector<Candidate> candidates;
  nlohmann::json result;
};

ParsedTrace parse_trace(const std::string& jsonl);

// Per-evaluation CSV in the documented column order:
//   eval_index,stage,alpha,beta1,beta2,s_i1,s_i2,s_t1,s_t2,total,b_sim
std::string render_eval_csv(const std::vector<Candidate>& candidates);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace vmdiff

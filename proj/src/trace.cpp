#include "vmdiff/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vmdiff {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json params_to_json(const FusionParams& p) {
  return json{{"alpha", p.alpha}, {"beta1", p.beta1}, {"beta2", p.beta2}, {"seed", p.seed}};
}

FusionParams params_from_json(const json& j) {
  FusionParams p;
  p.alpha = j.at("alpha").get<double>();
  p.beta1 = j.at("beta1").get<double>();
  p.beta2 = j.at("beta2").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

json breakdown_to_json(const ScoreBreakdown& b) {
  return json{{"s_i1", b.s_i1}, {"s_i2", b.s_i2}, {"s_t1", b.s_t1},
              {"s_t2", b.s_t2}, {"total", b.total}, {"b_sim", b.b_sim}};
}

ScoreBreakdown breakdown_from_json(const json& j) {
  ScoreBreakdown b;
  b.s_i1 = j.at("s_i1").get<double>();
  b.s_i2 = j.at("s_i2").get<double>();
  b.s_t1 = j.at("s_t1").get<double>();
  b.s_t2 = j.at("s_t2").get<double>();
  b.total = j.at("total").get<double>();
  b.b_sim = j.at("b_sim").get<double>();
  return b;
}

json candidate_to_json(const Candidate& c) {
  return json{{"type", "candidate"},
              {"eval_index", c.eval_index},
              {"round", c.round},
              {"stage", to_string(c.stage)},
              {"params", params_to_json(c.params)},
              {"score", breakdown_to_json(c.breakdown)}};
}

Candidate candidate_from_json(const json& j) {
  Candidate c;
  c.eval_index = j.at("eval_index").get<int>();
  c.round = j.at("round").get<int>();
  c.stage = stage_from_string(j.at("stage").get<std::string>());
  c.params = params_from_json(j.at("params"));
  c.breakdown = breakdown_from_json(j.at("score"));
  return c;
}

namespace {

json header_json(const json& header_config) {
  return json{{"type", "header"},
              {"format", kTraceFormatVersion},
              {"tool", std::string("vmdiff ") + kToolVersion},
              {"config", header_config}};
}

}  // namespace

std::string render_search_trace(const json& header_config, const EAAResult& result) {
  std::ostringstream out;
  out << header_json(header_config).dump() << '\n';
  for (const Candidate& c : result.trace) {
    out << candidate_to_json(c).dump() << '\n';
  }
  out << json{{"type", "result"},
              {"accepted", result.accepted},
              {"rounds_used", result.rounds_used},
              {"best_eval_index", result.best.eval_index},
              {"round_errors", result.round_errors}}
             .dump()
      << '\n';
  return out.str();
}

std::string render_fuse_trace(const json& header_config, const Candidate* candidate) {
  std::ostringstream out;
  out << header_json(header_config).dump() << '\n';
  if (candidate != nullptr) {
    out << candidate_to_json(*candidate).dump() << '\n';
  }
  out << json{{"type", "result"}, {"candidates", candidate != nullptr ? 1 : 0}}.dump() << '\n';
  return out.str();
}

ParsedTrace parse_trace(const std::string& jsonl) {
  ParsedTrace t;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      t.header = j;
    } else if (type == "candidate") {
      t.candidates.push_back(candidate_from_json(j));
    } else if (type == "result") {
      t.result = j;
    }
  }
  return t;
}

std::string render_eval_csv(const std::vector<Candidate>& candidates) {
  std::ostringstream out;
  out << "eval_index,stage,alpha,beta1,beta2,s_i1,s_i2,s_t1,s_t2,total,b_sim\n";
  for (const Candidate& c : candidates) {
    out << c.eval_index << ',' << to_string(c.stage) << ',' << format_double(c.params.alpha)
        << ',' << format_double(c.params.beta1) << ',' << format_double(c.params.beta2) << ','
        << format_double(c.breakdown.s_i1) << ',' << format_double(c.breakdown.s_i2) << ','
        << format_double(c.breakdown.s_t1) << ',' << format_double(c.breakdown.s_t2) << ','
        << format_double(c.breakdown.total) << ',' << format_double(c.breakdown.b_sim) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vmdiff

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmdiff/cli.hpp"
#include "vmdiff/toy_backend.hpp"
#include "vmdiff/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vmdiff_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args) { return vmdiff::cli::run(args); }

std::string slurp(const fs::path& p) { return vmdiff::read_text_file(p.string()); }

}  // namespace

TEST_CASE("fuse writes output, stages and a single-candidate trace; reruns are byte-identical") {
  const fs::path d1 = fresh_dir("fuse1");
  const fs::path d2 = fresh_dir("fuse2");

  CHECK(run_cli({"fuse", "--out", d1.string()}) == vmdiff::cli::kExitOk);
  CHECK(fs::exists(d1 / "output.json"));
  CHECK(fs::exists(d1 / "stages.json"));
  CHECK(fs::exists(d1 / "trace.jsonl"));

  const json out = json::parse(slurp(d1 / "output.json"));
  CHECK(out.at("point").size() == 2);
  CHECK(out.at("cloud").size() == 256);

  const json stages = json::parse(slurp(d1 / "stages.json"));
  CHECK(stages.at("initial_noise").size() == 2);
  CHECK(stages.at("blended_noise").size() == 2);
  CHECK(stages.at("final_latent").size() == 2);

  const auto trace = vmdiff::parse_trace(slurp(d1 / "trace.jsonl"));
  REQUIRE(trace.candidates.size() == 1);
  CHECK(trace.header.at("config").at("sampler").at("gamma_den") == 5.0);
  CHECK(trace.header.at("config").at("sampler").at("gamma_inv") == 0.0);
  CHECK(trace.header.at("config").at("sampler").at("gamma_gen") == 4.0);
  CHECK(trace.header.at("config").at("sampler").at("t_max") == 999);
  CHECK(trace.header.at("config").at("sampler").at("t_den") == 652);

  CHECK(run_cli({"fuse", "--out", d2.string()}) == vmdiff::cli::kExitOk);
  CHECK(slurp(d1 / "output.json") == slurp(d2 / "output.json"));
  CHECK(slurp(d1 / "stages.json") == slurp(d2 / "stages.json"));
  CHECK(slurp(d1 / "trace.jsonl") == slurp(d2 / "trace.jsonl"));
}

TEST_CASE("fuse accepts the baseline strategy selections") {
  const fs::path d = fresh_dir("fuse_baseline1");
  // baseline 1: random noise + slerp mixing at alpha = 0.5
  CHECK(run_cli({"fuse", "--strategy-bnoise", "random", "--alpha", "0.5", "--out", d.string()}) ==
        vmdiff::cli::kExitOk);
  const auto trace = vmdiff::parse_trace(slurp(d / "trace.jsonl"));
  CHECK(trace.header.at("config").at("bnoise") == "random");
  CHECK(trace.header.at("config").at("mdenoise") == "slerp");
}

TEST_CASE("search on the calibrated pair accepts; hard pair exhausts rounds with exit 3") {
  const fs::path ok = fresh_dir("search_ok");
  CHECK(run_cli({"search", "--out", ok.string()}) == vmdiff::cli::kExitOk);
  const json best = json::parse(slurp(ok / "best.json"));
  CHECK(best.at("accepted") == true);
  CHECK(best.at("best").at("score").at("total").get<double>() > 2.4);

  const std::string csv = slurp(ok / "evals.csv");
  CHECK(csv.rfind("eval_index,stage,alpha,beta1,beta2,s_i1,s_i2,s_t1,s_t2,total,b_sim\n", 0) == 0);

  const fs::path hard = fresh_dir("search_hard");
  CHECK(run_cli({"search", "--concepts", "C", "D", "--rounds", "3", "--out", hard.string()}) ==
        vmdiff::cli::kExitNotAccepted);
  const auto trace = vmdiff::parse_trace(slurp(hard / "trace.jsonl"));
  CHECK(trace.result.at("accepted") == false);
  CHECK(trace.result.at("rounds_used") == 3);
  // best still persisted
  CHECK(fs::exists(hard / "best.json"));
}

TEST_CASE("fair mode forces one round and seed 42") {
  const fs::path d = fresh_dir("search_fair");
  CHECK(run_cli({"search", "--concepts", "C", "D", "--fair", "--seed", "777", "--out",
                 d.string()}) == vmdiff::cli::kExitNotAccepted);
  const auto trace = vmdiff::parse_trace(slurp(d / "trace.jsonl"));
  CHECK(trace.header.at("config").at("fair") == true);
  CHECK(trace.header.at("config").at("seed") == 42);
  CHECK(trace.result.at("rounds_used") == 1);
  for (const auto& c : trace.candidates) CHECK(c.round == 1);
}

TEST_CASE("search trace replays byte-identically from its own header config") {
  const fs::path d1 = fresh_dir("replay1");
  CHECK(run_cli({"search", "--concepts", "E", "F", "--rounds", "2", "--out", d1.string()}) ==
        vmdiff::cli::kExitNotAccepted);

  const auto trace = vmdiff::parse_trace(slurp(d1 / "trace.jsonl"));
  const fs::path cfg = d1 / "replay_config.json";
  vmdiff::write_text_file(cfg.string(), trace.header.at("config").dump());

  const fs::path d2 = fresh_dir("replay2");
  CHECK(run_cli({"search", "--config", cfg.string(), "--out", d2.string()}) ==
        vmdiff::cli::kExitNotAccepted);
  CHECK(slurp(d1 / "trace.jsonl") == slurp(d2 / "trace.jsonl"));
  CHECK(slurp(d1 / "evals.csv") == slurp(d2 / "evals.csv"));
}

TEST_CASE("command-line flags beat config-file values beat built-in defaults") {
  const fs::path d = fresh_dir("precedence");
  const fs::path cfg = d / "config.json";
  vmdiff::write_text_file(cfg.string(), json{{"seed", 7},
                                             {"concepts", {"C", "D"}},
                                             {"search", {{"threshold", 1.0}, {"rounds", 2}}}}
                                            .dump());

  CHECK(run_cli({"search", "--config", cfg.string(), "--seed", "9", "--out", d.string()}) ==
        vmdiff::cli::kExitOk);  // threshold 1.0 from file accepts easily

  const auto trace = vmdiff::parse_trace(slurp(d / "trace.jsonl"));
  const json& c = trace.header.at("config");
  CHECK(c.at("seed") == 9);                              // CLI layer wins
  CHECK(c.at("search").at("threshold") == 1.0);          // file layer wins
  CHECK(c.at("search").at("rounds") == 2);               // file layer
  CHECK(c.at("search").at("alpha_budget") == 10);        // built-in default
  CHECK(c.at("sampler").at("t_den") == 652);             // built-in default
  CHECK(c.at("concepts") == json::array({"C", "D"}));    // file layer
}

TEST_CASE("sweep grids: alpha values, strategy enumeration, empty grid") {
  const fs::path d = fresh_dir("sweep_alpha");
  CHECK(run_cli({"sweep", "--grid", "alpha:0:1:11", "--out", d.string()}) == vmdiff::cli::kExitOk);
  std::istringstream csv(slurp(d / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line ==
        "cell_index,alpha,beta1,beta2,bnoise,mdenoise,seed,s_i1,s_i2,s_t1,s_t2,total,b_sim,error");
  int rows = 0;
  while (std::getline(csv, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 11);

  const fs::path ds = fresh_dir("sweep_bnoise");
  CHECK(run_cli({"sweep", "--grid", "bnoise", "--out", ds.string()}) == vmdiff::cli::kExitOk);
  std::istringstream csv2(slurp(ds / "sweep.csv"));
  rows = 0;
  while (std::getline(csv2, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 1 + 4);  // header + one row per BNoise strategy

  const fs::path de = fresh_dir("sweep_empty");
  CHECK(run_cli({"sweep", "--out", de.string()}) == vmdiff::cli::kExitOk);
  std::istringstream csv3(slurp(de / "sweep.csv"));
  rows = 0;
  while (std::getline(csv3, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 1);  // header only
}

TEST_CASE("per-cell sweep failures land in the error column and do not abort") {
  const fs::path d = fresh_dir("sweep_err");
  // beta1 grid reaching 0 makes scale_concat reject that cell.
  CHECK(run_cli({"sweep", "--grid", "beta1:0:1:3", "--out", d.string()}) == vmdiff::cli::kExitOk);
  std::istringstream csv(slurp(d / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  int errors = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    if (line.back() != ',') ++errors;  // non-empty error column
  }
  CHECK(rows == 3);
  CHECK(errors == 1);
}

TEST_CASE("usage and backend failures map to the documented exit codes") {
  CHECK(run_cli({"fuse", "--backend", "bogus"}) == vmdiff::cli::kExitUsage);
  CHECK(run_cli({"search", "--concepts", "A", "nonexistent",
                 "--out", fresh_dir("badconcept").string()}) == vmdiff::cli::kExitBackendFailure);
  CHECK(run_cli({"nonsense"}) == vmdiff::cli::kExitUsage);
  CHECK(run_cli({"fuse", "--backend", "remote:127.0.0.1:1",
                 "--out", fresh_dir("deadremote").string()}) == vmdiff::cli::kExitBackendFailure);
  CHECK(run_cli({"fuse", "--world", "toy-asym", "--concepts", "P", "Q",
                 "--out", fresh_dir("asymfuse").string()}) == vmdiff::cli::kExitOk);
}

TEST_CASE("world files load through --world") {
  const fs::path d = fresh_dir("worldfile");
  const fs::path wpath = d / "world.json";
  vmdiff::write_text_file(wpath.string(), vmdiff::ToyWorld::wide16_world().to_json_string());

  CHECK(run_cli({"fuse", "--world", wpath.string(), "--out", d.string()}) == vmdiff::cli::kExitOk);
  const json out = json::parse(slurp(d / "output.json"));
  CHECK(out.at("point").size() == 16);
}

#include "vmdiff/cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vmdiff/eaa.hpp"
#include "vmdiff/toy_backend.hpp"
#include "vmdiff/trace.hpp"
#include "vmdiff/wire.hpp"

namespace vmdiff::cli {

namespace {

using nlohmann::json;

struct SweepSpec {
  std::string param;  // "alpha", "beta1", "beta2", "bnoise", "mdenoise" or empty
  double lo = 0.0;
  double hi = 1.0;
  int count = 0;
};

// Fully materialized run configuration. Field defaults are the built-in
// layer; a config file and then command-line flags override them in order.
struct RunOptions {
  std::string backend_spec = "toy";
  std::string world = "toy2";  // built-in name or path to a world json
  json world_def;              // inline world definition (wins over `world`)
  std::vector<std::string> concepts = {"A", "B"};
  std::string bnoise = "concat_before_inversion";
  std::string mdenoise = "slerp";
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  bool fair = false;
  SamplerConfig sampler;
  SearchConfig search;
  NormalizationBounds bounds;
  double alpha = 0.5;  // explicit theta for fuse / sweep base point
  double beta1 = 1.0;
  double beta2 = 1.0;
  SweepSpec sweep;
};

void apply_config_json(RunOptions& o, const json& j) {
  if (j.contains("backend")) o.backend_spec = j.at("backend").get<std::string>();
  if (j.contains("world")) o.world = j.at("world").get<std::string>();
  if (j.contains("world_def")) o.world_def = j.at("world_def");
  if (j.contains("concepts")) o.concepts = j.at("concepts").get<std::vector<std::string>>();
  if (j.contains("bnoise")) o.bnoise = j.at("bnoise").get<std::string>();
  if (j.contains("mdenoise")) o.mdenoise = j.at("mdenoise").get<std::string>();
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) o.out_dir = j.at("out").get<std::string>();
  if (j.contains("fair")) o.fair = j.at("fair").get<bool>();
  if (j.contains("sampler")) {
    const json& s = j.at("sampler");
    if (s.contains("gamma_den")) o.sampler.gamma_den = s.at("gamma_den").get<double>();
    if (s.contains("gamma_inv")) o.sampler.gamma_inv = s.at("gamma_inv").get<double>();
    if (s.contains("gamma_gen")) o.sampler.gamma_gen = s.at("gamma_gen").get<double>();
    if (s.contains("t_max")) o.sampler.t_max = s.at("t_max").get<int>();
    if (s.contains("t_den")) o.sampler.t_den = s.at("t_den").get<int>();
    if (s.contains("num_steps")) o.sampler.num_steps = s.at("num_steps").get<int>();
  }
  if (j.contains("search")) {
    const json& s = j.at("search");
    if (s.contains("threshold")) o.search.threshold = s.at("threshold").get<double>();
    if (s.contains("rounds")) o.search.max_rounds = s.at("rounds").get<int>();
    if (s.contains("alpha_budget")) o.search.alpha_budget = s.at("alpha_budget").get<int>();
    if (s.contains("beta_budget")) o.search.beta_budget = s.at("beta_budget").get<int>();
    if (s.contains("beta_range")) {
      const auto r = s.at("beta_range").get<std::vector<double>>();
      if (r.size() != 2) throw InvalidConfig("search.beta_range must be [lo, hi]");
      o.search.beta_lo = r[0];
      o.search.beta_hi = r[1];
    }
    if (s.contains("alpha_tol")) o.search.alpha_tol = s.at("alpha_tol").get<double>();
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    if (b.contains("lo")) o.bounds.lo = b.at("lo").get<double>();
    if (b.contains("hi")) o.bounds.hi = b.at("hi").get<double>();
  }
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (p.contains("alpha")) o.alpha = p.at("alpha").get<double>();
    if (p.contains("beta1")) o.beta1 = p.at("beta1").get<double>();
    if (p.contains("beta2")) o.beta2 = p.at("beta2").get<double>();
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (s.contains("param")) o.sweep.param = s.at("param").get<std::string>();
    if (s.contains("lo")) o.sweep.lo = s.at("lo").get<double>();
    if (s.contains("hi")) o.sweep.hi = s.at("hi").get<double>();
    if (s.contains("count")) o.sweep.count = s.at("count").get<int>();
  }
}

// The trace header doubles as a replayable config file. The output directory
// is deliberately excluded: it is not part of the experiment identity.
json materialize_config(const RunOptions& o, const std::string& verb, const ToyWorld* world) {
  json j;
  j["verb"] = verb;
  j["backend"] = o.backend_spec;
  j["world"] = o.world;
  if (world != nullptr) j["world_def"] = json::parse(world->to_json_string());
  j["concepts"] = o.concepts;
  j["bnoise"] = o.bnoise;
  j["mdenoise"] = o.mdenoise;
  j["seed"] = o.seed;
  j["fair"] = o.fair;
  j["sampler"] = {{"gamma_den", o.sampler.gamma_den}, {"gamma_inv", o.sampler.gamma_inv},
                  {"gamma_gen", o.sampler.gamma_gen}, {"t_max", o.sampler.t_max},
                  {"t_den", o.sampler.t_den},         {"num_steps", o.sampler.num_steps}};
  j["search"] = {{"threshold", o.search.threshold},
                 {"rounds", o.search.max_rounds},
                 {"alpha_budget", o.search.alpha_budget},
                 {"beta_budget", o.search.beta_budget},
                 {"beta_range", std::vector<double>{o.search.beta_lo, o.search.beta_hi}},
                 {"alpha_tol", o.search.alpha_tol}};
  j["bounds"] = {{"lo", o.bounds.lo}, {"hi", o.bounds.hi}};
  j["params"] = {{"alpha", o.alpha}, {"beta1", o.beta1}, {"beta2", o.beta2}};
  if (!o.sweep.param.empty()) {
    j["sweep"] = {{"param", o.sweep.param},
                  {"lo", o.sweep.lo},
                  {"hi", o.sweep.hi},
                  {"count", o.sweep.count}};
  }
  return j;
}

std::optional<ToyWorld> resolve_world(const RunOptions& o) {
  if (!o.world_def.is_null() && !o.world_def.empty()) {
    return ToyWorld::from_json_string(o.world_def.dump());
  }
  if (o.world == "toy2" || o.world == "default" || o.world == "toy-asym" || o.world == "toy16") {
    return ToyWorld::by_name(o.world);
  }
  if (!o.world.empty()) return ToyWorld::load_file(o.world);
  return std::nullopt;
}

struct Session {
  std::unique_ptr<VelocityBackend> backend;
  std::optional<ToyWorld> world;
  std::unique_ptr<ToySimilarityProvider> provider;  // null without a world
};

Session open_session(const RunOptions& o) {
  Session s;
  s.world = resolve_world(o);
  if (o.backend_spec == "toy") {
    if (!s.world) throw InvalidConfig("toy backend requires a world");
    s.backend = std::make_unique<ToyBackend>(*s.world, o.sampler.t_max);
  } else if (o.backend_spec.rfind("remote:", 0) == 0) {
    s.backend = connect_remote(o.backend_spec.substr(7));
  } else {
    throw InvalidConfig("unknown backend spec: " + o.backend_spec +
                        " (expected toy or remote:ADDR)");
  }
  if (s.world) {
    // Reference attractors sit at the gamma_gen-scaled concept positions.
    s.provider = std::make_unique<ToySimilarityProvider>(*s.world, o.sampler.gamma_gen,
                                                         o.bounds.lo, o.bounds.hi);
  }
  return s;
}

ConceptInputs concept_inputs(const RunOptions& o) {
  if (o.concepts.size() != 2) throw InvalidConfig("exactly two concept ids required");
  return ConceptInputs{o.concepts[0], o.concepts[1]};
}

FusionParams explicit_params(const RunOptions& o) {
  FusionParams p;
  p.alpha = o.alpha;
  p.beta1 = o.beta1;
  p.beta2 = o.beta2;
  p.seed = o.seed;
  return p;
}

FusionStrategies strategies(const RunOptions& o) {
  FusionStrategies st;
  st.bnoise = bnoise_from_string(o.bnoise);
  st.mdenoise = mdenoise_from_string(o.mdenoise);
  return st;
}

void ensure_out_dir(const RunOptions& o) {
  std::filesystem::create_directories(o.out_dir);
}

std::string out_path(const RunOptions& o, const char* name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

int cmd_fuse(const RunOptions& o) {
  Session s = open_session(o);
  const ConceptInputs inputs = concept_inputs(o);
  const FusionParams theta = explicit_params(o);
  const FusionStrategies strat = strategies(o);

  HspStages stages;
  const Output out = hsp(inputs, theta, o.sampler, strat, *s.backend, &stages);

  ensure_out_dir(o);
  const json config = materialize_config(o, "fuse", s.world ? &*s.world : nullptr);

  write_text_file(out_path(o, "output.json"),
                  json{{"point", out.point}, {"cloud", out.cloud}}.dump(2) + "\n");
  write_text_file(out_path(o, "stages.json"), json{{"initial_noise", stages.initial_noise.values},
                                                   {"blended_noise", stages.blended_noise.values},
                                                   {"final_latent", stages.final_latent.values}}
                                                      .dump(2) +
                                                  "\n");

  if (s.provider) {
    Candidate c;
    c.params = theta;
    c.breakdown = evaluate(out, inputs, *s.provider, o.bounds);
    c.stage = SearchStage::Init;
    c.round = 1;
    c.eval_index = 0;
    write_text_file(out_path(o, "trace.jsonl"), render_fuse_trace(config, &c));
  } else {
    write_text_file(out_path(o, "trace.jsonl"), render_fuse_trace(config, nullptr));
  }
  return kExitOk;
}

int cmd_search(const RunOptions& o) {
  Session s = open_session(o);
  if (!s.provider) {
    throw InvalidConfig("search needs a world for scoring (pass --world with remote backends)");
  }
  const ConceptInputs inputs = concept_inputs(o);
  const FusionStrategies strat = strategies(o);

  SearchConfig search = o.search;
  search.base_seed = o.seed;

  ensure_out_dir(o);
  const json config = materialize_config(o, "search", s.world ? &*s.world : nullptr);

  EAAResult result;
  try {
    result = run_eaa(inputs, search, o.sampler, strat, *s.backend, *s.provider, o.bounds);
  } catch (const BackendFailure& e) {
    // Nothing evaluable; persist a header-only trace for the record.
    EAAResult empty;
    write_text_file(out_path(o, "trace.jsonl"), render_search_trace(config, empty));
    throw;
  }

  write_text_file(out_path(o, "trace.jsonl"), render_search_trace(config, result));
  write_text_file(out_path(o, "evals.csv"), render_eval_csv(result.trace));
  write_text_file(out_path(o, "best.json"), json{{"accepted", result.accepted},
                                                 {"rounds_used", result.rounds_used},
                                                 {"best", candidate_to_json(result.best)},
                                                 {"round_errors", result.round_errors}}
                                                    .dump(2) +
                                                "\n");
  return result.accepted ? kExitOk : kExitNotAccepted;
}

struct SweepCell {
  FusionParams params;
  FusionStrategies strat;
  std::string bnoise_name;
  std::string mdenoise_name;
};

std::vector<SweepCell> build_cells(const RunOptions& o) {
  std::vector<SweepCell> cells;
  SweepCell base;
  base.params = explicit_params(o);
  base.strat = strategies(o);
  base.bnoise_name = o.bnoise;
  base.mdenoise_name = o.mdenoise;

  const SweepSpec& sp = o.sweep;
  if (sp.param.empty() || ((sp.param == "alpha" || sp.param == "beta1" || sp.param == "beta2") &&
                           sp.count <= 0)) {
    return cells;  // empty grid
  }

  if (sp.param == "alpha" || sp.param == "beta1" || sp.param == "beta2") {
    for (int i = 0; i < sp.count; ++i) {
      const double v = sp.count == 1
                           ? sp.lo
                           : sp.lo + (sp.hi - sp.lo) * static_cast<double>(i) /
                                         static_cast<double>(sp.count - 1);
      SweepCell c = base;
      if (sp.param == "alpha") c.params.alpha = v;
      if (sp.param == "beta1") c.params.beta1 = v;
      if (sp.param == "beta2") c.params.beta2 = v;
      cells.push_back(std::move(c));
    }
  } else if (sp.param == "bnoise" || sp.param == "bnoise_strategy") {
    for (BNoiseStrategy b :
         {BNoiseStrategy::ConcatBeforeInversion, BNoiseStrategy::InterpBeforeInversion,
          BNoiseStrategy::InterpAfterInversion, BNoiseStrategy::RandomNoise}) {
      SweepCell c = base;
      c.strat.bnoise = b;
      c.bnoise_name = to_string(b);
      cells.push_back(std::move(c));
    }
  } else if (sp.param == "mdenoise" || sp.param == "mdenoise_strategy") {
    for (MDeNoiseStrategy m : {MDeNoiseStrategy::SlerpFusion, MDeNoiseStrategy::ConcatFusion}) {
      SweepCell c = base;
      c.strat.mdenoise = m;
      c.mdenoise_name = to_string(m);
      cells.push_back(std::move(c));
    }
  } else {
    throw InvalidConfig("unknown sweep param: " + sp.param);
  }
  return cells;
}

int cmd_sweep(const RunOptions& o) {
  Session s = open_session(o);
  if (!s.provider) {
    throw InvalidConfig("sweep needs a world for scoring (pass --world with remote backends)");
  }
  const ConceptInputs inputs = concept_inputs(o);
  const std::vector<SweepCell> cells = build_cells(o);

  std::ostringstream csv;
  csv << "cell_index,alpha,beta1,beta2,bnoise,mdenoise,seed,"
         "s_i1,s_i2,s_t1,s_t2,total,b_sim,error\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SweepCell& c = cells[i];
    csv << i << ',' << format_double(c.params.alpha) << ',' << format_double(c.params.beta1)
        << ',' << format_double(c.params.beta2) << ',' << c.bnoise_name << ','
        << c.mdenoise_name << ',' << c.params.seed << ',';
    try {
      const Output out = hsp(inputs, c.params, o.sampler, c.strat, *s.backend);
      const ScoreBreakdown b = evaluate(out, inputs, *s.provider, o.bounds);
      csv << format_double(b.s_i1) << ',' << format_double(b.s_i2) << ','
          << format_double(b.s_t1) << ',' << format_double(b.s_t2) << ','
          << format_double(b.total) << ',' << format_double(b.b_sim) << ",\n";
    } catch (const Error& e) {
      std::string msg = e.what();
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      csv << ",,,,,," << msg << '\n';
    }
  }

  ensure_out_dir(o);
  write_text_file(out_path(o, "sweep.csv"), csv.str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"vmdiff: noise-blending concept fusion on pluggable flow backends"};
  app.require_subcommand(1);

  std::string config_path;
  std::string world;
  std::string backend_spec;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool fair = false;
  std::vector<std::string> concepts;
  std::string bnoise;
  std::string mdenoise;

  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--world", world, "world json path or built-in name (toy2, toy-asym, toy16)");
    sub->add_option("--backend", backend_spec, "toy | remote:ADDR");
    sub->add_option("--seed", seed, "base random seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--fair", fair, "fair-comparison mode: one round, seed 42");
    sub->add_option("--concepts", concepts, "the two concept ids")->expected(2);
    sub->add_option("--strategy-bnoise", bnoise,
                    "concat_before_inversion | interp_before_inversion | "
                    "interp_after_inversion | random");
    sub->add_option("--strategy-mdenoise", mdenoise, "slerp | concat");
  };

  // fuse
  CLI::App* fuse = app.add_subcommand("fuse", "run one hybrid sampling pass with explicit theta");
  add_shared(fuse);
  double alpha = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  fuse->add_option("--alpha", alpha, "mixing factor in [0,1]");
  fuse->add_option("--beta1", beta1, "first noise scale factor");
  fuse->add_option("--beta2", beta2, "second noise scale factor");

  // search
  CLI::App* search = app.add_subcommand("search", "run the adaptive parameter search");
  add_shared(search);
  double threshold = 0.0;
  int rounds = 0;
  int alpha_budget = 0;
  int beta_budget = 0;
  std::string beta_range;
  search->add_option("--threshold", threshold, "acceptance threshold");
  search->add_option("--rounds", rounds, "max resampling rounds K");
  search->add_option("--alpha-budget", alpha_budget, "alpha search evaluation budget");
  search->add_option("--beta-budget", beta_budget, "beta search evaluation budget");
  search->add_option("--beta-range", beta_range, "beta search range LO:HI");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a parameter or strategy grid");
  add_shared(sweep);
  std::string grid;
  sweep->add_option("--grid", grid,
                    "alpha:LO:HI:N | beta1:LO:HI:N | beta2:LO:HI:N | bnoise | mdenoise");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunOptions o;
    if (!config_path.empty()) {
      apply_config_json(o, json::parse(read_text_file(config_path)));
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--world")) o.world = world;
    if (sub->count("--backend")) o.backend_spec = backend_spec;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--out")) o.out_dir = out_dir;
    if (sub->count("--fair")) o.fair = true;
    if (sub->count("--concepts")) o.concepts = concepts;
    if (sub->count("--strategy-bnoise")) o.bnoise = bnoise;
    if (sub->count("--strategy-mdenoise")) o.mdenoise = mdenoise;

    if (sub == fuse) {
      if (sub->count("--alpha")) o.alpha = alpha;
      if (sub->count("--beta1")) o.beta1 = beta1;
      if (sub->count("--beta2")) o.beta2 = beta2;
    }
    if (sub == search) {
      if (sub->count("--threshold")) o.search.threshold = threshold;
      if (sub->count("--rounds")) o.search.max_rounds = rounds;
      if (sub->count("--alpha-budget")) o.search.alpha_budget = alpha_budget;
      if (sub->count("--beta-budget")) o.search.beta_budget = beta_budget;
      if (sub->count("--beta-range")) {
        const std::size_t colon = beta_range.find(':');
        if (colon == std::string::npos) throw InvalidConfig("--beta-range expects LO:HI");
        o.search.beta_lo = std::stod(beta_range.substr(0, colon));
        o.search.beta_hi = std::stod(beta_range.substr(colon + 1));
      }
    }
    if (sub == sweep && sub->count("--grid")) {
      std::istringstream ss(grid);
      std::string tok;
      std::vector<std::string> parts;
      while (std::getline(ss, tok, ':')) parts.push_back(tok);
      if (parts.empty()) throw InvalidConfig("empty --grid spec");
      o.sweep.param = parts[0];
      if (parts[0] == "alpha" || parts[0] == "beta1" || parts[0] == "beta2") {
        if (parts.size() != 4) throw InvalidConfig("--grid expects PARAM:LO:HI:N");
        o.sweep.lo = std::stod(parts[1]);
        o.sweep.hi = std::stod(parts[2]);
        o.sweep.count = std::stoi(parts[3]);
      }
    }

    if (o.fair) {
      // Resampling disabled for fair comparisons: one round, fixed seed 42.
      o.search.max_rounds = 1;
      o.seed = 42;
    }

    if (sub == fuse) return cmd_fuse(o);
    if (sub == search) return cmd_search(o);
    return cmd_sweep(o);
  } catch (const BackendFailure& e) {
    std::cerr << "backend failure: " << e.what() << '\n';
    return kExitBackendFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace vmdiff::cli

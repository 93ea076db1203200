#include "vmdiff/eaa.hpp"

#include <cmath>
#include <optional>

#include "vmdiff/rng.hpp"

namespace vmdiff {

void SearchConfig::validate() const {
  if (!std::isfinite(threshold)) throw InvalidConfig("threshold must be finite");
  if (max_rounds < 1) throw InvalidConfig("max_rounds must be >= 1");
  if (alpha_budget < 3 || beta_budget < 3) {
    throw InvalidConfig("search budgets must be >= 3 (golden-section minimum)");
  }
  if (!(beta_lo > 0.0) || !(beta_lo < beta_hi)) {
    throw InvalidConfig("require 0 < beta_lo < beta_hi");
  }
  if (!(alpha_tol > 0.0)) throw InvalidConfig("alpha_tol must be > 0");
}

const char* to_string(SearchStage s) {
  switch (s) {
    case SearchStage::Init: return "init";
    case SearchStage::AlphaSearch: return "alpha_search";
    case SearchStage::BetaSearch: return "beta_search";
  }
  return "?";
}

SearchStage stage_from_string(const std::string& s) {
  if (s == "init") return SearchStage::Init;
  if (s == "alpha_search") return SearchStage::AlphaSearch;
  if (s == "beta_search") return SearchStage::BetaSearch;
  throw InvalidConfig("unknown search stage: " + s);
}

GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                int budget, double tol) {
  if (!(lo < hi)) throw InvalidConfig("golden_section_max: require lo < hi");
  if (budget < 3) throw InvalidConfig("golden_section_max: budget must be >= 3");

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&f](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      throw NonFiniteObjective("golden_section_max: objective non-finite at x=" +
                               std::to_string(x));
    }
    return v;
  };

  double a = lo;
  double b = hi;
  double c = b - (b - a) * invphi;
  double d = a + (b - a) * invphi;
  double fc = eval(c);
  int evals = 1;
  double best_x = c;
  double best_f = fc;
  double fd = eval(d);
  ++evals;
  if (fd > best_f) {
    best_x = d;
    best_f = fd;
  }

  while (evals < budget && (b - a) >= tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * invphi;
      fc = eval(c);
      ++evals;
      if (fc > best_f) {
        best_x = c;
        best_f = fc;
      }
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * invphi;
      fd = eval(d);
      ++evals;
      if (fd > best_f) {
        best_x = d;
        best_f = fd;
      }
    }
  }
  return GoldenResult{best_x, best_f, evals};
}

namespace {

// Shared state of one EAA run: encoded inputs plus the growing trace.
struct EaaRun {
  const ConceptInputs& inputs;
  const SearchConfig& cfg;
  const SamplerConfig& sampler_cfg;
  const FusionStrategies& strategies;
  const VelocityBackend& backend;
  const SimilarityProvider& provider;
  const NormalizationBounds& bounds;

  Embedding z1;
  Embedding z2;
  Embedding zp;
  std::vector<Candidate> trace;
  int next_eval_index = 0;

  // Scores a candidate whose blended noise is already available (the alpha
  // stage reuses the round's eps_b: alpha does not enter the BNoise pass).
  Candidate eval_with_blend(const Latent& eps_b, const FusionParams& params, SearchStage stage,
                            int round) {
    const Output out = mixing_denoise(eps_b, z1, z2, zp, params.alpha, strategies.mdenoise,
                                      sampler_cfg, backend);
    Candidate c;
    c.params = params;
    c.breakdown = evaluate(out, inputs, provider, bounds);
    c.stage = stage;
    c.round = round;
    c.eval_index = next_eval_index++;
    trace.push_back(c);
    return c;
  }

  // Full pipeline evaluation; beta enters the BNoise conditioning, so each
  // beta candidate re-runs blend_noise ahead of the generation pass.
  Candidate eval_full(const FusionParams& params, SearchStage stage, int round) {
    const Latent eps_b =
        blend_noise(params, z1, z2, zp, strategies.bnoise, sampler_cfg, backend);
    return eval_with_blend(eps_b, params, stage, round);
  }
};

EAAResult finalize(EaaRun& run, int rounds_used, std::vector<std::string> round_errors) {
  EAAResult res;
  res.trace = std::move(run.trace);
  res.round_errors = std::move(round_errors);
  res.rounds_used = rounds_used;
  if (res.trace.empty()) {
    throw BackendFailure("run_eaa: no candidate could be evaluated" +
                         (res.round_errors.empty() ? std::string()
                                                   : "; last error: " + res.round_errors.back()));
  }
  res.best = res.trace.front();
  for (const Candidate& c : res.trace) {
    if (c.breakdown.total > res.best.breakdown.total) res.best = c;
  }
  res.accepted = res.best.breakdown.total > run.cfg.threshold;
  return res;
}

}  // namespace

EAAResult run_eaa(const ConceptInputs& inputs, const SearchConfig& cfg,
                  const SamplerConfig& sampler_cfg, const FusionStrategies& strategies,
                  const VelocityBackend& backend, const SimilarityProvider& provider,
                  const NormalizationBounds& bounds) {
  cfg.validate();
  sampler_cfg.validate();

  EaaRun run{inputs, cfg, sampler_cfg, strategies, backend, provider, bounds, {}, {}, {}, {}, 0};
  try {
    run.z1 = backend.encode_image(inputs.concept1);
    run.z2 = backend.encode_image(inputs.concept2);
    run.zp = backend.encode_prompt(inputs.guiding_prompt());
  } catch (const std::exception& e) {
    throw BackendFailure(std::string("run_eaa encode: ") + e.what());
  }

  std::vector<std::string> round_errors;
  int rounds_used = 0;

  for (int k = 1; k <= cfg.max_rounds; ++k) {
    rounds_used = k;
    FusionParams p0;
    p0.alpha = 0.5;
    p0.beta1 = 1.0;
    p0.beta2 = 1.0;
    p0.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(k));

    try {
      const Latent eps_b =
          blend_noise(p0, run.z1, run.z2, run.zp, strategies.bnoise, sampler_cfg, backend);
      run.eval_with_blend(eps_b, p0, SearchStage::Init, k);

      std::optional<Candidate> alpha_best;
      auto f_alpha = [&](double a) {
        FusionParams p = p0;
        p.alpha = a;
        const Candidate c = run.eval_with_blend(eps_b, p, SearchStage::AlphaSearch, k);
        if (!alpha_best || c.breakdown.total > alpha_best->breakdown.total) alpha_best = c;
        return c.breakdown.total;
      };
      golden_section_max(f_alpha, 0.0, 1.0, cfg.alpha_budget, cfg.alpha_tol);
      const Candidate astar = *alpha_best;
      if (astar.breakdown.total > cfg.threshold) break;

      // Hold the beta of the side the fusion already favors; search the other.
      const double s1 = astar.breakdown.s_i1 + astar.breakdown.s_t1;
      const double s2 = astar.breakdown.s_i2 + astar.breakdown.s_t2;
      const bool search_beta2 = s1 > s2;

      std::optional<Candidate> beta_best;
      auto f_beta = [&](double bval) {
        FusionParams p = astar.params;
        if (search_beta2) {
          p.beta2 = bval;
        } else {
          p.beta1 = bval;
        }
        const Candidate c = run.eval_full(p, SearchStage::BetaSearch, k);
        if (!beta_best || c.breakdown.total > beta_best->breakdown.total) beta_best = c;
        return c.breakdown.total;
      };
      golden_section_max(f_beta, cfg.beta_lo, cfg.beta_hi, cfg.beta_budget, cfg.alpha_tol);

      // The beta stage never returns a candidate worse than its input.
      const Candidate bstar =
          (beta_best && beta_best->breakdown.total > astar.breakdown.total) ? *beta_best : astar;
      if (bstar.breakdown.total > cfg.threshold) break;
    } catch (const Error& e) {
      round_errors.push_back("round " + std::to_string(k) + ": " + e.what());
      continue;
    }
  }

  return finalize(run, rounds_used, std::move(round_errors));
}

}  // namespace vmdiff

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vmdiff/flow_sampler.hpp"
#include "vmdiff/scoring.hpp"

namespace vmdiff {

// Knobs of the adaptive search loop.
struct SearchConfig {
  double threshold = 2.4;   // acceptance threshold on the similarity score
  int max_rounds = 3;       // noise resampling rounds K
  int alpha_budget = 10;    // evaluations per alpha golden search
  int beta_budget = 10;     // evaluations per beta golden search
  double beta_lo = 0.5;     // beta search range
  double beta_hi = 2.0;
  double alpha_tol = 0.01;  // bracket width at which a golden search stops
  std::uint64_t base_seed = 42;

  void validate() const;
};

enum class SearchStage { Init, AlphaSearch, BetaSearch };

const char* to_string(SearchStage s);
SearchStage stage_from_string(const std::string& s);

// One scored parameter evaluation. eval_index increases strictly over a run.
struct Candidate {
  FusionParams params;
  ScoreBreakdown breakdown;
  SearchStage stage = SearchStage::Init;
  int round = 1;
  int eval_index = 0;
};

struct GoldenResult {
  double x_star = 0.0;
  double f_star = 0.0;
  int evals = 0;
};

// Derivative-free maximization of a unimodal scalar function by golden
// section bracketing with interior-point reuse (one new evaluation per
// iteration after the first two). Stops when the bracket is narrower than
// tol or the evaluation budget is spent, and returns the best point actually
// evaluated; ties keep the earlier point. Throws NonFiniteObjective when f
// returns NaN/inf, InvalidConfig for a bad bracket or budget < 3.
GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                int budget, double tol);

struct EAAResult {
  Candidate best;
  bool accepted = false;
  int rounds_used = 0;
  std::vector<Candidate> trace;
  // One message per aborted round (backend/provider failures); the run
  // continues with the next round and the trace stays partial.
  std::vector<std::string> round_errors;
};

// The full adaptive adjustment loop. Per round k = 1..max_rounds, with the
// round seed derived from base_seed: initialize alpha=0.5, beta1=beta2=1,
// golden-search alpha (reusing the round's blended noise, which alpha does
// not affect), stop if the score clears the threshold, otherwise hold the
// beta on the stronger side per S1 vs S2 and golden-search the other over
// [beta_lo, beta_hi] with the full pipeline re-run per evaluation. The
// result carries the best candidate over the whole trace; accepted means
// best.breakdown.total > threshold.
EAAResult run_eaa(const ConceptInputs& inputs, const SearchConfig& cfg,
                  const SamplerConfig& sampler_cfg, const FusionStrategies& strategies,
                  const VelocityBackend& backend, const SimilarityProvider& provider,
                  const NormalizationBounds& bounds = {});

}  // namespace vmdiff

#pragma once

#include <string>

#include "vmdiff/backend.hpp"

namespace vmdiff {

// Pluggable similarity measurements against the two source concepts.
// Implementations must be deterministic; visual() returns values in [0,1],
// semantic_raw() values in the provider's declared raw range (mapped to
// [0,1] by normalize_semantic before scoring).
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;

  virtual double visual(const Output& output, const std::string& concept_id) const = 0;
  virtual double semantic_raw(const Output& output, const std::string& label) const = 0;
};

// Empirical bounds used to map raw semantic scores onto [0,1].
struct NormalizationBounds {
  double lo = 0.15;
  double hi = 0.45;
};

// (raw - lo) / (hi - lo), clamped to [0,1].
double normalize_semantic(double raw, const NormalizationBounds& bounds);

// The similarity score and its parts:
//   total = s_i1 + s_i2 + s_t1 + s_t2 - |s_i1 - s_i2| - |s_t1 - s_t2|
//   b_sim = |s_i1 - s_i2| + |s_t1 - s_t2|
struct ScoreBreakdown {
  double s_i1 = 0.0;
  double s_i2 = 0.0;
  double s_t1 = 0.0;
  double s_t2 = 0.0;
  double total = 0.0;
  double b_sim = 0.0;
};

// Fill total and b_sim from the four components. Throws NonFiniteInput.
ScoreBreakdown score(double s_i1, double s_i2, double s_t1, double s_t2);

// Full scoring of a decoded output against the two concepts: visual
// similarities as-is, semantic similarities normalized through bounds.
// Provider errors are rethrown as ProviderFailure naming the concept index.
ScoreBreakdown evaluate(const Output& output, const ConceptInputs& inputs,
                        const SimilarityProvider& provider,
                        const NormalizationBounds& bounds = {});

}  // namespace vmdiff

#include "vmdiff/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vmdiff/errors.hpp"

namespace vmdiff {

double normalize_semantic(double raw, const NormalizationBounds& bounds) {
  if (!(bounds.lo < bounds.hi)) throw InvalidConfig("normalization bounds require lo < hi");
  return std::clamp((raw - bounds.lo) / (bounds.hi - bounds.lo), 0.0, 1.0);
}

ScoreBreakdown score(double s_i1, double s_i2, double s_t1, double s_t2) {
  if (!std::isfinite(s_i1) || !std::isfinite(s_i2) || !std::isfinite(s_t1) ||
      !std::isfinite(s_t2)) {
    throw NonFiniteInput("score: non-finite component");
  }
  ScoreBreakdown b;
  b.s_i1 = s_i1;
  b.s_i2 = s_i2;
  b.s_t1 = s_t1;
  b.s_t2 = s_t2;
  b.total = s_i1 + s_i2 + s_t1 + s_t2 - std::abs(s_i1 - s_i2) - std::abs(s_t1 - s_t2);
  b.b_sim = std::abs(s_i1 - s_i2) + std::abs(s_t1 - s_t2);
  return b;
}

ScoreBreakdown evaluate(const Output& output, const ConceptInputs& inputs,
                        const SimilarityProvider& provider, const NormalizationBounds& bounds) {
  double s_i1 = 0.0;
  double s_i2 = 0.0;
  double s_t1 = 0.0;
  double s_t2 = 0.0;
  try {
    s_i1 = provider.visual(output, inputs.concept1);
    s_t1 = normalize_semantic(provider.semantic_raw(output, inputs.concept1), bounds);
  } catch (const std::exception& e) {
    throw ProviderFailure(std::string("provider failed on concept 1 (") + inputs.concept1 +
                          "): " + e.what());
  }
  try {
    s_i2 = provider.visual(output, inputs.concept2);
    s_t2 = normalize_semantic(provider.semantic_raw(output, inputs.concept2), bounds);
  } catch (const std::exception& e) {
    throw ProviderFailure(std::string("provider failed on concept 2 (") + inputs.concept2 +
                          "): " + e.what());
  }
  return score(s_i1, s_i2, s_t1, s_t2);
}

}  // namespace vmdiff

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vmdiff/backend.hpp"

namespace vmdiff {

enum class ScheduleKind { LinearSigma };

// Fixed sampling defaults (the non-learned side of the pipeline).
struct SamplerConfig {
  double gamma_den = 5.0;  // guidance for the BNoise denoise segment
  double gamma_inv = 0.0;  // guidance for the BNoise inversion segment
  double gamma_gen = 4.0;  // guidance for the final generation pass
  int t_max = 999;
  int t_den = 652;
  int num_steps = 20;
  ScheduleKind schedule_kind = ScheduleKind::LinearSigma;

  // Throws InvalidConfig when any invariant is violated.
  void validate() const;
};

// Discretized sigma grid. timesteps/sigmas are strictly decreasing with
// sigmas.front() == 1.0 at t = t_max and sigmas.back() == 0.0; den_index is
// the grid point nearest to t_den.
struct Schedule {
  std::vector<int> timesteps;
  std::vector<double> sigmas;
  std::size_t den_index = 0;

  std::size_t size() const { return sigmas.size(); }
};

Schedule build_schedule(const SamplerConfig& config);

// The learnable parameter set. epsilon is represented by the seed that
// deterministically generates the Gaussian noise vector.
struct FusionParams {
  double alpha = 0.5;
  double beta1 = 1.0;
  double beta2 = 1.0;
  std::uint64_t seed = 42;
};

enum class BNoiseStrategy {
  ConcatBeforeInversion,  // default: SCat conditioning through denoise+invert
  InterpBeforeInversion,  // slerp(z1,z2,0.5) conditioning through both segments
  InterpAfterInversion,   // per-embedding pipelines, slerp the refined noises
  RandomNoise,            // skip refinement entirely
};

enum class MDeNoiseStrategy {
  SlerpFusion,   // default: SInp(alpha) conditioning
  ConcatFusion,  // concat(alpha*z1, (1-alpha)*z2) conditioning
};

struct FusionStrategies {
  BNoiseStrategy bnoise = BNoiseStrategy::ConcatBeforeInversion;
  MDeNoiseStrategy mdenoise = MDeNoiseStrategy::SlerpFusion;
};

const char* to_string(BNoiseStrategy s);
const char* to_string(MDeNoiseStrategy s);
BNoiseStrategy bnoise_from_string(const std::string& s);
MDeNoiseStrategy mdenoise_from_string(const std::string& s);

// Euler update over consecutive grid pairs,
//   x_{i+1} = x_i - (sigma_i - sigma_{i+1}) * v(x_i, t_i),
// walking from from_idx (higher sigma) to to_idx. Velocity is evaluated at
// the current grid point; grid points with sigma below 1e-12 contribute zero
// velocity. Backend errors are rethrown as BackendFailure with the step index.
Latent denoise_segment(const Latent& x, std::size_t from_idx, std::size_t to_idx,
                       const ConditionBundle& cond, double guidance,
                       const VelocityBackend& backend, const Schedule& schedule);

// Reverse update x_{i-1} = x_i + (sigma_{i-1} - sigma_i) * v(x_i, t_i),
// walking from from_idx (lower sigma) back to to_idx.
Latent invert_segment(const Latent& x, std::size_t from_idx, std::size_t to_idx,
                      const ConditionBundle& cond, double guidance,
                      const VelocityBackend& backend, const Schedule& schedule);

// BNoise: refine the seed-generated noise into an information-bearing
// estimate by denoising to t_den under strong conditioning and inverting
// back under weak guidance (strategy-dependent, see BNoiseStrategy).
Latent blend_noise(const FusionParams& params, const Embedding& z1, const Embedding& z2,
                   const Embedding& zp, BNoiseStrategy strategy, const SamplerConfig& config,
                   const VelocityBackend& backend);

// MDeNoise: full denoise of eps_b under fused conditioning, then decode.
// x0_out, when non-null, receives the pre-decode latent.
Output mixing_denoise(const Latent& eps_b, const Embedding& z1, const Embedding& z2,
                      const Embedding& zp, double alpha, MDeNoiseStrategy strategy,
                      const SamplerConfig& config, const VelocityBackend& backend,
                      Latent* x0_out = nullptr);

// Per-stage latents captured by hsp when requested.
struct HspStages {
  Latent initial_noise;
  Latent blended_noise;
  Latent final_latent;
};

// The composed hybrid sampling process: blend_noise then mixing_denoise.
// Deterministic given (inputs, theta, theta_hat, strategies, backend).
Output hsp(const ConceptInputs& inputs, const FusionParams& theta, const SamplerConfig& theta_hat,
           const FusionStrategies& strategies, const VelocityBackend& backend,
           HspStages* stages = nullptr);

}  // namespace vmdiff

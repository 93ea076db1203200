#include "vmdiff/flow_sampler.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "vmdiff/rng.hpp"

namespace vmdiff {

namespace {

// Below this sigma the velocity is not evaluated (treated as zero); the
// affine toy field is singular at sigma = 0 and real backends gain nothing
// from a velocity there.
constexpr double kSigmaMin = 1e-12;

Latent velocity_at(const Latent& x, std::size_t idx, const ConditionBundle& cond, double guidance,
                   const VelocityBackend& backend, const Schedule& schedule, const char* what) {
  if (schedule.sigmas[idx] < kSigmaMin) {
    return Latent(std::vector<double>(x.dim(), 0.0));
  }
  try {
    return backend.velocity(x, schedule.timesteps[idx], cond, guidance);
  } catch (const std::exception& e) {
    throw BackendFailure(std::string(what) + " at grid index " + std::to_string(idx) +
                         " (t=" + std::to_string(schedule.timesteps[idx]) + "): " + e.what());
  }
}

ConditionBundle bnoise_condition(const FusionParams& params, const Embedding& z1,
                                 const Embedding& z2, const Embedding& zp,
                                 BNoiseStrategy strategy) {
  switch (strategy) {
    case BNoiseStrategy::ConcatBeforeInversion:
      return ConditionBundle::make_scat(scale_concat(z1, z2, params.beta1, params.beta2), zp);
    case BNoiseStrategy::InterpBeforeInversion:
      return ConditionBundle::make_sinp(slerp(z1, z2, 0.5), zp);
    default:
      throw InvalidStrategy("bnoise_condition: strategy has no shared conditioning");
  }
}

// Denoise to den_index then invert back to the top of the grid.
Latent refine_through_inversion(const Latent& eps, const ConditionBundle& cond,
                                const SamplerConfig& config, const Schedule& schedule,
                                const VelocityBackend& backend) {
  Latent mid = denoise_segment(eps, 0, schedule.den_index, cond, config.gamma_den, backend, schedule);
  return invert_segment(mid, schedule.den_index, 0, cond, config.gamma_inv, backend, schedule);
}

}  // namespace

void SamplerConfig::validate() const {
  if (num_steps < 2) throw InvalidConfig("num_steps must be >= 2");
  if (!(0 < t_den && t_den < t_max)) throw InvalidConfig("require 0 < t_den < t_max");
  if (!std::isfinite(gamma_den) || !std::isfinite(gamma_inv) || !std::isfinite(gamma_gen)) {
    throw InvalidConfig("guidance scales must be finite");
  }
  if (gamma_inv < 0.0) throw InvalidConfig("gamma_inv must be >= 0");
}

Schedule build_schedule(const SamplerConfig& config) {
  config.validate();
  if (config.schedule_kind != ScheduleKind::LinearSigma) {
    throw InvalidConfig("unknown schedule kind");
  }

  Schedule s;
  const int n = config.num_steps;
  s.timesteps.resize(n + 1);
  s.sigmas.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(config.t_max) *
                     (1.0 - static_cast<double>(i) / static_cast<double>(n));
    s.timesteps[i] = static_cast<int>(std::lround(t));
    s.sigmas[i] = static_cast<double>(s.timesteps[i]) / static_cast<double>(config.t_max);
  }
  for (int i = 0; i < n; ++i) {
    if (!(s.sigmas[i] > s.sigmas[i + 1])) {
      throw InvalidConfig("sigma grid not strictly decreasing; num_steps too large for t_max");
    }
  }

  s.den_index = 0;
  int best_dist = std::abs(s.timesteps[0] - config.t_den);
  for (std::size_t i = 1; i < s.timesteps.size(); ++i) {
    const int d = std::abs(s.timesteps[i] - config.t_den);
    if (d < best_dist) {
      best_dist = d;
      s.den_index = i;
    }
  }
  return s;
}

const char* to_string(BNoiseStrategy s) {
  switch (s) {
    case BNoiseStrategy::ConcatBeforeInversion: return "concat_before_inversion";
    case BNoiseStrategy::InterpBeforeInversion: return "interp_before_inversion";
    case BNoiseStrategy::InterpAfterInversion: return "interp_after_inversion";
    case BNoiseStrategy::RandomNoise: return "random";
  }
  return "?";
}

const char* to_string(MDeNoiseStrategy s) {
  switch (s) {
    case MDeNoiseStrategy::SlerpFusion: return "slerp";
    case MDeNoiseStrategy::ConcatFusion: return "concat";
  }
  return "?";
}

BNoiseStrategy bnoise_from_string(const std::string& s) {
  if (s == "concat_before_inversion") return BNoiseStrategy::ConcatBeforeInversion;
  if (s == "interp_before_inversion") return BNoiseStrategy::InterpBeforeInversion;
  if (s == "interp_after_inversion") return BNoiseStrategy::InterpAfterInversion;
  if (s == "random") return BNoiseStrategy::RandomNoise;
  throw InvalidStrategy("unknown bnoise strategy: " + s);
}

MDeNoiseStrategy mdenoise_from_string(const std::string& s) {
  if (s == "slerp") return MDeNoiseStrategy::SlerpFusion;
  if (s == "concat") return MDeNoiseStrategy::ConcatFusion;
  throw InvalidStrategy("unknown mdenoise strategy: " + s);
}

Latent denoise_segment(const Latent& x, std::size_t from_idx, std::size_t to_idx,
                       const ConditionBundle& cond, double guidance,
                       const VelocityBackend& backend, const Schedule& schedule) {
  if (from_idx >= to_idx || to_idx >= schedule.size()) {
    throw InvalidConfig("denoise_segment: require from_idx < to_idx < grid size");
  }
  Latent cur = x;
  for (std::size_t i = from_idx; i < to_idx; ++i) {
    const Latent v = velocity_at(cur, i, cond, guidance, backend, schedule, "denoise");
    const double dsig = schedule.sigmas[i] - schedule.sigmas[i + 1];
    for (std::size_t j = 0; j < cur.dim(); ++j) cur.values[j] -= dsig * v.values[j];
  }
  return cur;
}

Latent invert_segment(const Latent& x, std::size_t from_idx, std::size_t to_idx,
                      const ConditionBundle& cond, double guidance,
                      const VelocityBackend& backend, const Schedule& schedule) {
  if (to_idx >= from_idx || from_idx >= schedule.size()) {
    throw InvalidConfig("invert_segment: require to_idx < from_idx < grid size");
  }
  Latent cur = x;
  for (std::size_t i = from_idx; i > to_idx; --i) {
    const Latent v = velocity_at(cur, i, cond, guidance, backend, schedule, "invert");
    const double dsig = schedule.sigmas[i - 1] - schedule.sigmas[i];
    for (std::size_t j = 0; j < cur.dim(); ++j) cur.values[j] += dsig * v.values[j];
  }
  return cur;
}

Latent blend_noise(const FusionParams& params, const Embedding& z1, const Embedding& z2,
                   const Embedding& zp, BNoiseStrategy strategy, const SamplerConfig& config,
                   const VelocityBackend& backend) {
  const Schedule schedule = build_schedule(config);
  Latent eps(gaussian_vector(params.seed, backend.latent_dim()));

  switch (strategy) {
    case BNoiseStrategy::RandomNoise:
      return eps;

    case BNoiseStrategy::ConcatBeforeInversion:
    case BNoiseStrategy::InterpBeforeInversion: {
      const ConditionBundle cond = bnoise_condition(params, z1, z2, zp, strategy);
      return refine_through_inversion(eps, cond, config, schedule, backend);
    }

    case BNoiseStrategy::InterpAfterInversion: {
      const Latent eb1 = refine_through_inversion(
          eps, ConditionBundle::make_sinp(normalize(z1), zp), config, schedule, backend);
      const Latent eb2 = refine_through_inversion(
          eps, ConditionBundle::make_sinp(normalize(z2), zp), config, schedule, backend);
      // Combine at the angular midpoint, rescaled to the mean norm of the two
      // refined noises so the magnitude stays in the backend's expected range.
      const Embedding e1(eb1.values);
      const Embedding e2(eb2.values);
      const double target_norm = 0.5 * (norm(e1) + norm(e2));
      Embedding mixed = slerp(e1, e2, 0.5);
      for (double& v : mixed.values) v *= target_norm;
      return Latent(std::move(mixed.values));
    }
  }
  throw InvalidStrategy("blend_noise: unhandled strategy");
}

Output mixing_denoise(const Latent& eps_b, const Embedding& z1, const Embedding& z2,
                      const Embedding& zp, double alpha, MDeNoiseStrategy strategy,
                      const SamplerConfig& config, const VelocityBackend& backend,
                      Latent* x0_out) {
  const Schedule schedule = build_schedule(config);

  ConditionBundle cond;
  switch (strategy) {
    case MDeNoiseStrategy::SlerpFusion:
      cond = ConditionBundle::make_sinp(slerp(z1, z2, alpha), zp);
      break;
    case MDeNoiseStrategy::ConcatFusion: {
      // concat(alpha*z1, (1-alpha)*z2). Built directly rather than through
      // scale_concat: the endpoints alpha in {0,1} are legal here and leave
      // one half zeroed out.
      ConcatEmbedding c;
      c.beta1 = alpha;
      c.beta2 = 1.0 - alpha;
      c.left.values.resize(z1.dim());
      c.right.values.resize(z2.dim());
      for (std::size_t i = 0; i < z1.dim(); ++i) c.left.values[i] = alpha * z1.values[i];
      for (std::size_t i = 0; i < z2.dim(); ++i) c.right.values[i] = (1.0 - alpha) * z2.values[i];
      cond = ConditionBundle::make_scat(std::move(c), zp);
      break;
    }
  }

  const Latent x0 =
      denoise_segment(eps_b, 0, schedule.size() - 1, cond, config.gamma_gen, backend, schedule);
  if (x0_out != nullptr) *x0_out = x0;
  try {
    return backend.decode(x0);
  } catch (const std::exception& e) {
    throw BackendFailure(std::string("decode: ") + e.what());
  }
}

Output hsp(const ConceptInputs& inputs, const FusionParams& theta, const SamplerConfig& theta_hat,
           const FusionStrategies& strategies, const VelocityBackend& backend, HspStages* stages) {
  Embedding z1;
  Embedding z2;
  Embedding zp;
  try {
    z1 = backend.encode_image(inputs.concept1);
    z2 = backend.encode_image(inputs.concept2);
    zp = backend.encode_prompt(inputs.guiding_prompt());
  } catch (const std::exception& e) {
    throw BackendFailure(std::string("hsp encode: ") + e.what());
  }

  const Latent eps_b =
      blend_noise(theta, z1, z2, zp, strategies.bnoise, theta_hat, backend);
  Latent x0;
  const Output out = mixing_denoise(eps_b, z1, z2, zp, theta.alpha, strategies.mdenoise,
                                    theta_hat, backend, &x0);
  if (stages != nullptr) {
    stages->initial_noise = Latent(gaussian_vector(theta.seed, backend.latent_dim()));
    stages->blended_noise = eps_b;
    stages->final_latent = x0;
  }
  return out;
}

}  // namespace vmdiff

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vmdiff/backend.hpp"
#include "vmdiff/scoring.hpp"

namespace vmdiff {

// A registered toy concept: its conditioning embedding and the point in
// latent space that anchors its semantic identity.
struct ToyConcept {
  std::string id;
  Embedding embedding;
  std::vector<double> target_mean;
};

// Closed-form affine world. The velocity field it induces is exactly
// integrable, which makes the whole sampling pipeline checkable against
// one-shot formulas. Immutable after construction.
struct ToyWorld {
  std::size_t latent_dim = 2;
  std::size_t embed_dim = 2;
  std::vector<std::vector<double>> matrix;  // latent_dim x embed_dim
  std::map<std::string, ToyConcept> concepts;
  std::size_t decode_cloud_size = 256;
  double decode_cloud_std = 0.05;
  // Length scale of the semantic similarity map (distance at which the raw
  // semantic score bottoms out).
  double semantic_scale = 8.0;
  // Seeds the world's shared offset pool: decode clouds and reference clouds
  // reuse one deterministic set of Gaussian offsets, so scores are smooth
  // functions of the decoded point.
  std::uint64_t world_seed = 0x5EEDBA5EULL;

  void validate() const;
  const ToyConcept& concept_by_id(const std::string& id) const;

  // M * z for an embedding-space vector.
  std::vector<double> apply_matrix(const std::vector<double>& z) const;

  // Built-in worlds. "toy2" is the calibrated 2-D default (pair A/B accepts,
  // wide-angle pairs do not); "toy-asym" has a skewed matrix so the score
  // curve peaks away from alpha = 0.5; "toy16" embeds the default geometry in
  // 16 dimensions.
  static ToyWorld default_world();
  static ToyWorld asym_world();
  static ToyWorld wide16_world();
  static ToyWorld by_name(const std::string& name);

  static ToyWorld from_json_string(const std::string& text);
  static ToyWorld load_file(const std::string& path);
  std::string to_json_string() const;
};

// Attractor of the conditioning: SInp(z) -> M*z, SCat -> M*(l+r)/(b1+b2).
std::vector<double> concept_mean(const ConditionBundle& cond, const ToyWorld& world);

// Classifier-free affine field: v = (x - guidance * mean) / sigma with
// sigma = t / t_max; zero at (near-)zero sigma by one-sided convention.
Latent affine_velocity(const Latent& x, int t, const ConditionBundle& cond, double guidance,
                       const ToyWorld& world, int t_max);

// The point x0 plus decode_cloud_size samples from N(x0, std^2 I), drawn
// deterministically from the seed.
Output toy_decode(const Latent& x0, const ToyWorld& world, std::uint64_t seed);

// Median of pairwise squared distances (the kernel-bandwidth heuristic).
double median_sq_distance(const std::vector<std::vector<double>>& samples);

// exp(-max(MMD^2_unbiased, 0) / bandwidth) with Gaussian kernel
// k(x,y) = exp(-|x-y|^2 / bandwidth). 1.0 for identical sets, symmetric in
// (a, b) for a fixed bandwidth. Throws EmptySet.
double mmd_similarity(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b, double bandwidth);

// VelocityBackend over a ToyWorld. t_max mirrors the sampler configuration
// so sigma(t) agrees between sampler and field.
class ToyBackend : public VelocityBackend {
 public:
  explicit ToyBackend(ToyWorld world, int t_max = 999);

  std::size_t latent_dim() const override { return world_.latent_dim; }
  Latent velocity(const Latent& x, int t, const ConditionBundle& cond,
                  double guidance) const override;
  Output decode(const Latent& x0) const override;
  Embedding encode_image(const std::string& concept_id) const override;
  Embedding encode_prompt(const std::string& text) const override;

  const ToyWorld& world() const { return world_; }
  int t_max() const { return t_max_; }

 private:
  ToyWorld world_;
  int t_max_;
};

// Similarity provider over the same world. Visual similarity is the MMD
// kernel score between the decoded cloud and a per-concept reference cloud
// centered on the gamma-scaled attractor; the raw semantic score maps the
// distance between the decoded point and the concept's target mean affinely
// into [raw_lo, raw_hi].
class ToySimilarityProvider : public SimilarityProvider {
 public:
  explicit ToySimilarityProvider(ToyWorld world, double attractor_scale = 4.0,
                                 double raw_lo = 0.15, double raw_hi = 0.45);

  double visual(const Output& output, const std::string& concept_id) const override;
  double semantic_raw(const Output& output, const std::string& label) const override;

  const std::vector<std::vector<double>>& reference_cloud(const std::string& concept_id) const;
  double bandwidth(const std::string& concept_id) const;

 private:
  ToyWorld world_;
  double attractor_scale_;
  double raw_lo_;
  double raw_hi_;
  std::map<std::string, std::vector<std::vector<double>>> ref_clouds_;
  std::map<std::string, double> bandwidths_;
};

}  // namespace vmdiff

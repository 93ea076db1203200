#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vmdiff/latent_ops.hpp"

namespace vmdiff {

// A sampler-side latent state (x_t). Same storage as Embedding but kept as a
// distinct type: latents live in the backend's generation space, embeddings
// in the conditioning space, and the two must not be mixed up.
struct Latent {
  std::vector<double> values;

  Latent() = default;
  explicit Latent(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
};

// Decoded result: a point in concept space plus an optional sample cloud
// around it (used by set-based similarity providers; may be empty).
struct Output {
  std::vector<double> point;
  std::vector<std::vector<double>> cloud;
};

// Conditioning passed to the velocity network: either a scale concatenation
// of the two concept embeddings or a single interpolated embedding, plus the
// prompt embedding.
struct ConditionBundle {
  std::variant<ConcatEmbedding, Embedding> mode;
  Embedding prompt;

  bool is_scat() const { return std::holds_alternative<ConcatEmbedding>(mode); }
  const ConcatEmbedding& scat() const { return std::get<ConcatEmbedding>(mode); }
  const Embedding& sinp() const { return std::get<Embedding>(mode); }

  static ConditionBundle make_scat(ConcatEmbedding c, Embedding prompt_emb) {
    ConditionBundle b;
    b.mode = std::move(c);
    b.prompt = std::move(prompt_emb);
    return b;
  }
  static ConditionBundle make_sinp(Embedding e, Embedding prompt_emb) {
    ConditionBundle b;
    b.mode = std::move(e);
    b.prompt = std::move(prompt_emb);
    return b;
  }
};

// The two source concepts of a fusion run. Labels double as concept ids for
// providers that key reference data by id.
struct ConceptInputs {
  std::string concept1;
  std::string concept2;

  std::string guiding_prompt() const {
    return "A photo of " + concept1 + " creatively fused with " + concept2 + ".";
  }
};

// Provider contract for the velocity field and its encoders/decoder.
//
// velocity() must be deterministic given identical arguments and apply the
// guidance scale internally in classifier-free style,
// v_u + guidance * (v_c - v_u); the sampler passes guidance through opaquely.
// All methods are const and must tolerate concurrent read-only invocation.
// Failures are reported as BackendFailure.
class VelocityBackend {
 public:
  virtual ~VelocityBackend() = default;

  virtual std::size_t latent_dim() const = 0;
  virtual Latent velocity(const Latent& x, int t, const ConditionBundle& cond,
                          double guidance) const = 0;
  virtual Output decode(const Latent& x0) const = 0;
  virtual Embedding encode_image(const std::string& concept_id) const = 0;
  virtual Embedding encode_prompt(const std::string& text) const = 0;
};

}  // namespace vmdiff

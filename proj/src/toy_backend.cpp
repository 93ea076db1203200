#include "vmdiff/toy_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vmdiff/rng.hpp"

namespace vmdiff {

namespace {

constexpr double kSigmaFloor = 1e-12;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Embedding at `deg` degrees from the +y axis within the (x, y) plane of a
// `dim`-dimensional space.
Embedding planar_embedding(double deg, std::size_t dim) {
  const double rad = deg * 3.14159265358979323846 / 180.0;
  std::vector<double> v(dim, 0.0);
  v[0] = std::sin(rad);
  v[1] = std::cos(rad);
  return Embedding(std::move(v));
}

std::vector<std::vector<double>> identity_matrix(std::size_t n) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

std::vector<double> padded(std::vector<double> v, std::size_t dim) {
  v.resize(dim, 0.0);
  return v;
}

}  // namespace

void ToyWorld::validate() const {
  if (latent_dim == 0 || embed_dim == 0) throw InvalidConfig("world dims must be >= 1");
  if (matrix.size() != latent_dim) throw InvalidConfig("matrix row count != latent_dim");
  for (const auto& row : matrix) {
    if (row.size() != embed_dim) throw InvalidConfig("matrix column count != embed_dim");
  }
  if (!(decode_cloud_std >= 0.0)) throw InvalidConfig("decode_cloud_std must be >= 0");
  if (!(semantic_scale > 0.0)) throw InvalidConfig("semantic_scale must be > 0");
  for (const auto& [id, c] : concepts) {
    if (c.embedding.dim() != embed_dim) throw InvalidConfig("concept " + id + ": embedding dim");
    if (c.target_mean.size() != latent_dim) throw InvalidConfig("concept " + id + ": target dim");
    if (norm(c.embedding) == 0.0) throw InvalidConfig("concept " + id + ": zero embedding");
  }
}

const ToyConcept& ToyWorld::concept_by_id(const std::string& id) const {
  auto it = concepts.find(id);
  if (it == concepts.end()) throw Error("unknown concept id: " + id);
  return it->second;
}

std::vector<double> ToyWorld::apply_matrix(const std::vector<double>& z) const {
  if (z.size() != embed_dim) {
    throw DimMismatch("apply_matrix: embedding dim " + std::to_string(z.size()) + " != " +
                      std::to_string(embed_dim));
  }
  std::vector<double> out(latent_dim, 0.0);
  for (std::size_t i = 0; i < latent_dim; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < embed_dim; ++j) s += matrix[i][j] * z[j];
    out[i] = s;
  }
  return out;
}

ToyWorld ToyWorld::default_world() {
  ToyWorld w;
  w.latent_dim = 2;
  w.embed_dim = 2;
  w.matrix = identity_matrix(2);
  w.decode_cloud_size = 256;
  w.decode_cloud_std = 0.5;
  w.semantic_scale = 8.0;

  auto add = [&w](const std::string& id, double deg, std::vector<double> target) {
    w.concepts[id] = ToyConcept{id, planar_embedding(deg, 2), std::move(target)};
  };
  // A/B: the calibrated narrow pair (accepts under the default search).
  add("A", 8.0, {1.0, 0.0});
  add("B", -8.0, {-1.0, 0.0});
  // C/D: wide angle, distant targets; stays below the acceptance threshold.
  add("C", 55.0, {3.0, 0.0});
  add("D", -55.0, {-3.0, 0.0});
  add("E", 25.0, {0.8, 0.6});
  add("F", -30.0, {-0.5, 1.0});
  add("G", 80.0, {2.0, -1.0});
  add("H", -80.0, {-2.0, -1.0});
  w.validate();
  return w;
}

ToyWorld ToyWorld::asym_world() {
  ToyWorld w;
  w.latent_dim = 2;
  w.embed_dim = 2;
  w.matrix = {{1.0, 0.45}, {0.0, 0.62}};
  w.decode_cloud_size = 256;
  w.decode_cloud_std = 0.5;
  w.semantic_scale = 8.0;
  w.concepts["P"] = ToyConcept{"P", planar_embedding(25.0, 2), {1.0, 0.0}};
  w.concepts["Q"] = ToyConcept{"Q", planar_embedding(-40.0, 2), {-1.0, 0.0}};
  w.validate();
  return w;
}

ToyWorld ToyWorld::wide16_world() {
  ToyWorld w;
  w.latent_dim = 16;
  w.embed_dim = 16;
  w.matrix = identity_matrix(16);
  w.decode_cloud_size = 256;
  w.decode_cloud_std = 0.5;
  w.semantic_scale = 8.0;
  w.concepts["A"] = ToyConcept{"A", planar_embedding(8.0, 16), padded({1.0, 0.0}, 16)};
  w.concepts["B"] = ToyConcept{"B", planar_embedding(-8.0, 16), padded({-1.0, 0.0}, 16)};
  w.concepts["C"] = ToyConcept{"C", planar_embedding(55.0, 16), padded({3.0, 0.0}, 16)};
  w.concepts["D"] = ToyConcept{"D", planar_embedding(-55.0, 16), padded({-3.0, 0.0}, 16)};
  w.validate();
  return w;
}

ToyWorld ToyWorld::by_name(const std::string& name) {
  if (name == "toy2" || name == "default") return default_world();
  if (name == "toy-asym") return asym_world();
  if (name == "toy16") return wide16_world();
  throw InvalidConfig("unknown built-in world: " + name);
}

ToyWorld ToyWorld::from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ToyWorld w;
  w.latent_dim = j.at("latent_dim").get<std::size_t>();
  w.embed_dim = j.at("embed_dim").get<std::size_t>();
  w.matrix = j.at("matrix").get<std::vector<std::vector<double>>>();
  for (const auto& cj : j.at("concepts")) {
    ToyConcept c;
    c.id = cj.at("id").get<std::string>();
    c.embedding = Embedding(cj.at("embedding").get<std::vector<double>>());
    c.target_mean = cj.at("target_mean").get<std::vector<double>>();
    w.concepts[c.id] = std::move(c);
  }
  w.decode_cloud_size = j.value("decode_cloud_size", std::size_t{256});
  w.decode_cloud_std = j.value("decode_cloud_std", 0.05);
  w.semantic_scale = j.value("semantic_scale", 8.0);
  w.world_seed = j.value("world_seed", std::uint64_t{0x5EEDBA5EULL});
  w.validate();
  return w;
}

ToyWorld ToyWorld::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open world file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

std::string ToyWorld::to_json_string() const {
  nlohmann::json j;
  j["latent_dim"] = latent_dim;
  j["embed_dim"] = embed_dim;
  j["matrix"] = matrix;
  j["concepts"] = nlohmann::json::array();
  for (const auto& [id, c] : concepts) {
    j["concepts"].push_back({{"id", c.id},
                             {"embedding", c.embedding.values},
                             {"target_mean", c.target_mean}});
  }
  j["decode_cloud_size"] = decode_cloud_size;
  j["decode_cloud_std"] = decode_cloud_std;
  j["semantic_scale"] = semantic_scale;
  j["world_seed"] = world_seed;
  return j.dump(2);
}

std::vector<double> concept_mean(const ConditionBundle& cond, const ToyWorld& world) {
  if (cond.is_scat()) {
    const ConcatEmbedding& c = cond.scat();
    if (c.left.dim() != world.embed_dim || c.right.dim() != world.embed_dim) {
      throw DimMismatch("concept_mean: SCat halves must match embed_dim");
    }
    const double denom = c.beta1 + c.beta2;
    if (denom == 0.0) throw InvalidConfig("concept_mean: beta1 + beta2 == 0");
    std::vector<double> mix(world.embed_dim);
    for (std::size_t i = 0; i < world.embed_dim; ++i) {
      mix[i] = (c.left.values[i] + c.right.values[i]) / denom;
    }
    return world.apply_matrix(mix);
  }
  return world.apply_matrix(cond.sinp().values);
}

Latent affine_velocity(const Latent& x, int t, const ConditionBundle& cond, double guidance,
                       const ToyWorld& world, int t_max) {
  if (x.dim() != world.latent_dim) {
    throw DimMismatch("affine_velocity: latent dim " + std::to_string(x.dim()) + " != " +
                      std::to_string(world.latent_dim));
  }
  const double sigma = static_cast<double>(t) / static_cast<double>(t_max);
  Latent v(std::vector<double>(world.latent_dim, 0.0));
  if (sigma < kSigmaFloor) return v;  // one-sided limit at sigma = 0
  const std::vector<double> mean = concept_mean(cond, world);
  for (std::size_t i = 0; i < world.latent_dim; ++i) {
    v.values[i] = (x.values[i] - guidance * mean[i]) / sigma;
  }
  return v;
}

Output toy_decode(const Latent& x0, const ToyWorld& world, std::uint64_t seed) {
  Output out;
  out.point = x0.values;
  out.cloud.resize(world.decode_cloud_size);
  SplitMix64 gen(seed);
  for (auto& p : out.cloud) {
    p.resize(world.latent_dim);
    for (std::size_t j = 0; j < world.latent_dim; ++j) {
      p[j] = x0.values[j] + world.decode_cloud_std * gen.next_gaussian();
    }
  }
  return out;
}

double median_sq_distance(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw EmptySet("median_sq_distance: need at least two samples");
  std::vector<double> d2;
  d2.reserve(samples.size() * (samples.size() - 1) / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      d2.push_back(sq_dist(samples[i], samples[j]));
    }
  }
  std::sort(d2.begin(), d2.end());
  const std::size_t n = d2.size();
  return (n % 2 == 1) ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
}

double mmd_similarity(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b, double bandwidth) {
  if (a.empty() || b.empty()) throw EmptySet("mmd_similarity: empty sample set");
  if (!(bandwidth > 0.0)) throw InvalidConfig("mmd_similarity: bandwidth must be > 0");
  const std::size_t dim = a.front().size();
  for (const auto& p : a) {
    if (p.size() != dim) throw DimMismatch("mmd_similarity: ragged sample set");
  }
  for (const auto& p : b) {
    if (p.size() != dim) throw DimMismatch("mmd_similarity: sets of different dimension");
  }

  auto kernel = [bandwidth](const std::vector<double>& x, const std::vector<double>& y) {
    return std::exp(-sq_dist(x, y) / bandwidth);
  };
  // Unbiased within-set averages (diagonal excluded); a singleton set has no
  // off-diagonal pairs and contributes k(x,x) = 1.
  auto within = [&kernel](const std::vector<std::vector<double>>& s) {
    const std::size_t m = s.size();
    if (m == 1) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) sum += kernel(s[i], s[j]);
    }
    return 2.0 * sum / (static_cast<double>(m) * static_cast<double>(m - 1));
  };

  double cross = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) cross += kernel(x, y);
  }
  cross /= static_cast<double>(a.size()) * static_cast<double>(b.size());

  const double mmd2 = std::max(within(a) + within(b) - 2.0 * cross, 0.0);
  return std::exp(-mmd2 / bandwidth);
}

ToyBackend::ToyBackend(ToyWorld world, int t_max) : world_(std::move(world)), t_max_(t_max) {
  world_.validate();
  if (t_max_ < 1) throw InvalidConfig("ToyBackend: t_max must be >= 1");
}

Latent ToyBackend::velocity(const Latent& x, int t, const ConditionBundle& cond,
                            double guidance) const {
  return affine_velocity(x, t, cond, guidance, world_, t_max_);
}

Output ToyBackend::decode(const Latent& x0) const {
  if (x0.dim() != world_.latent_dim) throw DimMismatch("decode: latent dim mismatch");
  return toy_decode(x0, world_, world_.world_seed);
}

Embedding ToyBackend::encode_image(const std::string& concept_id) const {
  return world_.concept_by_id(concept_id).embedding;
}

Embedding ToyBackend::encode_prompt(const std::string& text) const {
  const std::uint64_t seed = hash_bytes(text.data(), text.size()) ^ world_.world_seed;
  Embedding e(gaussian_vector(seed, world_.embed_dim));
  return normalize(e);
}

ToySimilarityProvider::ToySimilarityProvider(ToyWorld world, double attractor_scale,
                                             double raw_lo, double raw_hi)
    : world_(std::move(world)),
      attractor_scale_(attractor_scale),
      raw_lo_(raw_lo),
      raw_hi_(raw_hi) {
  world_.validate();
  for (const auto& [id, c] : world_.concepts) {
    const std::vector<double> center = world_.apply_matrix(normalize(c.embedding).values);
    Latent anchor(std::vector<double>(world_.latent_dim));
    for (std::size_t i = 0; i < world_.latent_dim; ++i) {
      anchor.values[i] = attractor_scale_ * center[i];
    }
    // Same offset pool as decode: a pure-concept generation reproduces its
    // reference cloud exactly.
    ref_clouds_[id] = toy_decode(anchor, world_, world_.world_seed).cloud;
    bandwidths_[id] = median_sq_distance(ref_clouds_[id]);
  }
}

double ToySimilarityProvider::visual(const Output& output, const std::string& concept_id) const {
  auto it = ref_clouds_.find(concept_id);
  if (it == ref_clouds_.end()) throw Error("unknown concept id: " + concept_id);
  return mmd_similarity(output.cloud, it->second, bandwidths_.at(concept_id));
}

double ToySimilarityProvider::semantic_raw(const Output& output, const std::string& label) const {
  const ToyConcept& c = world_.concept_by_id(label);
  if (output.point.size() != world_.latent_dim) {
    throw DimMismatch("semantic_raw: point dim mismatch");
  }
  const double dist = std::sqrt(sq_dist(output.point, c.target_mean));
  const double closeness = std::max(0.0, 1.0 - dist / world_.semantic_scale);
  return raw_lo_ + (raw_hi_ - raw_lo_) * closeness;
}

const std::vector<std::vector<double>>& ToySimilarityProvider::reference_cloud(
    const std::string& concept_id) const {
  auto it = ref_clouds_.find(concept_id);
  if (it == ref_clouds_.end()) throw Error("unknown concept id: " + concept_id);
  return it->second;
}

double ToySimilarityProvider::bandwidth(const std::string& concept_id) const {
  auto it = bandwidths_.find(concept_id);
  if (it == bandwidths_.end()) throw Error("unknown concept id: " + concept_id);
  return it->second;
}

}  // namespace vmdiff

#include "vmdiff/latent_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vmdiff {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegenerateAngle = 1e-7;

void require_same_dim(const Embedding& a, const Embedding& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimMismatch(std::string(op) + ": dims " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
}

}  // namespace

double dot(const Embedding& a, const Embedding& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double norm(const Embedding& z) {
  double s = 0.0;
  for (double v : z.values) s += v * v;
  return std::sqrt(s);
}

Embedding normalize(const Embedding& z) {
  const double n = norm(z);
  if (n == 0.0) throw ZeroVector("normalize: zero-norm embedding");
  Embedding out = z;
  for (double& v : out.values) v /= n;
  return out;
}

double angle(const Embedding& z1, const Embedding& z2) {
  require_same_dim(z1, z2, "angle");
  const Embedding u1 = normalize(z1);
  const Embedding u2 = normalize(z2);
  const double d = std::clamp(dot(u1, u2), -1.0, 1.0);
  return std::acos(d);
}

Embedding slerp(const Embedding& z1, const Embedding& z2, double alpha) {
  require_same_dim(z1, z2, "slerp");
  const Embedding u1 = normalize(z1);
  const Embedding u2 = normalize(z2);
  const double delta = std::acos(std::clamp(dot(u1, u2), -1.0, 1.0));

  if (delta < kDegenerateAngle || kPi - delta < kDegenerateAngle) {
    // sin(delta) is too small to divide by; fall back to normalized lerp.
    Embedding mix;
    mix.values.resize(u1.dim());
    for (std::size_t i = 0; i < u1.dim(); ++i) {
      mix.values[i] = alpha * u1.values[i] + (1.0 - alpha) * u2.values[i];
    }
    return normalize(mix);
  }

  const double w1 = std::sin(alpha * delta) / std::sin(delta);
  const double w2 = std::sin((1.0 - alpha) * delta) / std::sin(delta);
  Embedding out;
  out.values.resize(u1.dim());
  for (std::size_t i = 0; i < u1.dim(); ++i) {
    out.values[i] = w1 * u1.values[i] + w2 * u2.values[i];
  }
  return out;
}

ConcatEmbedding scale_concat(const Embedding& z1, const Embedding& z2, double beta1, double beta2) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0)) {
    throw NonPositiveScale("scale_concat: beta1=" + std::to_string(beta1) +
                           " beta2=" + std::to_string(beta2));
  }
  ConcatEmbedding out;
  out.beta1 = beta1;
  out.beta2 = beta2;
  out.left.values.resize(z1.dim());
  out.right.values.resize(z2.dim());
  for (std::size_t i = 0; i < z1.dim(); ++i) out.left.values[i] = beta1 * z1.values[i];
  for (std::size_t i = 0; i < z2.dim(); ++i) out.right.values[i] = beta2 * z2.values[i];
  return out;
}

}  // namespace vmdiff

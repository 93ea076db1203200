#pragma once

#include <cstddef>
#include <vector>

#include "vmdiff/errors.hpp"

namespace vmdiff {

// A conditioning embedding: a plain real vector. Dimension is the vector
// length; entries are expected finite.
struct Embedding {
  std::vector<double> values;

  Embedding() = default;
  explicit Embedding(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
};

// concat(beta1*z1, beta2*z2): both halves stored pre-scaled together with the
// scales that produced them. Logical dimension is left.dim() + right.dim().
struct ConcatEmbedding {
  Embedding left;
  Embedding right;
  double beta1 = 1.0;
  double beta2 = 1.0;

  std::size_t dim() const { return left.dim() + right.dim(); }
};

double dot(const Embedding& a, const Embedding& b);
double norm(const Embedding& z);

// Unit-norm copy of z. Throws ZeroVector when the norm is zero.
Embedding normalize(const Embedding& z);

// Angle between the directions of z1 and z2, in [0, pi]. Both inputs are
// normalized internally and the dot product is clamped to [-1, 1] before
// acos. Throws DimMismatch / ZeroVector.
double angle(const Embedding& z1, const Embedding& z2);

// Spherical interpolation with the alpha weight on z1:
//   sin(alpha*d)/sin(d) * z1 + sin((1-alpha)*d)/sin(d) * z2,  d = angle(z1,z2)
// so alpha=1 returns normalize(z1) and alpha=0 returns normalize(z2).
// Inputs are normalized first. Near-degenerate angles (d < 1e-7 or
// pi - d < 1e-7) fall back to normalized linear interpolation.
Embedding slerp(const Embedding& z1, const Embedding& z2, double alpha);

// concat(beta1*z1, beta2*z2) with beta1, beta2 > 0 (NonPositiveScale otherwise).
ConcatEmbedding scale_concat(const Embedding& z1, const Embedding& z2, double beta1, double beta2);

}  // namespace vmdiff

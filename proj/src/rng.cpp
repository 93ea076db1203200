#include "vmdiff/rng.hpp"

#include <cmath>

namespace vmdiff {

double SplitMix64::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<double> gaussian_vector(std::uint64_t seed, std::size_t n) {
  SplitMix64 gen(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = gen.next_gaussian();
  return out;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t k) {
  SplitMix64 gen(base_seed ^ (k * 0xD1B54A32D192ED03ULL));
  return gen.next();
}

std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace vmdiff

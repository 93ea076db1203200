#pragma once

#include <cstdint>
#include <vector>

namespace vmdiff {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen over std::mt19937 /
// std::normal_distribution because the output stream is fully specified:
// identical seeds give identical draws on every platform and toolchain,
// which the trace-replay guarantees depend on.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in (0, 1]. The shift keeps exactly 53 mantissa bits and
  // the +1 excludes 0 so log() in the gaussian path is always defined.
  double next_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double next_gaussian();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// n i.i.d. standard-normal draws from a fresh generator.
std::vector<double> gaussian_vector(std::uint64_t seed, std::size_t n);

// Per-round seed derivation: one SplitMix64 scramble of (base, k). Fixed for
// all time; traces record the derived seeds so replays are self-checking.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t k);

// FNV-1a over a byte string, used to derive deterministic seeds from text.
std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t seed = 0xCBF29CE484222325ULL);

}  // namespace vmdiff

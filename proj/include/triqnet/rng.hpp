#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "triqnet/errors.hpp"

namespace triqnet {

// Counter-based random numbers (Philox-4x32-10, Salmon et al. 2011).
//
// Every generator is addressed by (seed, stream, index): seed comes from the
// run configuration, stream identifies the experiment, and index addresses the
// substream (e.g. the Monte Carlo round). Draws inside a substream advance a
// block counter. Outputs therefore depend only on the address, never on which
// worker thread produced them, which is what makes parallel runs byte-identical.
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0)
      : key_{mix64(seed ^ mix64(stream ^ 0x1905b4c3a8f2d7e5ull))}, index_{index} {}

  // FNV-1a, for naming streams after experiments ("qss", "tomo", ...).
  static std::uint64_t stream_id(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : name) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      refill();
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Samples an index from an (unnormalized is fine) weight vector by inverse CDF.
  std::size_t pick(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w > 0.0 ? w : 0.0;
    if (total <= 0.0) throw UsageError("Rng::pick: weights sum to zero");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double w = weights[i] > 0.0 ? weights[i] : 0.0;
      if (u < w || i + 1 == weights.size()) return i;
      u -= w;
    }
    return weights.size() - 1;
  }

private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(index_);
    std::uint32_t c1 = static_cast<std::uint32_t>(index_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(block_);
    std::uint32_t c3 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key_);
    std::uint32_t k1 = static_cast<std::uint32_t>(key_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xd2511f53ull * c0;
      const std::uint64_t p1 = 0xcd9e8d57ull * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9e3779b9u;
      k1 += 0xbb67ae85u;
    }
    buf_ = {c0, c1, c2, c3};
    ++block_;
  }

  std::uint64_t key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace triqnet

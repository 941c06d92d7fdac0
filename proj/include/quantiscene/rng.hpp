#pragma once

#include <cstdint>
#include <iterator>
#include <string_view>
#include <utility>

namespace quantiscene {

/// Identifier recorded in dataset manifests. Bump whenever any sampling
/// routine below changes its output for a given seed.
inline constexpr std::string_view kRngVersion = "xoshiro256**+splitmix64/v1";

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a 64-bit hash of a string tag.
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Per-instance seed derivation: seed_for(master, tag, index).
/// Stable across platforms and releases carrying the same kRngVersion.
std::uint64_t seed_for(std::uint64_t master, std::string_view tag,
                       std::uint64_t index) noexcept;

/// Derives an independent stream seed from a parent seed and a numeric stream id.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;

/// xoshiro256** seeded through SplitMix64.
///
/// All distributions are implemented here rather than via <random> so that
/// sampled values are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
  bool bernoulli(double p) noexcept;
  bool coin() noexcept { return (next_u64() >> 63) != 0; }
  /// Standard normal via Box-Muller (cosine branch only).
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  /// Independent child stream; depends only on this generator's seed and `stream`.
  Rng split(std::uint64_t stream) const noexcept { return Rng(derive_seed(seed_, stream)); }
  Rng split(std::string_view tag) const noexcept { return split(hash_tag(tag)); }

  /// Fisher-Yates over any random-access container.
  template <typename Container>
  void shuffle(Container& items) noexcept {
    for (std::size_t i = std::size(items); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename Container>
  auto& pick(Container& items) noexcept {
    return items[static_cast<std::size_t>(
        uniform_int(0, static_cast<std::int64_t>(std::size(items)) - 1))];
  }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace quantiscene

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace pathloss {

/// SplitMix64 finalizer; used to derive independent seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a salt string.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view salt);

/// FNV-1a over the bytes of `s`.
std::uint32_t fnv1a32(std::string_view s);

/// Seeded generator with portable draws. The standard distributions are
/// implementation-defined, so uniform/integer/normal draws are computed here
/// from the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pathloss

#pragma once

#include <cstdint>
#include <limits>

namespace modev {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. A stream is identified by a 64-bit key;
/// the i-th output is mix64(key + i * golden), so streams can be created
/// anywhere (any replication, any step) without shared state. Satisfies
/// UniformRandomBitGenerator, so the <random> distributions apply.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

  /// Stream for (seed, replication, step).
  static RngStream derive(std::uint64_t seed, std::uint64_t replication,
                          std::uint64_t step) noexcept {
    std::uint64_t k = mix64(seed + 0x9e3779b97f4a7c15ULL);
    k = mix64(k ^ (replication * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
    k = mix64(k ^ (step * 0x8cb92ba72f3d8dd7ULL + 0x2545f4914f6cdd1dULL));
    return RngStream(k);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniform in (0, 1), never exactly 0 or 1.
inline double uniform_open(RngStream& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw.
double standard_normal(RngStream& rng);

}  // namespace modev

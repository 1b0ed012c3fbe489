#pragma once

#include <cstdint>
#include <string_view>

namespace hcstretch {

// SplitMix64 (Steele, Lea, Flood 2014). Every stochastic path in the library
// draws from this generator so that a recorded seed reproduces a run
// bit-for-bit on any platform; std:: distributions are avoided for the same
// reason since their algorithms are implementation-defined.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    return mix(z);
  }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t uniform(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Independent child stream; depends only on this generator's seed state
  // and the key, not on how many values were drawn from other children.
  SplitMix64 split(std::uint64_t key) const noexcept {
    return SplitMix64(mix(state_ ^ mix(key + 0x632be59bd9b4e019ULL)));
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, used for digests and for turning task names into seed offsets.
constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-task seed derived from a master seed, a task name and an index.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view task,
                                 std::uint64_t index) noexcept {
  return SplitMix64::mix(master ^ SplitMix64::mix(fnv1a(task) + index));
}

}  // namespace hcstretch

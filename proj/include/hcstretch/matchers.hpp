#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hcstretch/coupling.hpp"
#include "hcstretch/cube.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/rational.hpp"

namespace hcstretch {

inline constexpr std::uint64_t kStableMatchCap = std::uint64_t{1} << 14;
inline constexpr std::uint64_t kAssignmentCap = std::uint64_t{1} << 11;
inline constexpr std::uint64_t kBruteCap = 8;

// Preference of `owner` over the opposite side: nearer first, then smaller
// index. rank_key(a, b) < rank_key(a, b') iff a strictly prefers b.
inline std::pair<int, std::uint64_t> rank_key(std::uint64_t owner, std::uint64_t candidate) {
  return {hamming_dist(owner, candidate), candidate};
}

// Deferred acceptance with A proposing. Preference lists are never stored:
// a proposer walks its candidates ring by ring (Hamming distance d), each
// ring generated from the weight-d XOR masks and sorted by index.
// Returns A -> B as an explicit-domain bijection.
Mapping stable_match(const CubeSet& a, const CubeSet& b,
                     std::uint64_t cap = kStableMatchCap);

struct BlockingPair {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(const BlockingPair&, const BlockingPair&) = default;
};

// All (a, b) that strictly prefer each other to their partners under phi.
std::vector<BlockingPair> verify_stable(const Mapping& phi, const CubeSet& a, const CubeSet& b);

struct W1Result {
  Rational cost;  // mean distance of phi, equal to W1 of the uniform measures
  Mapping phi;    // optimal bijection A -> B
};

// Minimum-cost perfect matching by shortest augmenting paths with integer
// potentials (Hungarian method, O(N^3)).
W1Result w1_exact(const CubeSet& a, const CubeSet& b, std::uint64_t cap = kAssignmentCap);

// Enumerates all |A|! bijections. |A| <= 8.
Rational w1_brute(const CubeSet& a, const CubeSet& b);

// W1 between the uniform measures on two supports of possibly different
// size, by min-cost flow with supplies |B| per point of A and demands |A|
// per point of B.
Rational w1_uniform_measures(const CubeSet& a, const CubeSet& b);

// sqrt(n/2 * log2(2^n / |A|)): transport bound from the uniform measure on
// H_n to the uniform measure on A, with divergence measured in bits.
double kl_transport_bound(const CubeSet& a);

struct BruteStretchResult {
  Rational value;
  Mapping phi;  // first minimizer in enumeration order
};

// Exact minimum of the average stretch over all bijections H_{n-1} -> A.
// Requires |A| = 2^{n-1} and 2 <= n <= 4.
BruteStretchResult min_avgstretch_brute(const CubeSet& a);

}  // namespace hcstretch

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcstretch/cube.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/rational.hpp"

namespace hcstretch {

// Words of up to 81 = 3^4 coordinates, same bit layout as Point.
using RecWord = unsigned __int128;

inline int popcount(RecWord x) noexcept {
  return std::popcount(static_cast<std::uint64_t>(x)) +
         std::popcount(static_cast<std::uint64_t>(x >> 64));
}

inline RecWord rec_mask(int bits) noexcept {
  return bits >= 128 ? ~RecWord{0} : (RecWord{1} << bits) - 1;
}

inline constexpr int kMaxRecmajLevel = 4;

// Base retraction on three bits, indexed by the word x_1 + 2 x_2 + 4 x_3:
//   000 -> 110, 100 -> 101, 010 -> 011, 001 -> 111, identity on weight >= 2
// (strings list x_1 x_2 x_3).
inline constexpr std::array<std::uint8_t, 8> kF1Table = {3, 5, 6, 3, 7, 5, 6, 7};

// Recursive majority on n = 3^k coordinates together with the retraction
// f_k onto its one-set. Levels 1 and 2 are table driven; higher levels
// recurse on thirds.
class RecMajContext {
 public:
  // A custom base table is accepted as-is so that verification can be
  // exercised against broken gadgets.
  explicit RecMajContext(int k, std::array<std::uint8_t, 8> f1 = kF1Table);

  struct Interval {
    int first;  // 1-based, inclusive
    int last;
  };

  int k() const noexcept { return k_; }
  int n() const noexcept { return width(k_); }
  const std::array<std::uint8_t, 8>& f1_table() const noexcept { return f1_; }
  std::array<Interval, 3> thirds() const;

  static int width(int level) noexcept {
    int w = 1;
    for (int i = 0; i < level; ++i) w *= 3;
    return w;
  }

  bool recmaj(RecWord x) const { return recmaj_at(k_, x); }
  bool recmaj_at(int level, RecWord x) const;

  RecWord f(RecWord x) const { return f_at(k_, x); }
  RecWord f_at(int level, RecWord x) const;

  // 64-bit conveniences for k <= 3.
  Point f(const Point& x) const;
  bool recmaj(const Point& x) const;

 private:
  int k_;
  std::array<std::uint8_t, 8> f1_;
  std::array<std::uint8_t, 8> rec1_{};
  std::vector<std::uint8_t> rec2_;
  std::vector<std::uint16_t> f2_;
};

// f_k on a Point; throws PreconditionError unless x.n() == 3^k.
Point f_k(const RecMajContext& ctx, const Point& x);

struct FkVerification {
  int k = 0;
  bool pass = false;
  bool exhaustive = true;
  std::uint64_t checked = 0;
  std::uint64_t zero_count = 0;  // |Z| (exhaustive only)
  std::uint64_t one_count = 0;   // |A|
  std::uint64_t distinct_images = 0;
  std::string failure;  // empty on pass: duplicate_image, image_outside_A, ...
  std::optional<std::uint64_t> witness;
  std::optional<std::uint64_t> witness_other;  // e.g. the colliding preimage
};

// Exhaustive over H_{3^k}, k <= 3: identity on A, image in A, monotone,
// and f restricted to Z a bijection onto A.
FkVerification verify_fk(const RecMajContext& ctx);

// Sampled check of image-in-A, identity on A, idempotence and monotonicity
// (any k <= 4). Witness words above 64 bits are reported by low word.
FkVerification verify_fk_sampled(const RecMajContext& ctx, std::uint64_t samples,
                                 std::uint64_t seed);

// Per-event tallies for a coordinate flip x -> x + e_i. Event order:
// E1 = {1 -> 1}, E2 = {0 -> 1}, E3 = {1 -> 0}, E4 = {0 -> 0}.
struct EventTally {
  std::uint64_t count = 0;
  std::uint64_t dist_sum = 0;  // sum of dist(f(x), f(x + e_i))
};

struct StretchBreakdown {
  int k = 0;
  int coordinate = 0;  // 1-based
  Method method = Method::exact;
  std::uint64_t population = 0;  // 2^n points, or number of samples
  std::uint64_t seed = 0;
  std::array<EventTally, 4> events{};
  std::vector<std::uint64_t> mineq_counts;  // index j in [1, k+1]; slot 0 unused
  std::uint64_t boundary_drift_sum = 0;     // sum of dist(x, f(x)) over E2
  std::uint64_t total_sq_sum = 0;           // for the sampled confidence radius

  Rational total() const;                 // E[dist(f(x), f(x + e_i))]
  Rational probability(int event) const;  // event in [1, 4]
  Rational conditional(int event) const;  // E[dist | E_event]
  Rational e4_weighted() const;           // E[dist | E4] Pr[E4]
  Rational boundary_drift() const;        // E[dist(x, f(x)) | E2]
  double total_ci95() const;              // 0 for exact
};

// Exact enumeration over all 2^n points (k <= 3; k = 3 takes a while).
StretchBreakdown fk_coordinate_stretch(const RecMajContext& ctx, int coordinate);
StretchBreakdown fk_coordinate_stretch_sampled(const RecMajContext& ctx, int coordinate,
                                               std::uint64_t samples, std::uint64_t seed);

// Lowest level j at which recmaj_j agrees on x and x + e_i over the block
// of 3^j coordinates containing i; k + 1 when the root value changes.
int mineq(const RecMajContext& ctx, RecWord x, int coordinate);

// Pr[mineq = j] for j in [1, k+1] over uniform x and uniform coordinate.
std::vector<Rational> mineq_histogram(const RecMajContext& ctx);

struct DriftReport {
  int k = 0;
  Rational drift;  // E[dist(x, f(x)) | recmaj(x) = 0]
  // E[dist(x, f(x)) | E2] per coordinate, when requested.
  std::vector<Rational> boundary;
  Rational boundary_bound;  // sum_{j<k} 1.5^j = 2 (1.5^k - 1)
};

DriftReport conditional_drift(const RecMajContext& ctx, bool with_boundary = true);

struct PhiRecmaj {
  Mapping phi;  // bijection H_{n-1} -> A_recmaj
  std::uint64_t cycles = 0;
  std::uint64_t parallel_pairs = 0;  // x with psi_0(x) = psi_1(x)
};

// Matches H_{n-1} to A along the 2-regular bipartite multigraph with edges
// (x, f(x o 0)) and (x, f(x o 1)). Each cycle is walked from its smallest
// unvisited left vertex, taking the psi_0 edge first and alternating.
PhiRecmaj build_phi_recmaj(const RecMajContext& ctx);

nlohmann::json to_json(const StretchBreakdown& b);
nlohmann::json to_json(const FkVerification& v);

}  // namespace hcstretch

#pragma once

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcstretch/rational.hpp"

namespace hcstretch {

// Points are n-bit words: bit i-1 holds coordinate x_i (coordinates are
// 1-based in every public signature). H_{n-1} sits inside H_n as the points
// with x_n = 0, so a point of the half cube has the same word in both.
inline constexpr int kMaxPointDim = 64;
// Largest n for which subsets of H_n are materialized as bitmaps.
inline constexpr int kMaxSetDim = 30;

class Point {
 public:
  Point(int n, std::uint64_t bits);

  // "x_1 x_2 ... x_n" as a 0/1 string, spaces ignored: "110 110 000".
  static Point from_coords(std::string_view coords);

  int n() const noexcept { return n_; }
  std::uint64_t bits() const noexcept { return bits_; }

  bool coord(int i) const;   // x_i, 1-based
  Point flip(int i) const;   // x + e_i
  Point complement() const;  // 1 - x
  int weight() const noexcept { return std::popcount(bits_); }

  std::string coords() const;

  friend bool operator==(const Point&, const Point&) = default;

 private:
  int n_;
  std::uint64_t bits_;
};

std::ostream& operator<<(std::ostream& os, const Point& p);

inline std::uint64_t low_mask(int n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

inline int hamming_dist(std::uint64_t x, std::uint64_t y) noexcept {
  return std::popcount(x ^ y);
}

// Throws PreconditionError on dimension mismatch.
int hamming_dist(const Point& x, const Point& y);

// Subset of H_n as a 2^n-bit membership bitmap with cached cardinality.
class CubeSet {
 public:
  explicit CubeSet(int n);  // empty set

  static CubeSet full(int n);
  static CubeSet from_indices(int n, const std::vector<std::uint64_t>& points);

  int n() const noexcept { return n_; }
  std::uint64_t card() const noexcept { return card_; }
  std::uint64_t universe() const noexcept { return std::uint64_t{1} << n_; }
  Rational density() const;

  bool contains(std::uint64_t x) const noexcept {
    return (words_[x >> 6] >> (x & 63)) & 1U;
  }
  bool contains(const Point& p) const;

  // Returns true when the membership changed.
  bool insert(std::uint64_t x);
  bool erase(std::uint64_t x);

  // Members in ascending index order.
  std::vector<std::uint64_t> members() const;
  CubeSet complement() const;

  // Number of members strictly below x. O(1) after the first call.
  std::uint64_t rank(std::uint64_t x) const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(static_cast<std::uint64_t>(w) * 64 + static_cast<std::uint64_t>(b));
        bits &= bits - 1;
      }
    }
  }

  bool is_subset_of(const CubeSet& other) const;

  friend bool operator==(const CubeSet& a, const CubeSet& b) {
    return a.n_ == b.n_ && a.words_ == b.words_;
  }

 private:
  void check_index(std::uint64_t x) const;

  int n_;
  std::uint64_t card_ = 0;
  std::vector<std::uint64_t> words_;
  mutable std::vector<std::uint64_t> rank_prefix_;
};

// ---------------------------------------------------------------------------
// Boolean functions

// Recursive majority of 3's on n = 3^k coordinates (k <= 3 for 64-bit
// points; the recmaj module carries a wider word for k = 4).
bool recmaj_eval(int k, const Point& x);
bool majority3(unsigned a, unsigned b, unsigned c) noexcept;

// Tribes: s disjoint clauses of width w. delta = 1/2 - |A_tribes| / 2^n.
struct TribesParams {
  int w = 0;
  int s = 0;
  int n = 0;
  Rational delta;
};

// Maximal s with 1 - (1 - 2^-w)^s <= 1/2.
TribesParams tribes_params(int w);
// Explicit (w, s); s must not exceed the maximal balanced s so delta >= 0.
TribesParams make_tribes_params(int w, int s);
// |A_tribes| / 2^n = 1 - (1 - 2^-w)^s, exact.
Rational tribes_density(int w, int s);

bool tribes_eval(const TribesParams& p, const Point& x);
bool tribes_eval_word(int w, int s, std::uint64_t x) noexcept;

// ---------------------------------------------------------------------------
// Named subsets

enum class SetKind {
  subcube0,      // {x : x_n = 0}
  parity_even,   // even weight
  majority,      // weight > n/2, odd n
  recmaj,        // recmaj_k(x) = 1, n = 3^k
  tribes_ones,   // tribes(x) = 1, n = s*w from tribes_params
  random_half,   // uniformly random 2^{n-1}-subset
  candidate_star // two antipodal balls plus filler
};

std::string_view to_string(SetKind kind) noexcept;
std::optional<SetKind> parse_set_kind(std::string_view name) noexcept;

CubeSet make_set(SetKind kind, int n, std::uint64_t seed = 0);

struct CandidateParams {
  int n = 0;
  int kstar = 0;
  CubeSet ball0{1};
  CubeSet ball1{1};
  CubeSet filler{1};

  CubeSet combined() const;
};

// Largest k with sum_{j<=k} C(n, j) <= 2^{n-2}; filler takes the smallest
// eligible indices. Requires 2 <= n <= kMaxSetDim.
CandidateParams candidate_params(int n);

// A plus the smallest-index non-members until |result| = 2^{n-1}.
CubeSet superset_to_half(const CubeSet& a);

// ---------------------------------------------------------------------------
// Set file: "n=<n>", "card=<card>", then one decimal index per line.

void write_set(std::ostream& os, const CubeSet& set);
CubeSet read_set(std::istream& is);
void write_set_file(const std::string& path, const CubeSet& set);
CubeSet read_set_file(const std::string& path);

}  // namespace hcstretch

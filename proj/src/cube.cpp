#include "hcstretch/cube.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hcstretch/errors.hpp"
#include "hcstretch/rng.hpp"

namespace hcstretch {

namespace {

void require_point_dim(int n) {
  if (n < 1 || n > kMaxPointDim) {
    throw PreconditionError("point dimension " + std::to_string(n) + " outside [1, 64]");
  }
}

void require_set_dim(int n) {
  if (n < 0 || n > kMaxSetDim) {
    throw PreconditionError("set dimension " + std::to_string(n) + " outside [0, 30]");
  }
}

int log3_exact(int n) {
  int k = 0;
  int p = 1;
  while (p < n) {
    p *= 3;
    ++k;
  }
  return (p == n && k >= 1) ? k : -1;
}

std::uint64_t recmaj_word(int k, std::uint64_t bits) noexcept {
  int len = 1;
  for (int i = 0; i < k; ++i) len *= 3;
  for (int level = 0; level < k; ++level) {
    std::uint64_t next = 0;
    for (int t = 0; t < len / 3; ++t) {
      const auto a = static_cast<unsigned>((bits >> (3 * t)) & 1U);
      const auto b = static_cast<unsigned>((bits >> (3 * t + 1)) & 1U);
      const auto c = static_cast<unsigned>((bits >> (3 * t + 2)) & 1U);
      next |= static_cast<std::uint64_t>(majority3(a, b, c)) << t;
    }
    bits = next;
    len /= 3;
  }
  return bits & 1U;
}

// 2 (2^w - 1)^s >= 2^{ws}, i.e. 1 - (1 - 2^-w)^s <= 1/2.
bool tribes_balanced(int w, int s) {
  BigInt lhs = pow2(static_cast<unsigned>(w)) - 1;
  lhs = boost::multiprecision::pow(lhs, static_cast<unsigned>(s));
  lhs <<= 1;
  return lhs >= pow2(static_cast<unsigned>(w * s));
}

constexpr int kMaxTribeWidth = 20;

}  // namespace

// ---------------------------------------------------------------------------
// Point

Point::Point(int n, std::uint64_t bits) : n_(n), bits_(bits) {
  require_point_dim(n);
  if ((bits & ~low_mask(n)) != 0) {
    throw PreconditionError("point word has bits above coordinate " + std::to_string(n));
  }
}

Point Point::from_coords(std::string_view coords) {
  std::uint64_t bits = 0;
  int n = 0;
  for (char c : coords) {
    if (c == ' ' || c == '_') continue;
    if (c != '0' && c != '1') {
      throw ParseError("invalid coordinate character '" + std::string(1, c) + "'");
    }
    if (n >= kMaxPointDim) throw PreconditionError("too many coordinates");
    if (c == '1') bits |= std::uint64_t{1} << n;
    ++n;
  }
  return Point(n, bits);
}

bool Point::coord(int i) const {
  if (i < 1 || i > n_) throw PreconditionError("coordinate out of range");
  return (bits_ >> (i - 1)) & 1U;
}

Point Point::flip(int i) const {
  if (i < 1 || i > n_) throw PreconditionError("coordinate out of range");
  return Point(n_, bits_ ^ (std::uint64_t{1} << (i - 1)));
}

Point Point::complement() const { return Point(n_, ~bits_ & low_mask(n_)); }

std::string Point::coords() const {
  std::string s(static_cast<std::size_t>(n_), '0');
  for (int i = 0; i < n_; ++i) {
    if ((bits_ >> i) & 1U) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

std::ostream& operator<<(std::ostream& os, const Point& p) { return os << p.coords(); }

int hamming_dist(const Point& x, const Point& y) {
  if (x.n() != y.n()) {
    throw PreconditionError("dimension mismatch: " + std::to_string(x.n()) + " vs " +
                            std::to_string(y.n()));
  }
  return hamming_dist(x.bits(), y.bits());
}

// ---------------------------------------------------------------------------
// CubeSet

CubeSet::CubeSet(int n) : n_(n) {
  require_set_dim(n);
  const std::uint64_t size = std::uint64_t{1} << n;
  words_.assign(static_cast<std::size_t>((size + 63) / 64), 0);
}

CubeSet CubeSet::full(int n) {
  CubeSet s(n);
  const std::uint64_t size = s.universe();
  for (std::size_t w = 0; w < s.words_.size(); ++w) {
    const std::uint64_t lo = static_cast<std::uint64_t>(w) * 64;
    s.words_[w] = (size - lo >= 64) ? ~std::uint64_t{0} : low_mask(static_cast<int>(size - lo));
  }
  s.card_ = size;
  return s;
}

CubeSet CubeSet::from_indices(int n, const std::vector<std::uint64_t>& points) {
  CubeSet s(n);
  for (auto x : points) s.insert(x);
  return s;
}

Rational CubeSet::density() const { return Rational(BigInt(card_), pow2(static_cast<unsigned>(n_))); }

bool CubeSet::contains(const Point& p) const {
  if (p.n() != n_) throw PreconditionError("dimension mismatch in membership test");
  return contains(p.bits());
}

void CubeSet::check_index(std::uint64_t x) const {
  if (x >= universe()) {
    throw PreconditionError("index " + std::to_string(x) + " outside H_" + std::to_string(n_));
  }
}

bool CubeSet::insert(std::uint64_t x) {
  check_index(x);
  auto& word = words_[x >> 6];
  const std::uint64_t bit = std::uint64_t{1} << (x & 63);
  if (word & bit) return false;
  word |= bit;
  ++card_;
  rank_prefix_.clear();
  return true;
}

bool CubeSet::erase(std::uint64_t x) {
  check_index(x);
  auto& word = words_[x >> 6];
  const std::uint64_t bit = std::uint64_t{1} << (x & 63);
  if (!(word & bit)) return false;
  word &= ~bit;
  --card_;
  rank_prefix_.clear();
  return true;
}

std::vector<std::uint64_t> CubeSet::members() const {
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(card_));
  for_each([&](std::uint64_t x) { out.push_back(x); });
  return out;
}

CubeSet CubeSet::complement() const {
  CubeSet c = full(n_);
  for (std::size_t w = 0; w < words_.size(); ++w) c.words_[w] &= ~words_[w];
  c.card_ = universe() - card_;
  return c;
}

std::uint64_t CubeSet::rank(std::uint64_t x) const {
  check_index(x);
  if (rank_prefix_.empty()) {
    rank_prefix_.resize(words_.size());
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      rank_prefix_[w] = acc;
      acc += static_cast<std::uint64_t>(std::popcount(words_[w]));
    }
  }
  const std::size_t w = static_cast<std::size_t>(x >> 6);
  const std::uint64_t below = words_[w] & low_mask(static_cast<int>(x & 63));
  return rank_prefix_[w] + static_cast<std::uint64_t>(std::popcount(below));
}

bool CubeSet::is_subset_of(const CubeSet& other) const {
  if (other.n_ != n_) return false;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if (words_[w] & ~other.words_[w]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Boolean functions

bool majority3(unsigned a, unsigned b, unsigned c) noexcept { return (a + b + c) >= 2; }

bool recmaj_eval(int k, const Point& x) {
  if (k < 1) throw PreconditionError("recursive majority needs k >= 1");
  const int k_of_n = log3_exact(x.n());
  if (k_of_n != k) {
    throw PreconditionError("recursive majority of level " + std::to_string(k) +
                            " needs n = 3^k, got n = " + std::to_string(x.n()));
  }
  return recmaj_word(k, x.bits()) != 0;
}

Rational tribes_density(int w, int s) {
  if (w < 1 || s < 1) throw PreconditionError("tribes needs w >= 1 and s >= 1");
  BigInt zero_count = boost::multiprecision::pow(BigInt(pow2(static_cast<unsigned>(w)) - 1),
                                                 static_cast<unsigned>(s));
  return Rational(1) - Rational(zero_count, pow2(static_cast<unsigned>(w * s)));
}

TribesParams make_tribes_params(int w, int s) {
  if (w < 1 || w > kMaxTribeWidth) {
    throw PreconditionError("tribe width must lie in [1, 20]");
  }
  if (s < 1) throw PreconditionError("tribe count must be positive");
  if (!tribes_balanced(w, s)) {
    throw PreconditionError("tribes(w=" + std::to_string(w) + ", s=" + std::to_string(s) +
                            ") has density above 1/2");
  }
  TribesParams p;
  p.w = w;
  p.s = s;
  p.n = w * s;
  p.delta = Rational(1, 2) - tribes_density(w, s);
  return p;
}

TribesParams tribes_params(int w) {
  if (w < 1 || w > kMaxTribeWidth) {
    throw PreconditionError("tribe width must lie in [1, 20]");
  }
  // Floating estimate of the crossing point, then settle it exactly.
  const long double q = -std::log1p(-std::ldexp(1.0L, -w));
  int s = std::max(1, static_cast<int>(std::floor(std::log(2.0L) / q)));
  while (s > 1 && !tribes_balanced(w, s)) --s;
  while (tribes_balanced(w, s + 1)) ++s;
  return make_tribes_params(w, s);
}

bool tribes_eval_word(int w, int s, std::uint64_t x) noexcept {
  const std::uint64_t tribe = low_mask(w);
  for (int t = 0; t < s; ++t) {
    if (((x >> (t * w)) & tribe) == tribe) return true;
  }
  return false;
}

bool tribes_eval(const TribesParams& p, const Point& x) {
  if (x.n() != p.n) {
    throw PreconditionError("tribes expects n = " + std::to_string(p.n) + ", got " +
                            std::to_string(x.n()));
  }
  return tribes_eval_word(p.w, p.s, x.bits());
}

// ---------------------------------------------------------------------------
// Named subsets

std::string_view to_string(SetKind kind) noexcept {
  switch (kind) {
    case SetKind::subcube0: return "subcube0";
    case SetKind::parity_even: return "parity_even";
    case SetKind::majority: return "majority";
    case SetKind::recmaj: return "recmaj";
    case SetKind::tribes_ones: return "tribes_ones";
    case SetKind::random_half: return "random_half";
    case SetKind::candidate_star: return "candidate_star";
  }
  return "unknown";
}

std::optional<SetKind> parse_set_kind(std::string_view name) noexcept {
  constexpr std::array kinds = {SetKind::subcube0,    SetKind::parity_even, SetKind::majority,
                                SetKind::recmaj,      SetKind::tribes_ones, SetKind::random_half,
                                SetKind::candidate_star};
  for (auto k : kinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

CubeSet CandidateParams::combined() const {
  CubeSet out = ball0;
  ball1.for_each([&](std::uint64_t x) { out.insert(x); });
  filler.for_each([&](std::uint64_t x) { out.insert(x); });
  return out;
}

CandidateParams candidate_params(int n) {
  if (n < 2 || n > kMaxSetDim) {
    throw PreconditionError("candidate set needs 2 <= n <= 30");
  }
  const BigInt quarter = pow2(static_cast<unsigned>(n - 2));
  BigInt cumulative = 0;
  BigInt binom = 1;  // C(n, j)
  int kstar = -1;
  for (int j = 0; j <= n; ++j) {
    cumulative += binom;
    if (cumulative > quarter) break;
    kstar = j;
    binom = binom * (n - j) / (j + 1);
  }
  // C(n, 0) = 1 <= 2^{n-2} for every n >= 2.
  CandidateParams p;
  p.n = n;
  p.kstar = kstar;
  p.ball0 = CubeSet(n);
  p.ball1 = CubeSet(n);
  p.filler = CubeSet(n);
  const std::uint64_t size = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < size; ++x) {
    const int wt = std::popcount(x);
    if (wt <= kstar) p.ball0.insert(x);
    if (wt >= n - kstar) p.ball1.insert(x);
  }
  const std::uint64_t target = size / 2;
  std::uint64_t have = p.ball0.card() + p.ball1.card();
  for (std::uint64_t x = 0; x < size && have < target; ++x) {
    if (p.ball0.contains(x) || p.ball1.contains(x)) continue;
    p.filler.insert(x);
    ++have;
  }
  return p;
}

CubeSet make_set(SetKind kind, int n, std::uint64_t seed) {
  require_set_dim(n);
  if (n < 1) throw PreconditionError("named sets need n >= 1");
  const std::uint64_t size = std::uint64_t{1} << n;
  CubeSet out(n);
  switch (kind) {
    case SetKind::subcube0:
      for (std::uint64_t x = 0; x < size / 2; ++x) out.insert(x);
      break;
    case SetKind::parity_even:
      for (std::uint64_t x = 0; x < size; ++x) {
        if (std::popcount(x) % 2 == 0) out.insert(x);
      }
      break;
    case SetKind::majority:
      if (n % 2 == 0) throw PreconditionError("majority set needs odd n");
      for (std::uint64_t x = 0; x < size; ++x) {
        if (2 * std::popcount(x) > n) out.insert(x);
      }
      break;
    case SetKind::recmaj: {
      const int k = log3_exact(n);
      if (k < 1) throw PreconditionError("recmaj set needs n = 3^k");
      for (std::uint64_t x = 0; x < size; ++x) {
        if (recmaj_word(k, x)) out.insert(x);
      }
      break;
    }
    case SetKind::tribes_ones: {
      std::optional<TribesParams> match;
      for (int w = 1; w <= 5 && !match; ++w) {
        auto p = tribes_params(w);
        if (p.n == n) match = p;
      }
      if (!match) {
        throw PreconditionError("no balanced tribes instance has n = " + std::to_string(n));
      }
      for (std::uint64_t x = 0; x < size; ++x) {
        if (tribes_eval_word(match->w, match->s, x)) out.insert(x);
      }
      break;
    }
    case SetKind::random_half: {
      // Selection sampling: each index is kept with probability
      // needed / remaining, giving a uniform 2^{n-1}-subset.
      SplitMix64 rng(seed);
      std::uint64_t needed = size / 2;
      for (std::uint64_t x = 0; x < size && needed > 0; ++x) {
        if (rng.uniform(size - x) < needed) {
          out.insert(x);
          --needed;
        }
      }
      break;
    }
    case SetKind::candidate_star:
      return candidate_params(n).combined();
  }
  return out;
}

CubeSet superset_to_half(const CubeSet& a) {
  const std::uint64_t target = a.universe() / 2;
  if (a.card() > target) {
    throw PreconditionError("set already has density above 1/2");
  }
  CubeSet out = a;
  for (std::uint64_t x = 0; x < a.universe() && out.card() < target; ++x) out.insert(x);
  return out;
}

// ---------------------------------------------------------------------------
// Set files

void write_set(std::ostream& os, const CubeSet& set) {
  os << "n=" << set.n() << '\n' << "card=" << set.card() << '\n';
  set.for_each([&](std::uint64_t x) { os << x << '\n'; });
}

CubeSet read_set(std::istream& is) {
  auto read_header = [&](std::string_view key) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("missing '" + std::string(key) + "=' line");
    if (line.rfind(std::string(key) + "=", 0) != 0) {
      throw ParseError("expected '" + std::string(key) + "=', got '" + line + "'");
    }
    try {
      std::size_t used = 0;
      const auto value = std::stoull(line.substr(key.size() + 1), &used);
      if (used != line.size() - key.size() - 1) throw ParseError("trailing characters");
      return value;
    } catch (const std::logic_error&) {
      throw ParseError("bad value in '" + line + "'");
    }
  };
  const auto n = read_header("n");
  if (n > static_cast<unsigned long long>(kMaxSetDim)) throw ParseError("n too large");
  const auto card = read_header("card");
  CubeSet set(static_cast<int>(n));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::uint64_t x = 0;
    try {
      std::size_t used = 0;
      x = std::stoull(line, &used);
      if (used != line.size()) throw ParseError("trailing characters in '" + line + "'");
    } catch (const std::logic_error&) {
      throw ParseError("bad point index '" + line + "'");
    }
    if (x >= set.universe()) throw ParseError("point index " + line + " outside H_n");
    if (!set.insert(x)) throw ParseError("duplicate point index " + line);
  }
  if (set.card() != card) {
    throw ParseError("card=" + std::to_string(card) + " but " + std::to_string(set.card()) +
                     " points listed");
  }
  return set;
}

void write_set_file(const std::string& path, const CubeSet& set) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_set(os, set);
  if (!os) throw IoError("write to '" + path + "' failed");
}

CubeSet read_set_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_set(is);
}

}  // namespace hcstretch

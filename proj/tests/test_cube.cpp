#include <sstream>

#include <gtest/gtest.h>

#include "hcstretch/cube.hpp"
#include "hcstretch/errors.hpp"
#include "hcstretch/rng.hpp"
#include "oracles.hpp"

using namespace hcstretch;

namespace {

Point P(const char* coords) { return Point::from_coords(coords); }

std::vector<std::uint64_t> sorted_members(const CubeSet& s) { return s.members(); }

// Literal-by-literal DNF evaluation.
int dnf_tribes(const oracle::Coords& x, int w, int s) {
  for (int t = 0; t < s; ++t) {
    bool all = true;
    for (int j = 0; j < w; ++j) all = all && x[static_cast<std::size_t>(t * w + j)] == 1;
    if (all) return 1;
  }
  return 0;
}

}  // namespace

TEST(Point, CoordinatesAreOneBasedLowBitFirst) {
  const Point x = P("100");
  EXPECT_EQ(x.bits(), 1U);
  EXPECT_TRUE(x.coord(1));
  EXPECT_FALSE(x.coord(3));
  EXPECT_EQ(x.flip(3).coords(), "101");
  EXPECT_EQ(x.complement().coords(), "011");
  EXPECT_EQ(P("110 110 000").n(), 9);
}

TEST(Point, RejectsStrayBitsAndBadCoordinates) {
  EXPECT_THROW(Point(3, 8), PreconditionError);
  EXPECT_THROW(P("101").coord(0), PreconditionError);
  EXPECT_THROW(P("101").flip(4), PreconditionError);
}

TEST(HammingDist, Examples) {
  EXPECT_EQ(hamming_dist(P("000"), P("000")), 0);
  EXPECT_EQ(hamming_dist(P("000"), P("111")), 3);
  EXPECT_EQ(hamming_dist(P("0110"), P("1010")), 2);
  EXPECT_THROW(hamming_dist(P("01"), P("010")), PreconditionError);
}

TEST(HammingDist, MetricPropertiesOnRandomTriples) {
  SplitMix64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform(30));
    const auto x = rng.next() & low_mask(n);
    const auto y = rng.next() & low_mask(n);
    const auto z = rng.next() & low_mask(n);
    EXPECT_EQ(hamming_dist(x, y), oracle::dist(x, y, n));
    EXPECT_EQ(hamming_dist(x, y), hamming_dist(y, x));
    EXPECT_LE(hamming_dist(x, z), hamming_dist(x, y) + hamming_dist(y, z));
    const int i = 1 + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n)));
    const Point px(n, x);
    EXPECT_EQ(hamming_dist(px, px.flip(i)), 1);
  }
}

TEST(RecmajEval, Examples) {
  EXPECT_TRUE(recmaj_eval(1, P("110")));
  EXPECT_FALSE(recmaj_eval(1, P("001")));
  EXPECT_TRUE(recmaj_eval(2, P("110 110 000")));
  EXPECT_THROW(recmaj_eval(2, P("1101")), PreconditionError);
}

TEST(RecmajEval, SelfDualAndMatchesOracle) {
  for (int k = 1; k <= 2; ++k) {
    const int n = k == 1 ? 3 : 9;
    std::uint64_t ones = 0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const Point p(n, x);
      const bool v = recmaj_eval(k, p);
      EXPECT_EQ(v, oracle::recmaj(oracle::coords_of(x, n)) == 1);
      EXPECT_NE(v, recmaj_eval(k, p.complement()));
      ones += v;
    }
    EXPECT_EQ(ones, std::uint64_t{1} << (n - 1));
  }
}

TEST(Tribes, EvalExamples) {
  const auto p = make_tribes_params(2, 2);
  EXPECT_TRUE(tribes_eval(p, P("1100")));
  EXPECT_FALSE(tribes_eval(p, P("1010")));
  EXPECT_TRUE(tribes_eval(p, P("0011")));
  EXPECT_THROW(tribes_eval(p, P("110")), PreconditionError);
}

TEST(Tribes, ParamsExamples) {
  const auto p1 = tribes_params(1);
  EXPECT_EQ(p1.s, 1);
  EXPECT_EQ(p1.n, 1);
  const auto p2 = tribes_params(2);
  EXPECT_EQ(p2.s, 2);
  EXPECT_EQ(p2.delta, make_rational(1, 16));
  EXPECT_EQ(tribes_density(2, 3), make_rational(37, 64));
}

TEST(Tribes, MaximalBalancedAcrossWidths) {
  for (int w = 1; w <= 20; ++w) {
    const auto p = tribes_params(w);
    EXPECT_LE(tribes_density(w, p.s), make_rational(1, 2)) << "w=" << w;
    EXPECT_GT(tribes_density(w, p.s + 1), make_rational(1, 2)) << "w=" << w;
    EXPECT_GE(p.delta, 0);
    // delta shrinks like log(n)/n
    EXPECT_LE(to_double(p.delta), 2.0 * std::log(static_cast<double>(p.n) + 1) / p.n + 0.5 / p.n)
        << "w=" << w;
  }
  EXPECT_THROW(make_tribes_params(2, 3), PreconditionError);
}

TEST(Tribes, AgreesWithDnfAndExactDensity) {
  for (auto [w, s] : std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {3, 5}, {4, 4}, {2, 1}}) {
    const int n = w * s;
    std::uint64_t ones = 0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      const int v = tribes_eval_word(w, s, x);
      EXPECT_EQ(v, dnf_tribes(oracle::coords_of(x, n), w, s));
      ones += static_cast<std::uint64_t>(v);
    }
    EXPECT_EQ(Rational(BigInt(ones), pow2(static_cast<unsigned>(n))), tribes_density(w, s));
  }
}

TEST(MakeSet, Examples) {
  EXPECT_EQ(sorted_members(make_set(SetKind::parity_even, 3)),
            (std::vector<std::uint64_t>{0, 3, 5, 6}));
  EXPECT_EQ(sorted_members(make_set(SetKind::majority, 3)),
            (std::vector<std::uint64_t>{3, 5, 6, 7}));
  EXPECT_EQ(sorted_members(make_set(SetKind::subcube0, 2)), (std::vector<std::uint64_t>{0, 1}));
  EXPECT_EQ(make_set(SetKind::recmaj, 9).card(), 256U);
  EXPECT_EQ(make_set(SetKind::tribes_ones, 4).card(), 7U);
  EXPECT_THROW(make_set(SetKind::majority, 4), PreconditionError);
  EXPECT_THROW(make_set(SetKind::recmaj, 8), PreconditionError);
  EXPECT_THROW(make_set(SetKind::tribes_ones, 5), PreconditionError);
}

TEST(MakeSet, RandomHalfIsSeededAndHalf) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = make_set(SetKind::random_half, 8, seed);
    EXPECT_EQ(a.card(), 128U);
    EXPECT_EQ(a, make_set(SetKind::random_half, 8, seed));
  }
  EXPECT_FALSE(make_set(SetKind::random_half, 8, 1) == make_set(SetKind::random_half, 8, 2));
}

TEST(MakeSet, RandomHalfIsRoughlyUniform) {
  // Each point should appear in about half of the draws.
  std::vector<int> hits(16, 0);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    make_set(SetKind::random_half, 4, static_cast<std::uint64_t>(t)).for_each([&](auto x) {
      ++hits[x];
    });
  }
  for (int h : hits) EXPECT_NEAR(h, trials / 2, 200);
}

TEST(Candidate, SmallExample) {
  const auto c = candidate_params(4);
  EXPECT_EQ(c.kstar, 0);
  EXPECT_EQ(sorted_members(c.ball0), (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(sorted_members(c.ball1), (std::vector<std::uint64_t>{15}));
  EXPECT_EQ(c.filler.card(), 6U);
}

TEST(Candidate, InvariantsAcrossDimensions) {
  for (int n = 2; n <= 14; ++n) {
    const auto c = candidate_params(n);
    const auto all = c.combined();
    EXPECT_EQ(all.card(), std::uint64_t{1} << (n - 1)) << n;
    EXPECT_EQ(c.ball0.card() + c.ball1.card() + c.filler.card(), all.card()) << n;
    c.ball0.for_each([&](std::uint64_t x) {
      EXPECT_TRUE(c.ball1.contains(x ^ low_mask(n)));
      EXPECT_LE(std::popcount(x), c.kstar);
    });
    EXPECT_EQ(c.ball0.card(), c.ball1.card());
    // kstar maximal: one more shell would exceed a quarter of the cube
    BigInt vol = 0;
    BigInt binom = 1;
    for (int j = 0; j <= c.kstar + 1; ++j) {
      vol += binom;
      binom = binom * (n - j) / (j + 1);
    }
    EXPECT_GT(vol, pow2(static_cast<unsigned>(n - 2))) << n;
    EXPECT_EQ(make_set(SetKind::candidate_star, n), all);
  }
}

TEST(SupersetToHalf, Examples) {
  const auto half = make_set(SetKind::subcube0, 5);
  EXPECT_EQ(superset_to_half(half), half);
  EXPECT_EQ(sorted_members(superset_to_half(CubeSet(2))), (std::vector<std::uint64_t>{0, 1}));
  const auto tribes = make_set(SetKind::tribes_ones, 4);
  const auto filled = superset_to_half(tribes);
  EXPECT_EQ(filled.card(), 8U);
  EXPECT_TRUE(tribes.is_subset_of(filled));
  EXPECT_TRUE(filled.contains(0));
  EXPECT_THROW(superset_to_half(CubeSet::full(3)), PreconditionError);
}

TEST(CubeSet, RankAndDensity) {
  const auto s = CubeSet::from_indices(4, {1, 3, 8, 15});
  EXPECT_EQ(s.rank(0), 0U);
  EXPECT_EQ(s.rank(3), 1U);
  EXPECT_EQ(s.rank(9), 3U);
  EXPECT_EQ(s.density(), make_rational(1, 4));
  EXPECT_EQ(s.complement().card(), 12U);
}

TEST(SetFile, RoundTripAndRejections) {
  const auto a = make_set(SetKind::random_half, 6, 3);
  std::stringstream ss;
  write_set(ss, a);
  EXPECT_EQ(read_set(ss), a);

  std::istringstream dup("n=2\ncard=2\n1\n1\n");
  EXPECT_THROW(read_set(dup), ParseError);
  std::istringstream range("n=2\ncard=1\n4\n");
  EXPECT_THROW(read_set(range), ParseError);
  std::istringstream count("n=2\ncard=3\n0\n1\n");
  EXPECT_THROW(read_set(count), ParseError);
  std::istringstream unordered("n=3\ncard=3\n5\n0\n2\n");
  EXPECT_EQ(sorted_members(read_set(unordered)), (std::vector<std::uint64_t>{0, 2, 5}));
  EXPECT_THROW(read_set_file("/nonexistent/set.txt"), IoError);
}

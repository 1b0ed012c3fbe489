#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "hcstretch/errors.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/recmaj.hpp"
#include "oracles.hpp"

using namespace hcstretch;

namespace {

Mapping random_bijection(SplitMix64& rng, int n, const CubeSet& target) {
  auto image = oracle::random_permutation_of(rng, target.members());
  auto phi = Mapping::on_half_cube(n - 1, n, std::move(image));
  phi.bijective = true;
  return phi;
}

}  // namespace

TEST(AvgStretch, IdentityAndParity) {
  EXPECT_EQ(avg_stretch_exact(embed_identity(7)), 1);
  EXPECT_EQ(avg_stretch_exact(embed_parity(2)), 2);
  EXPECT_EQ(avg_transport(embed_identity(7)), 0);
  EXPECT_EQ(avg_transport(embed_parity(2)), make_rational(1, 2));
  EXPECT_EQ(max_stretch_exact(embed_parity(5)), 2);
}

TEST(AvgStretch, MatchesOracleOnRandomMaps) {
  SplitMix64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform(6));
    std::vector<std::uint64_t> image(std::size_t{1} << (n - 1));
    for (auto& y : image) y = rng.next() & low_mask(n);
    const auto phi = Mapping::on_half_cube(n - 1, n, image);
    EXPECT_EQ(avg_stretch_exact(phi), oracle::avg_stretch(image, n - 1, n));
    EXPECT_EQ(avg_transport(phi), oracle::avg_transport(image, n));
  }
}

TEST(AvgStretch, BudgetIsEnforced) {
  EXPECT_THROW(avg_stretch_exact(embed_identity(10), 100), BudgetError);
  EXPECT_NO_THROW(avg_stretch_exact(embed_identity(10), 10 * 1024));
}

TEST(AvgTransport, RejectsFalseBijectionTag) {
  auto phi = Mapping::on_half_cube(1, 2, {3, 3});
  phi.bijective = true;
  EXPECT_THROW(avg_transport(phi), VerificationError);
}

TEST(VerifyBijection, NamesTheProblem) {
  auto dup = Mapping::on_half_cube(2, 3, {1, 2, 4, 1});
  try {
    verify_bijection(dup);
    FAIL();
  } catch (const VerificationError& e) {
    EXPECT_EQ(e.kind(), "duplicate_image");
    EXPECT_EQ(e.witness(), 1U);
  }
  const auto ok = Mapping::on_half_cube(2, 3, {1, 2, 4, 7});
  EXPECT_NO_THROW(verify_bijection(ok));
  try {
    verify_bijection(ok, make_set(SetKind::parity_even, 3));
    FAIL();
  } catch (const VerificationError& e) {
    EXPECT_EQ(e.kind(), "image_outside_codomain");
  }
}

TEST(PropBridge, IdentityAndParity) {
  const auto id = check_prop_bridge(embed_identity(4));
  EXPECT_EQ(id.lhs, 1);
  EXPECT_EQ(id.rhs, 1);
  EXPECT_TRUE(id.holds);
  const auto par = check_prop_bridge(embed_parity(2));
  EXPECT_EQ(par.lhs, 2);
  EXPECT_EQ(par.rhs, 2);
  EXPECT_TRUE(par.holds);
}

TEST(PropBridge, HoldsForRandomBijections) {
  SplitMix64 rng(17);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform(5));
    const auto target = make_set(SetKind::random_half, n, rng.next());
    const auto phi = random_bijection(rng, n, target);
    const auto b = check_prop_bridge(phi);
    EXPECT_TRUE(b.holds) << "n=" << n;
    EXPECT_EQ(b.lhs, oracle::avg_stretch(phi.image, n - 1, n));
  }
}

TEST(PropBridge, ParityLowerBound) {
  // Distinct even-weight points are at distance >= 2.
  SplitMix64 rng(23);
  const auto even = make_set(SetKind::parity_even, 5);
  for (int t = 0; t < 100; ++t) {
    EXPECT_GE(avg_stretch_exact(random_bijection(rng, 5, even)), 2);
  }
}

TEST(MonteCarlo, ZeroVarianceCases) {
  const auto id = avg_stretch_mc(PointMap::from(embed_identity(9)), 5000, 3);
  EXPECT_EQ(std::get<double>(id.avg_stretch), 1.0);
  EXPECT_EQ(id.ci95, 0.0);
  const auto par = avg_stretch_mc(PointMap::from(embed_parity(9)), 100000, 3);
  EXPECT_EQ(std::get<double>(par.avg_stretch), 2.0);
  EXPECT_EQ(par.seed, 3U);
  EXPECT_EQ(par.samples, 100000U);
}

TEST(MonteCarlo, Deterministic) {
  SplitMix64 rng(1);
  const auto phi = PointMap::from(random_bijection(rng, 8, make_set(SetKind::random_half, 8, 4)));
  const auto a = avg_stretch_mc(phi, 20000, 99);
  const auto b = avg_stretch_mc(phi, 20000, 99);
  EXPECT_EQ(std::get<double>(a.avg_stretch), std::get<double>(b.avg_stretch));
  EXPECT_EQ(a.ci95, b.ci95);
}

TEST(MonteCarlo, CoverageAgainstExact) {
  SplitMix64 rng(77);
  const auto map = random_bijection(rng, 8, make_set(SetKind::random_half, 8, 12));
  const double exact_value = to_double(avg_stretch_exact(map));
  const auto pm = PointMap::from(map);
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = avg_stretch_mc(pm, 10000, seed);
    if (std::abs(std::get<double>(r.avg_stretch) - exact_value) <= r.ci95) ++covered;
  }
  EXPECT_GE(covered, 93);
}

TEST(MonteCarlo, RetractionAgreesWithCoordinateAverage) {
  const RecMajContext ctx(2);
  PointMap pm{9, 9, [&](std::uint64_t x) { return static_cast<std::uint64_t>(ctx.f(RecWord{x})); }};
  Rational sum = 0;
  for (int i = 1; i <= 9; ++i) sum += fk_coordinate_stretch(ctx, i).total();
  const double exact_value = to_double(sum / 9);
  const auto r = avg_stretch_mc(pm, 1000000, 2024);
  EXPECT_LE(std::abs(std::get<double>(r.avg_stretch) - exact_value), r.ci95);
}

TEST(Expansion, Examples) {
  EXPECT_EQ(expansion_profile(CubeSet::from_indices(3, {0}), 2), make_rational(1, 2));
  EXPECT_EQ(expansion_profile(make_set(SetKind::random_half, 6, 2), 0), 1);
  EXPECT_EQ(expansion_profile(make_set(SetKind::parity_even, 6), 2), 0);
  EXPECT_THROW(expansion_profile(CubeSet(3), 1), PreconditionError);
}

TEST(Expansion, DistancesAgainstBruteForceAndMonotone) {
  SplitMix64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + static_cast<int>(rng.uniform(5));
    const auto pts = oracle::random_subset(rng, n, 1 + rng.uniform(5));
    const auto f = CubeSet::from_indices(n, pts);
    const auto d = distance_to_set(f);
    for (std::uint64_t x = 0; x < f.universe(); ++x) {
      int best = n + 1;
      for (auto y : pts) best = std::min(best, oracle::dist(x, y, n));
      EXPECT_EQ(d[x], best);
    }
    Rational prev = 2;
    for (int k = 0; k <= n + 1; ++k) {
      const auto m = expansion_profile(f, k);
      EXPECT_LE(m, prev);
      prev = m;
    }
  }
}

TEST(Expansion, ReportsBothTalagrandForms) {
  const auto f = make_set(SetKind::subcube0, 8);
  const auto c = expansion_check(f, 3);
  EXPECT_EQ(c.measured, 0);
  EXPECT_NEAR(c.bound_divided, std::exp(-9.0 / 8) * 2, 1e-12);
  EXPECT_NEAR(c.bound_product, std::exp(-9.0 / 8) / 2, 1e-12);
  EXPECT_TRUE(c.holds_divided);
}

TEST(MappingFile, RoundTrip) {
  SplitMix64 rng(3);
  const auto phi = random_bijection(rng, 5, make_set(SetKind::parity_even, 5));
  std::stringstream ss;
  write_mapping(ss, phi);
  const auto back = read_mapping(ss);
  EXPECT_EQ(back.src_n, 4);
  EXPECT_EQ(back.dst_n, 5);
  EXPECT_EQ(back.image, phi.image);
  std::istringstream bad("src_n=1 dst_n=2\n0 7\n1 1\n");
  EXPECT_THROW(read_mapping(bad), Error);
}

TEST(StretchReport, ExactFieldsAndJson) {
  const auto r = stretch_report_exact(embed_parity(3));
  EXPECT_EQ(r.method, Method::exact);
  EXPECT_EQ(r.samples, 3U * 8U);
  EXPECT_EQ(r.ci95, 0.0);
  const auto j = to_json(r);
  EXPECT_EQ(j["avg_stretch"], "2/1");
  EXPECT_EQ(j["avg_transport"], "1/2");
  EXPECT_EQ(j["method"], "exact");
}

#include "hcstretch/tribes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "hcstretch/errors.hpp"
#include "hcstretch/matchers.hpp"
#include "hcstretch/rng.hpp"

namespace hcstretch {

namespace {

BigInt binomial(int n, int k) {
  BigInt c = 1;
  for (int j = 0; j < k; ++j) c = c * (n - j) / (j + 1);
  return c;
}

std::uint64_t tribe_mask(int w, int t) { return low_mask(w) << (t * w); }

CubeSet tribes_ones_set(const TribesParams& p) {
  CubeSet a(p.n);
  for (std::uint64_t x = 0; x < a.universe(); ++x) {
    if (tribes_eval_word(p.w, p.s, x)) a.insert(x);
  }
  return a;
}

CubeSet half_cube_points(int n) {
  CubeSet h(n);
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << (n - 1)); ++x) h.insert(x);
  return h;
}

void require_explicit(const TribesParams& p) {
  if (p.n > kExplicitCouplingMaxN) {
    throw BudgetError("explicit tribes coupling needs n <= " +
                      std::to_string(kExplicitCouplingMaxN) + ", got n = " + std::to_string(p.n));
  }
}

}  // namespace

TribeCouplingSpec TribeCouplingSpec::make(const TribesParams& p) {
  if (p.n > 64) throw PreconditionError("tribes couplings are limited to 64 coordinates");
  TribeCouplingSpec spec;
  spec.params = p;
  spec.tribe_patterns = static_cast<std::uint64_t>((std::uint64_t{1} << p.w) - 1);
  const Rational prob(BigInt(1), pow2(static_cast<unsigned>(p.w)));
  const Rational miss = 1 - prob;
  Rational none = 1;
  for (int j = 0; j < p.s; ++j) none *= miss;
  const Rational positive = 1 - none;
  spec.l_law.assign(static_cast<std::size_t>(p.s + 1), Rational(0));
  for (int l = 1; l <= p.s; ++l) {
    Rational term = Rational(binomial(p.s, l));
    for (int j = 0; j < l; ++j) term *= prob;
    for (int j = l; j < p.s; ++j) term *= miss;
    spec.l_law[static_cast<std::size_t>(l)] = term / positive;
  }
  return spec;
}

Rational expected_L(const TribesParams& p) {
  // s 2^-w / (1 - (1 - 2^-w)^s) = s 2^{w(s-1)} / (2^{ws} - (2^w - 1)^s)
  const BigInt all = pow2(static_cast<unsigned>(p.w * p.s));
  const BigInt none = boost::multiprecision::pow(BigInt(pow2(static_cast<unsigned>(p.w)) - 1),
                                                 static_cast<unsigned>(p.s));
  return Rational(BigInt(p.s) * pow2(static_cast<unsigned>(p.w * (p.s - 1))), all - none);
}

SamplerCoupling couple_tribes01(const TribeCouplingSpec& spec, std::uint64_t seed) {
  const auto& p = spec.params;
  if (p.n > 64) throw PreconditionError("sampler points are limited to 64 coordinates");
  std::vector<double> cumulative;
  double acc = 0;
  for (std::size_t l = 1; l < spec.l_law.size(); ++l) {
    acc += to_double(spec.l_law[l]);
    cumulative.push_back(acc);
  }
  const std::uint64_t patterns = spec.tribe_patterns;
  auto draw = [p, patterns, cumulative](SplitMix64& rng) {
    std::uint64_t x = 0;
    for (int t = 0; t < p.s; ++t) x |= rng.uniform(patterns) << (t * p.w);
    const double u = rng.uniform01() * cumulative.back();
    const auto pos = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int l = 1 + static_cast<int>(std::min<std::ptrdiff_t>(
                          pos - cumulative.begin(), static_cast<std::ptrdiff_t>(p.s - 1)));
    // Partial Fisher-Yates over tribe labels.
    std::vector<int> tribes(static_cast<std::size_t>(p.s));
    std::iota(tribes.begin(), tribes.end(), 0);
    std::uint64_t y = x;
    for (int j = 0; j < l; ++j) {
      const auto pick = j + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(p.s - j)));
      std::swap(tribes[static_cast<std::size_t>(j)], tribes[static_cast<std::size_t>(pick)]);
      y |= tribe_mask(p.w, tribes[static_cast<std::size_t>(j)]);
    }
    return std::pair{x, y};
  };
  return SamplerCoupling(p.n, "uniform(Z_tribes)", "uniform(A_tribes)", seed, draw);
}

SparseCoupling explicit_coupling01(const TribeCouplingSpec& spec) {
  const auto& p = spec.params;
  require_explicit(p);
  const CubeSet ones = tribes_ones_set(p);
  const CubeSet zeros = ones.complement();
  const Rational x_mass(BigInt(1), BigInt(zeros.card()));

  // Mass of each forced tribe set T, by its bitmask over [s].
  std::vector<Rational> subset_mass(std::size_t{1} << p.s, Rational(0));
  for (std::uint64_t t = 1; t < subset_mass.size(); ++t) {
    const int l = std::popcount(t);
    subset_mass[t] = spec.l_law[static_cast<std::size_t>(l)] / Rational(binomial(p.s, l));
  }

  std::vector<CouplingEntry> entries;
  entries.reserve(static_cast<std::size_t>(zeros.card()) * (subset_mass.size() - 1));
  zeros.for_each([&](std::uint64_t x) {
    for (std::uint64_t t = 1; t < subset_mass.size(); ++t) {
      std::uint64_t y = x;
      for (int tribe = 0; tribe < p.s; ++tribe) {
        if ((t >> tribe) & 1U) y |= tribe_mask(p.w, tribe);
      }
      entries.push_back({x, y, x_mass * subset_mass[t]});
    }
  });
  return SparseCoupling(p.n, zeros, ones, std::move(entries));
}

SparseCoupling lift_to_full_cube(const SparseCoupling& q01, const TribeCouplingSpec& spec) {
  const auto& p = spec.params;
  if (q01.n() != p.n) throw PreconditionError("coupling and spec disagree on n");
  const CubeSet ones = tribes_ones_set(p);
  if (!(q01.y_support() == ones) || !(q01.x_support() == ones.complement())) {
    throw VerificationError("invalid_coupling", "lift expects a coupling of Z_tribes and A_tribes");
  }
  const BigInt cube = pow2(static_cast<unsigned>(p.n));
  const Rational scale(BigInt(q01.x_support().card()), cube);
  const Rational diag(BigInt(1), cube);
  std::vector<CouplingEntry> entries;
  entries.reserve(q01.entries().size() + ones.card());
  for (const auto& e : q01.entries()) entries.push_back({e.x, e.y, scale * e.mass});
  ones.for_each([&](std::uint64_t y) { entries.push_back({y, y, diag}); });
  return SparseCoupling(p.n, CubeSet::full(p.n), ones, std::move(entries));
}

SparseCoupling project_to_half_cube(const SparseCoupling& qn) {
  const int n = qn.n();
  if (!(qn.x_support() == CubeSet::full(n))) {
    throw VerificationError("invalid_coupling", "projection expects the full cube as first marginal");
  }
  const std::uint64_t top = std::uint64_t{1} << (n - 1);
  std::vector<CouplingEntry> entries;
  entries.reserve(qn.entries().size());
  for (const auto& e : qn.entries()) entries.push_back({e.x & ~top, e.y, e.mass});
  return SparseCoupling(n, half_cube_points(n), qn.y_support(), std::move(entries));
}

SparseCoupling extend_to_superset(const SparseCoupling& q_half, const CubeSet& astar,
                                  const TribeCouplingSpec& spec) {
  const auto& p = spec.params;
  const int n = q_half.n();
  if (n != p.n || astar.n() != n) throw PreconditionError("coupling and spec disagree on n");
  const CubeSet& ones = q_half.y_support();
  if (!ones.is_subset_of(astar) || astar.card() * 2 != astar.universe()) {
    throw PreconditionError("A* must be a density-1/2 superset of A_tribes");
  }
  if (!(q_half.x_support() == half_cube_points(n))) {
    throw VerificationError("invalid_coupling", "extension expects H_{n-1} as first marginal");
  }
  const Rational keep = 1 - 2 * p.delta;
  const Rational fill(BigInt(4), pow2(static_cast<unsigned>(2 * n)));
  std::vector<CouplingEntry> entries;
  for (const auto& e : q_half.entries()) entries.push_back({e.x, e.y, keep * e.mass});
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  astar.for_each([&](std::uint64_t y) {
    if (ones.contains(y)) return;
    for (std::uint64_t x = 0; x < half; ++x) entries.push_back({x, y, fill});
  });
  return SparseCoupling(n, q_half.x_support(), astar, std::move(entries));
}

bool TribesChain::extend_ok() const {
  const auto& p = spec.params;
  return cost_extended <= (1 - 2 * p.delta) * cost_projected + 2 * p.delta * p.n;
}

TribesChain run_tribes_chain(const TribeCouplingSpec& spec) {
  const auto& p = spec.params;
  require_explicit(p);
  CubeSet ones = tribes_ones_set(p);
  CubeSet zeros = ones.complement();
  CubeSet astar = superset_to_half(ones);
  SparseCoupling q01 = explicit_coupling01(spec);
  SparseCoupling lifted = lift_to_full_cube(q01, spec);
  SparseCoupling projected = project_to_half_cube(lifted);
  SparseCoupling extended = extend_to_superset(projected, astar, spec);
  Rational c01 = q01.cost();
  Rational clift = lifted.cost();
  Rational cproj = projected.cost();
  Rational cext = extended.cost();
  return TribesChain{spec,
                     std::move(zeros),
                     std::move(ones),
                     std::move(astar),
                     std::move(q01),
                     std::move(lifted),
                     std::move(projected),
                     std::move(extended),
                     std::move(c01),
                     std::move(clift),
                     std::move(cproj),
                     std::move(cext),
                     Rational(p.w) * expected_L(p)};
}

PhiTribes build_phi_tribes(const TribeCouplingSpec& spec) {
  if (spec.params.n > kPhiTribesMaxN) {
    throw BudgetError("phi_tribes needs n <= " + std::to_string(kPhiTribesMaxN) +
                      " for exact assignment, got n = " + std::to_string(spec.params.n));
  }
  return build_phi_tribes(run_tribes_chain(spec));
}

PhiTribes build_phi_tribes(const TribesChain& chain) {
  const int n = chain.spec.params.n;
  if (n > kPhiTribesMaxN) {
    throw BudgetError("phi_tribes needs n <= " + std::to_string(kPhiTribesMaxN) +
                      " for exact assignment, got n = " + std::to_string(n));
  }
  auto matched = w1_exact(half_cube_points(n), chain.astar);
  PhiTribes out;
  out.phi = to_half_cube(matched.phi);
  out.transport = avg_transport(out.phi);
  out.chain_cost = chain.cost_extended;
  return out;
}

ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  ChiSquare c;
  if (counts.size() < 2) return c;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0,
                                       [](double a, std::uint64_t b) { return a + static_cast<double>(b); });
  const double expected = total / static_cast<double>(counts.size());
  for (auto k : counts) {
    const double d = static_cast<double>(k) - expected;
    c.statistic += d * d / expected;
  }
  c.dof = static_cast<int>(counts.size()) - 1;
  const boost::math::chi_squared_distribution<double> law(c.dof);
  c.p_value = boost::math::cdf(boost::math::complement(law, c.statistic));
  return c;
}

TribesSample sample_tribes_coupling(const TribeCouplingSpec& spec, std::uint64_t draws,
                                    std::uint64_t seed) {
  const auto& p = spec.params;
  if (draws == 0) throw PreconditionError("need at least one draw");
  auto sampler = couple_tribes01(spec, seed);
  TribesSample r;
  r.draws = draws;
  r.seed = seed;
  r.marginals_tested = p.n <= 16;
  std::vector<std::uint64_t> x_counts;
  std::vector<std::uint64_t> y_counts;
  if (r.marginals_tested) {
    x_counts.assign(std::size_t{1} << p.n, 0);
    y_counts.assign(std::size_t{1} << p.n, 0);
  }
  double sum = 0;
  double sq = 0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const auto [x, y] = sampler.draw();
    if (tribes_eval_word(p.w, p.s, x) || !tribes_eval_word(p.w, p.s, y)) ++r.support_violations;
    const auto d = static_cast<double>(hamming_dist(x, y));
    sum += d;
    sq += d * d;
    if (r.marginals_tested) {
      ++x_counts[x];
      ++y_counts[y];
    }
  }
  const auto nn = static_cast<double>(draws);
  r.mean_cost = sum / nn;
  if (draws > 1) {
    const double var = (sq - nn * r.mean_cost * r.mean_cost) / (nn - 1);
    r.std_error = std::sqrt(std::max(var, 0.0) / nn);
  }
  if (r.marginals_tested) {
    const CubeSet ones = tribes_ones_set(p);
    std::vector<std::uint64_t> xs;
    std::vector<std::uint64_t> ys;
    for (std::uint64_t v = 0; v < ones.universe(); ++v) {
      if (ones.contains(v)) {
        ys.push_back(y_counts[v]);
      } else {
        xs.push_back(x_counts[v]);
      }
    }
    r.x_marginal = chi_square_uniform(xs);
    r.y_marginal = chi_square_uniform(ys);
  }
  return r;
}

}  // namespace hcstretch

#pragma once

#include <cstdint>
#include <vector>

#include "hcstretch/coupling.hpp"
#include "hcstretch/cube.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/rational.hpp"

namespace hcstretch {

inline constexpr int kExplicitCouplingMaxN = 14;
inline constexpr int kPhiTribesMaxN = 12;

// Law of the number L of tribes forced to all-ones: Bin(2^-w, s)
// conditioned to be positive. Each remaining tribe is uniform over the
// 2^w - 1 patterns other than all-ones, so x stays in the zero-set.
struct TribeCouplingSpec {
  TribesParams params;
  std::vector<Rational> l_law;  // index l in [0, s]; l_law[0] = 0
  std::uint64_t tribe_patterns = 0;  // 2^w - 1

  // n <= 64, PreconditionError otherwise.
  static TribeCouplingSpec make(const TribesParams& p);
};

// s 2^-w / (1 - (1 - 2^-w)^s).
Rational expected_L(const TribesParams& p);

// Sampler coupling of the uniform measures on Z_tribes and A_tribes: draw x
// tribe by tribe, then force L uniformly chosen tribes to all-ones.
SamplerCoupling couple_tribes01(const TribeCouplingSpec& spec, std::uint64_t seed);

// The same coupling materialized. n <= 14, BudgetError otherwise.
SparseCoupling explicit_coupling01(const TribeCouplingSpec& spec);

// |Z|/2^n q on Z x A plus 1/2^n on the diagonal of A.
SparseCoupling lift_to_full_cube(const SparseCoupling& q01, const TribeCouplingSpec& spec);

// Folds x_n: (x, y) and (x + e_n, y) both land on x with x_n = 0.
SparseCoupling project_to_half_cube(const SparseCoupling& qn);

// (1 - 2 delta) q on H_{n-1} x A plus 4 / 4^n on H_{n-1} x (A* \ A).
// astar must contain A_tribes and have density exactly 1/2.
SparseCoupling extend_to_superset(const SparseCoupling& q_half, const CubeSet& astar,
                                  const TribeCouplingSpec& spec);

struct TribesChain {
  TribeCouplingSpec spec;
  CubeSet zeros;
  CubeSet ones;
  CubeSet astar;
  SparseCoupling q01;
  SparseCoupling lifted;
  SparseCoupling projected;
  SparseCoupling extended;
  Rational cost_q01;
  Rational cost_lifted;
  Rational cost_projected;
  Rational cost_extended;
  Rational q01_bound;  // w E[L]

  bool q01_ok() const { return cost_q01 <= q01_bound; }
  bool lift_ok() const { return cost_lifted < cost_q01; }
  bool project_ok() const { return cost_projected <= cost_lifted + 1; }
  bool extend_ok() const;  // cost_extended <= (1 - 2 delta) cost_projected + 2 delta n
};

// Materializes every stage, with A* = superset_to_half(A_tribes).
TribesChain run_tribes_chain(const TribeCouplingSpec& spec);

struct PhiTribes {
  Mapping phi;          // bijection H_{n-1} -> A*, optimal for transport
  Rational transport;   // avg_transport(phi)
  Rational chain_cost;  // cost of the extended coupling, an upper bound
};

// n <= 12, BudgetError otherwise.
PhiTribes build_phi_tribes(const TribeCouplingSpec& spec);
PhiTribes build_phi_tribes(const TribesChain& chain);

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

// Pearson test of observed counts against the uniform law on their cells.
ChiSquare chi_square_uniform(const std::vector<std::uint64_t>& counts);

struct TribesSample {
  std::uint64_t draws = 0;
  std::uint64_t seed = 0;
  double mean_cost = 0;
  double std_error = 0;
  std::uint64_t support_violations = 0;  // draws with tribes(x) = 1 or tribes(y) = 0
  bool marginals_tested = false;         // only when n <= 16
  ChiSquare x_marginal;
  ChiSquare y_marginal;
};

TribesSample sample_tribes_coupling(const TribeCouplingSpec& spec, std::uint64_t draws,
                                    std::uint64_t seed);

}  // namespace hcstretch

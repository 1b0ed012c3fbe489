#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hcstretch/cube.hpp"
#include "hcstretch/rational.hpp"
#include "hcstretch/rng.hpp"

namespace hcstretch {

struct CouplingEntry {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  Rational mass;
};

// Joint distribution on H_n x H_n with uniform marginals on x_support and
// y_support, stored as a sparse list of positive masses. Construction
// verifies the marginal equations exactly and throws VerificationError
// otherwise, so every live SparseCoupling is a valid coupling.
class SparseCoupling {
 public:
  SparseCoupling(int n, CubeSet x_support, CubeSet y_support, std::vector<CouplingEntry> entries);

  int n() const noexcept { return n_; }
  const CubeSet& x_support() const noexcept { return x_support_; }
  const CubeSet& y_support() const noexcept { return y_support_; }
  const std::vector<CouplingEntry>& entries() const noexcept { return entries_; }

  // sum of dist(x, y) * mass.
  Rational cost() const;

 private:
  int n_;
  CubeSet x_support_;
  CubeSet y_support_;
  std::vector<CouplingEntry> entries_;
};

// Merges duplicate (x, y) entries, drops zero masses and sorts by (x, y).
std::vector<CouplingEntry> normalize_entries(std::vector<CouplingEntry> entries);

// Marginal check without constructing; returns an empty string when valid.
std::string check_coupling(const CubeSet& x_support, const CubeSet& y_support,
                           const std::vector<CouplingEntry>& entries);

// Coupling known only through a seeded sampler of (x, y) pairs.
class SamplerCoupling {
 public:
  using DrawFn = std::function<std::pair<std::uint64_t, std::uint64_t>(SplitMix64&)>;

  SamplerCoupling(int n, std::string x_marginal, std::string y_marginal, std::uint64_t seed,
                  DrawFn draw)
      : n_(n),
        x_marginal_(std::move(x_marginal)),
        y_marginal_(std::move(y_marginal)),
        seed_(seed),
        rng_(seed),
        draw_(std::move(draw)) {}

  int n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& x_marginal() const noexcept { return x_marginal_; }
  const std::string& y_marginal() const noexcept { return y_marginal_; }

  std::pair<std::uint64_t, std::uint64_t> draw() { return draw_(rng_); }

 private:
  int n_;
  std::string x_marginal_;
  std::string y_marginal_;
  std::uint64_t seed_;
  SplitMix64 rng_;
  DrawFn draw_;
};

}  // namespace hcstretch

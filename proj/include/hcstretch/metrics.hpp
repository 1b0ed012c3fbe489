#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hcstretch/cube.hpp"
#include "hcstretch/rational.hpp"

namespace hcstretch {

// Default enumeration budget for exact stretch: (n-1) * 2^{n-1} edge visits.
inline constexpr std::uint64_t kExactStretchBudget = std::uint64_t{1} << 28;

enum class DomainKind { half_cube, explicit_set };

// A total function on an enumerated domain, stored as the image of each
// domain point. For half_cube the domain is all of H_{src_n} in index order;
// for explicit_set it is domain_set's members in index order.
struct Mapping {
  int src_n = 0;
  int dst_n = 0;
  DomainKind domain_kind = DomainKind::half_cube;
  std::optional<CubeSet> domain_set;
  std::vector<std::uint64_t> image;
  bool bijective = false;  // tag: images pairwise distinct

  static Mapping on_half_cube(int src_n, int dst_n, std::vector<std::uint64_t> image);
  static Mapping on_set(const CubeSet& domain, int dst_n, std::vector<std::uint64_t> image);

  std::size_t size() const noexcept { return image.size(); }
  std::vector<std::uint64_t> domain_points() const;
  // Image of a half-cube point. Only valid for half_cube domains.
  std::uint64_t at(std::uint64_t x) const { return image.at(static_cast<std::size_t>(x)); }
};

// x -> x o 0 onto {x : x_n = 0}.
Mapping embed_identity(int src_n);
// x -> x o parity(x) onto the even-weight points of H_{src_n + 1}.
Mapping embed_parity(int src_n);

// Checks that images are pairwise distinct and (when given) that they cover
// the codomain exactly. Throws VerificationError naming a witness.
void verify_bijection(const Mapping& phi, const std::optional<CubeSet>& codomain = std::nullopt);

// Re-indexes a mapping whose explicit domain is {x : x_n = 0} in H_{src_n}
// as a mapping on the half cube H_{src_n - 1}.
Mapping to_half_cube(const Mapping& phi);

// Mean over (x, i) of dist(phi(x), phi(x + e_i)). Throws BudgetError when the
// (n-1) 2^{n-1} edge visits exceed budget.
Rational avg_stretch_exact(const Mapping& phi, std::uint64_t budget = kExactStretchBudget);
int max_stretch_exact(const Mapping& phi);

// Mean of dist(x o 0, phi(x)) over the domain; verifies bijectivity first
// when the mapping is tagged bijective.
Rational avg_transport(const Mapping& phi);

// Pointwise map usable by the sampler, e.g. a closure over f_k.
struct PointMap {
  int src_n = 0;
  int dst_n = 0;
  std::function<std::uint64_t(std::uint64_t)> eval;

  static PointMap from(const Mapping& phi);
};

enum class Method { exact, monte_carlo };
std::string_view to_string(Method m) noexcept;

using Expectation = std::variant<Rational, double>;
double expectation_value(const Expectation& e);

struct StretchReport {
  Expectation avg_stretch = 0.0;
  Expectation avg_transport = 0.0;
  int max_stretch = 0;
  Method method = Method::exact;
  std::uint64_t samples = 0;
  double ci95 = 0.0;
  std::uint64_t seed = 0;
};

// Exact report: samples = number of directed edges, ci95 = 0.
StretchReport stretch_report_exact(const Mapping& phi,
                                   std::uint64_t budget = kExactStretchBudget);

// Samples (x, i) uniformly; the result depends only on (phi, samples, seed).
// ci95 is 1.96 * sample sd / sqrt(samples). avg_transport is estimated from
// the same x draws.
StretchReport avg_stretch_mc(const PointMap& phi, std::uint64_t samples, std::uint64_t seed);

struct PropBridge {
  Rational lhs;  // avg stretch
  Rational rhs;  // 2 * avg transport + 1
  bool holds = false;
};

PropBridge check_prop_bridge(const Mapping& phi, std::uint64_t budget = kExactStretchBudget);

// Distance from every point of H_n to the nearest member of F (multi-source
// BFS). Throws PreconditionError on empty F.
std::vector<std::uint8_t> distance_to_set(const CubeSet& f);

// Density of F_{>=k}, the points at distance >= k from all of F.
Rational expansion_profile(const CubeSet& f, int k);

struct ExpansionCheck {
  Rational measured;        // mu(F_{>=k})
  double bound_divided = 0;  // e^{-k^2/n} / mu(F)
  double bound_product = 0;  // e^{-k^2/n} * mu(F)
  bool holds_divided = false;
  bool holds_product = false;
};

ExpansionCheck expansion_check(const CubeSet& f, int k);

// JSON / file formats

nlohmann::json to_json(const Expectation& e);
nlohmann::json to_json(const StretchReport& r);

// Header "src_n=<m> dst_n=<n>", then "<domain-index> <image-index>" lines in
// ascending domain order.
void write_mapping(std::ostream& os, const Mapping& phi);
Mapping read_mapping(std::istream& is);
void write_mapping_file(const std::string& path, const Mapping& phi);
Mapping read_mapping_file(const std::string& path);

}  // namespace hcstretch

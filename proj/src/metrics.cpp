#include "hcstretch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hcstretch/errors.hpp"
#include "hcstretch/rng.hpp"

namespace hcstretch {

// ---------------------------------------------------------------------------
// Mapping

Mapping Mapping::on_half_cube(int src_n, int dst_n, std::vector<std::uint64_t> image) {
  if (src_n < 0 || src_n > kMaxSetDim || dst_n < 1 || dst_n > kMaxPointDim) {
    throw PreconditionError("mapping dimensions out of range");
  }
  if (image.size() != (std::size_t{1} << src_n)) {
    throw PreconditionError("half-cube mapping needs 2^src_n images");
  }
  for (auto y : image) {
    if ((y & ~low_mask(dst_n)) != 0) throw PreconditionError("image outside H_dst_n");
  }
  Mapping m;
  m.src_n = src_n;
  m.dst_n = dst_n;
  m.domain_kind = DomainKind::half_cube;
  m.image = std::move(image);
  return m;
}

Mapping Mapping::on_set(const CubeSet& domain, int dst_n, std::vector<std::uint64_t> image) {
  if (image.size() != domain.card()) {
    throw PreconditionError("mapping needs one image per domain point");
  }
  if (dst_n < 1 || dst_n > kMaxPointDim) throw PreconditionError("dst_n out of range");
  for (auto y : image) {
    if ((y & ~low_mask(dst_n)) != 0) throw PreconditionError("image outside H_dst_n");
  }
  Mapping m;
  m.src_n = domain.n();
  m.dst_n = dst_n;
  m.domain_kind = DomainKind::explicit_set;
  m.domain_set = domain;
  m.image = std::move(image);
  return m;
}

std::vector<std::uint64_t> Mapping::domain_points() const {
  if (domain_kind == DomainKind::explicit_set) return domain_set->members();
  std::vector<std::uint64_t> pts(image.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = i;
  return pts;
}

Mapping embed_identity(int src_n) {
  std::vector<std::uint64_t> image(std::size_t{1} << src_n);
  for (std::size_t x = 0; x < image.size(); ++x) image[x] = x;
  auto m = Mapping::on_half_cube(src_n, src_n + 1, std::move(image));
  m.bijective = true;
  return m;
}

Mapping embed_parity(int src_n) {
  std::vector<std::uint64_t> image(std::size_t{1} << src_n);
  for (std::size_t x = 0; x < image.size(); ++x) {
    const std::uint64_t parity = static_cast<std::uint64_t>(std::popcount(x) & 1);
    image[x] = x | (parity << src_n);
  }
  auto m = Mapping::on_half_cube(src_n, src_n + 1, std::move(image));
  m.bijective = true;
  return m;
}

void verify_bijection(const Mapping& phi, const std::optional<CubeSet>& codomain) {
  std::vector<std::uint64_t> sorted = phi.image;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw VerificationError("duplicate_image", "two domain points share an image", *dup);
  }
  if (codomain) {
    for (auto y : sorted) {
      if (y >= codomain->universe() || !codomain->contains(y)) {
        throw VerificationError("image_outside_codomain", "image not in codomain", y);
      }
    }
    if (sorted.size() != codomain->card()) {
      throw VerificationError("not_surjective", "image misses part of the codomain");
    }
  }
}

Mapping to_half_cube(const Mapping& phi) {
  if (phi.domain_kind == DomainKind::half_cube) return phi;
  if (phi.src_n < 1 || !(*phi.domain_set == make_set(SetKind::subcube0, phi.src_n))) {
    throw PreconditionError("mapping domain is not {x : x_n = 0}");
  }
  auto m = Mapping::on_half_cube(phi.src_n - 1, phi.dst_n, phi.image);
  m.bijective = phi.bijective;
  return m;
}

// ---------------------------------------------------------------------------
// Exact stretch and transport

namespace {

void require_half_cube(const Mapping& phi) {
  if (phi.domain_kind != DomainKind::half_cube) {
    throw PreconditionError("average stretch needs a half-cube domain");
  }
  if (phi.src_n < 1) throw PreconditionError("H_0 has no edges; stretch is undefined");
}

std::uint64_t edge_visits(const Mapping& phi) {
  return static_cast<std::uint64_t>(phi.src_n) * (std::uint64_t{1} << phi.src_n);
}

}  // namespace

Rational avg_stretch_exact(const Mapping& phi, std::uint64_t budget) {
  require_half_cube(phi);
  const std::uint64_t visits = edge_visits(phi);
  if (visits > budget) {
    throw BudgetError("exact stretch needs " + std::to_string(visits) +
                      " edge visits, budget is " + std::to_string(budget));
  }
  std::uint64_t total = 0;
  const std::uint64_t size = phi.image.size();
  for (std::uint64_t x = 0; x < size; ++x) {
    const std::uint64_t fx = phi.image[x];
    for (int i = 0; i < phi.src_n; ++i) {
      total += static_cast<std::uint64_t>(
          hamming_dist(fx, phi.image[x ^ (std::uint64_t{1} << i)]));
    }
  }
  return Rational(BigInt(total), BigInt(visits));
}

int max_stretch_exact(const Mapping& phi) {
  require_half_cube(phi);
  int best = 0;
  for (std::uint64_t x = 0; x < phi.image.size(); ++x) {
    for (int i = 0; i < phi.src_n; ++i) {
      best = std::max(best, hamming_dist(phi.image[x], phi.image[x ^ (std::uint64_t{1} << i)]));
    }
  }
  return best;
}

Rational avg_transport(const Mapping& phi) {
  if (phi.src_n > phi.dst_n) throw PreconditionError("domain does not embed in codomain");
  if (phi.image.empty()) throw PreconditionError("empty mapping");
  if (phi.bijective) verify_bijection(phi);
  const auto domain = phi.domain_points();
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    total += static_cast<std::uint64_t>(hamming_dist(domain[i], phi.image[i]));
  }
  return Rational(BigInt(total), BigInt(domain.size()));
}

PropBridge check_prop_bridge(const Mapping& phi, std::uint64_t budget) {
  if (!phi.bijective) verify_bijection(phi);
  PropBridge b;
  b.lhs = avg_stretch_exact(phi, budget);
  b.rhs = 2 * avg_transport(phi) + 1;
  b.holds = b.lhs <= b.rhs;
  return b;
}

// ---------------------------------------------------------------------------
// Reports

std::string_view to_string(Method m) noexcept {
  return m == Method::exact ? "exact" : "monte_carlo";
}

double expectation_value(const Expectation& e) {
  return std::visit(
      [](const auto& v) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Rational>) {
          return to_double(v);
        } else {
          return v;
        }
      },
      e);
}

StretchReport stretch_report_exact(const Mapping& phi, std::uint64_t budget) {
  StretchReport r;
  r.avg_stretch = avg_stretch_exact(phi, budget);
  r.avg_transport = avg_transport(phi);
  r.max_stretch = max_stretch_exact(phi);
  r.method = Method::exact;
  r.samples = edge_visits(phi);
  r.ci95 = 0.0;
  r.seed = 0;
  return r;
}

PointMap PointMap::from(const Mapping& phi) {
  if (phi.domain_kind != DomainKind::half_cube) {
    throw PreconditionError("pointwise sampling needs a half-cube domain");
  }
  PointMap pm;
  pm.src_n = phi.src_n;
  pm.dst_n = phi.dst_n;
  pm.eval = [image = phi.image](std::uint64_t x) { return image[static_cast<std::size_t>(x)]; };
  return pm;
}

StretchReport avg_stretch_mc(const PointMap& phi, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw PreconditionError("need at least one sample");
  if (phi.src_n < 1 || phi.src_n > kMaxPointDim) throw PreconditionError("bad source dimension");
  // Fixed-size blocks, each with its own derived stream, so a sharded run
  // reproduces the sequential one exactly.
  constexpr std::uint64_t kBlock = 4096;
  const SplitMix64 root(seed);
  std::uint64_t sum = 0;
  std::uint64_t sum_sq = 0;
  std::uint64_t transport_sum = 0;
  int max_seen = 0;
  const std::uint64_t mask = low_mask(phi.src_n);
  for (std::uint64_t block = 0; block * kBlock < samples; ++block) {
    SplitMix64 rng = root.split(block);
    const std::uint64_t end = std::min(samples, (block + 1) * kBlock);
    for (std::uint64_t s = block * kBlock; s < end; ++s) {
      const std::uint64_t x = rng.next() & mask;
      const auto i = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(phi.src_n)));
      const std::uint64_t fx = phi.eval(x);
      const int d = hamming_dist(fx, phi.eval(x ^ (std::uint64_t{1} << i)));
      sum += static_cast<std::uint64_t>(d);
      sum_sq += static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d);
      transport_sum += static_cast<std::uint64_t>(hamming_dist(x, fx));
      max_seen = std::max(max_seen, d);
    }
  }
  const double n = static_cast<double>(samples);
  const double mean = static_cast<double>(sum) / n;
  double var = 0.0;
  if (samples > 1) {
    var = (static_cast<double>(sum_sq) - n * mean * mean) / (n - 1.0);
    var = std::max(var, 0.0);
  }
  StretchReport r;
  r.avg_stretch = mean;
  r.avg_transport = static_cast<double>(transport_sum) / n;
  r.max_stretch = max_seen;
  r.method = Method::monte_carlo;
  r.samples = samples;
  r.ci95 = 1.96 * std::sqrt(var / n);
  r.seed = seed;
  return r;
}

// ---------------------------------------------------------------------------
// Expansion

std::vector<std::uint8_t> distance_to_set(const CubeSet& f) {
  if (f.card() == 0) throw PreconditionError("expansion of the empty set is undefined");
  if (f.n() > 24) throw BudgetError("exact BFS limited to n <= 24");
  const std::uint64_t size = f.universe();
  constexpr std::uint8_t kUnseen = 0xff;
  std::vector<std::uint8_t> dist(static_cast<std::size_t>(size), kUnseen);
  std::vector<std::uint32_t> frontier;
  frontier.reserve(static_cast<std::size_t>(f.card()));
  f.for_each([&](std::uint64_t x) {
    dist[static_cast<std::size_t>(x)] = 0;
    frontier.push_back(static_cast<std::uint32_t>(x));
  });
  std::vector<std::uint32_t> next;
  for (std::uint8_t level = 1; !frontier.empty(); ++level) {
    next.clear();
    for (auto x : frontier) {
      for (int i = 0; i < f.n(); ++i) {
        const auto y = x ^ (std::uint32_t{1} << i);
        if (dist[y] == kUnseen) {
          dist[y] = level;
          next.push_back(y);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

Rational expansion_profile(const CubeSet& f, int k) {
  const auto dist = distance_to_set(f);
  std::uint64_t far = 0;
  for (auto d : dist) {
    if (static_cast<int>(d) >= k) ++far;
  }
  return Rational(BigInt(far), BigInt(f.universe()));
}

ExpansionCheck expansion_check(const CubeSet& f, int k) {
  ExpansionCheck c;
  c.measured = expansion_profile(f, k);
  const double decay = std::exp(-static_cast<double>(k) * k / f.n());
  const double mu = to_double(f.density());
  const double measured = to_double(c.measured);
  c.bound_divided = decay / mu;
  c.bound_product = decay * mu;
  c.holds_divided = measured <= c.bound_divided;
  c.holds_product = measured <= c.bound_product;
  return c;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const Expectation& e) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Rational>) {
          return to_fraction_string(v);
        } else {
          return v;
        }
      },
      e);
}

nlohmann::json to_json(const StretchReport& r) {
  nlohmann::json j;
  j["avg_stretch"] = to_json(r.avg_stretch);
  j["avg_transport"] = to_json(r.avg_transport);
  j["max_stretch"] = r.max_stretch;
  j["method"] = std::string(to_string(r.method));
  j["samples"] = r.samples;
  j["ci95"] = r.ci95;
  j["seed"] = r.seed;
  return j;
}

void write_mapping(std::ostream& os, const Mapping& phi) {
  os << "src_n=" << phi.src_n << " dst_n=" << phi.dst_n << '\n';
  const auto domain = phi.domain_points();
  for (std::size_t i = 0; i < domain.size(); ++i) os << domain[i] << ' ' << phi.image[i] << '\n';
}

Mapping read_mapping(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("missing mapping header");
  int src_n = -1;
  int dst_n = -1;
  {
    std::istringstream hs(header);
    std::string a;
    std::string b;
    hs >> a >> b;
    if (a.rfind("src_n=", 0) != 0 || b.rfind("dst_n=", 0) != 0) {
      throw ParseError("mapping header must read 'src_n=<m> dst_n=<n>'");
    }
    try {
      src_n = std::stoi(a.substr(6));
      dst_n = std::stoi(b.substr(6));
    } catch (const std::logic_error&) {
      throw ParseError("bad mapping header '" + header + "'");
    }
  }
  if (src_n < 0 || src_n > kMaxSetDim || dst_n < 1 || dst_n > kMaxPointDim) {
    throw ParseError("mapping dimensions out of range");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::string extra;
    if (!(ls >> x >> y) || (ls >> extra)) throw ParseError("bad mapping row '" + line + "'");
    if ((x >> src_n) != 0 || (y & ~low_mask(dst_n)) != 0) {
      throw ParseError("mapping row out of range '" + line + "'");
    }
    rows.emplace_back(x, y);
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw ParseError("domain index " + std::to_string(rows[i].first) + " listed twice");
    }
  }
  std::vector<std::uint64_t> image;
  image.reserve(rows.size());
  for (const auto& r : rows) image.push_back(r.second);
  if (rows.size() == (std::size_t{1} << src_n)) {
    return Mapping::on_half_cube(src_n, dst_n, std::move(image));
  }
  CubeSet domain(src_n);
  for (const auto& r : rows) domain.insert(r.first);
  return Mapping::on_set(domain, dst_n, std::move(image));
}

void write_mapping_file(const std::string& path, const Mapping& phi) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_mapping(os, phi);
  if (!os) throw IoError("write to '" + path + "' failed");
}

Mapping read_mapping_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_mapping(is);
}

}  // namespace hcstretch

#include "hcstretch/recmaj.hpp"

#include <cmath>

#include "hcstretch/errors.hpp"
#include "hcstretch/rng.hpp"

namespace hcstretch {

namespace {

constexpr int kEventOf[2][2] = {
    // [recmaj(x)][recmaj(x + e_i)]
    {3, 1},  // 0 -> 0 is E4, 0 -> 1 is E2
    {2, 0},  // 1 -> 0 is E3, 1 -> 1 is E1
};

void require_level(int k, int max_k, const char* what) {
  if (k < 1 || k > max_k) {
    throw PreconditionError(std::string(what) + " needs 1 <= k <= " + std::to_string(max_k) +
                            ", got k = " + std::to_string(k));
  }
}

void require_coordinate(const RecMajContext& ctx, int i) {
  if (i < 1 || i > ctx.n()) {
    throw PreconditionError("coordinate " + std::to_string(i) + " outside [1, " +
                            std::to_string(ctx.n()) + "]");
  }
}

RecWord random_word(SplitMix64& rng, int n) {
  const RecWord lo = rng.next();
  const RecWord hi = n > 64 ? rng.next() : 0;
  return ((hi << 64) | lo) & rec_mask(n);
}

}  // namespace

RecMajContext::RecMajContext(int k, std::array<std::uint8_t, 8> f1) : k_(k), f1_(f1) {
  require_level(k, kMaxRecmajLevel, "RecMajContext");
  for (auto& v : f1_) {
    if (v > 7) throw PreconditionError("base table entries are 3-bit words");
  }
  for (unsigned x = 0; x < 8; ++x) rec1_[x] = majority3(x & 1U, (x >> 1) & 1U, (x >> 2) & 1U);
  rec2_.resize(512);
  f2_.resize(512);
  for (unsigned x = 0; x < 512; ++x) {
    unsigned y = 0;
    unsigned part[3];
    for (int r = 0; r < 3; ++r) {
      part[r] = (x >> (3 * r)) & 7U;
      y |= static_cast<unsigned>(rec1_[part[r]]) << r;
    }
    rec2_[x] = rec1_[y];
    const unsigned w = f1_[y];
    unsigned out = 0;
    for (int r = 0; r < 3; ++r) {
      const unsigned piece = ((w >> r) & 1U) != ((y >> r) & 1U) ? f1_[part[r]] : part[r];
      out |= piece << (3 * r);
    }
    f2_[x] = static_cast<std::uint16_t>(out);
  }
}

std::array<RecMajContext::Interval, 3> RecMajContext::thirds() const {
  const int m = width(k_ - 1);
  return {Interval{1, m}, Interval{m + 1, 2 * m}, Interval{2 * m + 1, 3 * m}};
}

bool RecMajContext::recmaj_at(int level, RecWord x) const {
  switch (level) {
    case 0:
      return (x & 1U) != 0;
    case 1:
      return rec1_[static_cast<unsigned>(x & 7U)] != 0;
    case 2:
      return rec2_[static_cast<unsigned>(x & 511U)] != 0;
    default: {
      const int m = width(level - 1);
      const RecWord mask = rec_mask(m);
      unsigned y = 0;
      for (int r = 0; r < 3; ++r) {
        y |= static_cast<unsigned>(recmaj_at(level - 1, (x >> (r * m)) & mask)) << r;
      }
      return rec1_[y] != 0;
    }
  }
}

RecWord RecMajContext::f_at(int level, RecWord x) const {
  if (level == 1) return f1_[static_cast<unsigned>(x & 7U)];
  if (level == 2) return f2_[static_cast<unsigned>(x & 511U)];
  const int m = width(level - 1);
  const RecWord mask = rec_mask(m);
  RecWord part[3];
  unsigned y = 0;
  for (int r = 0; r < 3; ++r) {
    part[r] = (x >> (r * m)) & mask;
    y |= static_cast<unsigned>(recmaj_at(level - 1, part[r])) << r;
  }
  const unsigned w = f1_[y];
  RecWord out = 0;
  for (int r = 0; r < 3; ++r) {
    const RecWord piece = ((w >> r) & 1U) != ((y >> r) & 1U) ? f_at(level - 1, part[r]) : part[r];
    out |= piece << (r * m);
  }
  return out;
}

Point RecMajContext::f(const Point& x) const {
  if (x.n() != n() || n() > 64) {
    throw PreconditionError("f_" + std::to_string(k_) + " takes points of H_" +
                            std::to_string(n()) + ", got H_" + std::to_string(x.n()));
  }
  return Point(x.n(), static_cast<std::uint64_t>(f(RecWord{x.bits()})));
}

bool RecMajContext::recmaj(const Point& x) const {
  if (x.n() != n()) {
    throw PreconditionError("recmaj_" + std::to_string(k_) + " takes points of H_" +
                            std::to_string(n()));
  }
  return recmaj(RecWord{x.bits()});
}

Point f_k(const RecMajContext& ctx, const Point& x) { return ctx.f(x); }

FkVerification verify_fk(const RecMajContext& ctx) {
  require_level(ctx.k(), 3, "exhaustive f_k verification");
  const int n = ctx.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  FkVerification v;
  v.k = ctx.k();
  v.exhaustive = true;

  std::vector<std::uint64_t> seen((total + 63) / 64, 0);
  // Preimage table for collision witnesses; only kept while it is small.
  std::vector<std::uint32_t> owner;
  if (n <= 20) owner.assign(total, 0);

  auto fail = [&](const char* kind, std::uint64_t x, std::optional<std::uint64_t> other) {
    v.pass = false;
    v.failure = kind;
    v.witness = x;
    v.witness_other = other;
    return v;
  };

  for (std::uint64_t x = 0; x < total; ++x) {
    ++v.checked;
    const auto fx = static_cast<std::uint64_t>(ctx.f(RecWord{x}));
    if (!ctx.recmaj(RecWord{fx})) return fail("image_outside_A", x, fx);
    if ((fx & x) != x) return fail("not_monotone", x, fx);
    if (ctx.recmaj(RecWord{x})) {
      ++v.one_count;
      if (fx != x) return fail("not_identity_on_A", x, fx);
      continue;
    }
    ++v.zero_count;
    auto& word = seen[fx >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (fx & 63);
    if ((word & bit) != 0) {
      std::optional<std::uint64_t> other;
      if (!owner.empty()) other = owner[fx];
      return fail("duplicate_image", x, other);
    }
    word |= bit;
    if (!owner.empty()) owner[fx] = static_cast<std::uint32_t>(x);
    ++v.distinct_images;
  }
  const std::uint64_t half = total / 2;
  if (v.zero_count != half || v.one_count != half) {
    v.failure = "cardinality_mismatch";
    return v;
  }
  if (v.distinct_images != v.one_count) {
    v.failure = "not_surjective";
    return v;
  }
  v.pass = true;
  return v;
}

FkVerification verify_fk_sampled(const RecMajContext& ctx, std::uint64_t samples,
                                 std::uint64_t seed) {
  FkVerification v;
  v.k = ctx.k();
  v.exhaustive = false;
  SplitMix64 rng(seed);
  const int n = ctx.n();
  for (std::uint64_t s = 0; s < samples; ++s) {
    const RecWord x = random_word(rng, n);
    const RecWord fx = ctx.f(x);
    ++v.checked;
    const bool in_a = ctx.recmaj(x);
    (in_a ? v.one_count : v.zero_count) += 1;
    const char* kind = nullptr;
    if (!ctx.recmaj(fx)) {
      kind = "image_outside_A";
    } else if ((fx & x) != x) {
      kind = "not_monotone";
    } else if (in_a && fx != x) {
      kind = "not_identity_on_A";
    } else if (ctx.f(fx) != fx) {
      kind = "not_idempotent";
    }
    if (kind != nullptr) {
      v.failure = kind;
      v.witness = static_cast<std::uint64_t>(x);
      v.witness_other = static_cast<std::uint64_t>(fx);
      return v;
    }
  }
  v.pass = true;
  return v;
}

int mineq(const RecMajContext& ctx, RecWord x, int coordinate) {
  require_coordinate(ctx, coordinate);
  const int pos = coordinate - 1;
  for (int j = 1; j <= ctx.k(); ++j) {
    const int block = RecMajContext::width(j);
    const int start = (pos / block) * block;
    const RecWord xb = (x >> start) & rec_mask(block);
    const RecWord yb = xb ^ (RecWord{1} << (pos - start));
    if (ctx.recmaj_at(j, xb) == ctx.recmaj_at(j, yb)) return j;
  }
  return ctx.k() + 1;
}

std::vector<Rational> mineq_histogram(const RecMajContext& ctx) {
  require_level(ctx.k(), 2, "exhaustive mineq histogram");
  const int n = ctx.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(ctx.k() + 2), 0);
  for (std::uint64_t x = 0; x < total; ++x) {
    for (int i = 1; i <= n; ++i) ++counts[static_cast<std::size_t>(mineq(ctx, RecWord{x}, i))];
  }
  const BigInt denom = BigInt(total) * n;
  std::vector<Rational> out(counts.size(), Rational(0));
  for (std::size_t j = 1; j < counts.size(); ++j) out[j] = Rational(BigInt(counts[j]), denom);
  return out;
}

Rational StretchBreakdown::total() const {
  std::uint64_t sum = 0;
  for (const auto& e : events) sum += e.dist_sum;
  return Rational(BigInt(sum), BigInt(population));
}

Rational StretchBreakdown::probability(int event) const {
  const auto& e = events.at(static_cast<std::size_t>(event - 1));
  return Rational(BigInt(e.count), BigInt(population));
}

Rational StretchBreakdown::conditional(int event) const {
  const auto& e = events.at(static_cast<std::size_t>(event - 1));
  if (e.count == 0) return Rational(0);
  return Rational(BigInt(e.dist_sum), BigInt(e.count));
}

Rational StretchBreakdown::e4_weighted() const {
  return Rational(BigInt(events[3].dist_sum), BigInt(population));
}

Rational StretchBreakdown::boundary_drift() const {
  if (events[1].count == 0) return Rational(0);
  return Rational(BigInt(boundary_drift_sum), BigInt(events[1].count));
}

double StretchBreakdown::total_ci95() const {
  if (method == Method::exact || population < 2) return 0.0;
  const double m = to_double(total());
  const auto nn = static_cast<double>(population);
  const double var = (static_cast<double>(total_sq_sum) - nn * m * m) / (nn - 1);
  return 1.96 * std::sqrt(std::max(var, 0.0) / nn);
}

namespace {

StretchBreakdown empty_breakdown(const RecMajContext& ctx, int coordinate, Method method) {
  StretchBreakdown b;
  b.k = ctx.k();
  b.coordinate = coordinate;
  b.method = method;
  b.mineq_counts.assign(static_cast<std::size_t>(ctx.k() + 2), 0);
  return b;
}

// Records the directed pair x -> y = x + e_i.
void tally(StretchBreakdown& b, RecWord x, RecWord fx, bool rx, bool ry, int d, int level) {
  auto& e = b.events[static_cast<std::size_t>(kEventOf[rx][ry])];
  ++e.count;
  e.dist_sum += static_cast<std::uint64_t>(d);
  b.total_sq_sum += static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(d);
  ++b.mineq_counts[static_cast<std::size_t>(level)];
  if (!rx && ry) b.boundary_drift_sum += static_cast<std::uint64_t>(popcount(x ^ fx));
}

}  // namespace

StretchBreakdown fk_coordinate_stretch(const RecMajContext& ctx, int coordinate) {
  require_level(ctx.k(), 3, "exact coordinate stretch");
  require_coordinate(ctx, coordinate);
  auto b = empty_breakdown(ctx, coordinate, Method::exact);
  const int n = ctx.n();
  const std::uint64_t total = std::uint64_t{1} << n;
  const std::uint64_t bit = std::uint64_t{1} << (coordinate - 1);
  b.population = total;
  // Each unordered edge {x, x + e_i} contributes both directions.
  for (std::uint64_t x = 0; x < total; ++x) {
    if ((x & bit) != 0) continue;
    const RecWord lo{x};
    const RecWord hi{x | bit};
    const RecWord flo = ctx.f(lo);
    const RecWord fhi = ctx.f(hi);
    const bool rlo = ctx.recmaj(lo);
    const bool rhi = ctx.recmaj(hi);
    const int d = popcount(flo ^ fhi);
    const int level = mineq(ctx, lo, coordinate);
    tally(b, lo, flo, rlo, rhi, d, level);
    tally(b, hi, fhi, rhi, rlo, d, level);
  }
  return b;
}

StretchBreakdown fk_coordinate_stretch_sampled(const RecMajContext& ctx, int coordinate,
                                               std::uint64_t samples, std::uint64_t seed) {
  require_coordinate(ctx, coordinate);
  auto b = empty_breakdown(ctx, coordinate, Method::monte_carlo);
  b.seed = seed;
  b.population = samples;
  SplitMix64 rng(seed);
  const RecWord bit = RecWord{1} << (coordinate - 1);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const RecWord x = random_word(rng, ctx.n());
    const RecWord y = x ^ bit;
    const RecWord fx = ctx.f(x);
    const int d = popcount(fx ^ ctx.f(y));
    tally(b, x, fx, ctx.recmaj(x), ctx.recmaj(y), d, mineq(ctx, x, coordinate));
  }
  return b;
}

DriftReport conditional_drift(const RecMajContext& ctx, bool with_boundary) {
  require_level(ctx.k(), 3, "exact conditional drift");
  DriftReport r;
  r.k = ctx.k();
  const std::uint64_t total = std::uint64_t{1} << ctx.n();
  std::uint64_t zeros = 0;
  std::uint64_t sum = 0;
  for (std::uint64_t x = 0; x < total; ++x) {
    const RecWord w{x};
    if (ctx.recmaj(w)) continue;
    ++zeros;
    sum += static_cast<std::uint64_t>(popcount(w ^ ctx.f(w)));
  }
  r.drift = Rational(BigInt(sum), BigInt(zeros));
  Rational geometric = 0;
  Rational power = 1;
  for (int j = 0; j < ctx.k(); ++j) {
    geometric += power;
    power *= Rational(3, 2);
  }
  r.boundary_bound = geometric;
  if (with_boundary) {
    for (int i = 1; i <= ctx.n(); ++i) {
      r.boundary.push_back(fk_coordinate_stretch(ctx, i).boundary_drift());
    }
  }
  return r;
}

PhiRecmaj build_phi_recmaj(const RecMajContext& ctx) {
  require_level(ctx.k(), 3, "build_phi_recmaj");
  const int n = ctx.n();
  const std::uint64_t left = std::uint64_t{1} << (n - 1);
  const std::uint64_t top = std::uint64_t{1} << (n - 1);

  CubeSet a(n);
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    if (ctx.recmaj(RecWord{x})) a.insert(x);
  }
  if (a.card() != left) {
    throw VerificationError("regularity", "|A| = " + std::to_string(a.card()) +
                                              " differs from |H_{n-1}| = " + std::to_string(left));
  }

  // psi[2x + b] = rank in A of f(x o b); edge ids are 2x + b.
  std::vector<std::uint32_t> psi(2 * left);
  std::vector<std::uint8_t> degree(left, 0);
  std::vector<std::uint32_t> incident(2 * left);
  for (std::uint64_t x = 0; x < left; ++x) {
    for (std::uint64_t b = 0; b < 2; ++b) {
      const auto y = static_cast<std::uint64_t>(ctx.f(RecWord{x | (b * top)}));
      if (!a.contains(y)) {
        throw VerificationError("regularity", "f maps outside A", y);
      }
      const auto r = a.rank(y);
      const auto edge = static_cast<std::uint32_t>(2 * x + b);
      psi[edge] = static_cast<std::uint32_t>(r);
      if (degree[r] >= 2) {
        throw VerificationError("regularity", "right vertex has degree above 2", y);
      }
      incident[2 * r + degree[r]] = edge;
      ++degree[r];
    }
  }
  const auto members = a.members();
  for (std::uint64_t r = 0; r < left; ++r) {
    if (degree[r] != 2) {
      throw VerificationError("regularity",
                              "right vertex has degree " + std::to_string(degree[r]),
                              members[r]);
    }
  }

  PhiRecmaj out;
  std::vector<std::uint64_t> image(left, 0);
  std::vector<bool> done(left, false);
  for (std::uint64_t start = 0; start < left; ++start) {
    if (done[start]) continue;
    ++out.cycles;
    if (psi[2 * start] == psi[2 * start + 1]) ++out.parallel_pairs;
    std::uint32_t edge = static_cast<std::uint32_t>(2 * start);
    while (true) {
      const std::uint64_t x = edge / 2;
      const std::uint32_t r = psi[edge];
      image[x] = members[r];
      done[x] = true;
      const std::uint32_t skip = incident[2 * r] == edge ? incident[2 * r + 1] : incident[2 * r];
      const std::uint64_t next = skip / 2;
      if (next == start) break;
      edge = skip ^ 1U;
    }
  }
  out.phi = Mapping::on_half_cube(n - 1, n, std::move(image));
  out.phi.bijective = true;
  verify_bijection(out.phi, a);
  return out;
}

nlohmann::json to_json(const StretchBreakdown& b) {
  nlohmann::json j;
  j["k"] = b.k;
  j["coordinate"] = b.coordinate;
  j["method"] = std::string(to_string(b.method));
  j["population"] = b.population;
  if (b.method == Method::monte_carlo) j["seed"] = b.seed;
  auto value = [&](const Rational& r) -> nlohmann::json {
    if (b.method == Method::exact) return to_fraction_string(r);
    return to_double(r);
  };
  j["total"] = value(b.total());
  if (b.method == Method::monte_carlo) j["total_ci95"] = b.total_ci95();
  nlohmann::json events = nlohmann::json::array();
  for (int e = 1; e <= 4; ++e) {
    events.push_back({{"event", "E" + std::to_string(e)},
                      {"probability", value(b.probability(e))},
                      {"conditional", value(b.conditional(e))}});
  }
  j["events"] = events;
  j["e4_weighted"] = value(b.e4_weighted());
  j["boundary_drift"] = value(b.boundary_drift());
  nlohmann::json hist = nlohmann::json::array();
  for (std::size_t lvl = 1; lvl < b.mineq_counts.size(); ++lvl) {
    hist.push_back({{"level", lvl},
                    {"probability", value(Rational(BigInt(b.mineq_counts[lvl]),
                                                   BigInt(b.population)))}});
  }
  j["mineq"] = hist;
  return j;
}

nlohmann::json to_json(const FkVerification& v) {
  nlohmann::json j;
  j["k"] = v.k;
  j["pass"] = v.pass;
  j["exhaustive"] = v.exhaustive;
  j["checked"] = v.checked;
  j["zero_count"] = v.zero_count;
  j["one_count"] = v.one_count;
  if (v.exhaustive) j["distinct_images"] = v.distinct_images;
  if (!v.failure.empty()) j["failure"] = v.failure;
  if (v.witness) j["witness"] = *v.witness;
  if (v.witness_other) j["witness_other"] = *v.witness_other;
  return j;
}

}  // namespace hcstretch

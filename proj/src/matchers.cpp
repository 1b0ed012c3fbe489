#include "hcstretch/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "hcstretch/errors.hpp"

namespace hcstretch {

namespace {

void require_same_shape(const CubeSet& a, const CubeSet& b) {
  if (a.n() != b.n()) throw PreconditionError("sets live in different cubes");
  if (a.card() != b.card()) {
    throw PreconditionError("size mismatch: |A| = " + std::to_string(a.card()) +
                            ", |B| = " + std::to_string(b.card()));
  }
  if (a.card() == 0) throw PreconditionError("sets must be nonempty");
}

// Members of `b` at distance exactly d from `owner`, ascending by index.
void distance_ring(std::uint64_t owner, int d, int n, const CubeSet& b,
                   std::vector<std::uint64_t>& out) {
  out.clear();
  if (d == 0) {
    if (b.contains(owner)) out.push_back(owner);
    return;
  }
  if (d > n) return;
  const std::uint64_t limit = std::uint64_t{1} << n;
  std::uint64_t mask = low_mask(d);
  while (mask < limit) {
    const std::uint64_t y = owner ^ mask;
    if (b.contains(y)) out.push_back(y);
    // Gosper's hack: next word with the same popcount.
    const std::uint64_t c = mask & (0 - mask);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// Stable matching

Mapping stable_match(const CubeSet& a, const CubeSet& b, std::uint64_t cap) {
  require_same_shape(a, b);
  if (a.card() > cap) {
    throw BudgetError("stable matching limited to " + std::to_string(cap) + " points per side");
  }
  const int n = a.n();
  const auto proposers = a.members();
  const std::size_t size = proposers.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<int> ring_dist(size, 0);
  std::vector<std::uint64_t> proposed_up_to(size, 0);  // last candidate tried
  std::vector<bool> tried_any(size, false);
  std::vector<std::size_t> holder(size, kNone);  // indexed by rank in B

  std::vector<std::size_t> free_stack(size);
  std::iota(free_stack.rbegin(), free_stack.rend(), std::size_t{0});
  std::vector<std::uint64_t> ring;

  while (!free_stack.empty()) {
    const std::size_t i = free_stack.back();
    free_stack.pop_back();
    const std::uint64_t owner = proposers[i];
    bool engaged = false;
    while (!engaged) {
      if (ring_dist[i] > n) {
        throw VerificationError("exhausted_preferences",
                                "proposer ran out of candidates", owner);
      }
      distance_ring(owner, ring_dist[i], n, b, ring);
      auto it = tried_any[i]
                    ? std::upper_bound(ring.begin(), ring.end(), proposed_up_to[i])
                    : ring.begin();
      for (; it != ring.end(); ++it) {
        const std::uint64_t target = *it;
        proposed_up_to[i] = target;
        tried_any[i] = true;
        const auto slot = static_cast<std::size_t>(b.rank(target));
        const std::size_t current = holder[slot];
        if (current == kNone) {
          holder[slot] = i;
          engaged = true;
          break;
        }
        if (rank_key(target, owner) < rank_key(target, proposers[current])) {
          holder[slot] = i;
          free_stack.push_back(current);
          engaged = true;
          break;
        }
      }
      if (!engaged) {
        ++ring_dist[i];
        tried_any[i] = false;
      }
    }
  }

  const auto targets = b.members();
  std::vector<std::uint64_t> image(size);
  for (std::size_t slot = 0; slot < size; ++slot) image[holder[slot]] = targets[slot];
  auto phi = Mapping::on_set(a, n, std::move(image));
  phi.bijective = true;
  return phi;
}

std::vector<BlockingPair> verify_stable(const Mapping& phi, const CubeSet& a, const CubeSet& b) {
  require_same_shape(a, b);
  if (phi.domain_kind != DomainKind::explicit_set || !(*phi.domain_set == a)) {
    throw PreconditionError("matching domain differs from A");
  }
  verify_bijection(phi, b);
  const auto left = a.members();
  const auto right = b.members();
  std::vector<std::uint64_t> inverse(right.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    inverse[static_cast<std::size_t>(b.rank(phi.image[i]))] = left[i];
  }
  std::vector<BlockingPair> blocking;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const auto own = rank_key(left[i], phi.image[i]);
    for (std::size_t j = 0; j < right.size(); ++j) {
      if (rank_key(left[i], right[j]) < own &&
          rank_key(right[j], left[i]) < rank_key(right[j], inverse[j])) {
        blocking.push_back({left[i], right[j]});
      }
    }
  }
  return blocking;
}

// ---------------------------------------------------------------------------
// Optimal transport

W1Result w1_exact(const CubeSet& a, const CubeSet& b, std::uint64_t cap) {
  require_same_shape(a, b);
  if (a.card() > cap) {
    throw BudgetError("assignment limited to " + std::to_string(cap) + " points per side");
  }
  const auto rows = a.members();
  const auto cols = b.members();
  const std::size_t size = rows.size();
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  // 1-based arrays; column 0 is the virtual root of each augmenting tree.
  std::vector<std::int64_t> u(size + 1, 0);
  std::vector<std::int64_t> v(size + 1, 0);
  std::vector<std::size_t> match(size + 1, 0);  // match[col] = row
  std::vector<std::size_t> way(size + 1, 0);
  std::vector<std::int64_t> minv(size + 1);
  std::vector<char> used(size + 1);

  for (std::size_t row = 1; row <= size; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = match[col0];
      std::int64_t delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= size; ++col) {
        if (used[col]) continue;
        const std::int64_t reduced =
            hamming_dist(rows[row0 - 1], cols[col - 1]) - u[row0] - v[col];
        if (reduced < minv[col]) {
          minv[col] = reduced;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= size; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::uint64_t> image(size);
  std::uint64_t total = 0;
  for (std::size_t col = 1; col <= size; ++col) {
    image[match[col] - 1] = cols[col - 1];
    total += static_cast<std::uint64_t>(hamming_dist(rows[match[col] - 1], cols[col - 1]));
  }
  auto phi = Mapping::on_set(a, a.n(), std::move(image));
  phi.bijective = true;
  return {Rational(BigInt(total), BigInt(size)), std::move(phi)};
}

Rational w1_brute(const CubeSet& a, const CubeSet& b) {
  require_same_shape(a, b);
  if (a.card() > kBruteCap) {
    throw BudgetError("brute-force transport limited to " + std::to_string(kBruteCap) +
                      " points per side");
  }
  const auto rows = a.members();
  auto cols = b.members();
  int best = std::numeric_limits<int>::max();
  do {
    int total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) total += hamming_dist(rows[i], cols[i]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return Rational(BigInt(best), BigInt(rows.size()));
}

namespace {

// Successive shortest paths with Johnson potentials. Arc costs are
// nonnegative from the start, so Dijkstra is valid in the first round.
class MinCostFlow {
 public:
  explicit MinCostFlow(std::size_t nodes) : adj_(nodes) {}

  void add_arc(std::size_t from, std::size_t to, std::int64_t cap, std::int64_t cost) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap, cost});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, -cost});
  }

  // Returns (flow, cost).
  std::pair<std::int64_t, std::int64_t> solve(std::size_t source, std::size_t sink) {
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    const std::size_t nodes = adj_.size();
    std::vector<std::int64_t> potential(nodes, 0);
    std::vector<std::int64_t> dist(nodes);
    std::vector<std::size_t> via(nodes);
    std::int64_t flow = 0;
    std::int64_t cost = 0;
    using Item = std::pair<std::int64_t, std::size_t>;
    while (true) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.push({0, source});
      while (!heap.empty()) {
        const auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[node]) continue;
        for (auto id : adj_[node]) {
          const auto& arc = arcs_[id];
          if (arc.cap <= 0) continue;
          const std::int64_t nd = d + arc.cost + potential[node] - potential[arc.to];
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            via[arc.to] = id;
            heap.push({nd, arc.to});
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (dist[v] < kInf) potential[v] += dist[v];
      }
      std::int64_t push = kInf;
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        push = std::min(push, arcs_[via[v]].cap);
      }
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= push;
        arcs_[via[v] ^ 1].cap += push;
        cost += push * arcs_[via[v]].cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

 private:
  struct Arc {
    std::size_t to;
    std::int64_t cap;
    std::int64_t cost;
  };
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
};

}  // namespace

Rational w1_uniform_measures(const CubeSet& a, const CubeSet& b) {
  if (a.n() != b.n()) throw PreconditionError("sets live in different cubes");
  if (a.card() == 0 || b.card() == 0) throw PreconditionError("sets must be nonempty");
  if (a.card() * b.card() > (std::uint64_t{1} << 22)) {
    throw BudgetError("measure-level transport limited to |A| |B| <= 2^22");
  }
  const auto left = a.members();
  const auto right = b.members();
  const std::size_t source = left.size() + right.size();
  const std::size_t sink = source + 1;
  MinCostFlow flow(sink + 1);
  const auto supply = static_cast<std::int64_t>(right.size());
  const auto demand = static_cast<std::int64_t>(left.size());
  for (std::size_t i = 0; i < left.size(); ++i) {
    flow.add_arc(source, i, supply, 0);
    for (std::size_t j = 0; j < right.size(); ++j) {
      flow.add_arc(i, left.size() + j, supply, hamming_dist(left[i], right[j]));
    }
  }
  for (std::size_t j = 0; j < right.size(); ++j) flow.add_arc(left.size() + j, sink, demand, 0);
  const auto [sent, cost] = flow.solve(source, sink);
  if (sent != supply * demand) {
    throw VerificationError("flow_infeasible", "transport network did not saturate");
  }
  return Rational(BigInt(cost), BigInt(sent));
}

double kl_transport_bound(const CubeSet& a) {
  if (a.card() == 0) throw PreconditionError("divergence of the empty set is undefined");
  const double n = a.n();
  const double bits = n - std::log2(static_cast<double>(a.card()));
  return std::sqrt(0.5 * n * std::max(bits, 0.0));
}

// ---------------------------------------------------------------------------
// Brute-force stretch

BruteStretchResult min_avgstretch_brute(const CubeSet& a) {
  const int n = a.n();
  if (n < 2 || n > 4) throw BudgetError("brute-force stretch limited to 2 <= n <= 4");
  if (a.card() != a.universe() / 2) throw PreconditionError("target set must have density 1/2");
  const int src_n = n - 1;
  auto image = a.members();  // next_permutation starts from sorted order
  const std::size_t size = image.size();
  std::uint64_t best_total = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> best;
  do {
    std::uint64_t total = 0;
    for (std::size_t x = 0; x < size; ++x) {
      for (int i = 0; i < src_n; ++i) {
        total += static_cast<std::uint64_t>(hamming_dist(image[x], image[x ^ (std::size_t{1} << i)]));
      }
    }
    if (total < best_total) {
      best_total = total;
      best = image;
    }
  } while (std::next_permutation(image.begin(), image.end()));
  auto phi = Mapping::on_half_cube(src_n, n, std::move(best));
  phi.bijective = true;
  const std::uint64_t visits = static_cast<std::uint64_t>(src_n) * size;
  return {Rational(BigInt(best_total), BigInt(visits)), std::move(phi)};
}

}  // namespace hcstretch

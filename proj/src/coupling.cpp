#include "hcstretch/coupling.hpp"

#include <algorithm>
#include <map>

#include "hcstretch/errors.hpp"

namespace hcstretch {

std::vector<CouplingEntry> normalize_entries(std::vector<CouplingEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<CouplingEntry> out;
  out.reserve(entries.size());
  for (auto& e : entries) {
    if (!out.empty() && out.back().x == e.x && out.back().y == e.y) {
      out.back().mass += e.mass;
    } else {
      out.push_back(std::move(e));
    }
  }
  std::erase_if(out, [](const auto& e) { return e.mass == 0; });
  return out;
}

std::string check_coupling(const CubeSet& x_support, const CubeSet& y_support,
                           const std::vector<CouplingEntry>& entries) {
  if (x_support.card() == 0 || y_support.card() == 0) return "empty marginal support";
  std::map<std::uint64_t, Rational> rows;
  std::map<std::uint64_t, Rational> cols;
  Rational total = 0;
  for (const auto& e : entries) {
    if (e.mass <= 0) return "non-positive mass at (" + std::to_string(e.x) + ", " +
                            std::to_string(e.y) + ")";
    if (e.x >= x_support.universe() || !x_support.contains(e.x)) {
      return "x = " + std::to_string(e.x) + " outside the first marginal's support";
    }
    if (e.y >= y_support.universe() || !y_support.contains(e.y)) {
      return "y = " + std::to_string(e.y) + " outside the second marginal's support";
    }
    rows[e.x] += e.mass;
    cols[e.y] += e.mass;
    total += e.mass;
  }
  if (total != 1) return "total mass " + to_fraction_string(total) + " != 1";
  const Rational row_target(BigInt(1), BigInt(x_support.card()));
  const Rational col_target(BigInt(1), BigInt(y_support.card()));
  if (rows.size() != x_support.card()) return "first marginal misses support points";
  if (cols.size() != y_support.card()) return "second marginal misses support points";
  for (const auto& [x, m] : rows) {
    if (m != row_target) {
      return "row " + std::to_string(x) + " sums to " + to_fraction_string(m);
    }
  }
  for (const auto& [y, m] : cols) {
    if (m != col_target) {
      return "column " + std::to_string(y) + " sums to " + to_fraction_string(m);
    }
  }
  return {};
}

SparseCoupling::SparseCoupling(int n, CubeSet x_support, CubeSet y_support,
                               std::vector<CouplingEntry> entries)
    : n_(n),
      x_support_(std::move(x_support)),
      y_support_(std::move(y_support)),
      entries_(normalize_entries(std::move(entries))) {
  if (x_support_.n() != n || y_support_.n() != n) {
    throw PreconditionError("coupling supports must live in H_" + std::to_string(n));
  }
  const auto problem = check_coupling(x_support_, y_support_, entries_);
  if (!problem.empty()) throw VerificationError("invalid_coupling", problem);
}

Rational SparseCoupling::cost() const {
  Rational c = 0;
  for (const auto& e : entries_) c += e.mass * hamming_dist(e.x, e.y);
  return c;
}

}  // namespace hcstretch

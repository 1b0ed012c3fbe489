#include "hcstretch/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hcstretch/errors.hpp"
#include "hcstretch/matchers.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/recmaj.hpp"
#include "hcstretch/rng.hpp"
#include "hcstretch/tribes.hpp"

namespace hcstretch::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "hcstretch 1.0.0";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json exact(const Rational& r) { return to_fraction_string(r); }

struct Check {
  std::string claim;
  std::string relation;  // "<=", "<", "==", ">="
  json bound;
  json measured;
  bool pass = false;
};

struct Report {
  json results = json::object();
  std::vector<Check> checks;
  std::vector<std::string> csv_rows;  // without header
  bool csv = false;
};

const char* kCsvHeader = "kind,n,seed,metric,value,bound,pass";

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"claim", c.claim},
                   {"relation", c.relation},
                   {"bound", c.bound},
                   {"measured", c.measured},
                   {"pass", c.pass}});
  }
  return arr;
}

void check_le(Report& r, std::string claim, const Rational& measured, const Rational& bound) {
  r.checks.push_back({std::move(claim), "<=", exact(bound), exact(measured), measured <= bound});
}

void check_le(Report& r, std::string claim, const Rational& measured, double bound) {
  r.checks.push_back(
      {std::move(claim), "<=", bound, exact(measured), to_double(measured) <= bound});
}

// Options shared by every verb.
struct Globals {
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;
  std::string out;
  std::string format = "json";
};

Mapping named_map(const std::string& name, int n) {
  if (name.rfind('@', 0) == 0) return read_mapping_file(name.substr(1));
  if (n < 1) throw PreconditionError("--n is required for named maps");
  if (name == "identity") return embed_identity(n - 1);
  if (name == "parity") return embed_parity(n - 1);
  if (name == "recmaj") {
    int k = 0;
    while (RecMajContext::width(k) < n) ++k;
    if (RecMajContext::width(k) != n) throw PreconditionError("recmaj needs n = 3^k");
    return build_phi_recmaj(RecMajContext(k)).phi;
  }
  if (name == "tribes") {
    for (int w = 1; w <= 4; ++w) {
      const auto p = tribes_params(w);
      if (p.n == n) return build_phi_tribes(TribeCouplingSpec::make(p)).phi;
    }
    throw PreconditionError("no balanced tribes instance with n = " + std::to_string(n));
  }
  throw PreconditionError("unknown map '" + name + "'");
}

// Bijection from the half cube, reading a matching between {x_n = 0} and B
// in whichever direction it was produced.
Mapping half_cube_view(const Mapping& phi, const CubeSet& from) {
  const int n = from.n();
  if (from == make_set(SetKind::subcube0, n)) return to_half_cube(phi);
  std::vector<std::uint64_t> image(std::size_t{1} << (n - 1), 0);
  const auto dom = phi.domain_points();
  for (std::size_t i = 0; i < dom.size(); ++i) image[phi.image[i]] = dom[i];
  auto out = Mapping::on_half_cube(n - 1, n, std::move(image));
  out.bijective = true;
  return out;
}

void add_bridge(Report& r, const Mapping& phi, std::uint64_t budget) {
  if (phi.src_n < 1) return;
  const auto bridge = check_prop_bridge(phi, budget);
  r.results["bridge"] = {{"avg_stretch", exact(bridge.lhs)}, {"rhs", exact(bridge.rhs)}};
  check_le(r, "stretch_transport_bridge", bridge.lhs, bridge.rhs);
}

// ---------------------------------------------------------------------------
// verbs

void cmd_stretch(Report& r, const Globals& g, const std::string& map, int n,
                 std::uint64_t samples, bool transport_only) {
  const Mapping phi = named_map(map, n);
  r.results["map"] = map;
  r.results["src_n"] = phi.src_n;
  r.results["dst_n"] = phi.dst_n;
  if (transport_only) {
    const auto t = avg_transport(phi);
    r.results["avg_transport"] = exact(t);
    if (phi.domain_kind == DomainKind::half_cube && phi.bijective) {
      add_bridge(r, phi, g.budget.value_or(kExactStretchBudget));
    }
    return;
  }
  if (samples > 0) {
    const auto seed = derive_seed(g.seed, "stretch", 0);
    const auto rep = avg_stretch_mc(PointMap::from(phi), samples, seed);
    r.results["report"] = to_json(rep);
    return;
  }
  const auto rep = stretch_report_exact(phi, g.budget.value_or(kExactStretchBudget));
  r.results["report"] = to_json(rep);
  if (phi.bijective) {
    const Rational lhs = std::get<Rational>(rep.avg_stretch);
    const Rational rhs = 2 * std::get<Rational>(rep.avg_transport) + 1;
    check_le(r, "stretch_transport_bridge", lhs, rhs);
  }
}

void require_same_dim(const ResolvedSet& a, const ResolvedSet& b) {
  if (a.set.n() != b.set.n()) throw PreconditionError("sets live in different cubes");
  if (a.set.card() != b.set.card()) throw PreconditionError("sets differ in size");
}

json set_json(const ResolvedSet& s) {
  json j = {{"spec", s.description}, {"n", s.set.n()}, {"card", s.set.card()}};
  if (s.seed) j["seed"] = *s.seed;
  if (!s.file_digest.empty()) j["file_digest"] = s.file_digest;
  return j;
}

void cmd_stable_match(Report& r, const Globals& g, const ResolvedSet& a, const ResolvedSet& b,
                      const std::string& map_out) {
  require_same_dim(a, b);
  const int n = a.set.n();
  const auto phi = stable_match(a.set, b.set, g.budget.value_or(kStableMatchCap));
  const auto blocking = verify_stable(phi, a.set, b.set);
  const auto transport = avg_transport(phi);
  r.results["a"] = set_json(a);
  r.results["b"] = set_json(b);
  r.results["blocking_pairs"] = blocking.size();
  r.results["avg_transport"] = exact(transport);
  r.checks.push_back({"stable_match_no_blocking_pairs", "==", 0, blocking.size(), blocking.empty()});
  check_le(r, "stable_match_transport", transport, 2 * std::sqrt(n * std::log(n)));
  if (!map_out.empty()) write_mapping_file(map_out, phi);
}

void cmd_w1(Report& r, const Globals& g, const ResolvedSet& a, const ResolvedSet& b,
            const std::string& map_out) {
  require_same_dim(a, b);
  const int n = a.set.n();
  const auto res = w1_exact(a.set, b.set, g.budget.value_or(kAssignmentCap));
  r.results["a"] = set_json(a);
  r.results["b"] = set_json(b);
  r.results["w1"] = exact(res.cost);
  const double root = std::sqrt(2.0 * n);
  check_le(r, "w1_sqrt_2n_bound", res.cost, root);
  const CubeSet half = make_set(SetKind::subcube0, n);
  if ((a.set == half || b.set == half) && n >= 2) {
    const Mapping view = half_cube_view(res.phi, a.set);
    const auto stretch = avg_stretch_exact(view, g.budget.value_or(kExactStretchBudget));
    r.results["avg_stretch"] = exact(stretch);
    check_le(r, "w1_bijection_stretch", stretch, 2 * root + 1);
    if (!map_out.empty()) write_mapping_file(map_out, view);
  } else if (!map_out.empty()) {
    write_mapping_file(map_out, res.phi);
  }
}

void cmd_brute(Report& r, const ResolvedSet& a) {
  const auto res = min_avgstretch_brute(a.set);
  r.results["a"] = set_json(a);
  r.results["min_avg_stretch"] = exact(res.value);
  r.results["minimizer"] = res.phi.image;
}

void cmd_expansion(Report& r, const ResolvedSet& f, int k) {
  const int n = f.set.n();
  if (k < 0) k = static_cast<int>(std::ceil(std::sqrt(n * std::log(n))));
  const auto c = expansion_check(f.set, k);
  r.results["f"] = set_json(f);
  r.results["k"] = k;
  r.results["measured"] = exact(c.measured);
  r.results["bound_divided"] = c.bound_divided;
  r.results["bound_product"] = c.bound_product;
  r.results["holds_product"] = c.holds_product;
  check_le(r, "talagrand_expansion", c.measured, c.bound_divided);
}

void cmd_recmaj_verify(Report& r, const Globals& g, int k, bool exhaustive,
                       std::uint64_t samples) {
  const RecMajContext ctx(k);
  FkVerification v;
  if (exhaustive || samples == 0) {
    v = verify_fk(ctx);
  } else {
    v = verify_fk_sampled(ctx, samples, derive_seed(g.seed, "recmaj-verify", 0));
    r.results["seed"] = derive_seed(g.seed, "recmaj-verify", 0);
  }
  r.results["verification"] = to_json(v);
  r.checks.push_back({"fk_retraction_properties", "==", true, v.pass, v.pass});
  if (v.exhaustive && v.pass) {
    const auto drift = conditional_drift(ctx, false);
    Rational expected = 1;
    for (int j = 0; j < k; ++j) expected *= Rational(3, 2);
    r.results["conditional_drift"] = exact(drift.drift);
    r.checks.push_back(
        {"fk_conditional_drift", "==", exact(expected), exact(drift.drift), drift.drift == expected});
  }
}

void cmd_recmaj_build(Report& r, const Globals& g, int k, const std::string& map_out) {
  const auto built = build_phi_recmaj(RecMajContext(k));
  const auto stretch = avg_stretch_exact(built.phi, g.budget.value_or(kExactStretchBudget));
  r.results["k"] = k;
  r.results["cycles"] = built.cycles;
  r.results["parallel_pairs"] = built.parallel_pairs;
  r.results["avg_stretch"] = exact(stretch);
  r.results["avg_transport"] = exact(avg_transport(built.phi));
  check_le(r, "phi_recmaj_stretch", stretch, Rational(20));
  if (!map_out.empty()) write_mapping_file(map_out, built.phi);
}

void cmd_recmaj_stretch(Report& r, const Globals& g, int k, int coord, std::uint64_t samples,
                        bool force_exact) {
  const RecMajContext ctx(k);
  const bool use_exact = force_exact || (k <= 2 && samples == 0);
  if (samples == 0) samples = 100000;
  Rational power = 1;
  for (int j = 0; j < k; ++j) power *= Rational(3, 2);
  json list = json::array();
  const int first = coord > 0 ? coord : 1;
  const int last = coord > 0 ? coord : ctx.n();
  for (int i = first; i <= last; ++i) {
    const auto b = use_exact
                       ? fk_coordinate_stretch(ctx, i)
                       : fk_coordinate_stretch_sampled(
                             ctx, i, samples, derive_seed(g.seed, "recmaj-stretch",
                                                          static_cast<std::uint64_t>(i)));
    list.push_back(to_json(b));
    const std::string at = "[" + std::to_string(i) + "]";
    if (use_exact) {
      check_le(r, "fk_coordinate_stretch" + at, b.total(), Rational(10));
      r.checks.push_back({"fk_stretch_given_E1" + at, "==", exact(Rational(1)),
                          exact(b.conditional(1)), b.conditional(1) == 1});
      check_le(r, "fk_stretch_given_E2" + at, b.conditional(2), 2 * power);
      check_le(r, "fk_weighted_stretch_E4" + at, b.e4_weighted(), Rational(8));
    } else {
      const double total = to_double(b.total());
      r.checks.push_back({"fk_coordinate_stretch" + at, "<=", 10.0, total,
                          total - b.total_ci95() <= 10.0});
    }
  }
  r.results["k"] = k;
  r.results["breakdowns"] = list;
}

TribesParams tribes_from(int w, int s) { return s > 0 ? make_tribes_params(w, s) : tribes_params(w); }

json params_json(const TribesParams& p) {
  return {{"w", p.w}, {"s", p.s}, {"n", p.n}, {"delta", exact(p.delta)}};
}

void cmd_tribes_chain(Report& r, int w, int s, const std::string& map_out) {
  const auto spec = TribeCouplingSpec::make(tribes_from(w, s));
  const auto& p = spec.params;
  const auto chain = run_tribes_chain(spec);
  r.results["params"] = params_json(p);
  r.results["expected_L"] = exact(expected_L(p));
  r.results["l_denominator"] = "1 - (1 - 2^-w)^s";
  r.results["balance_condition"] = "1 - (1 - 2^-w)^s <= 1/2";
  r.results["costs"] = {{"q01", exact(chain.cost_q01)},
                        {"lifted", exact(chain.cost_lifted)},
                        {"projected", exact(chain.cost_projected)},
                        {"extended", exact(chain.cost_extended)}};
  r.results["astar_card"] = chain.astar.card();
  check_le(r, "tribes_q01_cost", chain.cost_q01, chain.q01_bound);
  r.checks.push_back({"tribes_lift_cost", "<", exact(chain.cost_q01), exact(chain.cost_lifted),
                      chain.lift_ok()});
  check_le(r, "tribes_project_cost", chain.cost_projected, chain.cost_lifted + 1);
  check_le(r, "tribes_extend_cost", chain.cost_extended,
           (1 - 2 * p.delta) * chain.cost_projected + 2 * p.delta * p.n);
  if (p.n <= kPhiTribesMaxN) {
    const auto phi = build_phi_tribes(chain);
    r.results["phi_transport"] = exact(phi.transport);
    check_le(r, "tribes_phi_transport", phi.transport, phi.chain_cost);
    if (phi.phi.src_n >= 1) {
      const auto stretch = avg_stretch_exact(phi.phi);
      r.results["phi_avg_stretch"] = exact(stretch);
      check_le(r, "stretch_transport_bridge", stretch, 2 * phi.transport + 1);
    }
    if (!map_out.empty()) write_mapping_file(map_out, phi.phi);
  }
}

void cmd_tribes_sample(Report& r, const Globals& g, int w, int s, std::uint64_t draws) {
  const auto spec = TribeCouplingSpec::make(tribes_from(w, s));
  const auto seed = derive_seed(g.seed, "tribes-sample", 0);
  const auto res = sample_tribes_coupling(spec, draws, seed);
  const Rational bound = Rational(spec.params.w) * expected_L(spec.params);
  r.results["params"] = params_json(spec.params);
  r.results["l_denominator"] = "1 - (1 - 2^-w)^s";
  r.results["balance_condition"] = "1 - (1 - 2^-w)^s <= 1/2";
  r.results["seed"] = seed;
  r.results["draws"] = draws;
  r.results["mean_cost"] = res.mean_cost;
  r.results["std_error"] = res.std_error;
  r.results["support_violations"] = res.support_violations;
  if (res.marginals_tested) {
    auto chi = [](const ChiSquare& c) {
      return json{{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
    };
    r.results["x_marginal"] = chi(res.x_marginal);
    r.results["y_marginal"] = chi(res.y_marginal);
  }
  r.checks.push_back({"tribes_sampler_support", "==", 0, res.support_violations,
                      res.support_violations == 0});
  r.checks.push_back({"tribes_q01_cost", "<=", exact(bound), res.mean_cost,
                      res.mean_cost - 3 * res.std_error <= to_double(bound)});
}

// ---------------------------------------------------------------------------
// sweep

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string csv_row(const std::string& kind, int n, const std::string& seed,
                    const std::string& metric, const std::string& value,
                    const std::string& bound, bool pass) {
  return kind + "," + std::to_string(n) + "," + seed + "," + metric + "," + value + "," + bound +
         "," + (pass ? "true" : "false");
}

void cmd_sweep(Report& r, const Globals& g, const std::string& task, const std::string& kinds_arg,
               int n_min, int n_max, int seeds) {
  r.csv = g.format == "csv";
  std::vector<std::string> kinds = split_list(kinds_arg);
  if (kinds.empty()) {
    kinds = task == "brute" ? std::vector<std::string>{"subcube0", "parity_even", "random_half",
                                                       "candidate_star"}
                            : std::vector<std::string>{"random_half"};
  }
  if (task != "stable-match" && task != "w1" && task != "brute") {
    throw PreconditionError("sweep task must be stable-match, w1 or brute");
  }
  json rows = json::array();
  for (const auto& kind_name : kinds) {
    const auto kind = parse_set_kind(kind_name);
    if (!kind) throw PreconditionError("unknown set kind '" + kind_name + "'");
    for (int n = n_min; n <= n_max; ++n) {
      const int cells = *kind == SetKind::random_half ? seeds : std::min(seeds, 1);
      for (int s = 0; s < cells; ++s) {
        const auto seed = derive_seed(g.seed, task + ":" + kind_name + ":" + std::to_string(n),
                                      static_cast<std::uint64_t>(s));
        const CubeSet a = make_set(*kind, n, seed);
        const std::string seed_col =
            *kind == SetKind::random_half ? std::to_string(seed) : std::string("-");
        std::string metric;
        std::string value;
        std::string bound = "-";
        bool pass = true;
        if (task == "brute") {
          metric = "min_avg_stretch";
          value = to_fraction_string(min_avgstretch_brute(a).value);
        } else {
          const CubeSet half = make_set(SetKind::subcube0, n);
          Rational v;
          double b = 0;
          if (task == "w1") {
            metric = "w1";
            v = w1_exact(half, a, g.budget.value_or(kAssignmentCap)).cost;
            b = std::sqrt(2.0 * n);
          } else {
            metric = "avg_transport";
            const auto phi = stable_match(a, half, g.budget.value_or(kStableMatchCap));
            pass = verify_stable(phi, a, half).empty();
            v = avg_transport(phi);
            b = 2 * std::sqrt(n * std::log(n));
          }
          value = to_fraction_string(v);
          bound = fmt_double(b);
          pass = pass && to_double(v) <= b;
        }
        r.csv_rows.push_back(csv_row(kind_name, n, seed_col, metric, value, bound, pass));
        rows.push_back({{"kind", kind_name},
                        {"n", n},
                        {"seed", seed_col},
                        {"metric", metric},
                        {"value", value},
                        {"bound", bound},
                        {"pass", pass}});
        if (!pass) {
          r.checks.push_back({task + "_sweep_cell", "<=", bound, value, false});
        }
      }
    }
  }
  r.results["rows"] = rows;
}

// ---------------------------------------------------------------------------

int exit_for(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const BudgetError*>(&e)) return kBudget;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const VerificationError*>(&e)) return kCheckFailed;
  if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
    return kUsage;
  }
  return kUsage;
}

}  // namespace

ResolvedSet parse_set_spec(std::string_view spec, std::uint64_t master_seed,
                           std::string_view role) {
  ResolvedSet r;
  if (!spec.empty() && spec.front() == '@') {
    const std::string path(spec.substr(1));
    const std::string bytes = read_file_bytes(path);
    std::istringstream in(bytes);
    r.set = read_set(in);
    r.description = std::string(spec);
    r.file_digest = hex64(fnv1a(bytes));
    return r;
  }
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2 || parts.size() > 3) {
    throw ParseError("set spec must be <kind>:<n>[:<seed>] or @<file>, got '" +
                     std::string(spec) + "'");
  }
  const auto kind = parse_set_kind(parts[0]);
  if (!kind) throw ParseError("unknown set kind '" + parts[0] + "'");
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ParseError("bad dimension '" + parts[1] + "'");
  }
  std::uint64_t seed = derive_seed(master_seed, role, 0);
  bool explicit_seed = false;
  if (parts.size() == 3) {
    std::string s = parts[2];
    if (s.rfind("seed", 0) == 0) s = s.substr(4);
    try {
      std::size_t used = 0;
      seed = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad seed '" + parts[2] + "'");
    }
    explicit_seed = true;
  }
  r.kind = kind;
  r.set = make_set(*kind, n, seed);
  r.description = parts[0] + ":" + parts[1];
  if (*kind == SetKind::random_half) {
    r.seed = seed;
    r.description += ":seed" + std::to_string(seed);
  } else if (explicit_seed) {
    r.description += ":seed" + std::to_string(seed);
  }
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Low average stretch bijections between H_{n-1} and density-1/2 sets of H_n"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Globals g;
  auto add_globals = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--seed", g.seed, "master seed");
    sub->add_option("--budget", g.budget, "enumeration / solver cap");
    if (with_out) sub->add_option("--out", g.out, "report path (default stdout)");
    sub->add_option("--format", g.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };
  add_globals(&app, true);

  std::string map = "identity";
  int n = 0;
  std::uint64_t samples = 0;
  std::string a_spec;
  std::string b_spec;
  std::string map_out;
  int k = 1;
  int coord = 0;
  bool exhaustive = false;
  bool force_exact = false;
  int w = 2;
  int s = 0;
  std::uint64_t draws = 100000;
  std::string task = "stable-match";
  std::string kinds;
  int n_min = 6;
  int n_max = 6;
  int seeds = 1;
  int radius = -1;

  auto* stretch = app.add_subcommand("stretch", "average stretch of a mapping");
  auto* transport = app.add_subcommand("transport", "average transportation distance");
  for (auto* sub : {stretch, transport}) {
    sub->add_option("--map", map, "identity | parity | recmaj | tribes | @file");
    sub->add_option("--n", n, "target cube dimension");
    add_globals(sub, true);
  }
  stretch->add_option("--samples", samples, "Monte-Carlo samples instead of enumeration");

  auto* stable = app.add_subcommand("stable-match", "deferred acceptance A -> B");
  auto* w1 = app.add_subcommand("w1", "exact W1 by optimal assignment");
  for (auto* sub : {stable, w1}) {
    sub->add_option("--a", a_spec, "set spec")->required();
    sub->add_option("--b", b_spec, "set spec")->required();
    sub->add_option("--map-out", map_out, "write the bijection");
    add_globals(sub, true);
  }

  auto* brute = app.add_subcommand("brute", "minimum average stretch by enumeration");
  brute->add_option("--a", a_spec, "set spec")->required();
  add_globals(brute, true);

  auto* expansion = app.add_subcommand("expansion", "density of points far from F");
  expansion->add_option("--f", a_spec, "set spec")->required();
  expansion->add_option("--k", radius, "distance (default ceil(sqrt(n ln n)))");
  add_globals(expansion, true);

  auto* recmaj = app.add_subcommand("recmaj", "recursive majority retraction");
  recmaj->require_subcommand(1);
  auto* rverify = recmaj->add_subcommand("verify", "check f_k");
  rverify->add_option("--k", k)->required();
  rverify->add_flag("--exhaustive", exhaustive);
  rverify->add_option("--samples", samples);
  add_globals(rverify, true);
  auto* rbuild = recmaj->add_subcommand("build", "build phi_recmaj");
  rbuild->add_option("--k", k)->required();
  rbuild->add_option("--out,--map-out", map_out, "mapping file");
  add_globals(rbuild, false);
  auto* rstretch = recmaj->add_subcommand("stretch", "per-coordinate stretch of f_k");
  rstretch->add_option("--k", k)->required();
  rstretch->add_option("--coord", coord, "single coordinate (default all)");
  rstretch->add_option("--samples", samples);
  rstretch->add_flag("--exact", force_exact, "enumerate even for k = 3");
  add_globals(rstretch, true);

  auto* tribes = app.add_subcommand("tribes", "tribes coupling chain");
  tribes->require_subcommand(1);
  auto* tchain = tribes->add_subcommand("chain", "materialize the coupling chain");
  auto* tsample = tribes->add_subcommand("sample", "draw from the sampler coupling");
  for (auto* sub : {tchain, tsample}) {
    sub->add_option("--w", w, "tribe width")->required();
    sub->add_option("--s", s, "tribe count (default: maximal balanced)");
    add_globals(sub, true);
  }
  tchain->add_flag("--explicit", "sparse form (the only materialized form)");
  tchain->add_option("--map-out", map_out, "write phi_tribes");
  tsample->add_option("--draws", draws);

  auto* sweep = app.add_subcommand("sweep", "grid of experiments as CSV");
  sweep->add_option("--task", task, "stable-match | w1 | brute");
  sweep->add_option("--kinds", kinds, "comma separated set kinds");
  sweep->add_option("--n-min", n_min);
  sweep->add_option("--n-max", n_max);
  sweep->add_option("--seeds", seeds);
  add_globals(sweep, true);

  std::vector<const char*> argv;
  argv.push_back("hcstretch");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (sweep->parsed() && !sweep->count("--format")) g.format = "csv";

  Report report;
  std::string command;
  for (const auto* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (const auto* inner : sub->get_subcommands()) command += " " + inner->get_name();
  }

  std::uint64_t digest = fnv1a(kVersion);
  for (const auto& a : args) digest = fnv1a(a + '\0', digest);

  try {
    if (stretch->parsed() || transport->parsed()) {
      if (map.rfind('@', 0) == 0) digest = fnv1a(read_file_bytes(map.substr(1)), digest);
      cmd_stretch(report, g, map, n, samples, transport->parsed());
    } else if (stable->parsed() || w1->parsed() || brute->parsed() || expansion->parsed()) {
      const auto a = parse_set_spec(a_spec, g.seed, "a");
      digest = fnv1a(a.file_digest, digest);
      if (brute->parsed()) {
        cmd_brute(report, a);
      } else if (expansion->parsed()) {
        cmd_expansion(report, a, radius);
      } else {
        const auto b = parse_set_spec(b_spec, g.seed, "b");
        digest = fnv1a(b.file_digest, digest);
        if (stable->parsed()) {
          cmd_stable_match(report, g, a, b, map_out);
        } else {
          cmd_w1(report, g, a, b, map_out);
        }
      }
    } else if (rverify->parsed()) {
      cmd_recmaj_verify(report, g, k, exhaustive, samples);
    } else if (rbuild->parsed()) {
      cmd_recmaj_build(report, g, k, map_out);
    } else if (rstretch->parsed()) {
      cmd_recmaj_stretch(report, g, k, coord, samples, force_exact);
    } else if (tchain->parsed()) {
      cmd_tribes_chain(report, w, s, map_out);
    } else if (tsample->parsed()) {
      cmd_tribes_sample(report, g, w, s, draws);
    } else if (sweep->parsed()) {
      cmd_sweep(report, g, task, kinds, n_min, n_max, seeds);
    }
  } catch (const std::exception& e) {
    return exit_for(e, err);
  }

  bool all_pass = true;
  for (const auto& c : report.checks) all_pass = all_pass && c.pass;

  std::string text;
  if (g.format == "csv") {
    std::ostringstream ss;
    if (sweep->parsed()) {
      ss << kCsvHeader << "\n";
      for (const auto& row : report.csv_rows) ss << row << "\n";
    } else {
      ss << "claim,relation,bound,measured,pass\n";
      for (const auto& c : report.checks) {
        auto cell = [](const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); };
        ss << c.claim << "," << c.relation << "," << cell(c.bound) << "," << cell(c.measured)
           << "," << (c.pass ? "true" : "false") << "\n";
      }
    }
    text = ss.str();
  } else {
    const auto elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    json doc;
    doc["command"] = command;
    doc["args"] = args;
    doc["inputs_digest"] = hex64(digest);
    doc["seed"] = g.seed;
    doc["results"] = report.results;
    doc["paper_check"] = checks_json(report.checks);
    doc["pass"] = all_pass;
    doc["version"] = kVersion;
    doc["timing"] = {{"wall_ms", elapsed}};
    text = doc.dump(2) + "\n";
  }

  if (g.out.empty()) {
    out << text;
  } else {
    std::ofstream file(g.out, std::ios::binary);
    if (!file || !(file << text)) {
      err << "error: cannot write '" << g.out << "'\n";
      return kIo;
    }
  }
  if (!all_pass) {
    err << "paper check failed\n";
    return kCheckFailed;
  }
  return kOk;
}

}  // namespace hcstretch::cli

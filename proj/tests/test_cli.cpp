#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hcstretch/cli.hpp"
#include "hcstretch/cube.hpp"
#include "hcstretch/errors.hpp"
#include "hcstretch/metrics.hpp"
#include "hcstretch/rng.hpp"

using namespace hcstretch;
using nlohmann::json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json report_of(const Outcome& o) { return json::parse(o.out); }

json without_timing(json j) {
  j.erase("timing");
  return j;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hcstretch_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool all_claims_pass(const json& j) {
  for (const auto& c : j.at("paper_check")) {
    if (!c.at("pass").get<bool>()) return false;
  }
  return true;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Cli, StretchIdentity) {
  const auto o = invoke({"stretch", "--map", "identity", "--n", "8"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto j = report_of(o);
  EXPECT_EQ(j["command"], "stretch");
  EXPECT_EQ(j["results"]["report"]["avg_stretch"], "1/1");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_TRUE(j.contains("inputs_digest"));
  EXPECT_TRUE(j.contains("version"));
  EXPECT_TRUE(j["timing"].contains("wall_ms"));
}

TEST(Cli, ParityTransport) {
  const auto o = invoke({"transport", "--map", "parity", "--n", "5"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  EXPECT_EQ(report_of(o)["results"]["avg_transport"], "1/2");
}

TEST(Cli, RecmajVerifyExhaustive) {
  const auto o = invoke({"recmaj", "verify", "--k", "2", "--exhaustive"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto j = report_of(o);
  EXPECT_EQ(j["command"], "recmaj verify");
  EXPECT_TRUE(all_claims_pass(j));
  EXPECT_FALSE(j["paper_check"].empty());
}

TEST(Cli, W1AgainstSqrtTwoN) {
  const auto o = invoke({"w1", "--a", "random_half:10:seed7", "--b", "subcube0:10"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto j = report_of(o);
  bool found = false;
  for (const auto& c : j["paper_check"]) {
    if (c["claim"] == "w1_sqrt_2n_bound") {
      found = true;
      EXPECT_TRUE(c["pass"].get<bool>());
      EXPECT_NEAR(c["bound"].get<double>(), std::sqrt(20.0), 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, ReportsAreReproducible) {
  const std::vector<std::string> args = {"stable-match", "--a", "random_half:8", "--b",
                                         "random_half:8:3", "--seed", "11"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  ASSERT_EQ(a.code, cli::kOk) << a.err;
  EXPECT_EQ(without_timing(report_of(a)).dump(), without_timing(report_of(b)).dump());
  const auto c = invoke({"stable-match", "--a", "random_half:8", "--b", "random_half:8:3",
                         "--seed", "12"});
  EXPECT_NE(report_of(a)["inputs_digest"], report_of(c)["inputs_digest"]);
  EXPECT_NE(report_of(a)["results"]["a"], report_of(c)["results"]["a"]);
}

TEST(Cli, SweepEmptyGridIsHeaderOnly) {
  const auto o = invoke({"sweep", "--task", "w1", "--n-min", "5", "--n-max", "4"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  EXPECT_EQ(o.out, "kind,n,seed,metric,value,bound,pass\n");
}

TEST(Cli, BruteSweepOverFourKinds) {
  const auto o = invoke({"sweep", "--task", "brute", "--kinds",
                         "subcube0,parity_even,random_half,candidate_star", "--n-min", "4",
                         "--n-max", "4", "--seeds", "1"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto rows = lines_of(o.out);
  ASSERT_EQ(rows.size(), 5U);
  EXPECT_EQ(rows[1], "subcube0,4,-,min_avg_stretch,1/1,-,true");
  EXPECT_EQ(rows[2], "parity_even,4,-,min_avg_stretch,2/1,-,true");
  EXPECT_EQ(rows[3].rfind("random_half,4,", 0), 0U);
  EXPECT_EQ(rows[4].rfind("candidate_star,4,-,", 0), 0U);
}

TEST(Cli, StableMatchSweepStaysUnderBound) {
  const auto o = invoke({"sweep", "--task", "stable-match", "--n-min", "6", "--n-max", "8",
                         "--seeds", "3"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto rows = lines_of(o.out);
  ASSERT_EQ(rows.size(), 1U + 9U);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NE(rows[i].find(",avg_transport,"), std::string::npos);
    EXPECT_EQ(rows[i].substr(rows[i].size() - 5), ",true");
  }
  EXPECT_EQ(invoke({"sweep", "--task", "stable-match", "--n-min", "6", "--n-max", "8",
                    "--seeds", "3"})
                .out,
            o.out);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({}).code, cli::kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"w1", "--a", "nonsense:4", "--b", "subcube0:4"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"w1", "--a", "subcube0:4:x", "--b", "subcube0:4"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"stretch", "--map", "recmaj", "--n", "8"}).code, cli::kUsage);
  EXPECT_EQ(invoke({"brute", "--a", "subcube0:6"}).code, cli::kBudget);
  EXPECT_EQ(invoke({"w1", "--a", "subcube0:13", "--b", "parity_even:13"}).code, cli::kBudget);
  EXPECT_EQ(invoke({"w1", "--a", "@/nonexistent/a.txt", "--b", "subcube0:4"}).code, cli::kIo);
  EXPECT_EQ(invoke({"stretch", "--map", "identity", "--n", "4", "--out",
                    "/nonexistent/dir/report.json"})
                .code,
            cli::kIo);
  EXPECT_EQ(invoke({"stretch", "--map", "@/nonexistent/map.txt"}).code, cli::kIo);
}

TEST(Cli, FailingCheckGivesExitFour) {
  // The sqrt(2n) bound is for density-1/2 sets; two antipodal points break it.
  const auto a = scratch("origin.txt");
  const auto b = scratch("antipode.txt");
  {
    std::ofstream f(a);
    write_set(f, CubeSet::from_indices(3, {0}));
    std::ofstream g(b);
    write_set(g, CubeSet::from_indices(3, {7}));
  }
  const auto o = invoke({"w1", "--a", "@" + a.string(), "--b", "@" + b.string()});
  EXPECT_EQ(o.code, cli::kCheckFailed) << o.err;
  const auto j = report_of(o);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_EQ(j["results"]["w1"], "3/1");
  EXPECT_FALSE(all_claims_pass(j));
}

TEST(Cli, SetFileInputsAreDigested) {
  const auto path = scratch("set.txt");
  {
    std::ofstream f(path);
    write_set(f, make_set(SetKind::random_half, 6, 4));
  }
  const auto o = invoke({"w1", "--a", "@" + path.string(), "--b", "subcube0:6"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto d1 = report_of(o)["inputs_digest"];
  {
    std::ofstream f(path);
    write_set(f, make_set(SetKind::random_half, 6, 5));
  }
  const auto o2 = invoke({"w1", "--a", "@" + path.string(), "--b", "subcube0:6"});
  EXPECT_NE(report_of(o2)["inputs_digest"], d1);
}

TEST(Cli, MapOutRoundTripsThroughStretch) {
  const auto path = scratch("phi.txt");
  const auto o = invoke({"w1", "--a", "subcube0:6", "--b", "random_half:6:2", "--map-out",
                         path.string()});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto phi = read_mapping_file(path.string());
  EXPECT_EQ(phi.src_n, 5);
  const auto s = invoke({"stretch", "--map", "@" + path.string()});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  EXPECT_EQ(report_of(s)["results"]["report"]["avg_stretch"],
            to_fraction_string(avg_stretch_exact(phi)));
}

TEST(Cli, RecmajBuildAndStretch) {
  const auto path = scratch("phi_recmaj.txt");
  const auto b = invoke({"recmaj", "build", "--k", "2", "--out", path.string()});
  ASSERT_EQ(b.code, cli::kOk) << b.err;
  EXPECT_EQ(report_of(b)["results"]["avg_stretch"], "57/32");
  EXPECT_TRUE(std::filesystem::exists(path));
  const auto s = invoke({"recmaj", "stretch", "--k", "1"});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  EXPECT_EQ(report_of(s)["results"]["breakdowns"].size(), 3U);
}

TEST(Cli, TribesChainAndSample) {
  const auto c = invoke({"tribes", "chain", "--w", "2", "--explicit"});
  ASSERT_EQ(c.code, cli::kOk) << c.err;
  const auto j = report_of(c);
  EXPECT_EQ(j["results"]["costs"]["q01"], "32/21");
  EXPECT_EQ(j["results"]["expected_L"], "8/7");
  EXPECT_TRUE(all_claims_pass(j));
  const auto s = invoke({"tribes", "sample", "--w", "2", "--draws", "20000", "--seed", "4"});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  EXPECT_EQ(report_of(s)["results"]["support_violations"], 0);
}

TEST(Cli, CsvChecksForOrdinaryCommands) {
  const auto o = invoke({"stretch", "--map", "parity", "--n", "4", "--format", "csv"});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  const auto rows = lines_of(o.out);
  ASSERT_GE(rows.size(), 2U);
  EXPECT_EQ(rows[0], "claim,relation,bound,measured,pass");
}

TEST(ParseSetSpec, GrammarAndSeeds) {
  const auto a = cli::parse_set_spec("random_half:6:seed7", 0, "a");
  EXPECT_EQ(a.set, make_set(SetKind::random_half, 6, 7));
  EXPECT_EQ(a.description, "random_half:6:seed7");
  EXPECT_EQ(cli::parse_set_spec("random_half:6:7", 0, "a").set, a.set);
  const auto d = cli::parse_set_spec("random_half:6", 9, "a");
  EXPECT_EQ(d.seed, derive_seed(9, "a", 0));
  EXPECT_NE(cli::parse_set_spec("random_half:6", 9, "b").set, d.set);
  EXPECT_EQ(cli::parse_set_spec("parity_even:5", 0, "a").description, "parity_even:5");
  EXPECT_THROW(cli::parse_set_spec("parity_even", 0, "a"), ParseError);
  EXPECT_THROW(cli::parse_set_spec("parity_even:5:1:2", 0, "a"), ParseError);
  EXPECT_THROW(cli::parse_set_spec("@/nonexistent", 0, "a"), IoError);
}

#ifdef HCSTRETCH_TOOL
TEST(Cli, ExecutableExitCodes) {
  const std::string tool = HCSTRETCH_TOOL;
  auto status = [&](const std::string& args) {
    const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("stretch --map identity --n 8"), 0);
  EXPECT_EQ(status("--bogus"), 2);
  EXPECT_EQ(status("brute --a subcube0:6"), 3);
  EXPECT_EQ(status("w1 --a @/nonexistent --b subcube0:4"), 5);
}
#endif

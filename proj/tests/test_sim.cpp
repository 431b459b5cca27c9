#include "doctest.h"
#include "oracles.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <fstream>
#include <sstream>

#include "cj/error.hpp"
#include "cj/sim.hpp"

using namespace cj;
using namespace cj::sim;

namespace fs = std::filesystem;

namespace {

TargetPopulation Fixture() { return {{71, 48, 36, 77, 37}, 5.0, 0}; }

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected throw");
  return ErrorCode::kInvalidArgument;
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::path(CJ_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("domination probability") {
  TargetPopulation pop{{71, 48, 60, 60, 1e6}, 5.0, 0};
  CHECK(TargetDominationProb(pop, 2, 3) == 0.5);
  CHECK(TargetDominationProb(pop, 4, 0) == 1.0);
  const double m = 23.0 / std::sqrt(50.0);
  CHECK(m == doctest::Approx(3.2526911934581184).epsilon(1e-14));
  const double oracle = 0.5 * (1 + oracle::ErfSeries(m / std::sqrt(2.0)));
  CHECK(TargetDominationProb(pop, 0, 1) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(TargetDominationProb(pop, 0, 1) == doctest::Approx(0.9994284117013217).epsilon(1e-12));
  CHECK(TargetDominationProb(pop, 1, 0) == doctest::Approx(1 - oracle).epsilon(1e-9));
  CHECK_THROWS_AS(TargetDominationProb(pop, 1, 1), Error);
}

TEST_CASE("target rank distributions") {
  const auto one = TargetRankDistributions({{50}, 5.0, 0});
  CHECK(one[0].probs == std::vector<double>{1.0});
  const auto two = TargetRankDistributions({{50, 50}, 5.0, 0});
  CHECK(two[0].probs[0] == doctest::Approx(0.5));
  CHECK(two[1].probs[1] == doctest::Approx(0.5));

  const auto t = TargetRankDistributions(Fixture());
  const double expected[5] = {1.8025, 3.1041, 4.5114, 1.1981, 4.3839};
  for (int i = 0; i < 5; ++i) CHECK(t[i].expected_rank == doctest::Approx(expected[i]).epsilon(1e-4));
  CHECK(TargetRanks(t) == std::vector<int>{2, 3, 5, 1, 4});

  // brute-force enumeration over erf probabilities
  std::vector<std::vector<double>> dense(5, std::vector<double>(5, 0.0));
  for (ItemId i = 0; i < 5; ++i)
    for (ItemId j = 0; j < 5; ++j)
      if (i != j) dense[i][j] = 0.5 * (1 + oracle::ErfSeries((Fixture().means[i] - Fixture().means[j]) / 10.0));
  for (ItemId i = 0; i < 5; ++i) {
    const auto brute = oracle::RankDistributionBruteForce(dense, i);
    for (int a = 0; a < 5; ++a) CHECK(std::fabs(t[i].probs[a] - brute[a]) < 1e-9);
  }
}

TEST_CASE("sampled populations") {
  const auto a = SampleTargetPopulation(20, 3);
  const auto b = SampleTargetPopulation(20, 3);
  CHECK(a.means == b.means);
  for (double m : a.means) CHECK((m >= 30.0 && m < 90.0));
  CHECK_FALSE(SampleTargetPopulation(20, 4).means == a.means);
  CHECK_THROWS_AS(SampleTargetPopulation(3, 0, 0.0), Error);
}

TEST_CASE("simulated duels") {
  TargetPopulation pop{{71, 48, 60, 60}, 5.0, 0};
  Rng rng(8);
  int wins = 0;
  for (int t = 0; t < 100000; ++t) wins += SimulateDuel(pop, 0, 1, rng) == 0;
  CHECK(std::fabs(wins / 100000.0 - 0.9994) <= 0.001);
  wins = 0;
  for (int t = 0; t < 10000; ++t) wins += SimulateDuel(pop, 2, 3, rng) == 2;
  CHECK(std::fabs(wins / 10000.0 - 0.5) <= 0.02);
  TargetPopulation sharp{{2, 1}, 1e-9, 0};
  for (int t = 0; t < 1000; ++t) CHECK(SimulateDuel(sharp, 0, 1, rng) == 0);
}

TEST_CASE("method labels") {
  CHECK(AllMethods().size() == 6);
  for (const Method& m : AllMethods()) CHECK(ParseMethod(MethodLabel(m)) == m);
  CHECK(MethodLabel({RankModel::kBcj, SelectorKind::kNrp}) == "BCJ-NR");
  CHECK(CodeOf([] { ParseMethod("BCJ-X"); }) == ErrorCode::kConfig);
}

TEST_CASE("entropy-driven judging ranks the two strongest items first") {
  const auto pop = Fixture();
  const auto targets = TargetRankDistributions(pop);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunTrace trace = RunMethod(pop, targets, {RankModel::kBcj, SelectorKind::kEntropy}, 50,
                                     {seed, seed + 1000});
    CHECK(trace.tau.size() == 50);
    CHECK(trace.worst_jsd.size() == 50);
    ok += trace.final_ranks[3] <= 2 && trace.final_ranks[0] <= 2;
  }
  CHECK(ok >= 18);
}

TEST_CASE("BTM traces carry no JSD") {
  const auto pop = Fixture();
  const RunTrace trace = RunMethod(pop, TargetRankDistributions(pop),
                                   {RankModel::kBtm, SelectorKind::kNrp}, 20, {1, 2});
  CHECK(trace.tau.size() == 20);
  CHECK(trace.worst_jsd.empty());
  CHECK(trace.final_ranks.size() == 5);
}

TEST_CASE("cells are deterministic and paired") {
  ExperimentConfig config;
  config.n_values = {5};
  config.k_values = {4};
  config.repeats = 3;
  config.seed = 12;
  const CellResult a = RunCell(config, 5, 4);
  config.jobs = 3;
  const CellResult b = RunCell(config, 5, 4);
  REQUIRE(a.traces.size() == 6);
  for (std::size_t m = 0; m < 6; ++m) {
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(a.traces[m][r].tau == b.traces[m][r].tau);
      CHECK(a.traces[m][r].pairs == b.traces[m][r].pairs);
    }
  }
  // same selector and duel streams: BTM-NR and BCJ-NR judge the same pairs
  for (std::size_t r = 0; r < 3; ++r) CHECK(a.traces[1][r].pairs == a.traces[4][r].pairs);
}

TEST_CASE("more judgements per item improve the ranking") {
  ExperimentConfig config;
  config.n_values = {10};
  config.k_values = {5, 30};
  config.repeats = 15;
  config.methods = {{RankModel::kBcj, SelectorKind::kEntropy}};
  config.seed = 3;
  const auto cells = RunExperiment(config);
  REQUIRE(cells.size() == 2);
  std::vector<double> k5;
  std::vector<double> k30;
  for (const auto& t : cells[0].traces[0]) k5.push_back(t.tau.back());
  for (const auto& t : cells[1].traces[0]) k30.push_back(t.tau.back());
  CHECK(Median(k30) <= Median(k5));
}

TEST_CASE("summaries and analysis") {
  const std::vector<std::string> labels{"A", "B"};
  const std::vector<std::vector<double>> same{{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}};
  const CellSummary s = SummarizeCell(5, 10, labels, same, {{}, {}});
  CHECK(s.methods[0].median_tau == doctest::Approx(0.2));
  CHECK(s.methods[0].v_count == 0);
  CHECK(s.methods[1].v_count == 0);
  CHECK_FALSE(s.methods[0].median_worst_jsd.has_value());

  ExperimentConfig config;
  config.n_values = {5};
  config.k_values = {10, 20};
  CHECK(CodeOf([&] { AnalyzeExperiment(config, {s}); }) == ErrorCode::kMissingCell);
  config.k_values = {10};
  CHECK(AnalyzeExperiment(config, {s}).size() == 1);
  CHECK(SummaryCsv({s}) == std::string(kSummaryHeader) + "5,10,A,0.2,0\n5,10,B,0.2,0\n");
  CHECK(Median({3, 1, 2, 10}) == 2.5);
}

TEST_CASE("config validation") {
  CHECK(CodeOf([] { ConfigFromJson(nlohmann::json::parse(R"({"k":[0]})")); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(nlohmann::json::parse(R"({"n":[1]})")); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(nlohmann::json::parse(R"({"repeats":0})")); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(nlohmann::json::parse(R"({"colour":1})")); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(nlohmann::json::parse(R"({"methods":["BCJ-Q"]})")); }) == ErrorCode::kConfig);
  try {
    ConfigFromJson(nlohmann::json::parse(R"({"k":[5,0]})"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("k:") != std::string::npos);
  }
  const ExperimentConfig c = ConfigFromJson(nlohmann::json::parse(R"({"n":[5],"k":[10],"repeats":2,"seed":7})"));
  CHECK(c.n_values == std::vector<std::size_t>{5});
  CHECK(c.repeats == 2);
  const ExperimentConfig round = ConfigFromJson(ToJson(c));
  CHECK(ToJson(round) == ToJson(c));

  const ExperimentConfig defaults;
  CHECK(defaults.n_values.size() * defaults.k_values.size() == 20);
}

TEST_CASE("experiment directory output") {
  const fs::path dir = TempDir("sim_out");
  ExperimentConfig config;
  config.n_values = {5};
  config.k_values = {10};
  config.repeats = 1;
  config.seed = 7;
  RunExperimentToDirectory(config, dir, false);

  const auto steps = Lines(Slurp(dir / "steps.csv"));
  REQUIRE(steps.size() == 1 + 6 * 50);
  CHECK(steps[0] + "\n" == kStepsHeader);
  std::map<std::string, int> rows;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    const std::string method = steps[i].substr(0, steps[i].find(','));
    ++rows[method];
    int commas = 0;
    for (char ch : steps[i]) commas += ch == ',';
    CHECK(commas == 6);
  }
  for (const auto& [method, count] : rows) CHECK(count == 50);
  CHECK(rows.size() == 6);

  const auto summary = Lines(Slurp(dir / "summary.csv"));
  CHECK(summary.size() == 7);
  CHECK(summary[0] + "\n" == kSummaryHeader);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "jsd_summary.csv"));

  const std::string first = Slurp(dir / "steps.csv");
  const fs::path again = TempDir("sim_out_again");
  RunExperimentToDirectory(config, again, false);
  CHECK(Slurp(again / "steps.csv") == first);
  CHECK(Slurp(again / "summary.csv") == Slurp(dir / "summary.csv"));

  // resuming a finished run reproduces it; a different config is refused
  RunExperimentToDirectory(config, dir, true);
  CHECK(Slurp(dir / "steps.csv") == first);
  config.seed = 8;
  CHECK(CodeOf([&] { RunExperimentToDirectory(config, dir, true); }) == ErrorCode::kConfig);
}

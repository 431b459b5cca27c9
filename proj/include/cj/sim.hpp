#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "cj/btm.hpp"
#include "cj/metrics.hpp"
#include "cj/random.hpp"
#include "cj/rank_distribution.hpp"
#include "cj/selectors.hpp"

namespace cj::sim {

// Normal score densities for N synthetic items.
struct TargetPopulation {
  std::vector<double> means;
  double sigma = 5.0;
  std::uint64_t seed = 0;
};

// Means drawn uniformly from [low, high).
TargetPopulation SampleTargetPopulation(std::size_t n_items, std::uint64_t seed,
                                        double sigma = 5.0, double low = 30.0,
                                        double high = 90.0);

// P(i > j) = (1 + erf(m / sqrt 2)) / 2, m = (mu_i - mu_j) / sqrt(2 sigma^2).
double TargetDominationProb(const TargetPopulation& pop, ItemId i, ItemId j);
WinProbabilities TargetWinProbabilities(const TargetPopulation& pop);

// Ground-truth rank distributions. Exact for any N unless `options` says
// otherwise.
std::vector<RankDistribution> TargetRankDistributions(
    const TargetPopulation& pop, const RankOptions& options = {SIZE_MAX, 0, 0});

// Target ranking: ascending target expected rank.
std::vector<int> TargetRanks(const std::vector<RankDistribution>& targets);

// Draws one score per item; the larger draw wins.
ItemId SimulateDuel(const TargetPopulation& pop, ItemId i, ItemId j, Rng& rng);

enum class RankModel { kBtm, kBcj };

struct Method {
  RankModel model;
  SelectorKind selector;

  bool operator==(const Method&) const = default;
};

// "BTM-R", "BTM-NR", "BTM-E", "BCJ-R", "BCJ-NR", "BCJ-E".
std::string MethodLabel(const Method& method);
Method ParseMethod(const std::string& label);
std::vector<Method> AllMethods();

struct ExperimentConfig {
  std::vector<std::size_t> n_values{5, 10, 15, 20, 25};
  std::vector<std::size_t> k_values{5, 10, 20, 30};
  std::size_t repeats = 50;
  std::vector<Method> methods = AllMethods();
  std::uint64_t seed = 0;
  double sigma = 5.0;
  int jobs = 1;
};

void ValidateConfig(const ExperimentConfig& config);
nlohmann::json ToJson(const ExperimentConfig& config);
// Field-level validation; errors name the offending field.
ExperimentConfig ConfigFromJson(const nlohmann::json& json);

// One method, one repeat.
struct RunTrace {
  std::vector<double> tau;        // after each judgement
  std::vector<double> worst_jsd;  // BCJ only
  std::vector<double> max_entropy;
  std::vector<Pair> pairs;
  std::vector<int> final_ranks;
};

struct RunSeeds {
  std::uint64_t selector;
  std::uint64_t duels;
};

RunTrace RunMethod(const TargetPopulation& pop,
                   const std::vector<RankDistribution>& targets, const Method& method,
                   std::size_t budget, const RunSeeds& seeds);

struct CellResult {
  std::size_t n = 0;
  std::size_t k = 0;
  // traces[method][repeat]
  std::vector<std::vector<RunTrace>> traces;
};

// All repeats of one (N, K) cell. Within a repeat every method sees the same
// population and seeds.
CellResult RunCell(const ExperimentConfig& config, std::size_t n, std::size_t k);

std::vector<CellResult> RunExperiment(const ExperimentConfig& config);

struct MethodSummary {
  std::string method;
  double median_tau = 0.0;
  std::optional<double> median_worst_jsd;
  int v_count = 0;
};

struct CellSummary {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<MethodSummary> methods;
};

// Final-state summaries of one cell: per-method medians and beat counts.
// `final_tau[m]` / `final_jsd[m]` hold one value per repeat.
CellSummary SummarizeCell(std::size_t n, std::size_t k,
                          const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& final_tau,
                          const std::vector<std::vector<double>>& final_jsd);
CellSummary SummarizeCell(const ExperimentConfig& config, const CellResult& cell);

// Throws kMissingCell unless every (N, K) of the config is present.
std::vector<CellSummary> AnalyzeExperiment(const ExperimentConfig& config,
                                           const std::vector<CellSummary>& cells);

double Median(std::vector<double> values);

std::string FormatDouble(double value);
// Steps CSV rows (no header) for one cell.
std::string StepsCsv(const ExperimentConfig& config, const CellResult& cell);
inline constexpr const char* kStepsHeader =
    "method,n,k,repeat,step,tau_distance,worst_jsd\n";
inline constexpr const char* kSummaryHeader = "n,k,method,median_tau,v_count\n";
std::string SummaryCsv(const std::vector<CellSummary>& cells);
std::string JsdSummaryCsv(const std::vector<CellSummary>& cells);

// Runs the grid into `out_dir` (steps.csv, summary.csv, jsd_summary.csv,
// manifest.json, cells/). With `resume`, cells already recorded in a manifest
// for the same config are reused.
void RunExperimentToDirectory(const ExperimentConfig& config,
                              const std::filesystem::path& out_dir, bool resume);

}  // namespace cj::sim

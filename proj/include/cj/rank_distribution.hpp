#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "cj/preference.hpp"

namespace cj {

enum class RankMethod { kExact, kMonteCarlo };

// Distribution over the ranks 1..N of one item. probs[a - 1] = P(rank == a).
struct RankDistribution {
  ItemId item = 0;
  std::vector<double> probs;
  double expected_rank = 0.0;
  RankMethod method = RankMethod::kExact;
  std::optional<double> mc_std_error;
};

inline constexpr std::size_t kDefaultExactThreshold = 12;
inline constexpr std::uint64_t kDefaultMonteCarloSamples = 10000;

struct RankOptions {
  // Largest N handled by exact computation; larger sets use Monte Carlo.
  std::size_t exact_threshold = kDefaultExactThreshold;
  std::uint64_t mc_samples = kDefaultMonteCarloSamples;
  std::uint64_t seed = 0;
};

// Throws kMustUseMonteCarlo when N exceeds `exact_threshold`.
RankDistribution RankDistributionExact(const WinProbabilities& probs, ItemId item,
                                       std::size_t exact_threshold = kDefaultExactThreshold);
RankDistribution RankDistributionExact(const PreferenceMatrix& matrix, ItemId item,
                                       std::size_t exact_threshold = kDefaultExactThreshold);

RankDistribution RankDistributionMonteCarlo(const WinProbabilities& probs, ItemId item,
                                            std::uint64_t samples, std::uint64_t seed);
RankDistribution RankDistributionMonteCarlo(const PreferenceMatrix& matrix, ItemId item,
                                            std::uint64_t samples, std::uint64_t seed);

// Distributions for every item, exact or Monte Carlo according to `options`.
std::vector<RankDistribution> RankDistributions(const WinProbabilities& probs,
                                                const RankOptions& options = {});
std::vector<RankDistribution> RankDistributions(const PreferenceMatrix& matrix,
                                                const RankOptions& options = {});

// Converts scores into ranks: the item with the smallest key gets rank 1, ties
// go to the smaller item id. Returns ranks[item] in 1..N.
std::vector<int> RanksAscending(std::span<const double> keys);

std::vector<double> ExpectedRanks(std::span<const RankDistribution> dists);

// Final ranking by ascending expected rank.
std::vector<int> RankAll(const PreferenceMatrix& matrix, const RankOptions& options = {});

double ExpectedRankOf(std::span<const double> probs);

nlohmann::json ToJson(const RankDistribution& dist);

}  // namespace cj

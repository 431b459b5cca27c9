#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cj/rank_distribution.hpp"

namespace cj {

// Fraction of item pairs ordered differently by two rank vectors
// (ranks[item] in 1..N). O(N log N) via merge-sort inversion counting.
double KendallTauDistance(std::span<const int> rank_a, std::span<const int> rank_b);

// Number of discordant pairs.
std::uint64_t DiscordantPairs(std::span<const int> rank_a, std::span<const int> rank_b);

// Jensen-Shannon divergence in bits, in [0, 1]. 0 log 0 = 0.
double JensenShannon(std::span<const double> p, std::span<const double> q);

// Largest per-item JSD between estimated and target rank distributions,
// matched by item id.
double WorstJsd(std::span<const RankDistribution> estimates,
                std::span<const RankDistribution> targets);

enum class Alternative {
  kGreater,  // x tends to exceed y
  kLess,
  kTwoSided,
};

struct RankSumOptions {
  // Exact null distribution when both samples are smaller than this,
  // tie-corrected normal approximation (with continuity correction) otherwise.
  std::size_t exact_below = 20;
  bool continuity = true;
};

// Wilcoxon rank-sum p-value with midranks for ties.
double RankSumPValue(std::span<const double> x, std::span<const double> y,
                     Alternative alternative, const RankSumOptions& options = {});

struct MethodResult {
  std::string method;
  std::vector<double> values;  // per-repeat final tau distance (lower is better)
};

struct BeatCountOptions {
  double alpha = 0.05;
  // Bonferroni divisor; 0 means (number of methods - 1).
  std::size_t comparisons = 0;
  RankSumOptions rank_sum;
};

// V(i): number of other methods j for which a one-sided rank-sum test finds
// method i significantly worse (larger values) than j at alpha / m.
std::vector<int> BeatCount(std::span<const MethodResult> results,
                           const BeatCountOptions& options = {});

}  // namespace cj

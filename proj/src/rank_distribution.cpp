#include "cj/rank_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cj/error.hpp"
#include "cj/kernels.hpp"

namespace cj {

double ExpectedRankOf(std::span<const double> probs) {
  double e = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) e += static_cast<double>(a + 1) * probs[a];
  return e;
}

RankDistribution RankDistributionExact(const WinProbabilities& probs, ItemId item,
                                       std::size_t exact_threshold) {
  if (probs.size() > exact_threshold) {
    throw Error(ErrorCode::kMustUseMonteCarlo,
                "N=" + std::to_string(probs.size()) +
                    " exceeds the exact threshold " + std::to_string(exact_threshold) +
                    "; use Monte Carlo");
  }
  RankDistribution dist;
  dist.item = item;
  dist.method = RankMethod::kExact;
  dist.probs.resize(probs.size());
  kernels::ExactRankProbabilities(probs, item, dist.probs);
  dist.expected_rank = ExpectedRankOf(dist.probs);
  return dist;
}

RankDistribution RankDistributionExact(const PreferenceMatrix& matrix, ItemId item,
                                       std::size_t exact_threshold) {
  return RankDistributionExact(kernels::WinProbabilitiesParallel(matrix), item,
                               exact_threshold);
}

namespace {

RankDistribution FromTally(const kernels::RankTally& tally, ItemId item,
                           std::uint64_t samples) {
  RankDistribution dist;
  dist.item = item;
  dist.method = RankMethod::kMonteCarlo;
  const double r = static_cast<double>(samples);
  dist.probs.resize(tally.histogram.size());
  for (std::size_t a = 0; a < dist.probs.size(); ++a) {
    dist.probs[a] = static_cast<double>(tally.histogram[a]) / r;
  }
  const double mean = static_cast<double>(tally.sum) / r;
  dist.expected_rank = mean;
  double sd = 0.0;
  if (samples > 1) {
    const double var = (static_cast<double>(tally.sum_sq) - r * mean * mean) / (r - 1.0);
    sd = std::sqrt(std::max(0.0, var));
  }
  dist.mc_std_error = sd / std::sqrt(r);
  return dist;
}

}  // namespace

RankDistribution RankDistributionMonteCarlo(const WinProbabilities& probs, ItemId item,
                                            std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs at least one sample");
  }
  return FromTally(kernels::MonteCarloRanksParallel(probs, item, samples, seed), item,
                   samples);
}

RankDistribution RankDistributionMonteCarlo(const PreferenceMatrix& matrix, ItemId item,
                                            std::uint64_t samples, std::uint64_t seed) {
  return RankDistributionMonteCarlo(kernels::WinProbabilitiesParallel(matrix), item,
                                    samples, seed);
}

std::vector<RankDistribution> RankDistributions(const WinProbabilities& probs,
                                                const RankOptions& options) {
  const std::size_t n = probs.size();
  std::vector<RankDistribution> out(n);
  if (n <= options.exact_threshold) {
    const std::vector<double> all = kernels::AllExactRankProbabilitiesParallel(probs);
    for (std::size_t i = 0; i < n; ++i) {
      RankDistribution& d = out[i];
      d.item = i;
      d.method = RankMethod::kExact;
      d.probs.assign(all.begin() + static_cast<std::ptrdiff_t>(i * n),
                     all.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
      d.expected_rank = ExpectedRankOf(d.probs);
    }
    return out;
  }
  if (options.mc_samples == 0) {
    throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs at least one sample");
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = FromTally(
        kernels::MonteCarloRanksParallel(probs, i, options.mc_samples, options.seed), i,
        options.mc_samples);
  }
  return out;
}

std::vector<RankDistribution> RankDistributions(const PreferenceMatrix& matrix,
                                                const RankOptions& options) {
  return RankDistributions(kernels::WinProbabilitiesParallel(matrix), options);
}

std::vector<int> RanksAscending(std::span<const double> keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<int> ranks(keys.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ranks[order[pos]] = static_cast<int>(pos + 1);
  }
  return ranks;
}

std::vector<double> ExpectedRanks(std::span<const RankDistribution> dists) {
  std::vector<double> out;
  out.reserve(dists.size());
  for (const auto& d : dists) out.push_back(d.expected_rank);
  return out;
}

std::vector<int> RankAll(const PreferenceMatrix& matrix, const RankOptions& options) {
  const auto dists = RankDistributions(matrix, options);
  return RanksAscending(ExpectedRanks(dists));
}

nlohmann::json ToJson(const RankDistribution& dist) {
  nlohmann::json j = {{"item", dist.item},
                      {"probs", dist.probs},
                      {"expected_rank", dist.expected_rank},
                      {"method", dist.method == RankMethod::kExact ? "exact" : "monte-carlo"}};
  if (dist.mc_std_error) j["mc_std_error"] = *dist.mc_std_error;
  return j;
}

}  // namespace cj

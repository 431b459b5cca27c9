#pragma once

// Data-parallel kernels behind the core operations. Every kernel has a serial
// reference and an OpenMP variant; the two produce bitwise-identical output
// (tests assert this), so the parallel path is free to be the default.

#include <cstdint>
#include <span>
#include <vector>

#include "cj/preference.hpp"

namespace cj::kernels {

// P(i > j) for every ordered pair.
WinProbabilities WinProbabilitiesSerial(const PreferenceMatrix& matrix);
WinProbabilities WinProbabilitiesParallel(const PreferenceMatrix& matrix);

// Beta entropy of every cell, indexed like PreferenceMatrix::cell_at.
std::vector<double> EntropyGridSerial(const PreferenceMatrix& matrix);
std::vector<double> EntropyGridParallel(const PreferenceMatrix& matrix);

// Poisson-binomial rank distribution of one item: out[a] = P(exactly a of the
// other items beat `item`) = P(rank == a + 1). `out` has size N.
void ExactRankProbabilities(const WinProbabilities& probs, ItemId item,
                            std::span<double> out);

// Exact distributions for all items, row-major N x N.
std::vector<double> AllExactRankProbabilitiesSerial(const WinProbabilities& probs);
std::vector<double> AllExactRankProbabilitiesParallel(const WinProbabilities& probs);

// Sampled rank tallies for one item.
struct RankTally {
  std::vector<std::uint64_t> histogram;  // histogram[a] = samples with rank a+1
  std::uint64_t sum = 0;                 // sum of sampled ranks
  std::uint64_t sum_sq = 0;              // sum of squared sampled ranks

  bool operator==(const RankTally&) const = default;
};

// Samples are drawn in fixed-size chunks, each from its own stream derived
// from (seed, item, chunk). Results therefore do not depend on thread count.
inline constexpr std::uint64_t kMonteCarloChunk = 2048;

RankTally MonteCarloRanksSerial(const WinProbabilities& probs, ItemId item,
                                std::uint64_t samples, std::uint64_t seed);
RankTally MonteCarloRanksParallel(const WinProbabilities& probs, ItemId item,
                                  std::uint64_t samples, std::uint64_t seed);

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace cj::kernels

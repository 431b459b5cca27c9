#include "cj/kernels.hpp"

#include <algorithm>
#include <random>

#include "cj/error.hpp"

namespace cj::kernels {

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void FillWinProbability(const PreferenceMatrix& matrix, std::size_t k,
                        WinProbabilities& out) {
  const auto [i, j] = matrix.pair_at(k);
  out.set(i, j, PreferenceProbability(matrix.cell_at(k)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double UnitDouble(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void SampleChunk(const WinProbabilities& probs, ItemId item, std::uint64_t count,
                 std::uint64_t stream_seed, RankTally& tally) {
  const std::size_t n = probs.size();
  const double* row = probs.row(item);
  std::mt19937_64 rng(stream_seed);
  for (std::uint64_t s = 0; s < count; ++s) {
    std::size_t wins = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == item) continue;
      if (UnitDouble(rng) < row[j]) ++wins;
    }
    const std::uint64_t rank = n - wins;  // all wins -> rank 1
    ++tally.histogram[rank - 1];
    tally.sum += rank;
    tally.sum_sq += rank * rank;
  }
}

void CheckItem(const WinProbabilities& probs, ItemId item) {
  if (item >= probs.size()) {
    throw Error(ErrorCode::kUnknownItem, "item id out of range");
  }
}

}  // namespace

WinProbabilities WinProbabilitiesSerial(const PreferenceMatrix& matrix) {
  WinProbabilities out(matrix.size());
  for (std::size_t k = 0; k < matrix.pair_count(); ++k) {
    FillWinProbability(matrix, k, out);
  }
  return out;
}

WinProbabilities WinProbabilitiesParallel(const PreferenceMatrix& matrix) {
  WinProbabilities out(matrix.size());
  const auto pairs = static_cast<std::int64_t>(matrix.pair_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < pairs; ++k) {
    FillWinProbability(matrix, static_cast<std::size_t>(k), out);
  }
  return out;
}

std::vector<double> EntropyGridSerial(const PreferenceMatrix& matrix) {
  std::vector<double> out(matrix.pair_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = PreferenceEntropy(matrix.cell_at(k));
  }
  return out;
}

std::vector<double> EntropyGridParallel(const PreferenceMatrix& matrix) {
  std::vector<double> out(matrix.pair_count());
  const auto pairs = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < pairs; ++k) {
    out[k] = PreferenceEntropy(matrix.cell_at(static_cast<std::size_t>(k)));
  }
  return out;
}

void ExactRankProbabilities(const WinProbabilities& probs, ItemId item,
                            std::span<double> out) {
  CheckItem(probs, item);
  const std::size_t n = probs.size();
  if (out.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "output span must have N entries");
  }
  // out[a] accumulates P(exactly a dominating items) over opponents seen so far.
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = 1.0;
  std::size_t seen = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (s == item) continue;
    const double beats_item = probs(s, item);
    const double loses = 1.0 - beats_item;
    ++seen;
    for (std::size_t a = seen; a > 0; --a) {
      out[a] = out[a] * loses + out[a - 1] * beats_item;
    }
    out[0] *= loses;
  }
}

std::vector<double> AllExactRankProbabilitiesSerial(const WinProbabilities& probs) {
  const std::size_t n = probs.size();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    ExactRankProbabilities(probs, i, std::span<double>(out).subspan(i * n, n));
  }
  return out;
}

std::vector<double> AllExactRankProbabilitiesParallel(const WinProbabilities& probs) {
  const std::size_t n = probs.size();
  std::vector<double> out(n * n);
  const auto items = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < items; ++i) {
    const auto item = static_cast<std::size_t>(i);
    ExactRankProbabilities(probs, item, std::span<double>(out).subspan(item * n, n));
  }
  return out;
}

RankTally MonteCarloRanksSerial(const WinProbabilities& probs, ItemId item,
                                std::uint64_t samples, std::uint64_t seed) {
  CheckItem(probs, item);
  RankTally tally{std::vector<std::uint64_t>(probs.size(), 0), 0, 0};
  const std::uint64_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  const std::uint64_t item_seed = MixSeed(seed, item);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    const std::uint64_t count =
        std::min(kMonteCarloChunk, samples - c * kMonteCarloChunk);
    SampleChunk(probs, item, count, MixSeed(item_seed, c), tally);
  }
  return tally;
}

RankTally MonteCarloRanksParallel(const WinProbabilities& probs, ItemId item,
                                  std::uint64_t samples, std::uint64_t seed) {
  CheckItem(probs, item);
  const std::size_t n = probs.size();
  const std::uint64_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  const std::uint64_t item_seed = MixSeed(seed, item);
  std::vector<RankTally> partial(chunks,
                                 RankTally{std::vector<std::uint64_t>(n, 0), 0, 0});
  const auto chunk_count = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunk_count; ++c) {
    const auto chunk = static_cast<std::uint64_t>(c);
    const std::uint64_t count =
        std::min(kMonteCarloChunk, samples - chunk * kMonteCarloChunk);
    SampleChunk(probs, item, count, MixSeed(item_seed, chunk), partial[chunk]);
  }
  RankTally tally{std::vector<std::uint64_t>(n, 0), 0, 0};
  for (const RankTally& p : partial) {
    for (std::size_t a = 0; a < n; ++a) tally.histogram[a] += p.histogram[a];
    tally.sum += p.sum;
    tally.sum_sq += p.sum_sq;
  }
  return tally;
}

}  // namespace cj::kernels

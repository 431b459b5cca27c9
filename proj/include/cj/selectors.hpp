#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cj/preference.hpp"
#include "cj/random.hpp"

namespace cj {

enum class SelectorKind { kRandom, kNrp, kEntropy };

std::string_view SelectorKindName(SelectorKind kind);
// Accepts "random" | "nrp" | "entropy".
SelectorKind ParseSelectorKind(std::string_view name);

// Unordered pair, first < second.
struct Pair {
  ItemId first;
  ItemId second;

  bool operator==(const Pair&) const = default;
  auto operator<=>(const Pair&) const = default;
};

inline constexpr double kEntropyTieTolerance = 1e-12;

double BetaEntropy(const PreferenceCell& cell);

// Uniform over all C(N,2) unordered pairs.
Pair SelectRandom(std::size_t n_items, Rng& rng);

// Pair with the highest posterior entropy; ties (within `tie_tolerance`) are
// broken uniformly at random.
Pair SelectEntropy(const PreferenceMatrix& matrix, Rng& rng,
                   double tie_tolerance = kEntropyTieTolerance);

// All unordered pairs in one freshly shuffled round.
std::vector<Pair> NrpRound(std::size_t n_items, Rng& rng);

// Selection state for one session or simulated run. Randomness for step s is
// drawn from a stream derived from (seed, s), and NRP round r is shuffled from
// (seed, r), so the state after s selections is reproducible from (seed, s)
// alone; see AtStep.
class Selector {
 public:
  Selector(SelectorKind kind, std::size_t n_items, std::uint64_t seed);

  // A selector positioned as if `step` selections had already been made.
  static Selector AtStep(SelectorKind kind, std::size_t n_items, std::uint64_t seed,
                         std::uint64_t step);

  // `matrix` is consulted only by the entropy selector.
  Pair Next(const PreferenceMatrix& matrix);

  SelectorKind kind() const { return kind_; }
  std::uint64_t step() const { return step_; }
  std::size_t n_items() const { return n_items_; }
  // Remaining pairs of the current NRP round, next pair last.
  const std::vector<Pair>& nrp_queue() const { return nrp_queue_; }

 private:
  void RefillNrpQueue();

  SelectorKind kind_;
  std::size_t n_items_;
  std::uint64_t seed_;
  std::uint64_t step_ = 0;
  std::uint64_t nrp_round_ = 0;
  std::vector<Pair> nrp_queue_;
};

}  // namespace cj

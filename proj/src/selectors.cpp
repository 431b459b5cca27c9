#include "cj/selectors.hpp"

#include <string>

#include "cj/error.hpp"
#include "cj/kernels.hpp"

namespace cj {

namespace {

constexpr std::uint64_t kNrpStream = 0x6e7270ULL;

void RequirePairs(std::size_t n_items) {
  if (n_items < 2) {
    throw Error(ErrorCode::kNotEnoughItems, "pair selection needs at least 2 items");
  }
}

Pair PairFromIndex(std::size_t n, std::uint64_t index) {
  ItemId i = 0;
  std::size_t row_len = n - 1;
  while (index >= row_len) {
    index -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + static_cast<ItemId>(index)};
}

}  // namespace

std::string_view SelectorKindName(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::kRandom: return "random";
    case SelectorKind::kNrp: return "nrp";
    case SelectorKind::kEntropy: return "entropy";
  }
  return "unknown";
}

SelectorKind ParseSelectorKind(std::string_view name) {
  if (name == "random") return SelectorKind::kRandom;
  if (name == "nrp") return SelectorKind::kNrp;
  if (name == "entropy") return SelectorKind::kEntropy;
  throw Error(ErrorCode::kConfig, "unknown selector '" + std::string(name) +
                                      "' (expected random, nrp or entropy)");
}

double BetaEntropy(const PreferenceCell& cell) { return PreferenceEntropy(cell); }

Pair SelectRandom(std::size_t n_items, Rng& rng) {
  RequirePairs(n_items);
  const std::uint64_t pairs = n_items * (n_items - 1) / 2;
  return PairFromIndex(n_items, UniformIndex(rng, pairs));
}

Pair SelectEntropy(const PreferenceMatrix& matrix, Rng& rng, double tie_tolerance) {
  RequirePairs(matrix.size());
  const std::vector<double> entropy = kernels::EntropyGridParallel(matrix);
  double best = entropy[0];
  for (double h : entropy) best = std::max(best, h);
  std::vector<std::size_t> ties;
  for (std::size_t k = 0; k < entropy.size(); ++k) {
    if (entropy[k] >= best - tie_tolerance) ties.push_back(k);
  }
  const std::size_t pick = ties[UniformIndex(rng, ties.size())];
  const auto [i, j] = matrix.pair_at(pick);
  return {i, j};
}

std::vector<Pair> NrpRound(std::size_t n_items, Rng& rng) {
  RequirePairs(n_items);
  std::vector<Pair> pairs;
  pairs.reserve(n_items * (n_items - 1) / 2);
  for (ItemId i = 0; i < n_items; ++i) {
    for (ItemId j = i + 1; j < n_items; ++j) pairs.push_back({i, j});
  }
  Shuffle(pairs, rng);
  return pairs;
}

Selector::Selector(SelectorKind kind, std::size_t n_items, std::uint64_t seed)
    : kind_(kind), n_items_(n_items), seed_(seed) {
  RequirePairs(n_items);
}

Selector Selector::AtStep(SelectorKind kind, std::size_t n_items, std::uint64_t seed,
                          std::uint64_t step) {
  Selector s(kind, n_items, seed);
  s.step_ = step;
  if (kind == SelectorKind::kNrp) {
    const std::uint64_t round_size = n_items * (n_items - 1) / 2;
    s.nrp_round_ = step / round_size;
    if (step % round_size != 0) {
      s.RefillNrpQueue();
      s.nrp_queue_.resize(s.nrp_queue_.size() - step % round_size);
    }
  }
  return s;
}

void Selector::RefillNrpQueue() {
  Rng rng(kernels::MixSeed(seed_ ^ kNrpStream, nrp_round_));
  nrp_queue_ = NrpRound(n_items_, rng);
  ++nrp_round_;
}

Pair Selector::Next(const PreferenceMatrix& matrix) {
  Pair pair{};
  switch (kind_) {
    case SelectorKind::kRandom: {
      Rng rng(kernels::MixSeed(seed_, step_));
      pair = SelectRandom(n_items_, rng);
      break;
    }
    case SelectorKind::kNrp:
      if (nrp_queue_.empty()) RefillNrpQueue();
      pair = nrp_queue_.back();
      nrp_queue_.pop_back();
      break;
    case SelectorKind::kEntropy: {
      if (matrix.size() != n_items_) {
        throw Error(ErrorCode::kInvalidArgument, "matrix size does not match selector");
      }
      Rng rng(kernels::MixSeed(seed_, step_));
      pair = SelectEntropy(matrix, rng);
      break;
    }
  }
  ++step_;
  return pair;
}

}  // namespace cj

#include "cj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "cj/error.hpp"

namespace cj {

namespace {

void CheckPermutation(std::span<const int> ranks) {
  std::vector<bool> seen(ranks.size() + 1, false);
  for (int r : ranks) {
    if (r < 1 || static_cast<std::size_t>(r) > ranks.size() || seen[r]) {
      throw Error(ErrorCode::kInvalidRanking, "ranking is not a permutation of 1..N");
    }
    seen[r] = true;
  }
}

std::uint64_t MergeCount(std::vector<int>& v, std::vector<int>& scratch, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = MergeCount(v, scratch, lo, mid) + MergeCount(v, scratch, mid, hi);
  std::size_t a = lo;
  std::size_t b = mid;
  std::size_t out = lo;
  while (a < mid && b < hi) {
    if (v[a] <= v[b]) {
      scratch[out++] = v[a++];
    } else {
      count += mid - a;
      scratch[out++] = v[b++];
    }
  }
  while (a < mid) scratch[out++] = v[a++];
  while (b < hi) scratch[out++] = v[b++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

double CheckDistribution(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidDistribution, "probabilities must be finite and non-negative");
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-6) {
    throw Error(ErrorCode::kNormalization,
                "distribution sums to " + std::to_string(total) + ", not 1");
  }
  return total;
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Midranks of the pooled sample.
std::vector<double> MidRanks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && pooled[order[end]] == pooled[order[start]]) ++end;
    const double mid = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = mid;
    start = end;
  }
  return ranks;
}

// P(W >= observed) and P(W <= observed) for the rank sum of a size-n1 subset,
// exactly, by counting subsets over doubled (integer) midranks.
std::pair<double, double> ExactTails(const std::vector<double>& ranks, std::size_t n1,
                                     double observed) {
  std::vector<int> doubled;
  int max_sum = 0;
  for (double r : ranks) {
    doubled.push_back(static_cast<int>(std::lround(2.0 * r)));
    max_sum += doubled.back();
  }
  // ways[k][s] = number of k-subsets with doubled sum s
  std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (int d : doubled) {
    for (std::size_t k = n1; k >= 1; --k) {
      for (int s = max_sum; s >= d; --s) ways[k][s] += ways[k - 1][s - d];
    }
  }
  const int obs = static_cast<int>(std::lround(2.0 * observed));
  double total = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double c = ways[n1][s];
    total += c;
    if (s >= obs) upper += c;
    if (s <= obs) lower += c;
  }
  return {upper / total, lower / total};
}

}  // namespace

std::uint64_t DiscordantPairs(std::span<const int> rank_a, std::span<const int> rank_b) {
  if (rank_a.size() != rank_b.size()) {
    throw Error(ErrorCode::kInvalidRanking, "rankings have different lengths");
  }
  CheckPermutation(rank_a);
  CheckPermutation(rank_b);
  const std::size_t n = rank_a.size();
  // Lay out rank_b in rank_a order; discordant pairs are the inversions.
  std::vector<int> seq(n);
  for (std::size_t item = 0; item < n; ++item) seq[rank_a[item] - 1] = rank_b[item];
  std::vector<int> scratch(n);
  return MergeCount(seq, scratch, 0, n);
}

double KendallTauDistance(std::span<const int> rank_a, std::span<const int> rank_b) {
  if (rank_a.size() < 2) throw Error(ErrorCode::kInvalidRanking, "need at least two items");
  const std::uint64_t discordant = DiscordantPairs(rank_a, rank_b);
  const double n = static_cast<double>(rank_a.size());
  return static_cast<double>(discordant) / (n * (n - 1.0) / 2.0);
}

double JensenShannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    throw Error(ErrorCode::kInvalidDistribution, "distributions have different supports");
  }
  CheckDistribution(p);
  CheckDistribution(q);
  double sum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double m = 0.5 * (p[a] + q[a]);
    const double tp = p[a] > 0.0 ? p[a] * std::log2(p[a] / m) : 0.0;
    const double tq = q[a] > 0.0 ? q[a] * std::log2(q[a] / m) : 0.0;
    sum += tp + tq;
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double WorstJsd(std::span<const RankDistribution> estimates,
                std::span<const RankDistribution> targets) {
  if (estimates.size() != targets.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "estimate and target item sets differ");
  }
  std::map<ItemId, const RankDistribution*> by_item;
  for (const auto& t : targets) by_item[t.item] = &t;
  if (by_item.size() != targets.size()) {
    throw Error(ErrorCode::kInvalidDistribution, "duplicate target item");
  }
  double worst = 0.0;
  for (const auto& e : estimates) {
    const auto it = by_item.find(e.item);
    if (it == by_item.end()) {
      throw Error(ErrorCode::kInvalidDistribution,
                  "no target for item " + std::to_string(e.item));
    }
    worst = std::max(worst, JensenShannon(e.probs, it->second->probs));
  }
  return worst;
}

double RankSumPValue(std::span<const double> x, std::span<const double> y,
                     Alternative alternative, const RankSumOptions& options) {
  if (x.empty() || y.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rank-sum test needs two non-empty samples");
  }
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::vector<double> ranks = MidRanks(pooled);
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const double w = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

  if (n1 < options.exact_below && n2 < options.exact_below) {
    const auto [upper, lower] = ExactTails(ranks, n1, w);
    switch (alternative) {
      case Alternative::kGreater: return upper;
      case Alternative::kLess: return lower;
      case Alternative::kTwoSided: return std::min(1.0, 2.0 * std::min(upper, lower));
    }
  }

  const double n = static_cast<double>(n1 + n2);
  const double mean = static_cast<double>(n1) * (n + 1.0) / 2.0;
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t start = 0; start < sorted.size();) {
    std::size_t end = start + 1;
    while (end < sorted.size() && sorted[end] == sorted[start]) ++end;
    const double t = static_cast<double>(end - start);
    tie_term += t * t * t - t;
    start = end;
  }
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                     ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double sd = std::sqrt(var);
  const double cc = options.continuity ? 0.5 : 0.0;
  const double p_upper = 1.0 - NormalCdf((w - mean - cc) / sd);
  const double p_lower = NormalCdf((w - mean + cc) / sd);
  switch (alternative) {
    case Alternative::kGreater: return std::min(1.0, p_upper);
    case Alternative::kLess: return std::min(1.0, p_lower);
    case Alternative::kTwoSided: return std::min(1.0, 2.0 * std::min(p_upper, p_lower));
  }
  return 1.0;
}

std::vector<int> BeatCount(std::span<const MethodResult> results,
                           const BeatCountOptions& options) {
  for (const auto& r : results) {
    if (r.values.size() != results.front().values.size()) {
      throw Error(ErrorCode::kPairing, "methods have unequal repeat counts");
    }
  }
  const std::size_t m =
      options.comparisons > 0 ? options.comparisons : (results.size() > 1 ? results.size() - 1 : 1);
  const double alpha_adj = options.alpha / static_cast<double>(m);
  std::vector<int> v(results.size(), 0);
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = 0; j < results.size(); ++j) {
      if (i == j) continue;
      const double p = RankSumPValue(results[i].values, results[j].values,
                                     Alternative::kGreater, options.rank_sum);
      if (p <= alpha_adj) ++v[i];
    }
  }
  return v;
}

}  // namespace cj

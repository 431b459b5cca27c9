#include "cj/btm.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cj/error.hpp"
#include "cj/rank_distribution.hpp"

namespace cj {

WinCounts::WinCounts(std::size_t n_items, std::vector<int> dense)
    : n_(n_items), data_(std::move(dense)) {
  if (data_.size() != n_ * n_) {
    throw Error(ErrorCode::kInvalidState, "win matrix must be N x N");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (data_[i * n_ + i] != 0) throw Error(ErrorCode::kInvalidState, "win matrix diagonal must be zero");
    for (std::size_t j = 0; j < n_; ++j) {
      if (data_[i * n_ + j] < 0) throw Error(ErrorCode::kInvalidState, "negative win count");
    }
  }
}

void WinCounts::Record(ItemId winner, ItemId loser) {
  if (winner >= n_ || loser >= n_) throw Error(ErrorCode::kUnknownItem, "item id out of range");
  if (winner == loser) throw Error(ErrorCode::kInvalidPair, "item cannot beat itself");
  ++data_[winner * n_ + loser];
}

void WinCounts::set(ItemId i, ItemId j, int count) {
  if (i == j || count < 0) throw Error(ErrorCode::kInvalidState, "bad win count entry");
  data_[i * n_ + j] = count;
}

namespace {

std::vector<bool> Reachable(const WinCounts& omega, bool reverse) {
  const std::size_t n = omega.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const int w = reverse ? omega(v, u) : omega(u, v);
      if (w > 0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

double LogLikelihoodDense(const std::vector<double>& gamma, const std::vector<double>& w,
                          std::size_t n) {
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w[i * n + j];
      if (i == j || wij == 0.0) continue;
      ll += wij * (std::log(gamma[i]) - std::log(gamma[i] + gamma[j]));
    }
  }
  return ll;
}

// LL(to) - LL(from), accurate even when the two score vectors agree to
// nearly every digit.
double LogLikelihoodGain(const std::vector<double>& from, const std::vector<double>& to,
                         const std::vector<double>& w, std::size_t n) {
  double gain = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double own = std::log1p((to[i] - from[i]) / from[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w[i * n + j];
      if (i == j || wij == 0.0) continue;
      const double sum = from[i] + from[j];
      gain += wij * (own - std::log1p(((to[i] - from[i]) + (to[j] - from[j])) / sum));
    }
  }
  return gain;
}

void CheckGamma(const std::vector<double>& gamma) {
  for (double g : gamma) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::kInvalidState, "BTM scores must be positive");
    }
  }
}

}  // namespace

bool StronglyConnected(const WinCounts& omega) {
  if (omega.size() <= 1) return true;
  const auto fwd = Reachable(omega, false);
  const auto bwd = Reachable(omega, true);
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!fwd[i] || !bwd[i]) return false;
  }
  return true;
}

double BtmWinProbability(const BtmState& state, ItemId i, ItemId j) {
  const std::size_t n = state.gamma.size();
  if (i >= n || j >= n) throw Error(ErrorCode::kUnknownItem, "item id out of range");
  if (i == j) throw Error(ErrorCode::kInvalidPair, "win probability needs two distinct items");
  return state.gamma[i] / (state.gamma[i] + state.gamma[j]);
}

double BtmLogLikelihood(const std::vector<double>& gamma, const WinCounts& omega) {
  if (gamma.size() != omega.size()) {
    throw Error(ErrorCode::kInvalidState, "gamma and omega sizes differ");
  }
  CheckGamma(gamma);
  std::vector<double> w(omega.dense().begin(), omega.dense().end());
  return LogLikelihoodDense(gamma, w, omega.size());
}

double BtmLogLikelihood(const BtmState& state) {
  return BtmLogLikelihood(state.gamma, state.omega);
}

BtmState BtmFit(const WinCounts& omega, const BtmFitOptions& options) {
  const std::size_t n = omega.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "BTM needs at least one item");

  BtmState state{std::vector<double>(n, 1.0 / static_cast<double>(n)), omega, 0, false,
                 false, {}};
  if (!options.initial_gamma.empty()) {
    if (options.initial_gamma.size() != n) {
      throw Error(ErrorCode::kInvalidArgument, "warm start has the wrong length");
    }
    CheckGamma(options.initial_gamma);
    const double total =
        std::accumulate(options.initial_gamma.begin(), options.initial_gamma.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) state.gamma[i] = options.initial_gamma[i] / total;
  }

  std::vector<double> w(omega.dense().begin(), omega.dense().end());
  if (!StronglyConnected(omega)) {
    state.smoothed = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (omega(i, j) + omega(j, i) > 0) {
          w[i * n + j] += options.smoothing;
          w[j * n + i] += options.smoothing;
        }
      }
    }
  }

  // wins[i] = W_i, pairs[i*n+j] = n_ij
  std::vector<double> wins(n, 0.0);
  std::vector<double> pairs(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      wins[i] += w[i * n + j];
      pairs[i * n + j] = w[i * n + j] + w[j * n + i];
    }
  }

  double ll = LogLikelihoodDense(state.gamma, w, n);
  if (options.record_trace) state.log_likelihood_trace.push_back(ll);

  std::vector<double> next(n);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || pairs[i * n + j] == 0.0) continue;
        denom += pairs[i * n + j] / (state.gamma[i] + state.gamma[j]);
      }
      // Never-compared items, or items with no wins in unsmoothed data, keep
      // their current score.
      next[i] = (denom > 0.0 && wins[i] > 0.0) ? wins[i] / denom : state.gamma[i];
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      max_change = std::max(max_change, std::fabs(next[i] - state.gamma[i]));
    }
    // A sweep that lowers the likelihood is rounding noise: stop.
    const double gain = LogLikelihoodGain(state.gamma, next, w, n);
    if (gain < 0.0) {
      state.converged = true;
      break;
    }
    state.gamma.swap(next);
    state.iterations = iter + 1;
    ll += gain;
    if (options.record_trace) state.log_likelihood_trace.push_back(ll);
    if (max_change < options.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

std::vector<int> BtmRanks(const BtmState& state) {
  std::vector<double> keys(state.gamma.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = -state.gamma[i];
  return RanksAscending(keys);
}

}  // namespace cj

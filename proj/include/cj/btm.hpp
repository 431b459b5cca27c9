#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cj/preference.hpp"

namespace cj {

// Dense win-count matrix: wins(i, j) = number of times i beat j.
class WinCounts {
 public:
  explicit WinCounts(std::size_t n_items) : n_(n_items), data_(n_items * n_items, 0) {}
  WinCounts(std::size_t n_items, std::vector<int> dense);

  std::size_t size() const { return n_; }
  int operator()(ItemId i, ItemId j) const { return data_[i * n_ + j]; }
  void Record(ItemId winner, ItemId loser);
  void set(ItemId i, ItemId j, int count);
  const std::vector<int>& dense() const { return data_; }

  bool operator==(const WinCounts&) const = default;

 private:
  std::size_t n_;
  std::vector<int> data_;
};

// True when every item can reach every other along "beat" edges, which is
// the condition for a finite Bradley-Terry MLE.
bool StronglyConnected(const WinCounts& omega);

struct BtmState {
  std::vector<double> gamma;  // sums to 1
  WinCounts omega;
  int iterations = 0;
  bool converged = false;
  // Set when omega alone admits no finite MLE and pseudo-wins were added.
  bool smoothed = false;
  // Log-likelihood of the fitted data after each iteration (index 0 = start).
  std::vector<double> log_likelihood_trace;
};

struct BtmFitOptions {
  int max_iters = 10000;
  double tol = 1e-8;
  double smoothing = 0.1;
  // Warm start; uniform when empty.
  std::vector<double> initial_gamma;
  bool record_trace = false;
};

// gamma_i / (gamma_i + gamma_j).
double BtmWinProbability(const BtmState& state, ItemId i, ItemId j);

// Sum over i != j of w_ij ln g_i - w_ij ln(g_i + g_j), using state.omega.
double BtmLogLikelihood(const BtmState& state);
double BtmLogLikelihood(const std::vector<double>& gamma, const WinCounts& omega);

// MM iteration g_i <- W_i / sum_j n_ij / (g_i + g_j), normalized to
// sum 1 after every sweep.
BtmState BtmFit(const WinCounts& omega, const BtmFitOptions& options = {});

// Rank 1 = largest gamma; ties to the smaller id.
std::vector<int> BtmRanks(const BtmState& state);

}  // namespace cj

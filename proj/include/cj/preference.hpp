#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

namespace cj {

using ItemId = std::size_t;  // 0-based item index

// Beta posterior over the preference probability p of the (i, j) pair, i < j.
// alpha counts evidence that i is preferred, beta that j is.
struct PreferenceCell {
  double alpha = 1.0;
  double beta = 1.0;
  int wins_i = 0;
  int wins_j = 0;

  bool operator==(const PreferenceCell&) const = default;
};

// P(i > j) = P(p > 0.5) = 1 - F(0.5) for F the Beta(alpha, beta) CDF.
double PreferenceProbability(const PreferenceCell& cell);

// Differential entropy (nats) of the cell's Beta posterior.
double PreferenceEntropy(const PreferenceCell& cell);

// Upper-triangular grid of Beta posteriors, one per unordered pair.
class PreferenceMatrix {
 public:
  explicit PreferenceMatrix(std::size_t n_items, double prior_alpha = 1.0,
                            double prior_beta = 1.0);

  std::size_t size() const { return n_items_; }
  std::size_t pair_count() const { return cells_.size(); }
  double prior_alpha() const { return prior_alpha_; }
  double prior_beta() const { return prior_beta_; }

  // Cell for the unordered pair; the arguments may be given in either order.
  const PreferenceCell& cell(ItemId i, ItemId j) const;

  // Cell by upper-triangle index, in row-major (0,1), (0,2), ..., (n-2,n-1).
  const PreferenceCell& cell_at(std::size_t index) const { return cells_[index]; }
  std::size_t pair_index(ItemId i, ItemId j) const;
  std::pair<ItemId, ItemId> pair_at(std::size_t index) const;

  // P(i > j) for any ordered pair i != j. P(j > i) is 1 - P(i > j) exactly.
  double probability(ItemId i, ItemId j) const;

  // In-place conjugate update for one judgement.
  void Record(ItemId winner, ItemId loser);

  bool operator==(const PreferenceMatrix&) const = default;

 private:
  void CheckPair(ItemId i, ItemId j) const;

  std::size_t n_items_;
  double prior_alpha_;
  double prior_beta_;
  std::vector<PreferenceCell> cells_;
};

// Returns a copy of `matrix` with one judgement applied.
PreferenceMatrix UpdatePosterior(const PreferenceMatrix& matrix, ItemId winner,
                                 ItemId loser);

// {"n": N, "prior": {...}, "cells": [{"i","j","alpha","beta"}...]}
nlohmann::json ToJson(const PreferenceMatrix& matrix);
PreferenceMatrix PreferenceMatrixFromJson(const nlohmann::json& json);

// Dense N x N matrix of P(i > j); the diagonal is zero.
class WinProbabilities {
 public:
  explicit WinProbabilities(std::size_t n_items)
      : n_(n_items), data_(n_items * n_items, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(ItemId i, ItemId j) const { return data_[i * n_ + j]; }

  // Sets P(i > j) = p and P(j > i) = 1 - p.
  void set(ItemId i, ItemId j, double p);

  const double* row(ItemId i) const { return data_.data() + i * n_; }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace cj

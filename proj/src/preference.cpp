#include "cj/preference.hpp"

#include <cmath>
#include <string>

#include "cj/error.hpp"
#include "cj/special_functions.hpp"

namespace cj {

namespace {

void CheckShape(const PreferenceCell& cell) {
  if (!(cell.alpha > 0.0) || !(cell.beta > 0.0)) {
    throw Error(ErrorCode::kInvalidPosterior,
                "Beta shape parameters must be positive");
  }
}

}  // namespace

double PreferenceProbability(const PreferenceCell& cell) {
  CheckShape(cell);
  // 1 - I_0.5(a, b) == I_0.5(b, a); the latter avoids cancellation when the
  // CDF is close to 1.
  return special::RegularizedIncompleteBeta(0.5, cell.beta, cell.alpha);
}

double PreferenceEntropy(const PreferenceCell& cell) {
  CheckShape(cell);
  return special::BetaEntropy(cell.alpha, cell.beta);
}

PreferenceMatrix::PreferenceMatrix(std::size_t n_items, double prior_alpha,
                                   double prior_beta)
    : n_items_(n_items), prior_alpha_(prior_alpha), prior_beta_(prior_beta) {
  if (n_items == 0) {
    throw Error(ErrorCode::kInvalidArgument, "matrix needs at least one item");
  }
  if (!(prior_alpha > 0.0) || !(prior_beta > 0.0)) {
    throw Error(ErrorCode::kInvalidPosterior, "prior shapes must be positive");
  }
  cells_.assign(n_items * (n_items - 1) / 2,
                PreferenceCell{prior_alpha, prior_beta, 0, 0});
}

void PreferenceMatrix::CheckPair(ItemId i, ItemId j) const {
  if (i >= n_items_ || j >= n_items_) {
    throw Error(ErrorCode::kUnknownItem,
                "item id out of range: " + std::to_string(i >= n_items_ ? i : j));
  }
  if (i == j) {
    throw Error(ErrorCode::kInvalidPair,
                "pair needs two distinct items, got " + std::to_string(i) +
                    " twice");
  }
}

std::size_t PreferenceMatrix::pair_index(ItemId i, ItemId j) const {
  CheckPair(i, j);
  if (i > j) std::swap(i, j);
  return i * (2 * n_items_ - i - 1) / 2 + (j - i - 1);
}

std::pair<ItemId, ItemId> PreferenceMatrix::pair_at(std::size_t index) const {
  ItemId i = 0;
  std::size_t row_len = n_items_ - 1;
  while (index >= row_len) {
    index -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + index};
}

const PreferenceCell& PreferenceMatrix::cell(ItemId i, ItemId j) const {
  return cells_[pair_index(i, j)];
}

double PreferenceMatrix::probability(ItemId i, ItemId j) const {
  const double p = PreferenceProbability(cell(i, j));
  return i < j ? p : 1.0 - p;
}

void PreferenceMatrix::Record(ItemId winner, ItemId loser) {
  PreferenceCell& c = cells_[pair_index(winner, loser)];
  if (winner < loser) {
    c.alpha += 1.0;
    ++c.wins_i;
  } else {
    c.beta += 1.0;
    ++c.wins_j;
  }
}

PreferenceMatrix UpdatePosterior(const PreferenceMatrix& matrix, ItemId winner,
                                 ItemId loser) {
  PreferenceMatrix next = matrix;
  next.Record(winner, loser);
  return next;
}

nlohmann::json ToJson(const PreferenceMatrix& matrix) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t k = 0; k < matrix.pair_count(); ++k) {
    const auto [i, j] = matrix.pair_at(k);
    const PreferenceCell& c = matrix.cell_at(k);
    cells.push_back({{"i", i}, {"j", j}, {"alpha", c.alpha}, {"beta", c.beta},
                     {"wins_i", c.wins_i}, {"wins_j", c.wins_j}});
  }
  return {{"n", matrix.size()},
          {"prior", {{"alpha", matrix.prior_alpha()},
                     {"beta", matrix.prior_beta()}}},
          {"cells", std::move(cells)}};
}

PreferenceMatrix PreferenceMatrixFromJson(const nlohmann::json& json) {
  try {
    const auto n = json.at("n").get<std::size_t>();
    double prior_alpha = 1.0;
    double prior_beta = 1.0;
    if (json.contains("prior")) {
      prior_alpha = json["prior"].at("alpha").get<double>();
      prior_beta = json["prior"].at("beta").get<double>();
    }
    PreferenceMatrix matrix(n, prior_alpha, prior_beta);
    const auto& cells = json.at("cells");
    if (cells.size() != matrix.pair_count()) {
      throw Error(ErrorCode::kParse, "matrix JSON has " +
                                         std::to_string(cells.size()) +
                                         " cells, expected " +
                                         std::to_string(matrix.pair_count()));
    }
    // Rebuild through Record so the stored counts must agree with the shapes.
    for (const auto& c : cells) {
      const auto i = c.at("i").get<ItemId>();
      const auto j = c.at("j").get<ItemId>();
      if (i >= j) throw Error(ErrorCode::kParse, "cell indices must satisfy i < j");
      const double alpha = c.at("alpha").get<double>();
      const double beta = c.at("beta").get<double>();
      const int wins_i = c.value("wins_i", static_cast<int>(std::lround(alpha - prior_alpha)));
      const int wins_j = c.value("wins_j", static_cast<int>(std::lround(beta - prior_beta)));
      if (wins_i < 0 || wins_j < 0 || std::fabs(prior_alpha + wins_i - alpha) > 1e-9 ||
          std::fabs(prior_beta + wins_j - beta) > 1e-9) {
        throw Error(ErrorCode::kParse, "cell (" + std::to_string(i) + "," +
                                           std::to_string(j) +
                                           ") shapes disagree with prior + wins");
      }
      for (int w = 0; w < wins_i; ++w) matrix.Record(i, j);
      for (int w = 0; w < wins_j; ++w) matrix.Record(j, i);
    }
    return matrix;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad matrix JSON: ") + e.what());
  }
}

void WinProbabilities::set(ItemId i, ItemId j, double p) {
  data_[i * n_ + j] = p;
  data_[j * n_ + i] = 1.0 - p;
}

}  // namespace cj

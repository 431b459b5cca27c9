#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cj/rank_distribution.hpp"

namespace cj {

// Grades are listed best first; counts[g] items receive labels[g]. The
// threshold is the cumulative probability required to award a grade.
struct GradingScheme {
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;
  double threshold = 0.9;
};

struct RankWindow {
  std::size_t first;  // 1-based, inclusive
  std::size_t last;
};

// Throws kInvalidScheme unless the scheme is consistent with `n_items`.
void ValidateScheme(const GradingScheme& scheme, std::size_t n_items);

// Contiguous rank windows, one per grade, tiling [1, N].
std::vector<RankWindow> GradeWindows(const GradingScheme& scheme);

// P(first <= rank <= last) for each grade window.
std::vector<double> GradeProbabilities(const RankDistribution& dist,
                                       const GradingScheme& scheme);

// Index of the first grade (best to worst) whose cumulative probability
// reaches the threshold.
std::size_t AssignGrade(const std::vector<double>& grade_probs,
                        const GradingScheme& scheme);

// Parses "A:1,B:1,C:2,D:1".
GradingScheme ParseGradeSpec(const std::string& spec, double threshold);

}  // namespace cj

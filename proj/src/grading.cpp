#include "cj/grading.hpp"

#include <numeric>
#include <sstream>

#include "cj/error.hpp"

namespace cj {

namespace {
// Cumulative sums of exactly-normalized distributions can land a few ulps
// below 1.
constexpr double kCumulativeSlack = 1e-12;
}  // namespace

void ValidateScheme(const GradingScheme& scheme, std::size_t n_items) {
  if (scheme.labels.empty() || scheme.labels.size() != scheme.counts.size()) {
    throw Error(ErrorCode::kInvalidScheme, "need one count per grade label");
  }
  std::size_t total = 0;
  for (std::size_t c : scheme.counts) {
    if (c == 0) throw Error(ErrorCode::kInvalidScheme, "grade counts must be positive");
    total += c;
  }
  if (total != n_items) {
    throw Error(ErrorCode::kInvalidScheme,
                "grade counts sum to " + std::to_string(total) + " but there are " +
                    std::to_string(n_items) + " items");
  }
  if (!(scheme.threshold > 0.0 && scheme.threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidScheme, "threshold must lie in (0, 1]");
  }
}

std::vector<RankWindow> GradeWindows(const GradingScheme& scheme) {
  std::vector<RankWindow> windows;
  std::size_t next = 1;
  for (std::size_t c : scheme.counts) {
    windows.push_back({next, next + c - 1});
    next += c;
  }
  return windows;
}

std::vector<double> GradeProbabilities(const RankDistribution& dist,
                                       const GradingScheme& scheme) {
  ValidateScheme(scheme, dist.probs.size());
  std::vector<double> out;
  for (const RankWindow& w : GradeWindows(scheme)) {
    double p = 0.0;
    for (std::size_t k = w.first; k <= w.last; ++k) p += dist.probs[k - 1];
    out.push_back(p);
  }
  return out;
}

std::size_t AssignGrade(const std::vector<double>& grade_probs,
                        const GradingScheme& scheme) {
  if (grade_probs.size() != scheme.labels.size()) {
    throw Error(ErrorCode::kInvalidScheme, "grade probabilities do not match scheme");
  }
  if (!(scheme.threshold > 0.0 && scheme.threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidScheme, "threshold must lie in (0, 1]");
  }
  double cumulative = 0.0;
  for (std::size_t g = 0; g < grade_probs.size(); ++g) {
    cumulative += grade_probs[g];
    if (cumulative >= scheme.threshold - kCumulativeSlack) return g;
  }
  return grade_probs.size() - 1;
}

GradingScheme ParseGradeSpec(const std::string& spec, double threshold) {
  GradingScheme scheme;
  scheme.threshold = threshold;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw Error(ErrorCode::kInvalidScheme, "grade entry '" + part + "' is not LABEL:COUNT");
    }
    scheme.labels.push_back(part.substr(0, colon));
    try {
      std::size_t used = 0;
      const long count = std::stol(part.substr(colon + 1), &used);
      if (used != part.size() - colon - 1 || count <= 0) throw std::invalid_argument("");
      scheme.counts.push_back(static_cast<std::size_t>(count));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidScheme, "bad grade count in '" + part + "'");
    }
  }
  if (scheme.labels.empty()) throw Error(ErrorCode::kInvalidScheme, "empty grade spec");
  return scheme;
}

}  // namespace cj

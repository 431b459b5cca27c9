#include "cj/special_functions.hpp"

#include <cmath>
#include <limits>

#include "cj/error.hpp"

namespace cj {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidPair: return "invalid_pair";
    case ErrorCode::kUnknownItem: return "unknown_item";
    case ErrorCode::kInvalidPosterior: return "invalid_posterior";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMustUseMonteCarlo: return "must_use_mc";
    case ErrorCode::kInvalidScheme: return "invalid_scheme";
    case ErrorCode::kNotEnoughItems: return "not_enough_items";
    case ErrorCode::kInvalidState: return "invalid_state";
    case ErrorCode::kInvalidRanking: return "invalid_ranking";
    case ErrorCode::kInvalidDistribution: return "invalid_distribution";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kPairing: return "pairing";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMissingCell: return "missing_cell";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

namespace special {

double Digamma(double x) {
  if (!(x > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "digamma requires x > 0");
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_2k / (2k x^2k)
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double LogBeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued fraction for I_x(a, b); converges quickly for x < (a+1)/(a+b+2).
double BetaContinuedFraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "incomplete beta continued fraction did not converge");
}

}  // namespace

double RegularizedIncompleteBeta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::kInvalidPosterior,
                "Beta shape parameters must be positive and finite");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete beta requires x in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - LogBeta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(x, a, b) / a;
  }
  return 1.0 - front * BetaContinuedFraction(1.0 - x, b, a) / b;
}

double BetaEntropy(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::kInvalidPosterior,
                "Beta shape parameters must be positive and finite");
  }
  // Terms with a zero coefficient are skipped so Beta(1,1) is exactly 0.
  // The two shape terms are summed before use so the result is bitwise
  // symmetric in (a, b).
  const double term_a = a != 1.0 ? (a - 1.0) * Digamma(a) : 0.0;
  const double term_b = b != 1.0 ? (b - 1.0) * Digamma(b) : 0.0;
  const double term_ab = a + b != 2.0 ? (a + b - 2.0) * Digamma(a + b) : 0.0;
  return LogBeta(a, b) - (term_a + term_b) + term_ab;
}

}  // namespace special
}  // namespace cj

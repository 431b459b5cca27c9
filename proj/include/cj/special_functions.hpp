#pragma once

namespace cj::special {

// Digamma function psi(x) for x > 0. Recurrence up to x >= 10, then the
// asymptotic series; absolute error below 1e-12 on (0, 1e6].
double Digamma(double x);

// ln B(a, b) via lgamma.
double LogBeta(double a, double b);

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double RegularizedIncompleteBeta(double x, double a, double b);

// CDF of Beta(a, b) at x.
inline double BetaCdf(double x, double a, double b) {
  return RegularizedIncompleteBeta(x, a, b);
}

// Differential entropy of Beta(a, b) in nats.
double BetaEntropy(double a, double b);

}  // namespace cj::special

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cj/btm.hpp"
#include "cj/error.hpp"
#include "cj/kernels.hpp"
#include "cj/random.hpp"

using namespace cj;

namespace {

// Golden-section maximization of the two-item likelihood over p = g1/(g1+g2).
double TwoItemGridMle(int w12, int w21) {
  auto ll = [&](double p) { return w12 * std::log(p) + w21 * std::log(1 - p); };
  double best = 0.5;
  double best_ll = ll(best);
  for (int k = 1; k < 100000; ++k) {
    const double p = k / 100000.0;
    if (ll(p) > best_ll) {
      best_ll = ll(p);
      best = p;
    }
  }
  double lo = best - 1e-5;
  double hi = best + 1e-5;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (ll(a) < ll(b)) lo = a; else hi = b;
  }
  return 0.5 * (lo + hi);
}

WinCounts RandomOmega(std::size_t n, Rng& rng) {
  WinCounts w(n);
  const double density = UnitDouble(rng);
  for (ItemId i = 0; i < n; ++i)
    for (ItemId j = 0; j < n; ++j)
      if (i != j && UnitDouble(rng) < density) w.set(i, j, static_cast<int>(UniformIndex(rng, 6)));
  return w;
}

}  // namespace

TEST_CASE("win probability and likelihood") {
  BtmState s{{0.75, 0.25}, WinCounts(2), 0, false, false, {}};
  CHECK(BtmWinProbability(s, 0, 1) == 0.75);
  CHECK(BtmWinProbability(s, 0, 1) + BtmWinProbability(s, 1, 0) == 1.0);
  CHECK(BtmLogLikelihood(s) == 0.0);
  s.omega.set(0, 1, 3);
  s.omega.set(1, 0, 1);
  CHECK(BtmLogLikelihood(s) == doctest::Approx(3 * std::log(0.75) + std::log(0.25)).epsilon(1e-14));
  CHECK(BtmLogLikelihood(s) == doctest::Approx(-2.249340578475233).epsilon(1e-12));
  const double scaled = BtmLogLikelihood({7.5, 2.5}, s.omega);
  CHECK(std::fabs(scaled - BtmLogLikelihood(s)) < 1e-12);
  CHECK(BtmRanks(s) == std::vector<int>{1, 2});

  BtmState eq{{0.5, 0.5}, WinCounts(2), 0, false, false, {}};
  CHECK(BtmWinProbability(eq, 1, 0) == 0.5);
  CHECK_THROWS_AS(BtmWinProbability(eq, 0, 0), Error);
  CHECK_THROWS_AS(BtmWinProbability(eq, 0, 2), Error);
}

TEST_CASE("two-item closed form") {
  WinCounts w(2);
  w.set(0, 1, 3);
  w.set(1, 0, 1);
  const BtmState s = BtmFit(w);
  CHECK(s.converged);
  CHECK_FALSE(s.smoothed);
  CHECK(std::fabs(s.gamma[0] - 0.75) < 1e-6);
  CHECK(std::fabs(s.gamma[1] - 0.25) < 1e-6);
  CHECK(std::fabs(s.gamma[0] - TwoItemGridMle(3, 1)) < 1e-6);
  CHECK(std::fabs(BtmFit(w, {.initial_gamma = {0.1, 0.9}}).gamma[0] - 0.75) < 1e-6);
}

TEST_CASE("balanced round robin gives uniform scores") {
  for (std::size_t n : {2u, 3u, 5u, 10u, 25u}) {
    WinCounts w(n);
    for (ItemId i = 0; i < n; ++i)
      for (ItemId j = 0; j < n; ++j)
        if (i != j) w.set(i, j, 1);
    const BtmState s = BtmFit(w, {.initial_gamma = [n] {
                                    std::vector<double> g(n);
                                    std::iota(g.begin(), g.end(), 1.0);
                                    return g;
                                  }()});
    CHECK(s.converged);
    for (double g : s.gamma) CHECK(std::fabs(g - 1.0 / n) < 1e-8);
    std::vector<int> expected(n);
    std::iota(expected.begin(), expected.end(), 1);
    CHECK(BtmRanks(BtmState{std::vector<double>(n, 1.0 / n), w, 0, false, false, {}}) == expected);
  }
}

TEST_CASE("MM likelihood is non-decreasing on every iteration") {
  Rng rng(2024);
  int smoothed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + UniformIndex(rng, 9);
    const WinCounts w = RandomOmega(n, rng);
    const BtmState s = BtmFit(w, {.max_iters = 500, .record_trace = true});
    smoothed += s.smoothed;
    REQUIRE(s.log_likelihood_trace.size() == static_cast<std::size_t>(s.iterations) + 1);
    for (std::size_t k = 1; k < s.log_likelihood_trace.size(); ++k) {
      CHECK(s.log_likelihood_trace[k] >= s.log_likelihood_trace[k - 1]);
    }
    CHECK(std::fabs(std::accumulate(s.gamma.begin(), s.gamma.end(), 0.0) - 1.0) < 1e-12);
  }
  // the sample covers both connected and disconnected win graphs
  CHECK(smoothed > 0);
  CHECK(smoothed < 100);
}

TEST_CASE("fit is equivariant under item relabelling") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    WinCounts w(n);
    for (ItemId i = 0; i < n; ++i)
      for (ItemId j = 0; j < n; ++j)
        if (i != j) w.set(i, j, 1 + static_cast<int>(UniformIndex(rng, 5)));
    std::vector<ItemId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Shuffle(perm, rng);
    WinCounts wp(n);
    for (ItemId i = 0; i < n; ++i)
      for (ItemId j = 0; j < n; ++j)
        if (i != j) wp.set(perm[i], perm[j], w(i, j));
    const BtmState a = BtmFit(w, {.tol = 1e-12});
    const BtmState b = BtmFit(wp, {.tol = 1e-12});
    for (ItemId i = 0; i < n; ++i) CHECK(std::fabs(a.gamma[i] - b.gamma[perm[i]]) < 1e-9);
  }
}

TEST_CASE("smoothing for disconnected win graphs") {
  WinCounts w(3);
  w.Record(0, 1);
  w.Record(1, 2);
  CHECK_FALSE(StronglyConnected(w));
  const BtmState s = BtmFit(w);
  CHECK(s.smoothed);
  CHECK(s.converged);
  for (double g : s.gamma) CHECK(std::isfinite(g));
  CHECK(BtmRanks(s) == std::vector<int>{1, 2, 3});

  // never-compared items keep their initial score
  WinCounts partial(3);
  partial.Record(0, 1);
  partial.Record(1, 0);
  partial.Record(0, 1);
  const BtmState p = BtmFit(partial);
  CHECK(p.smoothed);
  CHECK(p.gamma[2] == doctest::Approx(1.0 / 3));
  CHECK(p.gamma[0] > p.gamma[1]);

  const BtmState fresh = BtmFit(WinCounts(4));
  for (double g : fresh.gamma) CHECK(g == 0.25);
}

TEST_CASE("recovers the best item of the five-item population") {
  const double mu[5] = {71, 48, 36, 77, 37};
  int top_is_best = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(kernels::MixSeed(seed, 5));
    WinCounts w(5);
    for (int round = 0; round < 20; ++round) {
      for (ItemId i = 0; i < 5; ++i) {
        for (ItemId j = i + 1; j < 5; ++j) {
          const double xi = mu[i] + 5 * StandardNormal(rng);
          const double xj = mu[j] + 5 * StandardNormal(rng);
          if (xi > xj) w.Record(i, j); else w.Record(j, i);
        }
      }
    }
    top_is_best += BtmRanks(BtmFit(w))[3] == 1;
  }
  CHECK(top_is_best > 25);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(WinCounts(2, {0, 1, 1}), Error);
  CHECK_THROWS_AS(WinCounts(2, {1, 0, 0, 0}), Error);
  CHECK_THROWS_AS(WinCounts(2, {0, -1, 0, 0}), Error);
  WinCounts w(2);
  CHECK_THROWS_AS(w.Record(0, 0), Error);
  CHECK_THROWS_AS(w.Record(0, 4), Error);
  CHECK_THROWS_AS(BtmFit(WinCounts(0)), Error);
  CHECK_THROWS_AS(BtmFit(w, {.initial_gamma = {1.0}}), Error);
  CHECK_THROWS_AS(BtmFit(w, {.initial_gamma = {1.0, -1.0}}), Error);
  CHECK_THROWS_AS(BtmLogLikelihood({1.0}, w), Error);
}

#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cj/error.hpp"
#include "cj/kernels.hpp"
#include "cj/selectors.hpp"

using namespace cj;

TEST_CASE("selector names") {
  CHECK(ParseSelectorKind("nrp") == SelectorKind::kNrp);
  CHECK(SelectorKindName(SelectorKind::kEntropy) == "entropy");
  CHECK_THROWS_AS(ParseSelectorKind("greedy"), Error);
  CHECK_THROWS_AS(Selector(SelectorKind::kRandom, 1, 0), Error);
}

TEST_CASE("random selection") {
  const PreferenceMatrix two(2);
  Selector s2(SelectorKind::kRandom, 2, 3);
  for (int t = 0; t < 20; ++t) CHECK(s2.Next(two) == Pair{0, 1});

  const PreferenceMatrix m(5);
  Selector s(SelectorKind::kRandom, 5, 11);
  std::map<Pair, int> counts;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const Pair p = s.Next(m);
    CHECK(p.first < p.second);
    ++counts[p];
  }
  REQUIRE(counts.size() == 10);
  double chi2 = 0.0;
  for (const auto& [pair, c] : counts) {
    CHECK(std::fabs(c / double(draws) - 0.1) <= 0.01);
    chi2 += std::pow(c - draws / 10.0, 2) / (draws / 10.0);
  }
  // 99.9% quantile of chi-square with 9 degrees of freedom
  CHECK(chi2 < 27.877);

  Selector a(SelectorKind::kRandom, 5, 11);
  Selector b(SelectorKind::kRandom, 5, 11);
  for (int t = 0; t < 50; ++t) CHECK(a.Next(m) == b.Next(m));
}

TEST_CASE("NRP rounds are permutations of all pairs") {
  const PreferenceMatrix m3(3);
  Selector s(SelectorKind::kNrp, 3, 4);
  const std::set<Pair> all3{{0, 1}, {0, 2}, {1, 2}};
  for (int round = 0; round < 2; ++round) {
    std::multiset<Pair> seen;
    for (int t = 0; t < 3; ++t) seen.insert(s.Next(m3));
    CHECK(seen == std::multiset<Pair>(all3.begin(), all3.end()));
  }

  const PreferenceMatrix m5(5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Selector s5(SelectorKind::kNrp, 5, seed);
    std::set<Pair> seen;
    for (int t = 0; t < 10; ++t) seen.insert(s5.Next(m5));
    CHECK(seen.size() == 10);
  }
}

TEST_CASE("selector state is reproducible from seed and step") {
  PreferenceMatrix m(6);
  for (SelectorKind kind : {SelectorKind::kRandom, SelectorKind::kNrp, SelectorKind::kEntropy}) {
    Selector sequential(kind, 6, 21);
    PreferenceMatrix state(6);
    for (std::uint64_t step = 0; step < 40; ++step) {
      Selector resumed = Selector::AtStep(kind, 6, 21, step);
      CHECK(resumed.step() == sequential.step());
      CHECK(resumed.nrp_queue() == sequential.nrp_queue());
      const Pair expected = sequential.Next(state);
      CHECK(resumed.Next(state) == expected);
      state.Record(step % 3 ? expected.first : expected.second,
                   step % 3 ? expected.second : expected.first);
    }
  }
}

TEST_CASE("entropy selection") {
  PreferenceMatrix m(5);
  // fresh state: every pair ties at zero entropy and each is reachable
  std::set<Pair> first_picks;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Selector s(SelectorKind::kEntropy, 5, seed);
    first_picks.insert(s.Next(m));
  }
  CHECK(first_picks.size() == 10);

  CHECK(BetaEntropy(m.cell(0, 1)) == 0.0);
  m.Record(0, 1);
  CHECK(BetaEntropy(m.cell(0, 1)) == doctest::Approx(oracle::BetaEntropyQuadrature(2, 1)).epsilon(1e-6));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Selector s(SelectorKind::kEntropy, 5, seed);
    CHECK_FALSE(s.Next(m) == Pair{0, 1});
  }

  Rng r1(5);
  Rng r2(5);
  CHECK(SelectEntropy(m, r1) == SelectEntropy(m, r2));
}

TEST_CASE("judgements reduce entropy on average") {
  int checked = 0;
  for (int a = 1; a <= 100; ++a) {
    for (int b = 1; a + b <= 1000; b += (b < 20 ? 1 : 37)) {
      PreferenceCell cell{double(a), double(b), a - 1, b - 1};
      const double h = BetaEntropy(cell);
      PreferenceCell win_i = cell;
      win_i.alpha += 1;
      PreferenceCell win_j = cell;
      win_j.beta += 1;
      // evidence for the side already favoured always concentrates the posterior
      if (a >= b) CHECK(BetaEntropy(win_i) < h);
      if (b >= a) CHECK(BetaEntropy(win_j) < h);
      // expected posterior entropy under the predictive distribution
      const double pi = cell.alpha / (cell.alpha + cell.beta);
      CHECK(pi * BetaEntropy(win_i) + (1 - pi) * BetaEntropy(win_j) < h);
      ++checked;
    }
  }
  CHECK(checked > 1000);

  // a surprising judgement can raise one cell's entropy
  CHECK(BetaEntropy({2, 2, 1, 1}) > BetaEntropy({2, 1, 1, 0}));
}

TEST_CASE("entropy selection drives maximum entropy down faster than random") {
  const std::size_t n = 5;
  const int budget = 50;
  std::vector<double> entropy_final;
  std::vector<double> random_final;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (SelectorKind kind : {SelectorKind::kEntropy, SelectorKind::kRandom}) {
      PreferenceMatrix m(n);
      Selector s(kind, n, seed);
      Rng duel(kernels::MixSeed(seed, 99));
      for (int t = 0; t < budget; ++t) {
        const Pair p = s.Next(m);
        // item with smaller id is the better one with probability 0.8
        if (UnitDouble(duel) < 0.8) m.Record(p.first, p.second); else m.Record(p.second, p.first);
      }
      const auto grid = kernels::EntropyGridSerial(m);
      const double max_h = *std::max_element(grid.begin(), grid.end());
      (kind == SelectorKind::kEntropy ? entropy_final : random_final).push_back(max_h);
    }
  }
  std::sort(entropy_final.begin(), entropy_final.end());
  std::sort(random_final.begin(), random_final.end());
  CHECK(entropy_final[10] < random_final[10]);
}

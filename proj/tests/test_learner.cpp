#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arlearn/learner.hpp"
#include "arlearn/numeric.hpp"
#include "oracles.hpp"

using namespace arlearn;

TEST(Beta, Examples) {
  EXPECT_NEAR(beta(800, 0.1), std::log(64000.0) / 800.0, 1e-16);
  EXPECT_NEAR(beta(800, 0.1), 0.013833297952927261, 1e-15);
  EXPECT_NEAR(beta(8, 64.0 / std::exp(8.0)), 1.0, 1e-14);
  EXPECT_NEAR(beta(27379, 0.1), 5.332392786383667e-4, 1e-15);
  EXPECT_THROW(beta(10, 0.0), InvalidInput);
  EXPECT_THROW(beta(10, 1.0), InvalidInput);
  EXPECT_THROW(beta(0, 0.5), InvalidInput);
}

TEST(Shade, Examples) {
  for (double b : {0.01, 0.1, 0.3}) EXPECT_DOUBLE_EQ(shade(0.0, ShadeParams(b, ShadeProfile::empirical)), std::min(1.0, 4 * b));
  EXPECT_NEAR(shade(0.5, ShadeParams(0.01, ShadeProfile::empirical)), 0.6107106781186548, 1e-15);
  for (double b : {1e-4, 0.01, 1.0 / 7.0}) EXPECT_EQ(shade(1.0 - 7.0 * b, ShadeParams(b, ShadeProfile::analysis)), 1.0);
  EXPECT_EQ(shade(0.9, ShadeParams(0.01, ShadeProfile::analysis)), 1.0);
  EXPECT_THROW(shade(1.1, ShadeParams(0.01, ShadeProfile::analysis)), InvalidInput);
  EXPECT_THROW(ShadeParams(-0.1, ShadeProfile::analysis), InvalidInput);
}

TEST(Shade, MonotoneAboveIdentityAndOrdered) {
  for (double b : {1e-4, 1e-2, 0.2}) {
    const ShadeParams se(b, ShadeProfile::empirical), sf(b, ShadeProfile::analysis);
    double pe = 0.0, pf = 0.0;
    for (double x : linear_grid(0.0, 1.0, 10'000)) {
      const double e = shade(x, se), f = shade(x, sf);
      EXPECT_GE(e, x);
      EXPECT_GE(f, e);
      if (f < 1.0) {
        EXPECT_GT(f, e);
      }
      EXPECT_GE(e, pe);
      EXPECT_GE(f, pf);
      pe = e;
      pf = f;
    }
    EXPECT_EQ(shade(1.0, se), 1.0);
    EXPECT_EQ(shade(1.0, sf), 1.0);
  }
}

TEST(ShadedCdf, PositiveBelowSupport) {
  const auto base = Cdf::analytic(MarginalDist::uniform(1, 2));
  EXPECT_NEAR(shaded_cdf(base, ShadeParams(0.01, ShadeProfile::analysis))(0.5), 0.07, 1e-15);
  EXPECT_NEAR(shaded_cdf(base, ShadeParams(0.01, ShadeProfile::empirical))(0.5), 0.04, 1e-15);
}

TEST(ShadedCdf, IdentityAtZeroBeta) {
  const auto base = Cdf::empirical({0.2, 0.4, 0.7});
  const auto s = shaded_cdf(base, ShadeParams(0.0, ShadeProfile::empirical));
  EXPECT_EQ(s.atoms(), base.atoms());
  for (double v : linear_grid(0.0, 1.0, 1001)) {
    EXPECT_EQ(s(v), base(v));
    EXPECT_EQ(s.eval_right(v), base.eval_right(v));
  }
}

TEST(ShadedCdf, SaturatedBetaIsAllOnes) {
  const auto s = shaded_cdf(Cdf::empirical({0.5}), ShadeParams(0.3, ShadeProfile::empirical));
  EXPECT_EQ(s.kind(), CdfKind::all_ones);
  EXPECT_EQ(s(0.0), 1.0);
}

TEST(RequiredSamples, Parts) {
  const auto p1 = required_samples(Setting::unit_support, 0.1, 0.1);
  EXPECT_EQ(p1.m, 27379u);
  EXPECT_LE(p1.beta, 0.01 / 12.0);
  EXPECT_EQ(required_samples(Setting::bounded_1h, 0.2, 0.1, 4.0).m, 133896u);
  EXPECT_EQ(required_samples(Setting::regular, 0.1, 0.1).m, 99131561u);
  EXPECT_EQ(required_samples(Setting::mhr, 0.1, 0.1).m, 5388501u);
  EXPECT_THROW(required_samples(Setting::unit_support, 1.0, 0.1), InvalidInput);
  EXPECT_THROW(required_samples(Setting::bounded_1h, 0.1, 0.1), InvalidInput);
}

TEST(RequiredSamples, ThresholdsHoldOverSweep) {
  for (double eps : {0.05, 0.1, 0.2, 0.4})
    for (double delta : {0.01, 0.1, 0.5})
      for (Setting s : {Setting::unit_support, Setting::regular, Setting::mhr}) {
        const auto req = required_samples(s, eps, delta);
        EXPECT_LE(req.beta, req.threshold) << to_string(s);
      }
}

TEST(RequiredSamples, ThresholdsMet) {
  EXPECT_TRUE(thresholds_met(10, 0.1, 0.1).empty());
  const auto met = thresholds_met(27379, 0.1, 0.1);
  ASSERT_EQ(met.size(), 1u);
  EXPECT_EQ(met[0], Setting::unit_support);
}

TEST(LearnReserve, ExampleWithoutShading) {
  const auto s = SampleMatrix::from_rows({{0.8, 0.2}, {0.5, 0.4}, {0.9, 0.7}});
  const auto out = learn_reserve(s, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(out.reserve, 0.5);
  EXPECT_NEAR(out.shaded_revenue, 0.5666666666666667, 1e-12);
  EXPECT_FALSE(out.degenerate);
  EXPECT_EQ(out.m, 3u);
  EXPECT_EQ(out.n, 2u);
}

TEST(LearnReserve, DegenerateBeta) {
  const auto s = SampleMatrix::from_rows({{0.8, 0.2}, {0.5, 0.4}, {0.9, 0.7}});
  const auto out = learn_reserve(s, 0.5);
  EXPECT_NEAR(out.beta, std::log(48.0) / 3.0, 1e-15);
  EXPECT_TRUE(out.degenerate);
  EXPECT_EQ(out.reserve, 0.0);
}

TEST(LearnReserve, IdenticalRows) {
  // Only candidates 0, 3 and 5 exist; the shaded revenue at each is a
  // closed form in beta, and the learner picks their argmax.
  for (std::size_t m : {50u, 400u, 5000u}) {
    const auto s = SampleMatrix::from_rows(std::vector<std::vector<double>>(m, {5.0, 3.0}));
    const auto out = learn_reserve(s, 0.1);
    const double b = beta(m, 0.1);
    const double below = std::min(1.0, 4 * b);  // shaded CDF below an atom
    const auto at = [&](double r) {
      const double f1 = r > 5.0 ? 1.0 : below;
      // integral of (1 - shaded f2) from r: (1 - 4 beta) on [r, 3)
      const double tail = std::max(0.0, 3.0 - r) * (1.0 - below);
      return r * (1.0 - f1) + tail;
    };
    const double best = std::max({at(0.0), at(3.0), at(5.0)});
    EXPECT_NEAR(out.shaded_revenue, best, 1e-12);
    EXPECT_TRUE(out.reserve == 0.0 || out.reserve == 3.0 || out.reserve == 5.0);
    EXPECT_NEAR(at(out.reserve), best, 1e-12);
  }
}

TEST(LearnReserve, PermutationInvariant) {
  Rng rng(17);
  std::vector<std::vector<double>> rows(60, std::vector<double>(3));
  for (auto& r : rows)
    for (auto& v : r) v = std::round(uniform01(rng) * 100.0) / 100.0;
  const auto base = learn_reserve(SampleMatrix::from_rows(rows), 0.1, 0.002);
  auto shuffled = rows;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (auto& r : shuffled) std::shuffle(r.begin(), r.end(), rng);
  const auto again = learn_reserve(SampleMatrix::from_rows(shuffled), 0.1, 0.002);
  EXPECT_EQ(base.reserve, again.reserve);
  EXPECT_EQ(base.shaded_revenue, again.shaded_revenue);
}

TEST(LearnReserve, ZeroBetaEqualsEmpiricalMaximization) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> rows(1 + rng() % 20, std::vector<double>(2));
    std::vector<std::pair<double, double>> pairs;
    for (auto& r : rows) {
      for (auto& v : r) v = static_cast<double>(rng() % 1001) / 1000.0;
      pairs.push_back({std::max(r[0], r[1]), std::min(r[0], r[1])});
    }
    const auto out = learn_reserve(SampleMatrix::from_rows(rows), 0.1, 0.0);
    // candidates: 0 and every observed value
    double best = 0.0, best_r = 0.0;
    std::vector<double> cands{0.0};
    for (const auto& [a, b] : pairs) cands.insert(cands.end(), {a, b});
    std::sort(cands.begin(), cands.end());
    for (double r : cands) {
      const double v = oracle::empirical_revenue(pairs, r);
      if (v > best + 1e-12) {
        best = v;
        best_r = r;
      }
    }
    EXPECT_NEAR(out.shaded_revenue, best, 1e-12);
    EXPECT_DOUBLE_EQ(out.reserve, best_r);
  }
}

TEST(LearnReserve, ReserveIsZeroOrAnAtom) {
  Rng rng(29);
  std::vector<std::vector<double>> rows(200, std::vector<double>(4));
  for (auto& r : rows)
    for (auto& v : r) v = uniform01(rng);
  const auto s = SampleMatrix::from_rows(rows);
  const auto out = learn_reserve(s, 0.1, 0.001);
  bool found = out.reserve == 0.0;
  for (const auto& t : s.top_two()) found = found || t.first == out.reserve || t.second == out.reserve;
  EXPECT_TRUE(found);
}

TEST(SampleMatrix, Validation) {
  EXPECT_THROW(SampleMatrix(0, 2, {}), InvalidInput);
  EXPECT_THROW(SampleMatrix(1, 2, {0.1}), InvalidInput);
  EXPECT_THROW(SampleMatrix(1, 2, {0.1, -0.2}), InvalidInput);
  EXPECT_THROW(SampleMatrix::from_rows({{0.1, 0.2}, {0.3}}), InvalidInput);
}

TEST(LearnReserve, SingleBidderUsesZeroSecond) {
  const auto s = SampleMatrix::from_rows({{0.3}, {0.6}, {0.9}});
  const auto out = learn_reserve(s, 0.1, 0.0);
  // posted price: r * #(x >= r) / 3, best at 0.6 (0.4) vs 0.3 (0.3), 0.9 (0.3)
  EXPECT_DOUBLE_EQ(out.reserve, 0.6);
  EXPECT_NEAR(out.shaded_revenue, 0.4, 1e-15);
}

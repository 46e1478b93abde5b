#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "arlearn/analysis.hpp"
#include "oracles.hpp"

using namespace arlearn;

namespace {

InstancePair normalized(const ProductInstance& inst) { return normalize_instance(top_two_cdfs(inst)).pair; }

std::vector<ProductInstance> regular_instances() {
  return {
      ProductInstance::iid(MarginalDist::uniform(0, 1), 2),
      ProductInstance::iid(MarginalDist::exponential(1.0), 3),
      ProductInstance({MarginalDist::uniform(0, 2), MarginalDist::exponential(0.5)}),
      ProductInstance::iid(MarginalDist::truncated_pareto(2.0, 1.0, 30.0), 2),
      ProductInstance({MarginalDist::uniform(1, 3), MarginalDist::uniform(0.5, 4), MarginalDist::uniform(0, 1)}),
  };
}

}  // namespace

TEST(CheckShading, Passes) {
  for (double b : {1e-4, 1e-2, 0.2}) {
    const auto r = check_shading(b);
    EXPECT_TRUE(r.passed) << b << " " << r.worst_margin;
    EXPECT_EQ(r.name, "shading");
  }
}

TEST(Truncation, DominatedAndCapped) {
  const auto pair = normalized(ProductInstance::iid(MarginalDist::exponential(1.0), 2));
  const auto t = truncate_pair(pair, 0.2);
  for (double v : linear_grid(0.0, 30.0, 300)) {
    EXPECT_GE(t.f1(v), pair.f1(v));
    EXPECT_GE(t.f2(v), pair.f2(v));
  }
  EXPECT_LE(t.f1.support_supremum(), 20.0);
  EXPECT_THROW(truncate_pair(pair, 0.0), InvalidInput);
}

TEST(Truncation, SupportAndLossOnRegularInstances) {
  for (const auto& inst : regular_instances()) {
    const auto pair = normalized(inst);
    for (double eps : {0.1, 0.2, 0.4}) {
      EXPECT_TRUE(check_truncation_support(pair, eps).passed) << eps;
      const auto loss = check_truncation_revenue_loss(pair, eps);
      EXPECT_TRUE(loss.passed) << eps << " " << loss.worst_margin;
    }
  }
}

TEST(Truncation, RequiresNormalization) {
  const auto raw = top_two_cdfs(ProductInstance::iid(MarginalDist::uniform(0, 1), 2));
  EXPECT_THROW(check_truncation_support(raw, 0.1), PreconditionError);
  EXPECT_THROW(check_equal_revenue_bounds(raw, {1.0}), PreconditionError);
}

TEST(EqualRevenueBounds, HoldOnRegularInstances) {
  for (const auto& inst : regular_instances()) {
    const auto pair = normalized(inst);
    const auto r = check_equal_revenue_bounds(pair, check_grid(1e-3, pair.cap()));
    EXPECT_TRUE(r.passed) << r.worst_margin;
  }
}

TEST(TriangularBound, ExponentialAndUniform) {
  for (double rbar : {0.5, 1.0, 2.0}) {
    EXPECT_TRUE(check_triangular_bound(MarginalDist::exponential(1.0), rbar, linear_grid(0.0, rbar, 200)).passed);
    EXPECT_TRUE(check_triangular_bound(MarginalDist::uniform(0, 3), rbar, linear_grid(0.0, rbar, 200)).passed);
  }
  EXPECT_THROW(check_triangular_bound(MarginalDist::uniform(1, 2), 0.5, {0.25}), PreconditionError);
}

TEST(MhrTails, NormalizedExponential) {
  const auto r = check_mhr_tails(ProductInstance::iid(MarginalDist::exponential(1.0), 3),
                                 linear_grid(std::numbers::e, 60.0, 512));
  EXPECT_TRUE(r.passed) << r.worst_margin;
}

TEST(MhrTails, UniformAndMixed) {
  const auto r = check_mhr_tails(ProductInstance({MarginalDist::uniform(0, 1), MarginalDist::exponential(2.0)}),
                                 linear_grid(std::numbers::e, 60.0, 256));
  EXPECT_TRUE(r.passed) << r.worst_margin;
}

TEST(MhrTails, RejectsNonMhr) {
  EXPECT_THROW(check_mhr_tails(ProductInstance::iid(MarginalDist::truncated_pareto(1.5, 1.0, 100.0), 2),
                               linear_grid(std::numbers::e, 60.0, 16)),
               PreconditionError);
}

TEST(LambdaRegularTail, BoundFailsJustAboveU) {
  // Single generalized-Pareto bidder: the stated tail bound is violated near v = 5.
  const auto r = check_lambda_regular_tail(ProductInstance::iid(MarginalDist::generalized_pareto(0.5, 1.0), 1), 0.5,
                                           2.0, check_grid(2.0, 200.0, 512));
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.worst_margin, -0.0866, 2e-3);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(r.witness->value, 5.0, 0.3);
}

TEST(LambdaRegularTail, InputValidation) {
  const auto inst = ProductInstance::iid(MarginalDist::generalized_pareto(0.5, 1.0), 1);
  EXPECT_THROW(check_lambda_regular_tail(inst, 1.0, 2.0, {2.0}), InvalidInput);
  EXPECT_THROW(check_lambda_regular_tail(inst, 0.5, 1.0, {2.0}), InvalidInput);
}

TEST(Concentration, UniformTwoBidders) {
  const auto inst = ProductInstance::iid(MarginalDist::uniform(0, 1), 2);
  ConcentrationConfig cfg;
  cfg.m = 1000;
  cfg.trials = 60;
  cfg.seed = 9;
  cfg.check_revenue = true;
  const auto res = run_concentration(JointSampler::product(inst), top_two_cdfs(inst), cfg);
  EXPECT_LE(res.frequency, res.allowed);
  EXPECT_TRUE(res.report.passed);
  for (const auto& t : res.trials) {
    if (!t.bound_holds) continue;
    EXPECT_TRUE(t.shaded_below_truth);
    EXPECT_TRUE(t.shaded_above_analysis);
    ASSERT_TRUE(t.revenue_sandwich.has_value());
    EXPECT_TRUE(*t.revenue_sandwich);
  }
}

TEST(Concentration, Deterministic) {
  const auto inst = ProductInstance::iid(MarginalDist::exponential(1.0), 2);
  ConcentrationConfig cfg;
  cfg.m = 200;
  cfg.trials = 10;
  cfg.seed = 4;
  const auto js = JointSampler::product(inst);
  const auto a = run_concentration(js, top_two_cdfs(inst), cfg);
  const auto b = run_concentration(js, top_two_cdfs(inst), cfg);
  for (std::size_t t = 0; t < a.trials.size(); ++t) EXPECT_EQ(a.trials[t].worst_slack, b.trials[t].worst_slack);
}

TEST(Concentration, CorrelatedReference) {
  const auto js = JointSampler::correlated(common_value_generator(3, 1.0, 0.5));
  const auto truth = reference_pair(js, 1, 200'000);
  ConcentrationConfig cfg;
  cfg.m = 500;
  cfg.trials = 20;
  const auto res = run_concentration(js, truth, cfg);
  EXPECT_LE(res.frequency, res.allowed);
}

TEST(Bernstein, ReportShape) {
  const auto inst = ProductInstance::iid(MarginalDist::uniform(0, 1), 3);
  const auto r = check_bernstein(JointSampler::product(inst), top_two_cdfs(inst), 400, 0.1, 30, 2);
  EXPECT_EQ(r.name, "concentration");
  EXPECT_TRUE(r.passed);
}

TEST(RevenueGap, UnitSupport) {
  const auto r = check_revenue_gap({}, ProductInstance::iid(MarginalDist::uniform(0, 1), 2), 0.1, 0.1);
  EXPECT_TRUE(r.passed) << r.worst_margin;
}

TEST(RevenueGap, BoundedAndMhr) {
  GapSetting bounded{Setting::bounded_1h, 4.0};
  EXPECT_TRUE(check_revenue_gap(bounded, ProductInstance({MarginalDist::uniform(1, 4), MarginalDist::uniform(1, 3)}),
                                0.2, 0.1)
                  .passed);
  GapSetting mhr{Setting::mhr, 1.0};
  EXPECT_TRUE(check_revenue_gap(mhr, ProductInstance::iid(MarginalDist::exponential(1.0), 2), 0.1, 0.1).passed);
}

TEST(RevenueGap, PreconditionsAndOverride) {
  EXPECT_THROW(check_revenue_gap({}, ProductInstance::iid(MarginalDist::uniform(0, 2), 2), 0.1, 0.1),
               PreconditionError);
  // Saturated shading: the shaded instance earns nothing.
  const auto r = check_revenue_gap({}, ProductInstance::iid(MarginalDist::uniform(0, 1), 2), 0.1, 0.1, 0.3);
  EXPECT_FALSE(r.passed);
}

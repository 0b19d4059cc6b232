#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "onebit/hardness.hpp"
#include "onebit/refine.hpp"

using namespace onebit;

namespace {

// Independent bias-bound oracle, written out term by term.
double bias_oracle(double k, double sigma, double t) {
  const double g = t - 4.0 * sigma;
  return std::pow(sigma, k) / std::pow(g, k - 1.0) + 4.0 * sigma * std::pow(sigma, k) / std::pow(g, k);
}

double sample_variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(Cutoff, Examples) {
  EXPECT_EQ(cutoff_threshold(FamilyParams{2.0, 64.0, 1.0}, 0.125), 32.0);
  EXPECT_EQ(cutoff_threshold(FamilyParams{1.5, 64.0, 1.0}, 0.25), 128.0);
  EXPECT_EQ(cutoff_threshold(FamilyParams{3.0, 64.0, 1.0}, 0.05), 16.0);
  EXPECT_NEAR(bias_oracle(2.0, 1.0, 16.0), 1.0 / 12 + 4.0 / 144, 1e-15);
  EXPECT_NEAR(bias_oracle(1.5, 1.0, 128.0), 0.0927, 5e-4);
}

TEST(Cutoff, IsSmallestAdmissiblePowerOfTwo) {
  for (double k : {1.2, 1.5, 2.0, 2.5, 3.0, 4.0}) {
    for (double ratio : {4.5, 8.0, 32.0, 100.0}) {
      const FamilyParams p{k, 1e6, 2.0};
      const double eps = p.sigma / ratio;
      const double t = cutoff_threshold(p, eps);
      const double kk = std::min(k, 3.0);
      const int j = static_cast<int>(std::lround(std::log2(t / p.sigma)));
      EXPECT_EQ(std::ldexp(p.sigma, j), t);
      EXPECT_GE(j, 4);
      EXPECT_LE(bias_oracle(kk, p.sigma, t), eps / 2);
      if (j > 4) {
        EXPECT_GT(bias_oracle(kk, p.sigma, t / 2), eps / 2);
      }
    }
  }
}

TEST(Plan, AllocationExamples) {
  const auto p2 = build_plan(FamilyParams{2.0, 64.0, 1.0}, 0.125, 0.05, AllocationProfile::Empirical);
  EXPECT_EQ(p2.t, 32.0);
  EXPECT_EQ(p2.i_max, 5);
  EXPECT_EQ(p2.K, 30u);
  ASSERT_EQ(p2.regions.size(), 10u);
  for (const auto& r : p2.regions) EXPECT_EQ(r.n, 1024u);
  EXPECT_EQ(p2.total_samples(), 1'228'800u);

  const auto p3 = build_plan(FamilyParams{3.0, 64.0, 1.0}, 0.125, 0.05, AllocationProfile::Empirical);
  EXPECT_EQ(p3.regions[0].n, 512u);
  EXPECT_EQ(p3.regions[1].n, 256u);
  EXPECT_EQ(p3.regions[2].n, 128u);
  EXPECT_LT(p3.total_samples(), p2.total_samples());

  EXPECT_EQ(batch_count(0.05), 30u);
  EXPECT_DOUBLE_EQ(allocation_constant(AllocationProfile::ProofSafe, 2.0), 256.0 * (3 * 64 + 16));
  EXPECT_THROW(parse_profile("fast"), std::invalid_argument);
}

TEST(Plan, RegionsTileTheWindow) {
  const FamilyParams params{1.7, 100.0, 0.5};
  const auto plan = build_plan(params, 0.01, 0.1, AllocationProfile::Empirical);
  EXPECT_EQ(plan.t, std::ldexp(params.sigma, plan.i_max));
  double right_end = 0.0;
  for (int i = 0; i < plan.i_max; ++i) {
    const auto& r = plan.regions[static_cast<std::size_t>(i)];
    const auto& l = plan.regions[static_cast<std::size_t>(i + plan.i_max)];
    EXPECT_EQ(r.index, i + 1);
    EXPECT_EQ(l.index, -(i + 1));
    EXPECT_EQ(r.a, right_end);
    EXPECT_EQ(r.b, std::ldexp(params.sigma, i + 1));
    EXPECT_EQ(l.a, r.a);
    EXPECT_EQ(l.b, r.b);
    right_end = r.b;
  }
  EXPECT_EQ(right_end, plan.t);
}

TEST(Plan, PredictCostMatchesArithmetic) {
  const FamilyParams params{2.0, 64.0, 1.0};
  const auto c = predict_cost(params, TargetSpec{0.125, 0.05});
  EXPECT_EQ(c.refinement, 1'228'800u);
  EXPECT_EQ(c.localization, median_search_plan(params, 0.05).total_samples());
  EXPECT_EQ(c.total, c.localization + c.refinement);
  EXPECT_EQ(predict_cost(params, TargetSpec{4.0, 0.05}).refinement, 0u);
}

TEST(Plan, ScalingRatios) {
  auto ratio = [](double k) {
    const FamilyParams p{k, 1e6, 1.0};
    const double a = static_cast<double>(predict_cost(p, TargetSpec{1.0 / 128, 0.1}).refinement);
    const double b = static_cast<double>(predict_cost(p, TargetSpec{1.0 / 64, 0.1}).refinement);
    return a / b;
  };
  const double r15 = ratio(1.5), r2 = ratio(2.0), r3 = ratio(3.0);
  EXPECT_GE(r15, 6.0);
  EXPECT_LE(r15, 10.0);
  EXPECT_GT(r2, 4.0);
  EXPECT_LE(r2, 5.0);
  EXPECT_GE(r3, 3.4);
  EXPECT_LE(r3, 4.6);
}

TEST(Region, AnalyticExample) {
  const auto d = Distribution::discrete({1.0, 5.0}, {0.3, 0.7});
  const Region r{1, 0.0, 2.0, 1};
  const auto terms = analytic_region_terms(d, r);
  EXPECT_NEAR(terms.p_a, 0.15, 1e-15);
  EXPECT_NEAR(terms.p_b, 0.15, 1e-15);
  EXPECT_NEAR(terms.mu, 0.3, 1e-15);
}

TEST(Region, PointMassOutsideGivesZero) {
  SampleAgent agent(Distribution::point_mass(-5.0), Rng{1});
  Channel ch(agent, Rng{2});
  const auto e = estimate_region(ch, Region{1, 0.0, 2.0, 100}, 0.0);
  EXPECT_EQ(e.p_a_hat, 0.0);
  EXPECT_EQ(e.p_b_hat, 0.0);
  EXPECT_EQ(e.mu_hat, 0.0);
  EXPECT_EQ(e.samples, 400u);
  EXPECT_EQ(ch.transcript().total(), 400u);
}

TEST(Region, Unbiased) {
  const auto d = Distribution::discrete({1.0, 5.0}, {0.3, 0.7});
  SampleAgent agent(d, Rng{3});
  Channel ch(agent, Rng{4});
  const int runs = 10'000;
  std::vector<double> est;
  for (int i = 0; i < runs; ++i) est.push_back(estimate_region(ch, Region{1, 0.0, 2.0, 10}, 0.0).mu_hat);
  const double m = std::accumulate(est.begin(), est.end(), 0.0) / runs;
  EXPECT_NEAR(m, 0.3, 4 * std::sqrt(sample_variance(est) / runs));
}

TEST(Region, LeftRegionUnbiasedAroundShiftedCenter) {
  const auto d = Distribution::discrete({1.5, 2.2, 7.0}, {0.25, 0.5, 0.25});
  const double center = 3.0;
  const Region r{-2, 1.0, 2.0, 20};  // centered (-2, -1] holds the atom at -1.5
  SampleAgent agent(d, Rng{5});
  Channel ch(agent, Rng{6});
  const int runs = 10'000;
  std::vector<double> est;
  for (int i = 0; i < runs; ++i) est.push_back(estimate_region(ch, r, center).mu_hat);
  const double m = std::accumulate(est.begin(), est.end(), 0.0) / runs;
  EXPECT_NEAR(analytic_region_terms(d.shifted(center), r).mu, -0.375, 1e-15);
  EXPECT_NEAR(m, -0.375, 4 * std::sqrt(sample_variance(est) / runs));
}

TEST(BaseEstimate, PointMassAtCenterIsExact) {
  const FamilyParams params{2.0, 64.0, 1.0};
  const auto plan = build_plan(params, 0.25, 0.1, AllocationProfile::Empirical);
  SampleAgent agent(Distribution::point_mass(2.5), Rng{1});
  Channel ch(agent, Rng{2});
  EXPECT_EQ(base_estimate(ch, plan, 2.5), 2.5);
  EXPECT_EQ(ch.transcript().total(), plan.samples_per_batch());
}

TEST(BaseEstimate, UnbiasedOnPairMember) {
  const PairGrid g = make_pair_grid(4.0, 1.0, 0.1);
  const auto d = g.member(2, 1);
  const FamilyParams params{2.0, 4.0, 1.0};
  const auto plan = build_plan(params, 0.25, 0.1, AllocationProfile::Empirical);
  // All atoms lie inside the window around center 0, so the clipped mean is the mean.
  ExactLawAgent agent(d, Rng{7});
  Channel ch(agent, Rng{8});
  const int runs = 2000;
  std::vector<double> est;
  for (int i = 0; i < runs; ++i) est.push_back(base_estimate(ch, plan, 0.0));
  const double m = std::accumulate(est.begin(), est.end(), 0.0) / runs;
  EXPECT_NEAR(m, g.member_mean(2, 1), 4 * std::sqrt(sample_variance(est) / runs));
}

TEST(BaseEstimate, ProofSafeVarianceWithinTarget) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const double eps = 0.5;
  const auto plan = build_plan(params, eps, 0.1, AllocationProfile::ProofSafe);
  const auto d = Distribution::gaussian_moment_tight(0.7, params.sigma, params.k);
  ExactLawAgent agent(d, Rng{9});
  Channel ch(agent, Rng{10});
  std::vector<double> est;
  for (int i = 0; i < 400; ++i) est.push_back(base_estimate(ch, plan, 0.0));
  EXPECT_LE(sample_variance(est), 1.1 * eps * eps / 16);
}

TEST(Decomposition, RegionsPlusTailRecoverMean) {
  const std::vector<Distribution> laws = {
      Distribution::discrete({-40.0, -3.3, 0.0, 0.5, 2.0, 17.0}, {0.01, 0.2, 0.1, 0.39, 0.2, 0.1}),
      Distribution::discrete({-1.0, 1.0}, {0.5, 0.5}),
      make_k2_pair(1.0, 1.0 / 48, 16.0).mixture()};
  for (const auto& d : laws) {
    for (double ratio : {4.0, 8.0, 16.0}) {
      const FamilyParams params{2.0, 64.0, 1.0};
      const auto plan = build_plan(params, 1.0 / ratio, 0.1, AllocationProfile::Empirical);
      double regions = 0.0;
      for (const auto& r : plan.regions) regions += analytic_region_terms(d, r).mu;
      // Oracle: direct atom sum over the open window (-t, t).
      double inside = 0.0, total = 0.0;
      for (const auto& [x, p] : d.atoms()) {
        total += x * p;
        if (std::fabs(x) < plan.t) inside += x * p;
      }
      EXPECT_NEAR(regions, inside, 1e-12);
      EXPECT_NEAR(regions + d.outside_window_mean(plan.t), total, 1e-12);
      EXPECT_NEAR(d.mean(), total, 1e-12);
    }
  }
}

TEST(Decomposition, TruncationBiasWithinHalfEps) {
  const FamilyParams params{1.5, 64.0, 1.0};
  for (double mu : {-4.0, 0.0, 3.9}) {
    const auto d = Distribution::two_sided_pareto(1.5, 1.0, mu, 1.9);
    for (double eps : {0.25, 0.1}) {
      const double t = cutoff_threshold(params, eps);
      EXPECT_LE(std::fabs(d.outside_window_mean(t)), eps / 2) << mu << " " << eps;
    }
  }
}

TEST(Median, EvenCountAveragesMiddlePair) {
  EXPECT_EQ(median_of({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median_of({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median_of({}), std::invalid_argument);
}

TEST(EstimateMean, BypassWhenEpsLarge) {
  const FamilyParams params{2.0, 64.0, 1.0};
  SampleAgent agent(Distribution::point_mass(1.7), Rng{1});
  Channel ch(agent, Rng{2});
  const auto rep = estimate_mean(ch, params, TargetSpec{4.0, 0.1});
  EXPECT_TRUE(rep.refinement_skipped);
  EXPECT_LE(std::fabs(rep.mu_hat - 1.7), 4.0);
  EXPECT_EQ(rep.n_refinement, 0u);
  EXPECT_EQ(rep.n_total, predict_cost(params, TargetSpec{4.0, 0.1}).total);
}

TEST(EstimateMean, PacOnPairMember) {
  const PairGrid g = make_pair_grid(4.0, 1.0, 0.1);
  const auto d = g.member(2, 1);
  const FamilyParams params{2.0, 4.0, 1.0};
  const TargetSpec target{0.25, 0.2};
  const auto expected = predict_cost(params, target).total;
  int ok = 0;
  for (int trial = 0; trial < 300; ++trial) {
    SampleAgent agent(d, Rng{derive_seed(11, 1, static_cast<std::uint64_t>(trial))});
    Channel ch(agent, Rng{derive_seed(11, 2, static_cast<std::uint64_t>(trial))});
    const auto rep = estimate_mean(ch, params, target);
    ok += std::fabs(rep.mu_hat - 0.1) <= 0.25;
    ASSERT_EQ(rep.n_total, expected);
    ASSERT_EQ(ch.transcript().total(), expected);
  }
  EXPECT_GE(ok, 240);
}

TEST(EstimateMean, EvenBatchCountUsesMiddleAverage) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const TargetSpec target{0.5, 0.05};  // K = 30
  ExactLawAgent agent(Distribution::gaussian(0.3, 1.0), Rng{3});
  Channel ch(agent, Rng{4});
  const auto rep = estimate_mean(ch, params, target);
  ASSERT_EQ(rep.batch_estimates.size(), 30u);
  auto v = rep.batch_estimates;
  std::sort(v.begin(), v.end());
  EXPECT_EQ(rep.mu_hat, 0.5 * (v[14] + v[15]));
  EXPECT_EQ(rep.rounds_of_adaptivity, rep.localization.rounds + 1);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "onebit/hardness.hpp"
#include "onebit/variants.hpp"

using namespace onebit;

TEST(Anytime, ConfidenceSchedule) {
  EXPECT_NEAR(anytime_delta(0.1, 1), 0.6 / (std::numbers::pi * std::numbers::pi), 1e-15);
  EXPECT_NEAR(anytime_delta(0.1, 1), 0.0608, 1e-4);
  EXPECT_NEAR(anytime_delta(0.1, 2), 0.0152, 1e-4);
  double sum = 0.0;
  for (int tau = 1; tau <= 100'000; ++tau) sum += anytime_delta(0.1, tau);
  EXPECT_LE(sum, 0.1);
}

TEST(Anytime, ExactFirstRoundBudget) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const double delta = 0.1;
  const auto budget = median_search_plan(params, delta).total_samples() + anytime_round_cost(params, delta, 1,
                                                                                            AllocationProfile::Empirical);
  ExactLawAgent agent(Distribution::gaussian(1.0, 1.0), Rng{1});
  Channel ch(agent, Rng{2});
  const auto res = anytime_estimate(ch, params, delta, budget);
  EXPECT_EQ(res.rounds_completed, 1);
  EXPECT_EQ(res.eps_final, 0.5);
  EXPECT_EQ(res.cumulative_cost, budget);
  EXPECT_EQ(ch.transcript().total(), budget);
}

TEST(Anytime, InfeasibleBudgetThrows) {
  const FamilyParams params{2.0, 16.0, 1.0};
  ExactLawAgent agent(Distribution::point_mass(0.0), Rng{1});
  Channel ch(agent, Rng{2});
  const auto loc = median_search_plan(params, 0.1).total_samples();
  EXPECT_THROW(anytime_estimate(ch, params, 0.1, loc), InfeasibleBudget);
  EXPECT_EQ(ch.transcript().total(), 0u);
}

TEST(Anytime, BudgetNeverExceededAndNextRoundWouldOverflow) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const double delta = 0.1;
  for (std::uint64_t budget : {400'000ull, 1'000'000ull, 7'654'321ull, 30'000'000ull}) {
    ExactLawAgent agent(Distribution::gaussian(-2.0, 1.0), Rng{budget});
    Channel ch(agent, Rng{budget + 1});
    const auto res = anytime_estimate(ch, params, delta, budget);
    EXPECT_LE(res.cumulative_cost, budget);
    EXPECT_EQ(res.cumulative_cost, ch.transcript().total());
    EXPECT_GT(res.cumulative_cost + res.next_round_cost, budget);
    std::uint64_t predicted = res.localization_cost;
    for (int tau = 1; tau <= res.rounds_completed; ++tau)
      predicted += anytime_round_cost(params, delta, tau, AllocationProfile::Empirical);
    EXPECT_EQ(predicted, res.cumulative_cost);
  }
}

TEST(Anytime, RoundCostsGrowGeometrically) {
  // Every round costs at least 4x the previous one. For k < 2 the power-of-two
  // cutoff makes single-round ratios oscillate, so the 2^{k/(k-1)} rate is
  // checked on the geometric mean over eight rounds.
  for (double k : {1.3, 1.5, 1.8, 2.0, 2.5, 3.0}) {
    const FamilyParams params{k, 1e6, 1.0};
    auto cost = [&](int tau) {
      return static_cast<double>(anytime_round_cost(params, 0.1, tau, AllocationProfile::Empirical));
    };
    for (int tau = 1; tau < 9; ++tau) EXPECT_GE(cost(tau + 1) / cost(tau), 4.0) << "k=" << k << " tau=" << tau;
    if (k < 2.0) {
      EXPECT_GE(std::pow(cost(9) / cost(1), 1.0 / 8), std::pow(2.0, k / (k - 1.0))) << "k=" << k;
    }
  }
}

TEST(Anytime, HugeRoundCostsSaturate) {
  const FamilyParams params{1.3, 1e6, 1.0};
  EXPECT_EQ(anytime_round_cost(params, 0.1, 14, AllocationProfile::Empirical),
            std::numeric_limits<std::uint64_t>::max());
}

TEST(Anytime, FinalAccuracyWithinFactorEightOfOracle) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const double eps_star = params.sigma / 32;
  const auto budget = predict_cost(params, TargetSpec{eps_star, 0.1}).total;
  ExactLawAgent agent(Distribution::gaussian(3.0, 1.0), Rng{5});
  Channel ch(agent, Rng{6});
  const auto res = anytime_estimate(ch, params, 0.1, budget);
  EXPECT_LE(res.eps_final, 8 * eps_star);
}

TEST(ScaleGrid, Examples) {
  const auto g = make_scale_grid(1.0, 16.0, 0.3, 0.1);
  EXPECT_EQ(g.T, 4);
  EXPECT_EQ(g.sigmas, (std::vector<double>{16.0, 8.0, 4.0, 2.0, 1.0}));
  EXPECT_NEAR(g.eps(0), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(g.delta_per_round, 0.02);
  for (int i = 0; i <= g.T; ++i) EXPECT_DOUBLE_EQ(g.sigmas[static_cast<std::size_t>(i)] / g.eps(i), 6.0 / 0.3);
  EXPECT_EQ(make_scale_grid(2.0, 2.0, 0.3, 0.1).T, 0);
  EXPECT_EQ(make_scale_grid(1.0, 10.0, 0.3, 0.1).T, 4);
  EXPECT_THROW(make_scale_grid(2.0, 1.0, 0.3, 0.1), std::invalid_argument);
  EXPECT_THROW(make_scale_grid(1.0, 2.0, 1.5, 0.1), std::invalid_argument);
}

TEST(UnknownScale, PacOnGaussian) {
  const double sigma_true = 4.0, mu = 7.3;
  const auto d = Distribution::gaussian_moment_tight(mu, sigma_true, 2.0);
  int ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ExactLawAgent agent(d, make_rng(31, 1, static_cast<std::uint64_t>(trial)));
    Channel ch(agent, make_rng(31, 2, static_cast<std::uint64_t>(trial)));
    const auto res = unknown_scale_estimate(ch, 2.0, 64.0, 1.0, 16.0, 0.25, 0.2);
    ok += std::fabs(res.mu_hat - mu) <= sigma_true;
    ASSERT_EQ(res.samples, ch.transcript().total());
    ASSERT_LE(res.i_star, res.grid.T);
  }
  EXPECT_GE(ok, 160);
}

TEST(UnknownScale, NoHaltReturnsLastRound) {
  ExactLawAgent agent(Distribution::point_mass(2.0), Rng{1});
  Channel ch(agent, Rng{2});
  const auto res = unknown_scale_estimate(ch, 2.0, 16.0, 1.0, 4.0, 0.25, 0.1);
  EXPECT_FALSE(res.halted);
  EXPECT_EQ(res.i_star, 2);
  EXPECT_EQ(res.rounds.size(), 3u);
  EXPECT_NEAR(res.mu_hat, 2.0, res.grid.eps(2));
}

TEST(TwoStage, RoundsAndPointMass) {
  const FamilyParams params{2.0, 64.0, 1.0};
  for (double mu : {-40.0, 0.0, 3.2, 63.0}) {
    SampleAgent agent(Distribution::point_mass(mu), Rng{1});
    Channel ch(agent, Rng{2});
    const auto rep = two_stage_estimate(ch, params, TargetSpec{0.25, 0.1});
    EXPECT_EQ(rep.rounds_of_adaptivity, 2);
    EXPECT_NEAR(rep.mu_hat, mu, 0.25);  // dithered thresholds keep the estimate random
    EXPECT_EQ(rep.n_total, predict_cost(params, TargetSpec{0.25, 0.1}, EstimateOptions{AllocationProfile::Empirical, Localizer::Gray}).total);
  }
}

TEST(TwoStage, PacParityWithMedianLocalizer) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const TargetSpec target{0.25, 0.2};
  const PairGrid g = make_pair_grid(16.0, 1.0, 0.1);
  const auto d = g.member(8, -1);
  const double mu = g.member_mean(8, -1);
  int ok_two = 0, ok_median = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    ExactLawAgent a1(d, make_rng(41, 1, t));
    Channel c1(a1, make_rng(41, 2, t));
    ok_two += std::fabs(two_stage_estimate(c1, params, target).mu_hat - mu) <= target.eps;
    ExactLawAgent a2(d, make_rng(42, 1, t));
    Channel c2(a2, make_rng(42, 2, t));
    ok_median += std::fabs(estimate_mean(c2, params, target).mu_hat - mu) <= target.eps;
  }
  EXPECT_GE(ok_two, 160);
  EXPECT_LE(std::abs(ok_two - ok_median), trials / 20);
}

TEST(Multivariate, OneDimensionMatchesScalarEstimator) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const TargetSpec target{0.25, 0.1};
  VectorSampleAgent agent({Distribution::point_mass(1.25)}, Rng{1});
  const auto res = multivariate_estimate(agent, params, target, Rng{2});
  ASSERT_EQ(res.mu_hat.size(), 1u);
  EXPECT_NEAR(res.mu_hat[0], 1.25, target.eps);
  EXPECT_EQ(res.samples, predict_cost(params, target).total);
}

TEST(Multivariate, PointMassesRecovered) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const std::vector<double> mu = {-3.0, 0.0, 2.5, 11.0};
  std::vector<Distribution> coords;
  for (double m : mu) coords.push_back(Distribution::point_mass(m));
  VectorSampleAgent agent(coords, Rng{1});
  const TargetSpec target{0.5, 0.1};
  const auto res = multivariate_estimate(agent, params, target, Rng{2});
  double sq = 0.0;
  for (std::size_t c = 0; c < mu.size(); ++c) sq += (res.mu_hat[c] - mu[c]) * (res.mu_hat[c] - mu[c]);
  EXPECT_LE(std::sqrt(sq), target.eps);
  const auto per = predict_cost(params, TargetSpec{0.25, 0.025}).total;
  EXPECT_EQ(res.samples, 4 * per);
  VectorSampleAgent agent2(coords, Rng{3});
  EXPECT_EQ(multivariate_estimate(agent2, params, target, Rng{4}, {}, true).samples, per);
}

TEST(Multivariate, GaussianPac) {
  const FamilyParams params{2.0, 16.0, 1.0};
  const TargetSpec target{1.0, 0.2};
  int ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    VectorSampleAgent agent({Distribution::gaussian(1.5, 1.0), Distribution::gaussian(-4.0, 1.0)},
                            make_rng(51, 1, t));
    const auto res = multivariate_estimate(agent, params, target, make_rng(51, 2, t));
    const double err = std::hypot(res.mu_hat[0] - 1.5, res.mu_hat[1] + 4.0);
    ok += err <= target.eps;
  }
  EXPECT_GE(ok, 160);
}

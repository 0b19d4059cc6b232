#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "onebit/agent.hpp"
#include "onebit/channel.hpp"
#include "onebit/family.hpp"
#include "onebit/localization.hpp"
#include "onebit/refine.hpp"

namespace onebit {

/// Raised when a budget cannot pay for even the first unit of work.
class InfeasibleBudget : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Anytime schedule
// ---------------------------------------------------------------------------

inline constexpr int kMaxAnytimeRounds = 60;

/// Round tau targets eps = sigma / 2^tau at confidence 6 delta / (pi^2 tau^2).
inline double anytime_eps(const FamilyParams& params, int tau) { return std::ldexp(params.sigma, -tau); }
inline double anytime_delta(double delta, int tau) {
  return 6.0 * delta / (std::numbers::pi * std::numbers::pi * static_cast<double>(tau) * tau);
}

inline std::uint64_t anytime_round_cost(const FamilyParams& params, double delta, int tau,
                                        AllocationProfile profile) {
  const double eps = anytime_eps(params, tau);
  if (eps >= 4.0 * params.sigma) return 0;
  return build_plan(params, eps, anytime_delta(delta, tau), profile).total_samples();
}

struct AnytimeResult {
  double mu_hat = 0.0;
  int rounds_completed = 0;  // T
  double eps_final = 0.0;    // sigma / 2^T
  std::uint64_t localization_cost = 0;
  std::uint64_t cumulative_cost = 0;
  std::uint64_t next_round_cost = 0;  // cost of the round that did not fit
  std::vector<std::uint64_t> round_costs;
  LocalizationResult localization;
};

/// Localizes once, then runs rounds tau = 1, 2, ... while the next round fits in
/// the remaining budget; returns the last completed round's estimate.
template <BitAgent A>
AnytimeResult anytime_estimate(Channel<A>& channel, const FamilyParams& params, double delta,
                               std::uint64_t budget,
                               AllocationProfile profile = AllocationProfile::Empirical) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  AnytimeResult out;
  out.localization_cost = median_search_plan(params, delta).total_samples();
  const std::uint64_t first = anytime_round_cost(params, delta, 1, profile);
  if (budget < sat_add(out.localization_cost, first))
    throw InfeasibleBudget("budget " + std::to_string(budget) + " is below localization plus round 1 (" +
                           std::to_string(sat_add(out.localization_cost, first)) + ")");

  const std::uint64_t start = channel.transcript().total();
  out.localization = localize_median(channel, params, delta);
  const double center = out.localization.center();
  std::uint64_t spent = channel.transcript().total() - start;

  for (int tau = 1; tau <= kMaxAnytimeRounds; ++tau) {
    const std::uint64_t cost = anytime_round_cost(params, delta, tau, profile);
    if (cost > budget - spent) {
      out.next_round_cost = cost;
      break;
    }
    const auto round = refine_around(channel, params, anytime_eps(params, tau),
                                     anytime_delta(delta, tau), profile, center, 4.0 * params.sigma);
    spent = channel.transcript().total() - start;
    out.mu_hat = round.mu_hat;
    out.rounds_completed = tau;
    out.round_costs.push_back(cost);
  }
  out.eps_final = anytime_eps(params, out.rounds_completed);
  out.cumulative_cost = spent;
  return out;
}

// ---------------------------------------------------------------------------
// Unknown scale
// ---------------------------------------------------------------------------

struct ScaleGrid {
  int T = 0;
  std::vector<double> sigmas;  // sigma_max 2^-i, i = 0..T
  double ratio = 0.25;         // r
  double delta_per_round = 0.0;

  [[nodiscard]] double eps(int i) const { return ratio * sigmas.at(static_cast<std::size_t>(i)) / 6.0; }
};

inline ScaleGrid make_scale_grid(double sigma_min, double sigma_max, double r, double delta) {
  if (!(sigma_min > 0.0)) throw std::invalid_argument("sigma_min must be positive");
  if (sigma_min > sigma_max) throw std::invalid_argument("sigma_min exceeds sigma_max");
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("ratio r must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  ScaleGrid g;
  g.T = static_cast<int>(std::ceil(std::log2(sigma_max / sigma_min) - 1e-12));
  g.T = std::max(g.T, 0);
  g.ratio = r;
  g.delta_per_round = delta / (g.T + 1);
  for (int i = 0; i <= g.T; ++i) g.sigmas.push_back(std::ldexp(sigma_max, -i));
  return g;
}

struct ScaleRound {
  double sigma = 0.0;
  double eps = 0.0;
  double mu_hat = 0.0;
  std::uint64_t samples = 0;
};

struct ScaleResult {
  double mu_hat = 0.0;
  int i_star = 0;
  bool halted = false;  // false: no disjointness through round T
  std::uint64_t samples = 0;
  ScaleGrid grid;
  std::vector<ScaleRound> rounds;
};

/// Runs the estimator for sigma_i = sigma_max 2^-i with eps_i = r sigma_i / 6 and
/// stops at the first interval [mu_i +- eps_i] disjoint from an earlier one.
template <BitAgent A>
ScaleResult unknown_scale_estimate(Channel<A>& channel, double k, double lambda, double sigma_min,
                                   double sigma_max, double r, double delta,
                                   const EstimateOptions& opts = {}) {
  ScaleResult out;
  out.grid = make_scale_grid(sigma_min, sigma_max, r, delta);
  const std::uint64_t start = channel.transcript().total();
  for (int i = 0; i <= out.grid.T; ++i) {
    const double sigma_i = out.grid.sigmas[static_cast<std::size_t>(i)];
    const FamilyParams p{k, std::max(lambda, sigma_i), sigma_i};
    const TargetSpec target{out.grid.eps(i), out.grid.delta_per_round};
    const auto rep = estimate_mean(channel, p, target, opts);
    const ScaleRound round{sigma_i, target.eps, rep.mu_hat, rep.n_total};
    bool disjoint = false;
    for (const auto& prev : out.rounds)
      if (std::fabs(prev.mu_hat - round.mu_hat) > prev.eps + round.eps) disjoint = true;
    if (disjoint) {
      out.halted = true;
      out.i_star = i - 1;
      break;
    }
    out.rounds.push_back(round);
    out.i_star = i;
  }
  out.mu_hat = out.rounds.at(static_cast<std::size_t>(out.i_star)).mu_hat;
  out.samples = channel.transcript().total() - start;
  return out;
}

// ---------------------------------------------------------------------------
// Two-stage and multivariate
// ---------------------------------------------------------------------------

/// Gray-code localization followed by one refinement batch: two rounds of adaptivity.
template <BitAgent A>
EstimateReport two_stage_estimate(Channel<A>& channel, const FamilyParams& params,
                                  const TargetSpec& target,
                                  AllocationProfile profile = AllocationProfile::Empirical) {
  auto rep = estimate_mean(channel, params, target, EstimateOptions{profile, Localizer::Gray});
  rep.rounds_of_adaptivity = 2;
  return rep;
}

struct MultivariateResult {
  std::vector<double> mu_hat;
  std::vector<EstimateReport> coordinates;
  std::uint64_t samples = 0;  // vector samples consumed
};

/// Coordinate-wise estimation at (eps / sqrt(d), delta / d). In the default mode
/// every bit consumes a fresh vector; with `bits_per_coordinate` each vector sample
/// answers one query per coordinate, so the count is the largest per-coordinate total.
inline MultivariateResult multivariate_estimate(VectorSampleAgent& agent, const FamilyParams& params,
                                                const TargetSpec& target, Rng learner_rng,
                                                const EstimateOptions& opts = {},
                                                bool bits_per_coordinate = false) {
  const std::size_t d = agent.dimension();
  if (d == 0) throw std::invalid_argument("dimension must be positive");
  const TargetSpec per{target.eps / std::sqrt(static_cast<double>(d)), target.delta / static_cast<double>(d)};
  MultivariateResult out;
  for (std::size_t c = 0; c < d; ++c) {
    CoordinateAgent view(agent, c);
    Channel<CoordinateAgent> channel(view, Rng{derive_seed(learner_rng(), c, 0)});
    auto rep = estimate_mean(channel, params, per, opts);
    out.mu_hat.push_back(rep.mu_hat);
    out.samples = bits_per_coordinate ? std::max(out.samples, rep.n_total) : out.samples + rep.n_total;
    out.coordinates.push_back(std::move(rep));
  }
  return out;
}

}  // namespace onebit

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/distributions.hpp"
#include "onebit/family.hpp"
#include "onebit/localization.hpp"

namespace onebit {

enum class AllocationProfile { ProofSafe, Empirical };

inline std::string_view profile_name(AllocationProfile p) {
  return p == AllocationProfile::ProofSafe ? "proof-safe" : "empirical";
}

inline AllocationProfile parse_profile(std::string_view name) {
  if (name == "proof-safe") return AllocationProfile::ProofSafe;
  if (name == "empirical") return AllocationProfile::Empirical;
  throw std::invalid_argument("unknown allocation profile: " + std::string(name));
}

/// Constant C in n_i = ceil(C (sigma/eps)^2 2^{|i|(2-k)}).
inline double allocation_constant(AllocationProfile profile, double k_op) {
  if (profile == AllocationProfile::Empirical) return 16.0;
  return 256.0 * (3.0 * std::pow(2.0, 3.0 * k_op) + std::pow(2.0, 2.0 * k_op));
}

/// Worst-case truncation bias bound at cutoff t when |mu - center| <= rho:
///   sigma^k / (t - rho)^{k-1} + rho sigma^k / (t - rho)^k.
inline double cutoff_bias_bound(const FamilyParams& params, double t, double rho) {
  const double k = params.operative_k();
  const double sk = std::pow(params.sigma, k);
  const double gap = t - rho;
  if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
  return sk / std::pow(gap, k - 1.0) + rho * sk / std::pow(gap, k);
}

/// Smallest t = 2^j sigma with j >= 4 and t >= 2 rho such that the bias bound is <= eps/2.
inline double cutoff_threshold(const FamilyParams& params, double eps, double rho) {
  params.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  for (int j = 4; j < 1000; ++j) {
    const double t = std::ldexp(params.sigma, j);
    if (t < 2.0 * rho) continue;
    if (cutoff_bias_bound(params, t, rho) <= eps / 2.0) return t;
  }
  throw std::domain_error("cutoff search did not terminate");
}

inline double cutoff_threshold(const FamilyParams& params, double eps) {
  return cutoff_threshold(params, eps, 4.0 * params.sigma);
}

/// Saturating arithmetic for query counts; plans at extreme accuracy can exceed 2^64.
inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_add_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}
inline std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_mul_overflow(a, b, &r) ? std::numeric_limits<std::uint64_t>::max() : r;
}

/// Region R_i in centered coordinates: [a, b) for i > 0, (-b, -a] for i < 0.
struct Region {
  int index = 1;
  double a = 0.0;
  double b = 1.0;
  std::uint64_t n = 1;  // queries per probability estimate; the region costs 4n
};

struct RefinementPlan {
  double t = 0.0;
  int i_max = 0;
  double rho = 0.0;
  double C = 0.0;
  std::uint64_t K = 0;
  AllocationProfile profile = AllocationProfile::Empirical;
  std::vector<Region> regions;  // i = 1..i_max, then -1..-i_max

  [[nodiscard]] std::uint64_t samples_per_batch() const {
    std::uint64_t s = 0;
    for (const auto& r : regions) s = sat_add(s, sat_mul(4, r.n));
    return s;
  }
  [[nodiscard]] std::uint64_t total_samples() const { return sat_mul(K, samples_per_batch()); }
};

inline std::uint64_t batch_count(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return static_cast<std::uint64_t>(std::ceil(8.0 * std::log(2.0 / delta)));
}

inline RefinementPlan build_plan(const FamilyParams& params, double eps, double delta,
                                 AllocationProfile profile, double rho) {
  params.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  RefinementPlan plan;
  plan.rho = rho;
  plan.profile = profile;
  plan.t = cutoff_threshold(params, eps, rho);
  plan.i_max = static_cast<int>(std::lround(std::log2(plan.t / params.sigma)));
  plan.K = batch_count(delta);
  const double k = params.operative_k();
  plan.C = allocation_constant(profile, k);
  const double ratio = params.sigma / eps;
  for (int side : {1, -1}) {
    for (int i = 1; i <= plan.i_max; ++i) {
      Region r;
      r.index = side * i;
      r.a = i == 1 ? 0.0 : std::ldexp(params.sigma, i - 1);
      r.b = std::ldexp(params.sigma, i);
      const double n = plan.C * ratio * ratio * std::pow(2.0, i * (2.0 - k));
      const double up = std::ceil(n * (1.0 - 1e-12));
      r.n = up >= 0x1p64 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(up);
      plan.regions.push_back(r);
    }
  }
  return plan;
}

inline RefinementPlan build_plan(const FamilyParams& params, double eps, double delta,
                                 AllocationProfile profile) {
  return build_plan(params, eps, delta, profile, 4.0 * params.sigma);
}

struct RegionTerms {
  double p_a = 0.0;
  double p_b = 0.0;
  double mu = 0.0;  // contribution E[X 1{X in R_i}]
};

/// Exact p_a, p_b and contribution of a region for a centered law, following the
/// same inclusive/strict conventions as estimate_region.
inline RegionTerms analytic_region_terms(const Distribution& centered, const Region& r) {
  RegionTerms out;
  if (r.index > 0) {
    out.p_a = centered.prob_ge(r.a) - dithered_probability(centered, Dither::AtLeast, r.a, r.b);
    out.p_b = centered.prob_lt(r.b) - dithered_probability(centered, Dither::AtMost, r.a, r.b);
    out.mu = r.a * out.p_a + r.b * out.p_b;
  } else {
    out.p_a = centered.cdf(-r.a) - dithered_probability(centered, Dither::AtMost, -r.b, -r.a);
    out.p_b = centered.prob_gt(-r.b) - dithered_probability(centered, Dither::AtLeast, -r.b, -r.a);
    out.mu = -(r.a * out.p_a + r.b * out.p_b);
  }
  return out;
}

struct RegionEstimate {
  int index = 0;
  double p_a_hat = 0.0;
  double p_b_hat = 0.0;
  double mu_hat = 0.0;
  std::uint64_t samples = 0;
};

/// Estimates E[(X - center) 1{X - center in R_i}] from 4n threshold queries.
/// Right regions: p_a = P(X >= a) - P(X >= T), p_b = P(X < b) - P(X <= T).
/// Left regions mirror this with thresholds at -a, -b and -T.
template <BitAgent A>
RegionEstimate estimate_region(Channel<A>& channel, const Region& r, double center, int batch = -1) {
  if (r.n == 0) throw std::invalid_argument("region allocation must be positive");
  if (!(r.a < r.b)) throw std::invalid_argument("region requires a < b");
  const Tag tag{Phase::Refinement, r.index, batch};
  const auto n = static_cast<double>(r.n);
  auto frac = [&](const Query& q) { return static_cast<double>(channel.ask_count(q, r.n, tag)) / n; };
  auto dither = [&](Dither d, double lo, double hi) {
    return static_cast<double>(channel.ask_dithered(d, lo, hi, r.n, tag)) / n;
  };

  RegionEstimate est;
  est.index = r.index;
  if (r.index > 0) {
    const double lo = center + r.a;
    const double hi = center + r.b;
    const double ge_a = frac(ThresholdGE{lo});
    const double ge_t = dither(Dither::AtLeast, lo, hi);
    const double lt_b = 1.0 - frac(ThresholdGE{hi});
    const double le_t = dither(Dither::AtMost, lo, hi);
    est.p_a_hat = ge_a - ge_t;
    est.p_b_hat = lt_b - le_t;
    est.mu_hat = r.a * est.p_a_hat + r.b * est.p_b_hat;
  } else {
    const double lo = center - r.b;
    const double hi = center - r.a;
    const double le_a = frac(ThresholdLE{hi});
    const double le_t = dither(Dither::AtMost, lo, hi);
    const double gt_b = 1.0 - frac(ThresholdLE{lo});
    const double ge_t = dither(Dither::AtLeast, lo, hi);
    est.p_a_hat = le_a - le_t;
    est.p_b_hat = gt_b - ge_t;
    est.mu_hat = -(r.a * est.p_a_hat + r.b * est.p_b_hat);
  }
  est.samples = 4 * r.n;
  return est;
}

/// center + sum of all region estimates (one batch).
template <BitAgent A>
double base_estimate(Channel<A>& channel, const RefinementPlan& plan, double center, int batch = -1) {
  double sum = 0.0;
  for (const auto& r : plan.regions) sum += estimate_region(channel, r, center, batch).mu_hat;
  return center + sum;
}

/// Median; the mean of the two middle values for even sizes.
inline double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct RefinementOutcome {
  double mu_hat = 0.0;
  bool skipped = false;
  std::optional<RefinementPlan> plan;
  std::vector<double> batch_estimates;
};

/// Steps after localization: K batches of the base estimator around `center`,
/// combined by their median. Skipped when eps >= rho.
template <BitAgent A>
RefinementOutcome refine_around(Channel<A>& channel, const FamilyParams& params, double eps,
                                double delta, AllocationProfile profile, double center, double rho) {
  RefinementOutcome out;
  if (eps >= rho) {
    out.mu_hat = center;
    out.skipped = true;
    return out;
  }
  out.plan = build_plan(params, eps, delta, profile, rho);
  out.batch_estimates.reserve(out.plan->K);
  for (std::uint64_t j = 0; j < out.plan->K; ++j)
    out.batch_estimates.push_back(base_estimate(channel, *out.plan, center, static_cast<int>(j)));
  out.mu_hat = median_of(out.batch_estimates);
  return out;
}

enum class Localizer { Median, Gray };

struct EstimateOptions {
  AllocationProfile profile = AllocationProfile::Empirical;
  Localizer localizer = Localizer::Median;
};

/// Bound on |mu - center| after a successful localization.
inline double centering_radius(const FamilyParams& params, double delta, Localizer loc) {
  if (loc == Localizer::Median) return 4.0 * params.sigma;
  return 0.5 * gray_plan(params, delta).length_bound();
}

struct EstimateReport {
  double mu_hat = 0.0;
  std::uint64_t n_localization = 0;
  std::uint64_t n_refinement = 0;
  std::uint64_t n_total = 0;
  int rounds_of_adaptivity = 0;
  bool refinement_skipped = false;
  LocalizationResult localization;
  std::optional<RefinementPlan> plan;
  std::vector<double> batch_estimates;
};

struct CostBreakdown {
  std::uint64_t localization = 0;
  std::uint64_t refinement = 0;
  std::uint64_t total = 0;
};

/// Exact number of queries estimate_mean will issue; no randomness involved.
inline CostBreakdown predict_cost(const FamilyParams& params, const TargetSpec& target,
                                  const EstimateOptions& opts = {}) {
  params.validate();
  target.validate();
  CostBreakdown c;
  c.localization = opts.localizer == Localizer::Median
                       ? median_search_plan(params, target.delta).total_samples()
                       : gray_plan(params, target.delta).total_samples();
  const double rho = centering_radius(params, target.delta, opts.localizer);
  if (target.eps < rho)
    c.refinement = build_plan(params, target.eps, target.delta, opts.profile, rho).total_samples();
  c.total = sat_add(c.localization, c.refinement);
  return c;
}

/// The full estimator: localize with confidence delta/2, recenter, refine.
template <BitAgent A>
EstimateReport estimate_mean(Channel<A>& channel, const FamilyParams& params,
                             const TargetSpec& target, const EstimateOptions& opts = {}) {
  params.validate();
  target.validate();
  const std::uint64_t start = channel.transcript().total();
  EstimateReport rep;
  rep.localization = opts.localizer == Localizer::Median
                         ? localize_median(channel, params, target.delta)
                         : localize_gray(channel, params, target.delta);
  const std::uint64_t after_loc = channel.transcript().total();
  const double rho = centering_radius(params, target.delta, opts.localizer);
  auto ref = refine_around(channel, params, target.eps, target.delta, opts.profile,
                           rep.localization.center(), rho);
  rep.mu_hat = ref.mu_hat;
  rep.refinement_skipped = ref.skipped;
  rep.plan = std::move(ref.plan);
  rep.batch_estimates = std::move(ref.batch_estimates);
  rep.n_localization = after_loc - start;
  rep.n_refinement = channel.transcript().total() - after_loc;
  rep.n_total = rep.n_localization + rep.n_refinement;
  rep.rounds_of_adaptivity = rep.localization.rounds + (rep.refinement_skipped ? 0 : 1);
  return rep;
}

}  // namespace onebit

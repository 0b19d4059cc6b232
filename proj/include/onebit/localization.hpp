#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/family.hpp"

namespace onebit {

struct LocalizationResult {
  double low = 0.0;
  double high = 0.0;
  std::uint64_t samples_used = 0;
  int rounds = 0;  // sequential rounds of adaptivity used

  [[nodiscard]] double center() const noexcept { return 0.5 * (low + high); }
  [[nodiscard]] double length() const noexcept { return high - low; }
  [[nodiscard]] bool contains(double x) const noexcept { return x >= low && x <= high; }
};

// ---------------------------------------------------------------------------
// Median search
// ---------------------------------------------------------------------------

/// Vote cut-offs for the two interval-halving searches. A fraction below
/// kMedianLowCut certifies F < 1/2; at or above it certifies F > 1/2 - 2*margin.
inline constexpr double kMedianMargin = 0.03;
inline constexpr double kMedianLowCut = 0.5 - kMedianMargin;
inline constexpr double kMedianHighCut = 0.5 + kMedianMargin;

/// Grid -lambda' + i*sigma with lambda' = ceil(lambda/sigma)*sigma. The index
/// range is padded to 2^levels so every run issues the same number of queries.
struct MedianSearchPlan {
  double origin = 0.0;  // -lambda'
  double step = 1.0;    // sigma
  std::int64_t grid_cells = 0;  // 2 lambda' / sigma
  int levels = 0;
  std::uint64_t votes = 0;

  [[nodiscard]] double point(std::int64_t i) const { return origin + static_cast<double>(i) * step; }
  [[nodiscard]] std::uint64_t total_samples() const {
    return 2 * static_cast<std::uint64_t>(levels) * votes;
  }
};

/// Number of sigma-cells in [-lambda, lambda] after rounding lambda up to a multiple of sigma.
inline std::int64_t rounded_half_width_cells(const FamilyParams& params) {
  return static_cast<std::int64_t>(std::ceil(params.lambda / params.sigma - 1e-9));
}

inline MedianSearchPlan median_search_plan(const FamilyParams& params, double delta) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  MedianSearchPlan plan;
  const std::int64_t half = rounded_half_width_cells(params);
  plan.step = params.sigma;
  plan.origin = -static_cast<double>(half) * params.sigma;
  plan.grid_cells = 2 * half;
  while ((std::int64_t{1} << plan.levels) < plan.grid_cells) ++plan.levels;
  const double votes =
      std::log(8.0 * plan.levels / delta) / (2.0 * kMedianMargin * kMedianMargin);
  plan.votes = static_cast<std::uint64_t>(std::ceil(votes));
  return plan;
}

/// Adaptive localization by two certified interval-halving searches on the CDF.
/// Returns [L - sigma, U + sigma]; fails (misses mu or exceeds 8 sigma) with
/// probability at most delta/2.
template <BitAgent A>
LocalizationResult localize_median(Channel<A>& channel, const FamilyParams& params, double delta) {
  const MedianSearchPlan plan = median_search_plan(params, delta);
  const Tag tag{Phase::Localization};
  const std::uint64_t before = channel.transcript().total();
  const std::int64_t top = std::int64_t{1} << plan.levels;

  // L-search: lo keeps F(lo) < 1/2, hi keeps F(hi) > 0.44.
  std::int64_t lo = 0;
  std::int64_t hi = top;
  for (int level = 0; level < plan.levels; ++level) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double frac = channel.repeated_fraction(ThresholdLE{plan.point(mid)}, plan.votes, tag);
    if (frac < kMedianLowCut) lo = mid;
    else hi = mid;
  }
  const double lower = plan.point(lo);

  // U-search: hi keeps F(hi) > 1/2, lo keeps F(lo) < 0.56.
  lo = 0;
  hi = top;
  for (int level = 0; level < plan.levels; ++level) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double frac = channel.repeated_fraction(ThresholdLE{plan.point(mid)}, plan.votes, tag);
    if (frac > kMedianHighCut) hi = mid;
    else lo = mid;
  }
  const double upper = plan.point(hi);

  LocalizationResult out;
  out.low = std::min(lower, upper) - params.sigma;
  out.high = std::max(lower, upper) + params.sigma;
  out.samples_used = channel.transcript().total() - before;
  out.rounds = 2 * plan.levels;
  return out;
}

// ---------------------------------------------------------------------------
// Gray-code localization
// ---------------------------------------------------------------------------

struct GrayPlan {
  int M = 0;             // bits
  std::uint64_t J = 0;   // votes per bit
  double shift = 0.0;    // x' = (x + shift) / scale
  double scale = 1.0;
  double lambda = 1.0;
  bool bypass = false;   // lambda/sigma < 2^{2+2/k}

  [[nodiscard]] std::uint64_t total_samples() const {
    return bypass ? 0 : static_cast<std::uint64_t>(M) * J;
  }
  /// Deterministic upper bound on the returned interval length.
  [[nodiscard]] double length_bound() const {
    return bypass ? 2.0 * lambda : 3.0 * lambda * std::ldexp(1.0, -M);
  }
};

inline GrayPlan gray_plan(const FamilyParams& params, double delta) {
  params.validate();
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  GrayPlan plan;
  plan.lambda = params.lambda;
  plan.shift = params.lambda;
  plan.scale = 2.0 * params.lambda;
  const double bits =
      std::floor(std::log2(params.lambda / params.sigma) - 1.0 - 2.0 / params.operative_k() + 1e-12);
  if (bits < 1.0) {
    plan.bypass = true;
    return plan;
  }
  plan.M = static_cast<int>(bits);
  plan.J = static_cast<std::uint64_t>(std::ceil(8.0 * std::log(2.0 * plan.M / delta)));
  return plan;
}

/// The whole localization query list: M groups of J Gray-bit queries.
inline std::vector<PlannedQuery> gray_query_plan(const GrayPlan& plan) {
  std::vector<PlannedQuery> out;
  if (plan.bypass) return out;
  for (int level = 1; level <= plan.M; ++level)
    out.push_back({GrayBit{level, plan.shift, plan.scale}, plan.J, Tag{Phase::Localization}});
  return out;
}

struct DyadicInterval {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// Inverts the Gray code: the dyadic cell [x0, x0 + 2^-M] consistent with bits g_1..g_M.
inline DyadicInterval gray_decode(std::span<const int> bits) {
  if (bits.empty()) throw std::invalid_argument("gray_decode needs at least one bit");
  int binary = 0;
  double x0 = 0.0;
  for (std::size_t l = 0; l < bits.size(); ++l) {
    if (bits[l] != 0 && bits[l] != 1) throw std::invalid_argument("gray bits must be 0 or 1");
    binary ^= bits[l];
    if (binary) x0 += std::ldexp(1.0, -static_cast<int>(l + 1));
  }
  return {x0, x0 + std::ldexp(1.0, -static_cast<int>(bits.size()))};
}

/// Non-adaptive localization: the full query list is fixed before any bit is read.
template <BitAgent A>
LocalizationResult localize_gray(Channel<A>& channel, const FamilyParams& params, double delta) {
  const GrayPlan plan = gray_plan(params, delta);
  LocalizationResult out;
  if (plan.bypass) {
    out.low = -params.lambda;
    out.high = params.lambda;
    return out;
  }
  const std::uint64_t before = channel.transcript().total();
  const auto ones = channel.execute(gray_query_plan(plan));
  std::vector<int> bits;
  bits.reserve(ones.size());
  for (std::uint64_t c : ones) bits.push_back(2 * c >= plan.J ? 1 : 0);

  const DyadicInterval cell = gray_decode(bits);
  const double widen = std::ldexp(1.0, -(plan.M + 2));
  const double u0 = std::clamp(cell.lo - widen, 0.0, 1.0);
  const double u1 = std::clamp(cell.hi + widen, 0.0, 1.0);
  out.low = u0 * plan.scale - plan.shift;
  out.high = u1 * plan.scale - plan.shift;
  out.samples_used = channel.transcript().total() - before;
  out.rounds = 1;
  return out;
}

}  // namespace onebit

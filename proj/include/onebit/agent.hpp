#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onebit/distributions.hpp"
#include "onebit/query.hpp"
#include "onebit/rng.hpp"

namespace onebit {

/// Direction of a dithered threshold query with T ~ Uniform(lo, hi).
enum class Dither { AtLeast, AtMost };  // 1{X >= T}, 1{X <= T}

/// An agent answers quantization queries with one bit per fresh sample.
template <class A>
concept BitAgent = requires(A& a, const Query& q, std::uint64_t m) {
  { a.respond(q) } -> std::same_as<bool>;
  { a.respond_count(q, m) } -> std::same_as<std::uint64_t>;
};

/// Agents that can answer a batch of dithered threshold queries at once.
template <class A>
concept DitherBatchAgent = BitAgent<A> && requires(A& a, Dither d, double lo, double hi,
                                                   std::uint64_t m) {
  { a.respond_dithered_count(d, lo, hi, m) } -> std::same_as<std::uint64_t>;
};

/// Exact probability that a single query returns 1 under `dist`.
inline double query_probability(const Distribution& dist, const Query& q) {
  validate(q);
  if (const auto* ge = std::get_if<ThresholdGE>(&q)) return dist.prob_ge(ge->gamma);
  if (const auto* le = std::get_if<ThresholdLE>(&q)) return dist.cdf(le->gamma);
  if (const auto* iv = std::get_if<Interval>(&q))
    return std::clamp(dist.cdf(iv->hi) - dist.prob_lt(iv->lo), 0.0, 1.0);

  const auto& g = std::get<GrayBit>(q);
  const auto atoms = dist.atoms();
  if (!atoms.empty()) {
    long double p = 0.0L;
    for (const auto& [x, w] : atoms)
      if (gray_bit_value(g.level, (x + g.shift) / g.scale)) p += w;
    return std::clamp(static_cast<double>(p), 0.0, 1.0);
  }
  auto to_x = [&](double u) { return u * g.scale - g.shift; };
  if (g.level == 1) return dist.prob_ge(to_x(0.5));
  if (g.level > 26) throw std::invalid_argument("gray level too deep for exact evaluation");
  // Bit is 1 on the cells [(4q+1)/2^l, (4q+3)/2^l).
  const double step = std::ldexp(1.0, -g.level);
  const std::uint64_t blocks = std::uint64_t{1} << (g.level - 2);
  long double p = 0.0L;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const double u0 = static_cast<double>(4 * b + 1) * step;
    const double u1 = static_cast<double>(4 * b + 3) * step;
    p += dist.prob_lt(to_x(u1)) - dist.prob_lt(to_x(u0));
  }
  return std::clamp(static_cast<double>(p), 0.0, 1.0);
}

/// Exact probability of a 1 for a dithered threshold with T ~ Uniform(lo, hi).
/// Uses E_T F(T) = (integral of F over [lo, hi]) / (hi - lo); atoms are hit
/// by T with probability zero, so the strict and inclusive forms agree.
inline double dithered_probability(const Distribution& dist, Dither dir, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("dither range must have hi > lo");
  const double below = std::clamp(dist.cdf_integral(lo, hi) / (hi - lo), 0.0, 1.0);
  return dir == Dither::AtMost ? below : 1.0 - below;
}

/// The literal protocol: every bit is computed from one fresh draw.
class SampleAgent {
 public:
  SampleAgent(Distribution dist, Rng rng) : dist_(std::move(dist)), rng_(std::move(rng)) {}

  bool respond(const Query& q) { return evaluate(q, dist_.sample(rng_)); }

  std::uint64_t respond_count(const Query& q, std::uint64_t m) {
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < m; ++i) ones += evaluate(q, dist_.sample(rng_)) ? 1U : 0U;
    return ones;
  }

 private:
  Distribution dist_;
  Rng rng_;
};

/// Simulation backend that draws response counts from their exact law.
///
/// For a batch of m i.i.d. queries with the same marginal success probability p,
/// the number of ones is Binomial(m, p); this agent draws that count directly.
/// Distributionally identical to SampleAgent on every channel operation.
class ExactLawAgent {
 public:
  ExactLawAgent(Distribution dist, Rng rng) : dist_(std::move(dist)), rng_(std::move(rng)) {}

  bool respond(const Query& q) {
    std::bernoulli_distribution bit(query_probability(dist_, q));
    return bit(rng_);
  }

  std::uint64_t respond_count(const Query& q, std::uint64_t m) {
    return binomial(m, query_probability(dist_, q));
  }

  std::uint64_t respond_dithered_count(Dither dir, double lo, double hi, std::uint64_t m) {
    return binomial(m, dithered_probability(dist_, dir, lo, hi));
  }

 private:
  std::uint64_t binomial(std::uint64_t m, double p) {
    if (m == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return m;
    std::binomial_distribution<std::uint64_t> draw(m, p);
    return draw(rng_);
  }

  Distribution dist_;
  Rng rng_;
};

/// Vector-valued agent with independent coordinates. Each bit consumes one full
/// fresh vector; `bits_per_sample` > 1 is the relaxed mode where one vector
/// answers one query per coordinate.
class VectorSampleAgent {
 public:
  VectorSampleAgent(std::vector<Distribution> coords, Rng rng)
      : coords_(std::move(coords)), rng_(std::move(rng)) {
    if (coords_.empty()) throw std::invalid_argument("vector agent needs at least one coordinate");
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return coords_.size(); }

  bool respond(std::size_t coord, const Query& q) {
    double selected = 0.0;
    for (std::size_t c = 0; c < coords_.size(); ++c) {
      const double x = coords_[c].sample(rng_);
      if (c == coord) selected = x;
    }
    return evaluate(q, selected);
  }

  [[nodiscard]] std::vector<double> true_mean() const {
    std::vector<double> mu;
    mu.reserve(coords_.size());
    for (const auto& d : coords_) mu.push_back(d.mean());
    return mu;
  }

 private:
  std::vector<Distribution> coords_;
  Rng rng_;
};

/// Scalar view of one coordinate of a vector agent.
class CoordinateAgent {
 public:
  CoordinateAgent(VectorSampleAgent& parent, std::size_t coord) : parent_(&parent), coord_(coord) {
    if (coord >= parent.dimension()) throw std::out_of_range("coordinate out of range");
  }

  bool respond(const Query& q) { return parent_->respond(coord_, q); }

  std::uint64_t respond_count(const Query& q, std::uint64_t m) {
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < m; ++i) ones += respond(q) ? 1U : 0U;
    return ones;
  }

 private:
  VectorSampleAgent* parent_;
  std::size_t coord_;
};

}  // namespace onebit

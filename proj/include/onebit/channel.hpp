#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onebit/agent.hpp"
#include "onebit/query.hpp"
#include "onebit/rng.hpp"
#include "onebit/transcript.hpp"

namespace onebit {

/// A query fixed in advance, issued `count` times.
struct PlannedQuery {
  Query query;
  std::uint64_t count = 1;
  Tag tag{};
};

/// Learner side of the protocol. Sends queries to an agent, receives bits,
/// and accounts for every bit in the transcript. Owns the learner's private
/// randomness (used for dithered thresholds).
template <BitAgent A>
class Channel {
 public:
  Channel(A& agent, Rng learner_rng, bool record_entries = false)
      : agent_(&agent), learner_rng_(std::move(learner_rng)), transcript_(record_entries) {}

  bool ask(const Query& q, const Tag& tag = {}) {
    validate(q);
    const bool bit = agent_->respond(q);
    transcript_.record(tag, q, bit);
    return bit;
  }

  /// Number of ones among m independent copies of query q.
  std::uint64_t ask_count(const Query& q, std::uint64_t m, const Tag& tag = {}) {
    validate(q);
    if (transcript_.recording()) {
      std::uint64_t ones = 0;
      for (std::uint64_t i = 0; i < m; ++i) ones += ask(q, tag) ? 1U : 0U;
      return ones;
    }
    const std::uint64_t ones = agent_->respond_count(q, m);
    transcript_.add(tag, m);
    return ones;
  }

  double repeated_fraction(const Query& q, std::uint64_t m, const Tag& tag = {}) {
    if (m == 0) throw std::invalid_argument("repeated_fraction needs m >= 1");
    return static_cast<double>(ask_count(q, m, tag)) / static_cast<double>(m);
  }

  /// m threshold queries, each against a fresh learner-drawn T ~ Uniform(lo, hi).
  std::uint64_t ask_dithered(Dither dir, double lo, double hi, std::uint64_t m,
                             const Tag& tag = {}) {
    if (!(hi > lo)) throw std::invalid_argument("dither range must have hi > lo");
    if constexpr (DitherBatchAgent<A>) {
      if (!transcript_.recording()) {
        const std::uint64_t ones = agent_->respond_dithered_count(dir, lo, hi, m);
        transcript_.add(tag, m);
        return ones;
      }
    }
    std::uint64_t ones = 0;
    for (std::uint64_t i = 0; i < m; ++i) {
      const double t = lo + (hi - lo) * uniform01(learner_rng_);
      const Query q = dir == Dither::AtLeast ? Query{ThresholdGE{t}} : Query{ThresholdLE{t}};
      ones += ask(q, tag) ? 1U : 0U;
    }
    return ones;
  }

  /// Issues a plan fixed before any response is read; returns counts of ones.
  std::vector<std::uint64_t> execute(const std::vector<PlannedQuery>& plan) {
    for (const auto& p : plan) validate(p.query);
    std::vector<std::uint64_t> ones;
    ones.reserve(plan.size());
    for (const auto& p : plan) ones.push_back(ask_count(p.query, p.count, p.tag));
    return ones;
  }

  [[nodiscard]] Rng& learner_rng() noexcept { return learner_rng_; }
  [[nodiscard]] const Transcript& transcript() const noexcept { return transcript_; }

 private:
  A* agent_;
  Rng learner_rng_;
  Transcript transcript_;
};

}  // namespace onebit

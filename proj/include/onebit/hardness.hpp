#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/distributions.hpp"
#include "onebit/localization.hpp"

namespace onebit {

// ---------------------------------------------------------------------------
// Pair grid
// ---------------------------------------------------------------------------

/// N = lambda/sigma - 1 pairs centered at c_j = -lambda + 2 j sigma. Member
/// (j, +) puts mass 1/2 + eps/sigma on c_j + sigma/2 and the rest on c_j - sigma/2.
struct PairGrid {
  double lambda = 0.0;  // rounded up to a multiple of sigma
  double sigma = 1.0;
  double eps = 0.0;
  int N = 0;

  [[nodiscard]] double center(int j) const {
    if (j < 1 || j > N) throw std::out_of_range("pair index out of range");
    return -lambda + 2.0 * j * sigma;
  }
  [[nodiscard]] double member_mean(int j, int sign) const { return center(j) + sign * eps; }

  [[nodiscard]] Distribution member(int j, int sign) const {
    if (sign != 1 && sign != -1) throw std::invalid_argument("pair sign must be +1 or -1");
    const double c = center(j);
    const double up = 0.5 + sign * eps / sigma;
    return Distribution::discrete({c - 0.5 * sigma, c + 0.5 * sigma}, {1.0 - up, up});
  }
};

inline PairGrid make_pair_grid(double lambda, double sigma, double eps) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(eps > 0.0) || !(eps < sigma / 2.0))
    throw std::invalid_argument("pair grid requires 0 < eps < sigma/2");
  PairGrid g;
  g.sigma = sigma;
  g.eps = eps;
  const auto cells = static_cast<int>(std::ceil(lambda / sigma - 1e-9));
  g.lambda = cells * sigma;
  g.N = cells - 1;
  if (g.N < 1) throw std::invalid_argument("pair grid requires lambda >= 2 sigma");
  return g;
}

// ---------------------------------------------------------------------------
// k = 2 null / mixture pair
// ---------------------------------------------------------------------------

/// D0 puts q_i on each of +-x_i (x_i = 2^i sigma, q_i = 1/(2M 4^i)) and the rest
/// at 0. D_j moves p_j = 3 eps / (2^{j+1} sigma) from -x_j to +x_j; the
/// alternative is the uniform mixture of D_1..D_M.
struct K2HardPair {
  double sigma = 1.0;
  double eps = 0.0;
  double lambda = 0.0;
  int M = 0;
  std::vector<double> x;  // x_1..x_M
  std::vector<double> q;
  std::vector<double> p;

  [[nodiscard]] double origin_mass() const {
    long double s = 0.0L;
    for (double qi : q) s += 2.0L * qi;
    return static_cast<double>(1.0L - s);
  }

  /// Signed support {-x_M..-x_1, +x_1..+x_M} (the origin excluded) with masses.
  [[nodiscard]] std::vector<double> grid() const {
    std::vector<double> g;
    for (int i = M - 1; i >= 0; --i) g.push_back(-x[static_cast<std::size_t>(i)]);
    for (int i = 0; i < M; ++i) g.push_back(x[static_cast<std::size_t>(i)]);
    return g;
  }
  [[nodiscard]] std::vector<double> null_masses() const {
    std::vector<double> m;
    for (int i = M - 1; i >= 0; --i) m.push_back(q[static_cast<std::size_t>(i)]);
    for (int i = 0; i < M; ++i) m.push_back(q[static_cast<std::size_t>(i)]);
    return m;
  }
  [[nodiscard]] std::vector<double> mixture_masses() const {
    std::vector<double> m;
    for (int i = M - 1; i >= 0; --i)
      m.push_back(q[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)] / M);
    for (int i = 0; i < M; ++i)
      m.push_back(q[static_cast<std::size_t>(i)] + p[static_cast<std::size_t>(i)] / M);
    return m;
  }

  [[nodiscard]] Distribution null_law() const { return with_origin(null_masses()); }
  [[nodiscard]] Distribution mixture() const { return with_origin(mixture_masses()); }

  [[nodiscard]] Distribution component(int j) const {
    if (j < 1 || j > M) throw std::out_of_range("component index out of range");
    auto m = null_masses();
    m[static_cast<std::size_t>(M - j)] -= p[static_cast<std::size_t>(j - 1)];
    m[static_cast<std::size_t>(M + j - 1)] += p[static_cast<std::size_t>(j - 1)];
    return with_origin(m);
  }

 private:
  [[nodiscard]] Distribution with_origin(std::vector<double> masses) const {
    auto pts = grid();
    pts.push_back(0.0);
    masses.push_back(origin_mass());
    return Distribution::discrete(pts, masses);
  }
};

inline int k2_pair_bits(double sigma, double eps) {
  return static_cast<int>(std::floor(0.5 * std::log2(sigma / (3.0 * eps)) + 1e-12));
}

/// `q1_offset` perturbs q_1 after construction; it exists only so verification
/// fault-injection can exercise failure paths.
inline K2HardPair make_k2_pair(double sigma, double eps, double lambda, double q1_offset = 0.0) {
  if (!(sigma > 0.0) || !(eps > 0.0)) throw std::invalid_argument("sigma and eps must be positive");
  K2HardPair h;
  h.sigma = sigma;
  h.eps = eps;
  h.lambda = lambda;
  h.M = k2_pair_bits(sigma, eps);
  if (h.M < 1) throw std::invalid_argument("k2 pair requires eps <= sigma/12 so that M >= 1");
  for (int i = 1; i <= h.M; ++i) {
    h.x.push_back(std::ldexp(sigma, i));
    h.q.push_back(1.0 / (2.0 * h.M * std::ldexp(1.0, 2 * i)));
    h.p.push_back(3.0 * eps / (std::ldexp(1.0, i + 1) * sigma));
  }
  h.q[0] += q1_offset;
  for (int i = 0; i < h.M; ++i)
    if (h.p[static_cast<std::size_t>(i)] > h.q[static_cast<std::size_t>(i)])
      throw std::invalid_argument("k2 pair invalid: p_j exceeds q_j");
  return h;
}

struct KlVerification {
  double max_kl = 0.0;
  double bound = 0.0;
  std::uint64_t subsets = 0;
  std::uint64_t failures = 0;
  std::uint64_t worst_mask = 0;
  [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

/// KL(Bern(p) || Bern(q)) in extended precision.
inline long double bernoulli_kl(long double p, long double q) {
  auto term = [](long double a, long double b) -> long double {
    if (a <= 0.0L) return 0.0L;
    if (b <= 0.0L) return std::numeric_limits<long double>::infinity();
    return a * std::log(a / b);
  };
  return term(p, q) + term(1.0L - p, 1.0L - q);
}

/// Exhaustive check of every subset S of the non-origin grid:
/// KL(Bern(P_mix(S)) || Bern(P_0(S))) <= 36 eps^2 / (M sigma^2), 1e-15 slack.
inline KlVerification verify_kl_bound(const K2HardPair& pair) {
  if (pair.M > 8) throw std::invalid_argument("KL enumeration limited to M <= 8");
  const auto null_m = pair.null_masses();
  const auto mix_m = pair.mixture_masses();
  const std::size_t width = null_m.size();
  KlVerification v;
  v.bound = 36.0 * pair.eps * pair.eps / (pair.M * pair.sigma * pair.sigma);
  v.subsets = std::uint64_t{1} << width;
  for (std::uint64_t mask = 0; mask < v.subsets; ++mask) {
    long double p0 = 0.0L, p1 = 0.0L;
    for (std::size_t b = 0; b < width; ++b) {
      if (mask >> b & 1U) {
        p0 += null_m[b];
        p1 += mix_m[b];
      }
    }
    const auto kl = static_cast<double>(bernoulli_kl(p1, p0));
    if (kl > v.max_kl) {
      v.max_kl = kl;
      v.worst_mask = mask;
    }
    if (!(kl <= v.bound + 1e-15)) ++v.failures;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Non-adaptive interval baseline
// ---------------------------------------------------------------------------

/// The baseline's whole query list; depends only on its arguments.
/// Per pair j: m presence queries [c_j - sigma, c_j + sigma] then m sign
/// queries [c_j, c_j + sigma], m = floor(budget / 2N).
inline std::vector<PlannedQuery> baseline_plan(double lambda, double sigma, double eps,
                                               std::uint64_t budget) {
  const PairGrid g = make_pair_grid(lambda, sigma, eps);
  const auto slots = static_cast<std::uint64_t>(2 * g.N);
  if (budget < slots) throw std::invalid_argument("baseline budget must be at least 2N");
  const std::uint64_t m = budget / slots;
  std::vector<PlannedQuery> plan;
  plan.reserve(slots);
  for (int j = 1; j <= g.N; ++j) {
    const double c = g.center(j);
    plan.push_back({Interval{c - sigma, c + sigma}, m, Tag{Phase::Baseline}});
    plan.push_back({Interval{c, c + sigma}, m, Tag{Phase::Baseline}});
  }
  return plan;
}

struct BaselineResult {
  double mu_hat = 0.0;
  int j_hat = 0;
  int sign = 1;
  std::uint64_t samples = 0;
};

template <BitAgent A>
BaselineResult nonadaptive_baseline(Channel<A>& channel, double lambda, double sigma, double eps,
                                    std::uint64_t budget) {
  const PairGrid g = make_pair_grid(lambda, sigma, eps);
  const auto plan = baseline_plan(lambda, sigma, eps, budget);
  const std::uint64_t before = channel.transcript().total();
  const auto ones = channel.execute(plan);
  BaselineResult out;
  std::uint64_t best = 0;
  for (int j = 1; j <= g.N; ++j) {
    const std::uint64_t presence = ones[static_cast<std::size_t>(2 * (j - 1))];
    if (j == 1 || presence > best) {
      best = presence;
      out.j_hat = j;
    }
  }
  const std::uint64_t m = plan.front().count;
  const std::uint64_t upper = ones[static_cast<std::size_t>(2 * (out.j_hat - 1) + 1)];
  out.sign = 2 * upper >= m ? 1 : -1;
  out.mu_hat = g.center(out.j_hat) + out.sign * eps;
  out.samples = channel.transcript().total() - before;
  return out;
}

}  // namespace onebit

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "onebit/family.hpp"
#include "onebit/rng.hpp"

namespace onebit {

enum class DistributionKind { PointMass, Discrete, TwoSidedPareto, Gaussian };

namespace detail {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
inline double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

struct PointMassLaw {
  double at = 0.0;
};

struct DiscreteLaw {
  std::vector<double> points;      // strictly increasing
  std::vector<double> probs;       // matching masses
  std::vector<double> cumulative;  // cumulative[i] = P(X <= points[i])
};

/// Symmetric Pareto: |X - mu| has density alpha x_m^alpha y^-(alpha+1) on y >= x_m,
/// with a fair random sign.
struct ParetoLaw {
  double mu = 0.0;
  double alpha = 2.0;
  double x_m = 1.0;
};

struct GaussianLaw {
  double mu = 0.0;
  double s = 1.0;
};

}  // namespace detail

/// An immutable scalar law with an exact sampler and closed-form oracles.
///
/// Every oracle is analytic: nothing here estimates by sampling. Shared
/// freely across threads; each sample() call takes a caller-owned stream.
class Distribution {
 public:
  static Distribution point_mass(double at) {
    if (!std::isfinite(at)) throw std::invalid_argument("point mass location must be finite");
    return Distribution{detail::PointMassLaw{at}};
  }

  /// Finite discrete law. Duplicate points are merged; zero masses are kept
  /// out of the support.
  static Distribution discrete(std::span<const double> points, std::span<const double> probs) {
    if (points.size() != probs.size())
      throw std::invalid_argument("discrete: points and probs differ in length");
    if (points.empty()) throw std::invalid_argument("discrete: empty support");
    long double total = 0.0L;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!std::isfinite(points[i])) throw std::invalid_argument("discrete: non-finite point");
      if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
        throw std::invalid_argument("discrete: negative or non-finite probability");
      total += probs[i];
    }
    if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12)
      throw std::invalid_argument("discrete: probabilities do not sum to 1");

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });

    detail::DiscreteLaw law;
    for (std::size_t idx : order) {
      if (probs[idx] == 0.0) continue;
      if (!law.points.empty() && law.points.back() == points[idx]) {
        law.probs.back() += probs[idx];
      } else {
        law.points.push_back(points[idx]);
        law.probs.push_back(probs[idx]);
      }
    }
    long double run = 0.0L;
    law.cumulative.reserve(law.probs.size());
    for (double p : law.probs) {
      run += p;
      law.cumulative.push_back(static_cast<double>(run));
    }
    return Distribution{std::move(law)};
  }

  static Distribution discrete(std::initializer_list<double> points,
                               std::initializer_list<double> probs) {
    return discrete(std::span<const double>(points.begin(), points.size()),
                    std::span<const double>(probs.begin(), probs.size()));
  }

  /// Symmetric Pareto about mu, tail index alpha, scaled so that
  /// E|X - mu|^k = sigma^k exactly.
  static Distribution two_sided_pareto(double k, double sigma, double mu, double alpha) {
    if (!(k > 1.0)) throw std::invalid_argument("pareto: k must exceed 1");
    if (!(alpha > k)) throw std::invalid_argument("pareto: alpha must exceed k");
    if (!(sigma > 0.0)) throw std::invalid_argument("pareto: sigma must be positive");
    const double x_m = sigma * std::pow((alpha - k) / alpha, 1.0 / k);
    return Distribution{detail::ParetoLaw{mu, alpha, x_m}};
  }

  static Distribution gaussian(double mu, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("gaussian: scale must be positive");
    return Distribution{detail::GaussianLaw{mu, s}};
  }

  /// Gaussian whose k-th absolute central moment equals sigma^k, using
  /// E|Z|^k = s^k 2^{k/2} Gamma((k+1)/2) / sqrt(pi).
  static Distribution gaussian_moment_tight(double mu, double sigma, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("gaussian: k must be positive");
    const double unit = gaussian_abs_moment_unit(k);
    return gaussian(mu, sigma / std::pow(unit, 1.0 / k));
  }

  [[nodiscard]] DistributionKind kind() const noexcept {
    return static_cast<DistributionKind>(law_.index());
  }

  [[nodiscard]] double sample(Rng& rng) const {
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return law.at;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            const double u = uniform01(rng) * law.cumulative.back();
            auto it = std::upper_bound(law.cumulative.begin(), law.cumulative.end(), u);
            if (it == law.cumulative.end()) --it;
            return law.points[static_cast<std::size_t>(it - law.cumulative.begin())];
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            const std::uint64_t word = rng();
            const double u = 1.0 - static_cast<double>(word >> 11) * 0x1.0p-53;  // (0, 1]
            const double magnitude = law.x_m * std::pow(u, -1.0 / law.alpha);
            return (word & 1U) ? law.mu + magnitude : law.mu - magnitude;
          } else {
            std::normal_distribution<double> normal(law.mu, law.s);
            return normal(rng);
          }
        },
        law_);
  }

  /// P(X <= x).
  [[nodiscard]] double cdf(double x) const {
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return x >= law.at ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            auto it = std::upper_bound(law.points.begin(), law.points.end(), x);
            if (it == law.points.begin()) return 0.0;
            return std::min(1.0, law.cumulative[static_cast<std::size_t>(it - law.points.begin()) - 1]);
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            const double y = x - law.mu;
            if (y <= -law.x_m) return 0.5 * std::pow(law.x_m / -y, law.alpha);
            if (y < law.x_m) return 0.5;
            return 1.0 - 0.5 * std::pow(law.x_m / y, law.alpha);
          } else {
            return detail::std_normal_cdf((x - law.mu) / law.s);
          }
        },
        law_);
  }

  /// P(X < x). Differs from cdf only at atoms.
  [[nodiscard]] double prob_lt(double x) const {
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return x > law.at ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            auto it = std::lower_bound(law.points.begin(), law.points.end(), x);
            if (it == law.points.begin()) return 0.0;
            return std::min(1.0, law.cumulative[static_cast<std::size_t>(it - law.points.begin()) - 1]);
          } else {
            return cdf(x);
          }
        },
        law_);
  }

  /// P(X >= x).
  [[nodiscard]] double prob_ge(double x) const { return upper_tail(x, true); }
  /// P(X > x).
  [[nodiscard]] double prob_gt(double x) const { return upper_tail(x, false); }

  [[nodiscard]] double mean() const {
    return std::visit(
        [](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return law.at;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            long double m = 0.0L;
            for (std::size_t i = 0; i < law.points.size(); ++i)
              m += static_cast<long double>(law.probs[i]) * law.points[i];
            return static_cast<double>(m);
          } else {
            return law.mu;
          }
        },
        law_);
  }

  /// E|X - mean|^order; +inf when the moment does not exist.
  [[nodiscard]] double abs_central_moment(double order) const {
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return 0.0;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            const double mu = mean();
            long double m = 0.0L;
            for (std::size_t i = 0; i < law.points.size(); ++i)
              m += static_cast<long double>(law.probs[i]) *
                   std::pow(std::fabs(law.points[i] - mu), order);
            return static_cast<double>(m);
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            if (order >= law.alpha) return std::numeric_limits<double>::infinity();
            return law.alpha * std::pow(law.x_m, order) / (law.alpha - order);
          } else {
            return std::pow(law.s, order) * gaussian_abs_moment_unit(order);
          }
        },
        law_);
  }

  /// E[X * 1{X >= u}] (inclusive) or E[X * 1{X > u}] (strict).
  [[nodiscard]] double partial_mean_above(double u, bool inclusive = true) const {
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            const bool in = inclusive ? law.at >= u : law.at > u;
            return in ? law.at : 0.0;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            long double m = 0.0L;
            for (std::size_t i = 0; i < law.points.size(); ++i) {
              const bool in = inclusive ? law.points[i] >= u : law.points[i] > u;
              if (in) m += static_cast<long double>(law.probs[i]) * law.points[i];
            }
            return static_cast<double>(m);
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            const double v = u - law.mu;
            const double a = law.alpha;
            double centered;  // E[(X - mu) 1{X - mu >= v}]
            if (std::fabs(v) >= law.x_m) {
              centered = 0.5 * a * std::pow(law.x_m, a) * std::pow(std::fabs(v), 1.0 - a) / (a - 1.0);
            } else {
              centered = 0.5 * a * law.x_m / (a - 1.0);
            }
            return law.mu * prob_ge(u) + centered;
          } else {
            const double z = (u - law.mu) / law.s;
            return law.mu * detail::std_normal_sf(z) + law.s * detail::std_normal_pdf(z);
          }
        },
        law_);
  }

  /// E[X * 1{X >= t or X <= -t}]: the contribution outside the open window (-t, t).
  [[nodiscard]] double outside_window_mean(double t) const {
    return partial_mean_above(t, true) + (mean() - partial_mean_above(-t, false));
  }

  /// Integral of the CDF over [a, b].
  [[nodiscard]] double cdf_integral(double a, double b) const {
    if (b < a) return -cdf_integral(b, a);
    return std::visit(
        [&](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            return std::max(0.0, b - std::max(a, law.at));
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            long double acc = 0.0L;
            for (std::size_t i = 0; i < law.points.size(); ++i) {
              const double lo = std::max(a, law.points[i]);
              if (b > lo) acc += static_cast<long double>(law.probs[i]) * (b - lo);
            }
            return static_cast<double>(acc);
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            return pareto_cdf_antiderivative(law, b) - pareto_cdf_antiderivative(law, a);
          } else {
            auto prim = [&](double y) {
              const double z = (y - law.mu) / law.s;
              return law.s * (z * detail::std_normal_cdf(z) + detail::std_normal_pdf(z));
            };
            return prim(b) - prim(a);
          }
        },
        law_);
  }

  /// Law of X - c.
  [[nodiscard]] Distribution shifted(double c) const {
    return std::visit(
        [&](const auto& law) -> Distribution {
          using L = std::decay_t<decltype(law)>;
          L copy = law;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            copy.at -= c;
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            for (double& p : copy.points) p -= c;
          } else {
            copy.mu -= c;
          }
          return Distribution{std::move(copy)};
        },
        law_);
  }

  /// Support atoms (empty for continuous kinds).
  [[nodiscard]] std::vector<std::pair<double, double>> atoms() const {
    std::vector<std::pair<double, double>> out;
    if (const auto* pm = std::get_if<detail::PointMassLaw>(&law_)) {
      out.emplace_back(pm->at, 1.0);
    } else if (const auto* d = std::get_if<detail::DiscreteLaw>(&law_)) {
      for (std::size_t i = 0; i < d->points.size(); ++i) out.emplace_back(d->points[i], d->probs[i]);
    }
    return out;
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(6);
    std::visit(
        [&](const auto& law) {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, detail::PointMassLaw>) {
            os << "point(" << law.at << ")";
          } else if constexpr (std::is_same_v<L, detail::DiscreteLaw>) {
            os << "discrete(" << law.points.size() << " atoms)";
          } else if constexpr (std::is_same_v<L, detail::ParetoLaw>) {
            os << "pareto(mu=" << law.mu << ",alpha=" << law.alpha << ",x_m=" << law.x_m << ")";
          } else {
            os << "gaussian(mu=" << law.mu << ",s=" << law.s << ")";
          }
        },
        law_);
    return os.str();
  }

  /// E|Z|^k for a standard normal Z.
  static double gaussian_abs_moment_unit(double k) {
    return std::pow(2.0, k / 2.0) * std::tgamma((k + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
  }

 private:
  using Law = std::variant<detail::PointMassLaw, detail::DiscreteLaw, detail::ParetoLaw,
                           detail::GaussianLaw>;

  explicit Distribution(Law law) : law_(std::move(law)) {}

  [[nodiscard]] double upper_tail(double x, bool inclusive) const {
    if (const auto* d = std::get_if<detail::DiscreteLaw>(&law_)) {
      // Sum from the top to keep tiny tails exact.
      long double acc = 0.0L;
      for (std::size_t i = d->points.size(); i-- > 0;) {
        const bool in = inclusive ? d->points[i] >= x : d->points[i] > x;
        if (!in) break;
        acc += d->probs[i];
      }
      return static_cast<double>(acc);
    }
    if (const auto* p = std::get_if<detail::ParetoLaw>(&law_)) {
      const double y = x - p->mu;
      if (y >= p->x_m) return 0.5 * std::pow(p->x_m / y, p->alpha);
      if (y > -p->x_m) return 0.5;
      return 1.0 - 0.5 * std::pow(p->x_m / -y, p->alpha);
    }
    if (const auto* g = std::get_if<detail::GaussianLaw>(&law_)) {
      return detail::std_normal_sf((x - g->mu) / g->s);
    }
    return inclusive ? 1.0 - prob_lt(x) : 1.0 - cdf(x);
  }

  // H(x) = integral of F from -inf to x.
  static double pareto_cdf_antiderivative(const detail::ParetoLaw& law, double x) {
    const double y = x - law.mu;
    const double a = law.alpha;
    const double xm = law.x_m;
    const double left_tail = 0.5 * xm / (a - 1.0);  // H at y = -x_m
    if (y <= -xm) return 0.5 * std::pow(xm, a) * std::pow(-y, 1.0 - a) / (a - 1.0);
    if (y < xm) return left_tail + 0.5 * (y + xm);
    const double at_xm = left_tail + xm;
    return at_xm + (y - xm) -
           0.5 * std::pow(xm, a) * (std::pow(xm, 1.0 - a) - std::pow(y, 1.0 - a)) / (a - 1.0);
  }

  Law law_;
};

/// Result of checking a law against D(k, lambda, sigma).
struct MembershipVerdict {
  bool member = false;
  double mean = 0.0;
  double moment = 0.0;        // E|X - mu|^{k'}
  double moment_bound = 0.0;  // sigma^{k'}
  double order = 0.0;         // k' = min(k, 3)
};

/// Analytic membership test with k' = min(k, 3) and 1e-9 relative slack on the moment.
inline MembershipVerdict validate_family(const Distribution& dist, const FamilyParams& params) {
  MembershipVerdict v;
  v.order = params.operative_k();
  v.mean = dist.mean();
  v.moment = dist.abs_central_moment(v.order);
  v.moment_bound = std::pow(params.sigma, v.order);
  v.member = std::fabs(v.mean) <= params.lambda && v.moment <= v.moment_bound * (1.0 + 1e-9);
  return v;
}

}  // namespace onebit

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include "onebit/agent.hpp"
#include "onebit/channel.hpp"
#include "onebit/distributions.hpp"
#include "onebit/family.hpp"
#include "onebit/fixtures.hpp"
#include "onebit/hardness.hpp"
#include "onebit/localization.hpp"
#include "onebit/refine.hpp"
#include "onebit/rng.hpp"
#include "onebit/variants.hpp"

namespace onebit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitVerification = 2;

// ---------------------------------------------------------------------------
// Formatting, statistics, streams
// ---------------------------------------------------------------------------

/// Shortest round-trippable decimal for CSV cells.
inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One-sided Clopper-Pearson lower confidence bound for a binomial proportion.
inline double binomial_lower_bound(std::uint64_t successes, std::uint64_t n, double confidence = 0.95) {
  if (n == 0) throw std::invalid_argument("binomial bound needs n >= 1");
  if (successes == 0) return 0.0;
  const double alpha = 1.0 - confidence;
  auto upper_tail = [&](double p) {
    long double acc = 0.0L;
    const long double lp = std::log(static_cast<long double>(p));
    const long double lq = std::log1p(-static_cast<long double>(p));
    const long double ln_n1 = std::lgamma(static_cast<long double>(n) + 1.0L);
    for (std::uint64_t i = successes; i <= n; ++i) {
      const auto li = static_cast<long double>(i);
      const long double lchoose = ln_n1 - std::lgamma(li + 1.0L) -
                                  std::lgamma(static_cast<long double>(n - i) + 1.0L);
      acc += std::exp(lchoose + li * lp + static_cast<long double>(n - i) * lq);
    }
    return static_cast<double>(acc);
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid) < alpha) lo = mid;
    else hi = mid;
  }
  return lo;
}

/// Independent agent and learner streams for one trial of one experiment:
///   agent   = derive_seed(base, label_hash(experiment), trial)
///   learner = derive_seed(base, label_hash(experiment) ^ label_hash("learner"), trial)
struct TrialStreams {
  std::uint64_t agent = 0;
  std::uint64_t learner = 0;
};

inline TrialStreams trial_streams(std::uint64_t base, std::string_view experiment, std::uint64_t trial) {
  const std::uint64_t id = label_hash(experiment);
  return {derive_seed(base, id, trial), derive_seed(base, id ^ label_hash("learner"), trial)};
}

/// Runs fn(trial) for every trial on a worker pool; results are ordered by
/// trial index whatever the completion order.
template <class F>
auto run_trials(std::uint64_t trials, unsigned threads, F&& fn) {
  using R = std::invoke_result_t<F&, std::uint64_t>;
  std::vector<std::optional<R>> slots(trials);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(trials, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(trials);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Which agent simulates the protocol: per-sample draws, or exact binomial
/// response counts (same law, much faster for large allocations).
enum class Backend { Sample, ExactLaw };

inline Backend parse_backend(std::string_view s) {
  if (s == "sample") return Backend::Sample;
  if (s == "exact") return Backend::ExactLaw;
  throw std::invalid_argument("unknown backend: " + std::string(s));
}

template <class F>
decltype(auto) with_agent(Backend backend, const Distribution& dist, std::uint64_t seed, F&& fn) {
  if (backend == Backend::ExactLaw) {
    ExactLawAgent agent(dist, Rng{seed});
    return fn(agent);
  }
  SampleAgent agent(dist, Rng{seed});
  return fn(agent);
}

// ---------------------------------------------------------------------------
// Fixture matrix
// ---------------------------------------------------------------------------

struct MatrixEntry {
  std::string fixture;
  double k = 2.0;
};

/// Fixtures used by the PAC, localization and membership suites, for
/// lambda = 16 sigma (sigma = 1 in the fixture strings).
inline std::vector<MatrixEntry> acceptance_matrix() {
  return {
      {"pair:j=1,sign=+,shift=0.1", 2.0},
      {"pair:j=8,sign=-,shift=0.1", 2.0},
      {"pair:j=15,sign=+,shift=0.1", 2.0},
      {"k2-null", 2.0},
      {"k2-alt", 2.0},
      {"pareto:k=1.5,alpha=1.9,mu=2.7", 1.5},
      {"gaussian:mu=-5.3", 2.0},
      {"point:at=0", 2.0},
      {"point:at=3.2", 2.0},
  };
}

// ---------------------------------------------------------------------------
// PAC sweep
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  FamilyParams params{};
  TargetSpec target{};
  EstimateOptions options{};
  std::string fixture = "point:at=0";
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Backend backend = Backend::Sample;

  void validate() const {
    params.validate();
    target.validate();
    if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  }
};

struct PacRow {
  std::string fixture;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  double mu_true = 0.0;
  double mu_hat = 0.0;
  double abs_err = 0.0;
  double eps = 0.0;
  bool success = false;
  std::uint64_t n_loc = 0;
  std::uint64_t n_ref = 0;
  std::uint64_t n_total = 0;
};

struct PacSummary {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  double lower95 = 0.0;
};

inline PacSummary summarize(const std::vector<PacRow>& rows) {
  PacSummary s;
  s.trials = rows.size();
  for (const auto& r : rows) s.successes += r.success ? 1 : 0;
  if (s.trials > 0) {
    s.rate = static_cast<double>(s.successes) / static_cast<double>(s.trials);
    s.lower95 = binomial_lower_bound(s.successes, s.trials);
  }
  return s;
}

inline std::vector<PacRow> run_pac(const ExperimentConfig& cfg) {
  cfg.validate();
  const Fixture fx = make_fixture(cfg.fixture, cfg.params);
  const double mu_true = fx.dist.mean();
  const std::string experiment = "pac/" + cfg.fixture;
  return run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    const TrialStreams st = trial_streams(cfg.seed, experiment, trial);
    return with_agent(cfg.backend, fx.dist, st.agent, [&](auto& agent) {
      Channel channel(agent, Rng{st.learner});
      const EstimateReport rep = estimate_mean(channel, cfg.params, cfg.target, cfg.options);
      PacRow row;
      row.fixture = cfg.fixture;
      row.trial = trial;
      row.seed = st.agent;
      row.mu_true = mu_true;
      row.mu_hat = rep.mu_hat;
      row.abs_err = std::fabs(rep.mu_hat - mu_true);
      row.eps = cfg.target.eps;
      row.success = row.abs_err <= cfg.target.eps;
      row.n_loc = rep.n_localization;
      row.n_ref = rep.n_refinement;
      row.n_total = rep.n_total;
      return row;
    });
  });
}

inline void write_pac_csv(std::ostream& os, const std::vector<PacRow>& rows, bool header = true) {
  if (header) os << "fixture,trial,seed,mu_true,mu_hat,abs_err,eps,success,n_loc,n_ref,n_total\n";
  for (const auto& r : rows) {
    os << '"' << r.fixture << '"' << ',' << r.trial << ',' << r.seed << ',' << fmt_real(r.mu_true) << ','
       << fmt_real(r.mu_hat) << ',' << fmt_real(r.abs_err) << ',' << fmt_real(r.eps) << ','
       << (r.success ? 1 : 0) << ',' << r.n_loc << ',' << r.n_ref << ',' << r.n_total << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scaling study
// ---------------------------------------------------------------------------

struct ScalingRow {
  double k = 0.0;
  double sigma = 0.0;
  double eps = 0.0;
  std::uint64_t n_predicted = 0;  // refinement queries
  std::optional<double> ratio;    // n_predicted / previous row's
};

inline std::vector<ScalingRow> run_scaling(const FamilyParams& params, double delta,
                                           const std::vector<double>& eps_list,
                                           AllocationProfile profile = AllocationProfile::Empirical) {
  if (eps_list.size() < 2) throw std::invalid_argument("scaling needs at least two eps values");
  std::vector<ScalingRow> rows;
  for (double eps : eps_list) {
    const CostBreakdown c = predict_cost(params, TargetSpec{eps, delta}, EstimateOptions{profile, Localizer::Median});
    ScalingRow row{params.k, params.sigma, eps, c.refinement, std::nullopt};
    if (!rows.empty() && rows.back().n_predicted > 0)
      row.ratio = static_cast<double>(row.n_predicted) / static_cast<double>(rows.back().n_predicted);
    rows.push_back(row);
  }
  return rows;
}

inline void write_scaling_csv(std::ostream& os, const std::vector<ScalingRow>& rows) {
  os << "k,sigma,eps,n_predicted,ratio\n";
  for (const auto& r : rows)
    os << fmt_real(r.k) << ',' << fmt_real(r.sigma) << ',' << fmt_real(r.eps) << ',' << r.n_predicted << ','
       << (r.ratio ? fmt_real(*r.ratio) : "") << '\n';
}

// ---------------------------------------------------------------------------
// Localization study
// ---------------------------------------------------------------------------

struct LocalizeRow {
  std::uint64_t trial = 0;
  LocalizationResult result;
  bool covered = false;
};

inline std::vector<LocalizeRow> run_localize(const ExperimentConfig& cfg, Localizer method) {
  cfg.validate();
  const Fixture fx = make_fixture(cfg.fixture, cfg.params);
  const double mu = fx.dist.mean();
  const std::string experiment =
      std::string(method == Localizer::Median ? "localize-median/" : "localize-gray/") + cfg.fixture;
  return run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    const TrialStreams st = trial_streams(cfg.seed, experiment, trial);
    return with_agent(cfg.backend, fx.dist, st.agent, [&](auto& agent) {
      Channel channel(agent, Rng{st.learner});
      LocalizeRow row;
      row.trial = trial;
      row.result = method == Localizer::Median ? localize_median(channel, cfg.params, cfg.target.delta)
                                               : localize_gray(channel, cfg.params, cfg.target.delta);
      row.covered = row.result.contains(mu);
      return row;
    });
  });
}

inline void write_localize_csv(std::ostream& os, const std::vector<LocalizeRow>& rows) {
  os << "trial,low,high,center,covered,samples\n";
  for (const auto& r : rows)
    os << r.trial << ',' << fmt_real(r.result.low) << ',' << fmt_real(r.result.high) << ','
       << fmt_real(r.result.center()) << ',' << (r.covered ? 1 : 0) << ',' << r.result.samples_used << '\n';
}

// ---------------------------------------------------------------------------
// Adaptivity gap
// ---------------------------------------------------------------------------

struct GapConfig {
  double lambda_over_sigma = 64.0;
  double eps_over_sigma = 0.125;
  double delta = 0.1;
  double k = 2.0;
  std::vector<std::uint64_t> budgets;  // baseline budgets; the adaptive budget is always added
  std::uint64_t trials = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Backend backend = Backend::Sample;
  AllocationProfile profile = AllocationProfile::Empirical;
};

struct GapRow {
  std::string estimator;
  std::uint64_t budget = 0;
  double success_rate = 0.0;
  std::uint64_t trials = 0;
};

/// Random pair instance for one trial: j uniform on 1..N, sign uniform.
inline std::pair<int, int> gap_instance(const PairGrid& g, std::uint64_t seed, std::uint64_t trial) {
  Rng rng = make_rng(seed, label_hash("gap/instance"), trial);
  std::uniform_int_distribution<int> pick(1, g.N);
  const int j = pick(rng);
  const int sign = (rng() & 1U) ? 1 : -1;
  return {j, sign};
}

inline std::uint64_t gap_adaptive_budget(const GapConfig& cfg) {
  const FamilyParams params{cfg.k, cfg.lambda_over_sigma, 1.0};
  return predict_cost(params, TargetSpec{cfg.eps_over_sigma, cfg.delta}, EstimateOptions{cfg.profile}).total;
}

inline std::vector<GapRow> run_gap(const GapConfig& cfg) {
  const double sigma = 1.0;
  const FamilyParams params{cfg.k, cfg.lambda_over_sigma, sigma};
  params.validate();
  const double eps = cfg.eps_over_sigma * sigma;
  const PairGrid grid = make_pair_grid(params.lambda, sigma, eps);
  const std::uint64_t adaptive_budget = gap_adaptive_budget(cfg);
  std::vector<GapRow> rows;

  auto rate = [](const std::vector<int>& ok) {
    std::uint64_t s = 0;
    for (int v : ok) s += static_cast<std::uint64_t>(v);
    return static_cast<double>(s) / static_cast<double>(ok.size());
  };

  const auto adaptive_ok = run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    const auto [j, sign] = gap_instance(grid, cfg.seed, trial);
    const Distribution d = grid.member(j, sign);
    const TrialStreams st = trial_streams(cfg.seed, "gap/adaptive", trial);
    return with_agent(cfg.backend, d, st.agent, [&](auto& agent) {
      Channel channel(agent, Rng{st.learner});
      const auto rep = estimate_mean(channel, params, TargetSpec{eps, cfg.delta}, EstimateOptions{cfg.profile});
      return std::fabs(rep.mu_hat - d.mean()) <= eps ? 1 : 0;
    });
  });
  rows.push_back({"adaptive", adaptive_budget, rate(adaptive_ok), cfg.trials});

  std::vector<std::uint64_t> budgets = cfg.budgets;
  if (std::find(budgets.begin(), budgets.end(), adaptive_budget) == budgets.end())
    budgets.push_back(adaptive_budget);
  std::sort(budgets.begin(), budgets.end());
  for (std::uint64_t budget : budgets) {
    const auto ok = run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
      const auto [j, sign] = gap_instance(grid, cfg.seed, trial);
      const Distribution d = grid.member(j, sign);
      const TrialStreams st = trial_streams(cfg.seed, "gap/nonadaptive/" + std::to_string(budget), trial);
      return with_agent(cfg.backend, d, st.agent, [&](auto& agent) {
        Channel channel(agent, Rng{st.learner});
        const auto res = nonadaptive_baseline(channel, params.lambda, sigma, eps, budget);
        return std::fabs(res.mu_hat - d.mean()) <= eps ? 1 : 0;
      });
    });
    rows.push_back({"nonadaptive", budget, rate(ok), cfg.trials});
  }
  return rows;
}

inline void write_gap_csv(std::ostream& os, const std::vector<GapRow>& rows) {
  os << "estimator,budget,success_rate,trials\n";
  for (const auto& r : rows)
    os << r.estimator << ',' << r.budget << ',' << fmt_real(r.success_rate) << ',' << r.trials << '\n';
}

// ---------------------------------------------------------------------------
// Anytime and unknown-scale studies
// ---------------------------------------------------------------------------

struct AnytimeRow {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  AnytimeResult result;
  double mu_true = 0.0;
  std::uint64_t budget = 0;
};

inline std::vector<AnytimeRow> run_anytime(const ExperimentConfig& cfg, std::uint64_t budget) {
  cfg.validate();
  const Fixture fx = make_fixture(cfg.fixture, cfg.params);
  const std::string experiment = "anytime/" + cfg.fixture;
  return run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    const TrialStreams st = trial_streams(cfg.seed, experiment, trial);
    return with_agent(cfg.backend, fx.dist, st.agent, [&](auto& agent) {
      Channel channel(agent, Rng{st.learner});
      AnytimeRow row;
      row.trial = trial;
      row.seed = st.agent;
      row.result = anytime_estimate(channel, cfg.params, cfg.target.delta, budget, cfg.options.profile);
      row.mu_true = fx.dist.mean();
      row.budget = budget;
      return row;
    });
  });
}

inline void write_anytime_csv(std::ostream& os, const std::vector<AnytimeRow>& rows) {
  os << "trial,seed,rounds,eps_final,mu_true,mu_hat,abs_err,cost,budget\n";
  for (const auto& r : rows)
    os << r.trial << ',' << r.seed << ',' << r.result.rounds_completed << ',' << fmt_real(r.result.eps_final)
       << ',' << fmt_real(r.mu_true) << ',' << fmt_real(r.result.mu_hat) << ','
       << fmt_real(std::fabs(r.result.mu_hat - r.mu_true)) << ',' << r.result.cumulative_cost << ','
       << r.budget << '\n';
}

struct ScaleAdaptConfig {
  double sigma_min = 1.0;
  double sigma_max = 16.0;
  double ratio = 0.25;
};

struct ScaleAdaptRow {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  ScaleResult result;
  double mu_true = 0.0;
};

/// cfg.params.sigma is the fixture's true scale; the estimator only sees the range.
inline std::vector<ScaleAdaptRow> run_scale_adapt(const ExperimentConfig& cfg, const ScaleAdaptConfig& sc) {
  cfg.validate();
  const Fixture fx = make_fixture(cfg.fixture, cfg.params);
  const std::string experiment = "scale-adapt/" + cfg.fixture;
  return run_trials(cfg.trials, cfg.threads, [&](std::uint64_t trial) {
    const TrialStreams st = trial_streams(cfg.seed, experiment, trial);
    return with_agent(cfg.backend, fx.dist, st.agent, [&](auto& agent) {
      Channel channel(agent, Rng{st.learner});
      ScaleAdaptRow row;
      row.trial = trial;
      row.seed = st.agent;
      row.result = unknown_scale_estimate(channel, cfg.params.k, cfg.params.lambda, sc.sigma_min, sc.sigma_max,
                                          sc.ratio, cfg.target.delta, cfg.options);
      row.mu_true = fx.dist.mean();
      return row;
    });
  });
}

inline void write_scale_adapt_csv(std::ostream& os, const std::vector<ScaleAdaptRow>& rows) {
  os << "trial,seed,i_star,halted,sigma_star,mu_true,mu_hat,abs_err,samples\n";
  for (const auto& r : rows) {
    const double sigma_star = r.result.grid.sigmas.at(static_cast<std::size_t>(r.result.i_star));
    os << r.trial << ',' << r.seed << ',' << r.result.i_star << ',' << (r.result.halted ? 1 : 0) << ','
       << fmt_real(sigma_star) << ',' << fmt_real(r.mu_true) << ',' << fmt_real(r.result.mu_hat) << ','
       << fmt_real(std::fabs(r.result.mu_hat - r.mu_true)) << ',' << r.result.samples << '\n';
  }
}

// ---------------------------------------------------------------------------
// Analytic verification suite
// ---------------------------------------------------------------------------

struct VerifyCheck {
  std::string id;
  bool passed = false;
  double observed = 0.0;
  double expected = 0.0;
};

struct VerifyOptions {
  bool inject_fault = false;  // perturbs q_1 of every k=2 hard pair by 1e-3
};

namespace detail {

inline void check_le(std::vector<VerifyCheck>& out, std::string id, double observed, double bound) {
  out.push_back({std::move(id), observed <= bound, observed, bound});
}

inline void check_close(std::vector<VerifyCheck>& out, std::string id, double observed, double expected,
                        double tol) {
  out.push_back({std::move(id), std::fabs(observed - expected) <= tol, observed, expected});
}

}  // namespace detail

/// Sum of analytic region contributions plus the |x| >= t tail, for a centered law.
inline double decomposition_total(const Distribution& centered, const RefinementPlan& plan) {
  long double s = 0.0L;
  for (const auto& r : plan.regions) s += analytic_region_terms(centered, r).mu;
  return static_cast<double>(s + centered.outside_window_mean(plan.t));
}

inline std::vector<VerifyCheck> run_verify(const VerifyOptions& opts = {}) {
  using detail::check_close;
  using detail::check_le;
  std::vector<VerifyCheck> out;
  const double sigma = 1.0;
  const double q1_offset = opts.inject_fault ? 1e-3 : 0.0;

  // Family membership over the fixture matrix and every pair-grid member.
  for (const auto& e : acceptance_matrix()) {
    const FamilyParams p{e.k, 16.0, sigma};
    const auto v = validate_family(make_fixture(e.fixture, p).dist, p);
    out.push_back({"membership." + e.fixture, v.member, v.moment, v.moment_bound});
  }
  const PairGrid grid = make_pair_grid(16.0, sigma, 0.1);
  for (double k : {1.1, 1.5, 2.0, 3.0, 6.0}) {
    bool all = true;
    double worst = 0.0;
    const FamilyParams p{k, grid.lambda, sigma};
    for (int j = 1; j <= grid.N; ++j)
      for (int s : {-1, 1}) {
        const auto v = validate_family(grid.member(j, s), p);
        all = all && v.member;
        worst = std::max(worst, v.moment);
      }
    out.push_back({"membership.pair_grid.k=" + fmt_real(k), all, worst, std::pow(sigma, p.operative_k())});
  }

  // k = 2 hard pair.
  for (double ratio : {12.0, 48.0, 192.0}) {
    const double eps = sigma / ratio;
    const K2HardPair h = make_k2_pair(sigma, eps, 16.0, q1_offset);
    const std::string tag = "k2.eps=sigma/" + fmt_real(ratio);
    const Distribution d0 = h.null_law();
    const Distribution mix = h.mixture();
    check_close(out, tag + ".var_null", d0.abs_central_moment(2.0), sigma * sigma, 1e-12);
    check_close(out, tag + ".mean_null", d0.mean(), 0.0, 1e-12);
    check_close(out, tag + ".mean_mixture", mix.mean(), 3.0 * eps, 1e-12);
    long double mass = h.origin_mass();
    for (double qi : h.q) mass += 2.0L * qi;
    check_close(out, tag + ".mass_sum", static_cast<double>(mass), 1.0, 1e-12);
    double worst_gap = -1.0;
    for (int i = 0; i < h.M; ++i)
      worst_gap = std::max(worst_gap, h.p[static_cast<std::size_t>(i)] - h.q[static_cast<std::size_t>(i)]);
    check_le(out, tag + ".p_le_q", worst_gap, 0.0);
    out.push_back({tag + ".origin_mass", h.origin_mass() > 0.5, h.origin_mass(), 0.5});
    const auto kl = verify_kl_bound(h);
    out.push_back({tag + ".kl_M=" + std::to_string(h.M), kl.passed(), kl.max_kl, kl.bound});
  }

  // Decomposition identity and truncation bias for discrete fixtures.
  for (const auto& e : acceptance_matrix()) {
    const FamilyParams p{e.k, 16.0, sigma};
    const Distribution d = make_fixture(e.fixture, p).dist;
    if (d.atoms().empty()) continue;
    for (double eps : {sigma / 4, sigma / 8, sigma / 16}) {
      const auto plan = build_plan(p, eps, 0.1, AllocationProfile::Empirical);
      check_close(out, "decomposition." + e.fixture + ".eps=" + fmt_real(eps), decomposition_total(d, plan),
                  d.mean(), 1e-12);
    }
  }

  // Gray code: disjoint switch grids and exact roundtrip.
  {
    std::vector<std::pair<std::uint64_t, int>> seen;  // reduced dyadic numerator, level
    bool disjoint = true;
    for (int l = 1; l <= 12; ++l)
      for (std::uint64_t j = 1; 2 * j - 1 < (std::uint64_t{1} << l); ++j) {
        // (2j - 1) / 2^l scaled to the common denominator 2^12.
        const std::uint64_t num = (2 * j - 1) << (12 - l);
        for (const auto& [n2, l2] : seen)
          if (n2 == num && l2 != l) disjoint = false;
        seen.emplace_back(num, l);
      }
    out.push_back({"gray.grids_disjoint", disjoint, static_cast<double>(seen.size()), 4095.0});
    for (int M = 1; M <= 10; ++M) {
      std::uint64_t misses = 0;
      const std::uint64_t steps = std::uint64_t{1} << (M + 2);
      std::vector<int> bits(static_cast<std::size_t>(M));
      for (std::uint64_t i = 0; i <= steps; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(steps);
        for (int l = 1; l <= M; ++l) bits[static_cast<std::size_t>(l - 1)] = gray_bit_value(l, x) ? 1 : 0;
        if (!gray_decode(bits).contains(x)) ++misses;
      }
      out.push_back({"gray.roundtrip_M=" + std::to_string(M), misses == 0, static_cast<double>(misses), 0.0});
    }
  }
  return out;
}

inline bool all_passed(const std::vector<VerifyCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

/// One line per failing check: `FAIL <id> observed=<x> expected=<y>`.
inline void write_manifest(std::ostream& os, const std::vector<VerifyCheck>& checks) {
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (c.passed) continue;
    ++failed;
    os << "FAIL " << c.id << " observed=" << fmt_real(c.observed) << " expected=" << fmt_real(c.expected) << '\n';
  }
  os << (checks.size() - failed) << '/' << checks.size() << " checks passed\n";
}

}  // namespace onebit

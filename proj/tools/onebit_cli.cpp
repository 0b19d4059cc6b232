// Command-line front end for the estimators and experiments.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "onebit/onebit.hpp"

using namespace onebit;

namespace {

struct Common {
  double k = 2.0;
  double lambda = 16.0;
  double sigma = 1.0;
  double eps = 0.25;
  double delta = 0.1;
  std::string fixture = "point:at=0";
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::string profile = "empirical";
  std::string backend = "sample";
  unsigned threads = 1;

  [[nodiscard]] FamilyParams params() const { return FamilyParams{k, lambda, sigma}; }
  [[nodiscard]] TargetSpec target() const { return TargetSpec{eps, delta}; }

  [[nodiscard]] ExperimentConfig experiment() const {
    ExperimentConfig cfg;
    cfg.params = params();
    cfg.target = target();
    cfg.options.profile = parse_profile(profile);
    cfg.fixture = fixture;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.threads = threads;
    cfg.backend = parse_backend(backend);
    return cfg;
  }
};

/// Error raised for bad output paths; maps to the configuration exit code.
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Opens --out, or returns stdout when it is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw OutputError("cannot write output file: " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void print_report(const EstimateReport& rep, double mu_true) {
  std::printf("mu_hat=%s\n", fmt_real(rep.mu_hat).c_str());
  std::printf("mu_true=%s\n", fmt_real(mu_true).c_str());
  std::printf("abs_err=%s\n", fmt_real(std::fabs(rep.mu_hat - mu_true)).c_str());
  std::printf("n_localization=%llu\n", static_cast<unsigned long long>(rep.n_localization));
  std::printf("n_refinement=%llu\n", static_cast<unsigned long long>(rep.n_refinement));
  std::printf("n_total=%llu\n", static_cast<unsigned long long>(rep.n_total));
  std::printf("rounds_of_adaptivity=%d\n", rep.rounds_of_adaptivity);
  std::printf("localization=[%s, %s]\n", fmt_real(rep.localization.low).c_str(),
              fmt_real(rep.localization.high).c_str());
  if (rep.plan) {
    std::printf("cutoff_t=%s\n", fmt_real(rep.plan->t).c_str());
    std::printf("i_max=%d\n", rep.plan->i_max);
    std::printf("batches=%llu\n", static_cast<unsigned long long>(rep.plan->K));
  } else {
    std::printf("refinement=skipped\n");
  }
}

int run_verify_command(bool inject_fault, bool hardness_only, const std::string& out) {
  auto checks = run_verify(VerifyOptions{inject_fault});
  if (hardness_only) {
    std::erase_if(checks, [](const VerifyCheck& c) {
      return !(c.id.starts_with("k2.") || c.id.starts_with("membership.pair_grid"));
    });
  }
  Sink sink(out);
  write_manifest(sink.stream(), checks);
  return all_passed(checks) ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"onebit: mean estimation from one-bit threshold queries"};
  app.set_config("--config", "", "Read options from a key = value file (flags override it)");
  app.fallthrough();
  app.require_subcommand(1);

  Common c;
  app.add_option("--k", c.k, "Moment order k > 1");
  app.add_option("--lambda", c.lambda, "Bound on |mu|");
  app.add_option("--sigma", c.sigma, "Central moment scale sigma");
  app.add_option("--eps", c.eps, "Target accuracy");
  app.add_option("--delta", c.delta, "Failure probability");
  app.add_option("--fixture", c.fixture, "Fixture spec, e.g. gaussian:mu=1.5");
  app.add_option("--trials", c.trials, "Monte Carlo trials");
  app.add_option("--seed", c.seed, "Base seed");
  app.add_option("--out", c.out, "Output path (stdout when omitted)");
  app.add_option("--profile", c.profile, "Allocation profile: empirical or proof-safe");
  app.add_option("--backend", c.backend, "Agent backend: sample or exact");
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");

  auto* run = app.add_subcommand("run", "Run one estimate and print the report");
  bool two_stage = false;
  std::string transcript_path;
  run->add_flag("--two-stage", two_stage, "Use Gray-code localization (two rounds of adaptivity)");
  run->add_option("--transcript", transcript_path, "Write the full query transcript as CSV");

  auto* localize = app.add_subcommand("localize", "Coverage study of a localizer");
  std::string method = "median";
  localize->add_option("--method", method, "median or gray")->check(CLI::IsMember({"median", "gray"}));

  auto* pac = app.add_subcommand("pac", "PAC success sweep on one fixture");

  auto* scaling = app.add_subcommand("scaling", "Predicted refinement cost across eps values");
  std::vector<double> eps_list;
  scaling->add_option("--eps-list", eps_list, "Accuracies (default: sigma/8 down to sigma/256)");

  auto* anytime = app.add_subcommand("anytime", "Anytime estimator under a fixed budget");
  std::uint64_t budget = 0;
  anytime->add_option("--budget", budget, "Query budget (default: predict_cost at --eps)");

  auto* scale = app.add_subcommand("scale-adapt", "Unknown-scale estimator; --sigma is the fixture's true scale");
  ScaleAdaptConfig sc;
  scale->add_option("--sigma-min", sc.sigma_min, "Smallest candidate scale");
  scale->add_option("--sigma-max", sc.sigma_max, "Largest candidate scale");
  scale->add_option("--ratio", sc.ratio, "Accuracy ratio r in (0, 1)");

  auto* gap = app.add_subcommand("gap", "Adaptive estimator versus the non-adaptive baseline");
  double lambda_over_sigma = 64.0;
  std::vector<std::uint64_t> budgets;
  gap->add_option("--lambda-over-sigma", lambda_over_sigma, "Range in units of sigma");
  gap->add_option("--budgets", budgets, "Baseline budgets (the adaptive budget is always included)");

  auto* hardness = app.add_subcommand("hardness", "Lower-bound constructions");
  auto* hardness_verify = hardness->add_subcommand("verify", "Exact checks of the hard instances");
  hardness->require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run every analytic check");
  bool inject_fault = false;
  verify->add_flag("--inject-fault", inject_fault, "Perturb a hard-pair mass to exercise the failure path");
  hardness_verify->add_flag("--inject-fault", inject_fault, "Perturb a hard-pair mass to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*verify) return run_verify_command(inject_fault, false, c.out);
    if (*hardness_verify) return run_verify_command(inject_fault, true, c.out);

    if (*run) {
      const auto cfg = c.experiment();
      cfg.validate();
      const auto fx = make_fixture(cfg.fixture, cfg.params);
      const auto st = trial_streams(cfg.seed, "run", 0);
      const bool record = !transcript_path.empty();
      return with_agent(cfg.backend, fx.dist, st.agent, [&](auto& agent) {
        Channel channel(agent, Rng{st.learner}, record);
        const auto rep = two_stage ? two_stage_estimate(channel, cfg.params, cfg.target, cfg.options.profile)
                                   : estimate_mean(channel, cfg.params, cfg.target, cfg.options);
        print_report(rep, fx.dist.mean());
        if (record) {
          Sink sink(transcript_path);
          channel.transcript().write_csv(sink.stream());
        }
        return kExitOk;
      });
    }
    if (*localize) {
      const auto rows = run_localize(c.experiment(), method == "gray" ? Localizer::Gray : Localizer::Median);
      Sink sink(c.out);
      write_localize_csv(sink.stream(), rows);
      std::size_t covered = 0;
      for (const auto& r : rows) covered += r.covered ? 1 : 0;
      std::fprintf(stderr, "coverage %zu/%zu\n", covered, rows.size());
      return kExitOk;
    }
    if (*pac) {
      const auto rows = run_pac(c.experiment());
      Sink sink(c.out);
      write_pac_csv(sink.stream(), rows);
      const auto s = summarize(rows);
      std::fprintf(stderr, "success %llu/%llu rate=%s lower95=%s\n", static_cast<unsigned long long>(s.successes),
                   static_cast<unsigned long long>(s.trials), fmt_real(s.rate).c_str(), fmt_real(s.lower95).c_str());
      return kExitOk;
    }
    if (*scaling) {
      if (eps_list.empty())
        for (int i = 3; i <= 8; ++i) eps_list.push_back(std::ldexp(c.sigma, -i));
      Sink sink(c.out);
      write_scaling_csv(sink.stream(), run_scaling(c.params(), c.delta, eps_list, parse_profile(c.profile)));
      return kExitOk;
    }
    if (*anytime) {
      const auto cfg = c.experiment();
      cfg.validate();
      if (budget == 0) budget = predict_cost(cfg.params, cfg.target, cfg.options).total;
      const auto rows = run_anytime(cfg, budget);
      Sink sink(c.out);
      write_anytime_csv(sink.stream(), rows);
      return kExitOk;
    }
    if (*scale) {
      const auto rows = run_scale_adapt(c.experiment(), sc);
      Sink sink(c.out);
      write_scale_adapt_csv(sink.stream(), rows);
      return kExitOk;
    }
    if (*gap) {
      GapConfig g;
      g.lambda_over_sigma = lambda_over_sigma;
      g.eps_over_sigma = c.eps / c.sigma;
      g.delta = c.delta;
      g.k = c.k;
      g.budgets = budgets;
      g.trials = c.trials;
      g.seed = c.seed;
      g.threads = c.threads;
      g.backend = parse_backend(c.backend);
      g.profile = parse_profile(c.profile);
      const auto rows = run_gap(g);
      Sink sink(c.out);
      write_gap_csv(sink.stream(), rows);
      return kExitOk;
    }
  } catch (const InfeasibleBudget& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const OutputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}

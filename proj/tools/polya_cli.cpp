// Command-line front end: each subcommand runs part of the experiment
// pipeline from a JSON config and writes the resulting files to --out.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polya/consensus.hpp"
#include "polya/csv.hpp"
#include "polya/error.hpp"
#include "polya/harness.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kAssertionFailure = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  std::optional<std::string> out;
  std::optional<std::size_t> reps;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "override base_seed");
  cmd->add_option("--horizon", o.horizon, "override horizon T");
  cmd->add_option("--out", o.out, "override output_dir");
  cmd->add_option("--reps", o.reps, "override replications");
}

polya::ExperimentConfig load(const Overrides& o) {
  auto cfg = polya::load_config(o.config);
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.out) cfg.output_dir = *o.out;
  if (o.reps) cfg.replications = *o.reps;
  polya::validate(cfg);
  return cfg;
}

void print_regime(const polya::RegimeReport& r) {
  std::cout << "regime " << polya::to_string(r.regime) << "  lambda_max(Gamma W) = " << polya::format_double(r.lambda_zero)
            << "  lambda_max(Gamma^-1 W) = " << polya::format_double(r.lambda_one) << '\n';
}

int finish(const polya::RunReport& report, const polya::ExperimentConfig& cfg) {
  polya::write_files(report.files, cfg.output_dir);
  print_regime(report.regime);
  if (!report.tail_error_fraction.empty()) {
    std::cout << "final error fraction " << polya::format_double(report.error_fraction.back())
              << "  (reps with every agent correct: " << polya::format_double(report.all_correct_fraction.back())
              << ")\n";
  }
  for (std::size_t r = 0; r < report.reps.size(); ++r) {
    if (const auto& fit = report.reps[r].v_fit) {
      std::cout << "rep " << r << ": V exponent " << polya::format_double(fit->exponent) << " (lambda - 1 = "
                << polya::format_double(fit->target) << ")\n";
    }
  }
  std::cout << "wrote " << report.files.size() << " files to " << cfg.output_dir << '\n';
  if (!report.assertions_hold()) {
    std::cerr << "assertion failure: band " << report.band_violations() << ", coupling "
              << report.coupling_violations() << ", martingale " << report.martingale_violations() << '\n';
    return kAssertionFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting Polya urn opinion dynamics: simulation, estimation and diagnostics"};
  app.require_subcommand(1);

  Overrides o;
  std::vector<double> deltas{0.5, 0.3, 0.2, 0.1, 0.05};
  auto* simulate = app.add_subcommand("simulate", "simulate trajectories");
  auto* estimate = app.add_subcommand("estimate", "simulate and evaluate the estimators at every checkpoint");
  auto* classify = app.add_subcommand("classify", "report the consensus regime of the configured network");
  auto* rate = app.add_subcommand("rate", "fit the decay exponent of V(beta(t)) and of each beta_i");
  auto* diagnose = app.add_subcommand("diagnose", "likelihood-ratio martingale and coupled-process diagnostics");
  auto* sweep = app.add_subcommand("sweep", "empirical time to reach each error level delta");
  for (auto* cmd : {simulate, estimate, classify, rate, diagnose, sweep}) add_common(cmd, o);
  sweep->add_option("--deltas", deltas, "error levels, descending")->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    auto cfg = load(o);
    using polya::Output;
    if (classify->parsed()) {
      const auto report = polya::classify(*cfg.network, polya::BiasProfile(cfg.gamma), cfg.regime_tolerance);
      print_regime(report);
      return 0;
    }
    if (simulate->parsed()) {
      cfg.mle = cfg.belief = cfg.equilibrium = false;
      return finish(polya::run_experiment(cfg, Output::Trajectory), cfg);
    }
    if (estimate->parsed()) return finish(polya::run_experiment(cfg, Output::Trajectory | Output::Estimates), cfg);
    if (rate->parsed()) {
      cfg.diagnostics.rate_fit = true;
      cfg.mle = false;
      return finish(polya::run_experiment(cfg, Output::Rate), cfg);
    }
    if (diagnose->parsed()) {
      cfg.diagnostics.martingale = true;
      return finish(polya::run_experiment(cfg, Output::Diagnostics | Output::Estimates), cfg);
    }
    // sweep
    cfg.mle = cfg.equilibrium = false;
    cfg.belief = true;
    auto report = polya::run_experiment(cfg, Output::Estimates);
    const auto table = polya::sweep_delta(report, deltas);
    report.files["sweep.csv"] = table.csv;
    for (const auto& row : table.rows) {
      std::cout << "delta " << polya::format_double(row.delta) << "  t* "
                << (row.t_star ? std::to_string(*row.t_star) : "not reached") << '\n';
    }
    const int code = finish(report, cfg);
    if (!table.monotone) {
      std::cerr << "assertion failure: t*(delta) is not monotone\n";
      return kAssertionFailure;
    }
    return code;
  } catch (const polya::Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case polya::ErrorCode::ParseError:
      case polya::ErrorCode::ValidationError:
      case polya::ErrorCode::ResourceLimit:
      case polya::ErrorCode::InsufficientReplications:
        return kConfigError;
      case polya::ErrorCode::AssertionFailure:
        return kAssertionFailure;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polya/consensus.hpp"
#include "polya/dynamics.hpp"
#include "polya/graph.hpp"
#include "polya/martingale_diag.hpp"

namespace polya {

struct DiagnosticsConfig {
  bool martingale = false;
  double martingale_ratio = 2.0;  // gamma2 = gamma1 * ratio
  bool coupling = false;
  double coupling_radius = 0.2;
  bool rate_fit = false;
  std::optional<std::pair<std::int64_t, std::int64_t>> rate_window;  // default [T/10, T]
  std::size_t rate_points = 50;
};

struct ExperimentConfig {
  std::string graph;  // generator spec or edge-list path, as written
  std::optional<Network> network;
  std::vector<double> gamma;
  std::vector<double> init_b1;
  std::int64_t horizon = 0;
  std::size_t checkpoints = 50;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  bool mle = true;
  bool belief = true;
  bool equilibrium = true;
  DiagnosticsConfig diagnostics;
  std::string output_dir = "out";
  std::uint64_t max_history_entries = 200'000'000;
  std::size_t threads = 1;
  double regime_tolerance = 1e-9;
};

/// JSON config. Required: graph, gamma, horizon. gamma is a number, a
/// per-agent list, or {"groups": [{"agents": [...], "value": g}, ...]}
/// covering every agent once. Unknown and duplicate keys are ParseError;
/// semantic problems are collected into one ValidationError. Relative
/// edge-list paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// Re-checks a config after programmatic edits (CLI overrides). Throws ValidationError.
void validate(const ExperimentConfig& cfg);

/// Effective configuration as JSON text (manifest echo); stable key order.
std::string config_to_json(const ExperimentConfig& cfg);

/// Geometric times from 2 to T, rounded and deduplicated, last = T.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t lo, std::int64_t hi, std::size_t count);

/// The coupling (re)starts at each checkpoint where max beta <= radius while
/// it is not running, with h = V(beta), and stops when max mu leaves the disc.
struct CouplingSummary {
  bool started = false;
  std::int64_t start = 0;       // first segment start
  std::int64_t last_start = 0;  // start of the final segment
  std::int64_t segments = 0;
  std::int64_t exits = 0;       // segments ended by max mu > radius
  std::int64_t checked_steps = 0;
  std::int64_t violations = 0;
  double alpha_lower = 1.0;
  double alpha_upper = 1.0;
};

struct MartingaleSummary {
  HardBoundReport hard;
  std::size_t drift_violations = 0;
  double drift_min_ratio = 0.0;
  double tail_constant = 0.0;      // min over agents of the tail X(t)/log t
  double y_sum = 0.0;              // pooled increments y = x - z
  double y_sum_sq = 0.0;
  std::size_t y_count = 0;
  double qv_ratio_min = 0.0;       // realized sum y^2 / W(T), over agents
  double qv_ratio_max = 0.0;
};

struct ReplicationSummary {
  std::uint64_t seed = 0;
  std::int64_t band_violations = 0;
  std::vector<double> chi_hat;  // final checkpoint; empty without mle
  std::vector<int> phi_hat;     // final checkpoint, -1 for a tie
  bool all_correct = false;
  std::optional<RateFit> v_fit;
  std::vector<RateFit> beta_fits;
  CouplingSummary coupling;
  std::optional<MartingaleSummary> martingale;
};

struct RunReport {
  RegimeReport regime;
  std::vector<std::int64_t> checkpoints;
  std::vector<ReplicationSummary> reps;
  // Per checkpoint, over all (rep, agent) pairs; ties count as errors.
  std::vector<double> error_fraction;       // wrong at t
  std::vector<double> tail_error_fraction;  // wrong at some checkpoint >= t
  std::vector<double> all_correct_fraction; // reps with every agent right at t
  // Martingale test at each checkpoint: pairs with Z(t) <= 0, and the mean
  // Freedman bound exp(-(X^2/2)/(W + alpha X/3)) over the same pairs.
  std::vector<double> z_error_fraction;
  std::vector<double> freedman_envelope;
  std::map<std::string, std::string> files;  // name -> content, written verbatim

  std::int64_t band_violations() const;
  std::int64_t coupling_violations() const;
  std::size_t martingale_violations() const;
  bool assertions_hold() const;
};

enum class Output : unsigned {
  Trajectory = 1u << 0,
  Estimates = 1u << 1,
  Rate = 1u << 2,
  Diagnostics = 1u << 3,
  All = 0xFu,
};

constexpr Output operator|(Output a, Output b) {
  return static_cast<Output>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has(Output set, Output flag) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(flag)) != 0;
}

/// Runs every replication (seed derive_seed(base_seed, rep)), evaluates the
/// configured estimators at each checkpoint and the configured diagnostics,
/// and renders the output files into `files`. Always emits regime.json,
/// errors.csv (when an estimator runs) and manifest.json. Replication r's
/// output does not depend on R or on the thread count.
RunReport run_experiment(const ExperimentConfig& cfg, Output outputs = Output::All);

struct SweepRow {
  double delta = 0.0;
  std::optional<std::int64_t> t_star;  // first checkpoint with tail error <= delta
  double shape = 0.0;                  // log(1/delta), or its 1/lambda power under consensus
};

struct SweepTable {
  Regime regime = Regime::Boundary;
  double lambda = 0.0;
  std::vector<SweepRow> rows;
  bool monotone = true;          // t_star non-increasing in delta
  std::optional<LinearFit> fit;  // interior: t* ~ log(1/delta); consensus: log t* ~ log log(1/delta)
  std::string csv;
};

/// Empirical time to error level delta from the tail error curve of a run.
/// Needs deltas in (0,1] sorted descending and delta * R >= 10.
SweepTable sweep_delta(const RunReport& report, std::span<const double> deltas);
SweepTable sweep_delta(const ExperimentConfig& cfg, std::span<const double> deltas);

void write_files(const std::map<std::string, std::string>& files, const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);

}  // namespace polya

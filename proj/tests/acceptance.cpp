// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Thresholds below are frozen; the Monte Carlo ones were calibrated
// once from pilot runs with the same seeds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "polya/consensus.hpp"
#include "polya/dynamics.hpp"
#include "polya/estimators.hpp"
#include "polya/graph.hpp"
#include "polya/harness.hpp"
#include "polya/likelihood.hpp"
#include "polya/martingale_diag.hpp"

namespace {

using namespace polya;
using Clock = std::chrono::steady_clock;

// --- frozen thresholds ---------------------------------------------------
constexpr double kReciprocityTol = 1e-12;
constexpr double kRoundTripRelTol = 1e-12;
constexpr double kGradientIdentityTol = 1e-9;
constexpr double kIdentitySeconds = 1.0;

constexpr double kMleOracleTol = 1e-5;
constexpr double kFiniteDiffRelTol = 1e-6;
constexpr double kMleSeconds = 10.0;
constexpr int kMleHistories = 100;

constexpr double kChiMedianTol = 0.1;
constexpr std::size_t kInteriorRepsAllCorrect = 19;  // of 20

constexpr double kConsensusAllCorrect = 0.9;
constexpr double kNoiseSigmas = 2.0;  // pointwise error curve, see c5()

constexpr double kVExponentTol = 0.1;
constexpr double kBetaExponentTol = 0.15;

constexpr double kYMeanSigmas = 3.0;
constexpr double kFreedmanFactor = 10.0;

constexpr double kGautschiSeconds = 1.0;
constexpr double kLgammaRelTol = 1e-7;

constexpr double kSweepRSquared = 0.8;

// --- scenarios -------------------------------------------------------------
const char* kInterior = R"({
  "graph": "complete:10",
  "gamma": {"groups": [{"agents": [0, 1, 2, 3, 4], "value": 2.0},
                       {"agents": [5, 6, 7, 8, 9], "value": 0.5}]},
  "horizon": 200000, "checkpoints": 40, "replications": 20, "base_seed": 4,
  "estimators": ["mle"],
  "diagnostics": {"martingale": true}
})";

const char* kStar = R"({
  "graph": "star:5",
  "gamma": [1.2, 0.5, 0.5, 0.5, 0.5],
  "horizon": 100000, "checkpoints": 50, "replications": 50, "base_seed": 5,
  "estimators": ["belief"],
  "diagnostics": {"martingale": true}
})";

const char* kStarRate = R"({
  "graph": "star:5",
  "gamma": [1.2, 0.5, 0.5, 0.5, 0.5],
  "horizon": 1000000, "checkpoints": 50, "replications": 20, "base_seed": 13,
  "estimators": ["belief"],
  "diagnostics": {"rate_fit": true, "coupling": true, "coupling_radius": 0.2}
})";

const char* kInteriorSweep = R"({
  "graph": "complete:10",
  "gamma": {"groups": [{"agents": [0, 1, 2, 3, 4], "value": 2.0},
                       {"agents": [5, 6, 7, 8, 9], "value": 0.5}]},
  "horizon": 1000, "checkpoints": 80, "replications": 500, "base_seed": 11,
  "estimators": ["belief"]
})";

const char* kStarSweep = R"({
  "graph": "star:5",
  "gamma": [1.2, 0.5, 0.5, 0.5, 0.5],
  "horizon": 20000, "checkpoints": 80, "replications": 500, "base_seed": 12,
  "estimators": ["belief"]
})";

const char* kDeterminism[] = {
    R"({
  "graph": "star:5", "gamma": [1.2, 0.5, 0.5, 0.5, 0.5],
  "horizon": 20000, "replications": 3, "base_seed": 21,
  "diagnostics": {"martingale": true, "coupling": true, "rate_fit": true}
})",
    R"({
  "graph": "complete:10",
  "gamma": [2, 2, 2, 2, 2, 0.5, 0.5, 0.5, 0.5, 0.5],
  "horizon": 5000, "replications": 3, "base_seed": 22, "threads": 2,
  "diagnostics": {"martingale": true}
})"};

const std::vector<double> kSweepDeltas{0.5, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05, 0.04, 0.03, 0.02};

// --- output ----------------------------------------------------------------
struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Every run made here, for the band and martingale criteria.
struct Runs {
  std::vector<std::pair<std::string, const RunReport*>> all;
  std::int64_t extra_band = 0;  // from direct simulations outside the harness
};

// --- 1: model identities ----------------------------------------------------
Result c1(Runs& runs) {
  const auto start = Clock::now();
  double recip = 0.0, round_trip = 0.0, gradient = 0.0;
  // mu in {0.01, ..., 0.99}, gamma log-spaced over [0.1, 10].
  for (int a = 1; a < 100; ++a) {
    const double mu = a / 100.0;
    for (int b = -40; b <= 40; ++b) {
      const double g = std::pow(10.0, b / 40.0);
      recip = std::max(recip, std::abs(conformity_probability(mu, g) + conformity_probability(1.0 - mu, 1.0 / g) - 1.0));
      const double est = equilibrium_bias_estimate(conformity_probability(mu, g), mu);
      round_trip = std::max(round_trip, std::abs(est - g) / g);
    }
  }
  // Gradient at zero against the running statistics of the dynamics.
  const auto net = generate_network("complete:10");
  const BiasProfile bias({2, 2, 2, 2, 2, 0.5, 0.5, 0.5, 0.5, 0.5});
  const auto init = uniform_initial_settings(net);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto state = init_state(net, init);
    Rng rng(seed);
    while (state.t < 2000) {
      step(state, net, bias, rng);
      runs.extra_band += band_violations(state);
    }
    for (std::size_t i = 0; i < state.size(); ++i) {
      const auto h = to_declaration_history(state.history[i]);
      const double expected = state.mu_cumsum[i] - static_cast<double>(state.ones[i]);
      gradient = std::max(gradient, std::abs(nll_gradient(h, 0.0) - expected));
    }
  }
  const double secs = seconds_since(start);
  return {recip <= kReciprocityTol && round_trip <= kRoundTripRelTol && gradient <= kGradientIdentityTol &&
              secs < kIdentitySeconds,
          fmt("reciprocity %.2e, round-trip rel %.2e, gradient-at-zero %.2e, %.2fs", recip, round_trip, gradient, secs)};
}

// --- 3: MLE against an independent grid search -----------------------------
double grid_argmin(const DeclarationHistory& h) {
  double best = 0.0, best_v = total_nll(h, 0.0);
  for (int k = -2000; k <= 2000; ++k) {
    const double chi = k * 0.01;
    const double v = total_nll(h, chi);
    if (v < best_v) {
      best_v = v;
      best = chi;
    }
  }
  // Golden-section refinement inside the bracketing grid cells.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best - 0.01, hi = best + 0.01;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = total_nll(h, x1), f2 = total_nll(h, x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = total_nll(h, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = total_nll(h, x2);
    }
  }
  return 0.5 * (lo + hi);
}

Result c3() {
  const auto start = Clock::now();
  gen::Source src(2024);
  double mle_err = 0.0, fd_err = 0.0, min_hess = INFINITY;
  int tested = 0;
  while (tested < kMleHistories) {
    DeclarationHistory h;
    const auto len = src.index(2, 200);
    const double chi_true = src.uniform(-3.0, 3.0);
    for (std::size_t k = 0; k < len; ++k) {
      const double nu = src.uniform(-4.0, 4.0);
      const int psi = src.coin(sigmoid(chi_true + nu)) ? 1 : -1;
      h.nu.push_back(nu);
      h.psi_tilde.push_back(static_cast<std::int8_t>(psi));
      (psi > 0 ? h.count_ones : h.count_zeros)++;
      h.mu_sum += sigmoid(nu);
    }
    if (!h.identifiable()) continue;
    ++tested;
    const auto est = mle_bias(h);
    const double oracle = grid_argmin(h);
    mle_err = std::max(mle_err, std::abs(est.chi_hat - oracle));
    for (double chi : {-5.0, -1.0, 0.0, est.chi_hat, 0.7, 3.0}) {
      const double step = 1e-5;
      const double fd = (total_nll(h, chi + step) - total_nll(h, chi - step)) / (2 * step);
      const double g = nll_gradient(h, chi);
      fd_err = std::max(fd_err, std::abs(fd - g) / std::max(1.0, std::abs(g)));
      min_hess = std::min(min_hess, nll_hessian(h, chi));
    }
  }
  const double secs = seconds_since(start);
  return {mle_err <= kMleOracleTol && fd_err <= kFiniteDiffRelTol && min_hess > 0.0 && secs < kMleSeconds,
          fmt("%d histories: |chi_mle - chi_grid| max %.2e, FD rel %.2e, min Hessian %.3g, %.2fs", tested, mle_err,
              fd_err, min_hess, secs)};
}

// --- 4: MLE consistency, interior ------------------------------------------
Result c4(const RunReport& r, const ExperimentConfig& cfg) {
  const BiasProfile bias(cfg.gamma);
  const std::size_t n = bias.size();
  double worst_median = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> err;
    for (const auto& rep : r.reps) err.push_back(std::abs(rep.chi_hat[i] - bias.chi()[i]));
    std::nth_element(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(err.size() / 2), err.end());
    std::sort(err.begin(), err.end());
    const double median = err.size() % 2 ? err[err.size() / 2] : 0.5 * (err[err.size() / 2 - 1] + err[err.size() / 2]);
    worst_median = std::max(worst_median, median);
  }
  std::size_t all_right = 0;
  for (const auto& rep : r.reps) {
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) ok = ok && (rep.chi_hat[i] > 0.0 ? 1 : 0) == bias.phi()[i];
    all_right += ok;
  }
  const bool interior = r.regime.regime == Regime::Interior;
  return {interior && worst_median <= kChiMedianTol && all_right >= kInteriorRepsAllCorrect,
          fmt("regime %s (lambda %.4f, %.4f), worst per-agent median |chi_hat - chi| %.4f, all agents right in %zu/%zu reps",
              to_string(r.regime.regime).c_str(), r.regime.lambda_zero, r.regime.lambda_one, worst_median, all_right,
              r.reps.size())};
}

// --- 5: belief estimation under consensus -----------------------------------
// The tail curve (wrong at some checkpoint >= t) is non-increasing exactly.
// The pointwise curve is an estimate from R*n pairs: an increase passes if it
// is within kNoiseSigmas binomial standard errors, and at least one pair.
Result c5(const RunReport& r) {
  const double N = static_cast<double>(r.reps.size() * r.regime.v_zero.size());
  bool tail_ok = true;
  int bumps = 0, excess = 0;
  double worst_bump = 0.0;
  for (std::size_t k = 1; k < r.error_fraction.size(); ++k) {
    if (r.tail_error_fraction[k] > r.tail_error_fraction[k - 1]) tail_ok = false;
    const double rise = r.error_fraction[k] - r.error_fraction[k - 1];
    if (rise <= 0.0) continue;
    ++bumps;
    worst_bump = std::max(worst_bump, rise);
    const double p = std::max(r.error_fraction[k], r.error_fraction[k - 1]);
    const double allowed = std::max(1.0 / N, kNoiseSigmas * std::sqrt(p * (1.0 - p) / N));
    if (rise > allowed + 1e-15) ++excess;
  }
  const double final_all = r.all_correct_fraction.back();
  const bool to_zero = r.regime.regime == Regime::ToZero;
  return {to_zero && final_all >= kConsensusAllCorrect && tail_ok && excess == 0,
          fmt("regime %s (lambda_max(Gamma W) %.6f), all agents right in %.3f of reps at T, tail error %s, "
              "pointwise error: %d rises (max %.4f), %d beyond noise; error at T %.4f",
              to_string(r.regime.regime).c_str(), r.regime.lambda_zero, final_all,
              tail_ok ? "non-increasing" : "INCREASES", bumps, worst_bump, excess, r.error_fraction.back())};
}

// --- 6: consensus rate -----------------------------------------------------
Result c6(const RunReport& r) {
  const double target = r.regime.lambda_zero - 1.0;
  double v_mean = 0.0;
  const std::size_t n = r.reps.front().beta_fits.size();
  std::vector<double> beta_mean(n, 0.0);
  double worst_single = 0.0;
  for (const auto& rep : r.reps) {
    v_mean += rep.v_fit->exponent;
    for (std::size_t i = 0; i < n; ++i) {
      beta_mean[i] += rep.beta_fits[i].exponent;
      worst_single = std::max(worst_single, std::abs(rep.beta_fits[i].exponent - target));
    }
  }
  const double R = static_cast<double>(r.reps.size());
  v_mean /= R;
  double worst_beta = 0.0;
  for (auto& b : beta_mean) worst_beta = std::max(worst_beta, std::abs(b / R - target));
  const double v_dev = std::abs(v_mean - target);
  return {v_dev <= kVExponentTol && worst_beta <= kBetaExponentTol,
          fmt("lambda - 1 = %.4f, mean V exponent %.4f (|dev| %.4f), worst agent mean beta exponent |dev| %.4f, "
              "worst single-rep beta |dev| %.4f, window [%lld, %lld]",
              target, v_mean, v_dev, worst_beta, worst_single, static_cast<long long>(r.reps.front().v_fit->t_lo),
              static_cast<long long>(r.reps.front().v_fit->t_hi))};
}

// --- 7: martingale -----------------------------------------------------------
Result c7(const Runs& runs) {
  std::size_t hard = 0, steps = 0;
  bool stats_ok = true;
  std::ostringstream detail;
  for (const auto& [name, r] : runs.all) {
    double y_sum = 0.0, y_sq = 0.0;
    std::size_t count = 0;
    bool has = false;
    for (const auto& rep : r->reps) {
      if (!rep.martingale) continue;
      has = true;
      hard += rep.martingale->hard.violations();
      steps += rep.martingale->hard.steps;
      y_sum += rep.martingale->y_sum;
      y_sq += rep.martingale->y_sum_sq;
      count += rep.martingale->y_count;
    }
    if (!has) continue;
    const double N = static_cast<double>(count);
    const double mean = y_sum / N;
    const double sd = std::sqrt(std::max(0.0, y_sq / N - mean * mean));
    const bool y_ok = std::abs(mean) <= kYMeanSigmas * sd / std::sqrt(N);
    const double z_err = r->z_error_fraction.back();
    const double envelope = r->freedman_envelope.back();
    const bool z_ok = z_err <= kFreedmanFactor * envelope;
    stats_ok = stats_ok && y_ok && z_ok;
    detail << "; " << name << ": y mean " << fmt("%.2e", mean) << " vs 3sd/sqrt(N) "
           << fmt("%.2e", kYMeanSigmas * sd / std::sqrt(N)) << ", Z(T)<=0 fraction " << fmt("%.3g", z_err)
           << " vs 10x Freedman " << fmt("%.3g", kFreedmanFactor * envelope);
  }
  return {hard == 0 && steps > 0 && stats_ok,
          fmt("%zu hard-bound violations over %zu agent-steps", hard, steps) + detail.str()};
}

// --- 8: Gautschi sandwich ------------------------------------------------------
Result c8() {
  const auto start = Clock::now();
  int cases = 0, outside = 0;
  double oracle = 0.0;
  for (std::int64_t t : {2LL, 10LL, 1000LL, 1000000LL}) {
    for (int e = 1; e <= 9; ++e) {
      const double eta = e / 10.0;
      const double R = ratio_R(t, eta);
      const auto b = gautschi_bounds(t, eta);
      ++cases;
      if (!(b.lower <= R && R <= b.upper)) ++outside;
      const double td = static_cast<double>(t);
      const double ref = std::exp(std::lgamma(td + eta) - std::lgamma(eta) - std::lgamma(td + 1.0));
      oracle = std::max(oracle, std::abs(R - ref) / ref);
    }
  }
  const double secs = seconds_since(start);
  return {outside == 0 && oracle <= kLgammaRelTol && secs < kGautschiSeconds,
          fmt("%d/%d grid points inside the bounds, max rel dev from lgamma %.2e, %.3fs", cases - outside, cases, oracle,
              secs)};
}

// --- 9: coupled linearized sandwich -------------------------------------------
Result c9(const RunReport& r) {
  std::int64_t checked = 0, violations = 0, segments = 0;
  std::size_t started = 0;
  double lo = 1.0, hi = 1.0;
  for (const auto& rep : r.reps) {
    const auto& c = rep.coupling;
    started += c.started;
    checked += c.checked_steps;
    violations += c.violations;
    segments += c.segments;
    lo = c.alpha_lower;
    hi = c.alpha_upper;
  }
  return {violations == 0 && checked > 0 && started * 2 > r.reps.size(),
          fmt("alpha in [%.4f, %.4f], coupling entered in %zu/%zu reps (%lld segments), %lld steps checked, "
              "%lld violations",
              lo, hi, started, r.reps.size(), static_cast<long long>(segments), static_cast<long long>(checked),
              static_cast<long long>(violations))};
}

// --- 10: determinism ------------------------------------------------------------
std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result c10(Runs& runs, std::vector<RunReport>& keep) {
  const auto root = std::filesystem::temp_directory_path() / "polya_acceptance";
  std::filesystem::remove_all(root);
  std::size_t files = 0, mismatched = 0;
  for (std::size_t c = 0; c < std::size(kDeterminism); ++c) {
    const auto cfg = parse_config(kDeterminism[c]);
    std::map<std::string, std::string> hashes[2];
    for (int pass = 0; pass < 2; ++pass) {
      keep.push_back(run_experiment(cfg));
      const auto dir = root / ("config" + std::to_string(c)) / ("run" + std::to_string(pass));
      write_files(keep.back().files, dir);
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        hashes[pass][entry.path().filename().string()] = sha256_hex(read_file(entry.path()));
      }
    }
    files += hashes[0].size();
    if (hashes[0].size() != hashes[1].size()) ++mismatched;
    for (const auto& [name, h] : hashes[0]) {
      const auto it = hashes[1].find(name);
      if (it == hashes[1].end() || it->second != h) ++mismatched;
    }
  }
  std::filesystem::remove_all(root);
  for (std::size_t k = keep.size() - 2 * std::size(kDeterminism); k < keep.size(); ++k) {
    runs.all.emplace_back("determinism", &keep[k]);
  }
  return {files > 0 && mismatched == 0,
          fmt("%zu files over %zu configs written twice, %zu SHA-256 mismatches", files, std::size(kDeterminism),
              mismatched)};
}

// --- 11: delta sweep -------------------------------------------------------------
Result c11(const SweepTable& interior, const SweepTable& consensus) {
  auto t_stars = [](const SweepTable& s) {
    std::string out;
    for (const auto& row : s.rows) out += row.t_star ? std::to_string(*row.t_star) + " " : "- ";
    return out;
  };
  bool reached = true;
  for (const auto& row : interior.rows) reached = reached && row.t_star.has_value();
  const double r2 = interior.fit ? interior.fit->r_squared : 0.0;
  const bool pass = interior.regime == Regime::Interior && reached && interior.fit && r2 >= kSweepRSquared &&
                    interior.monotone && consensus.monotone;
  std::string detail = fmt("interior t* = %s(affine in log(1/delta): slope %.3f, r^2 %.4f, monotone %s)",
                           t_stars(interior).c_str(), interior.fit ? interior.fit->slope : 0.0, r2,
                           interior.monotone ? "yes" : "NO");
  detail += fmt("; consensus (%s, 1/lambda = %.3f) t* = %s(log-log slope %.3f, r^2 %.4f, informational; monotone %s)",
                to_string(consensus.regime).c_str(), 1.0 / consensus.lambda, t_stars(consensus).c_str(),
                consensus.fit ? consensus.fit->slope : 0.0, consensus.fit ? consensus.fit->r_squared : 0.0,
                consensus.monotone ? "yes" : "NO");
  return {pass, detail};
}

Result c2(const Runs& runs) {
  std::int64_t total = runs.extra_band;
  std::size_t reps = 0;
  for (const auto& [name, r] : runs.all) {
    total += r->band_violations();
    reps += r->reps.size();
  }
  return {total == 0, fmt("%lld violations over %zu runs (%zu replications) plus direct simulations",
                          static_cast<long long>(total), runs.all.size(), reps)};
}

}  // namespace

int main() {
  Runs runs;
  std::map<int, Result> results;
  std::vector<RunReport> keep;
  keep.reserve(16);
  auto timed = [](const char* label, auto&& fn) {
    const auto start = Clock::now();
    auto out = fn();
    std::fprintf(stderr, "  [%s: %.1fs]\n", label, seconds_since(start));
    return out;
  };

  results[1] = c1(runs);
  results[3] = c3();
  results[8] = c8();

  const auto interior_cfg = parse_config(kInterior);
  keep.push_back(timed("interior MLE run", [&] { return run_experiment(interior_cfg, Output::Estimates); }));
  const RunReport& interior = keep.back();
  runs.all.emplace_back("interior", &interior);
  results[4] = c4(interior, interior_cfg);

  keep.push_back(timed("star belief run", [&] { return run_experiment(parse_config(kStar), Output::Estimates); }));
  const RunReport& star = keep.back();
  runs.all.emplace_back("star", &star);
  results[5] = c5(star);

  keep.push_back(timed("star rate run", [&] {
    return run_experiment(parse_config(kStarRate), Output::Rate | Output::Diagnostics);
  }));
  const RunReport& rate = keep.back();
  runs.all.emplace_back("star-rate", &rate);
  results[6] = c6(rate);
  results[9] = c9(rate);

  results[7] = c7(runs);

  keep.push_back(
      timed("interior sweep", [&] { return run_experiment(parse_config(kInteriorSweep), Output::Estimates); }));
  runs.all.emplace_back("interior-sweep", &keep.back());
  const auto interior_sweep = sweep_delta(keep.back(), kSweepDeltas);
  keep.push_back(timed("star sweep", [&] { return run_experiment(parse_config(kStarSweep), Output::Estimates); }));
  runs.all.emplace_back("star-sweep", &keep.back());
  const auto star_sweep = sweep_delta(keep.back(), kSweepDeltas);
  results[11] = c11(interior_sweep, star_sweep);

  results[10] = timed("determinism", [&] { return c10(runs, keep); });
  results[2] = c2(runs);

  const char* names[] = {"",
                         "model identities",
                         "mu band invariant",
                         "convex MLE vs grid oracle",
                         "MLE consistency (interior)",
                         "belief recovery under consensus",
                         "consensus rate exponents",
                         "martingale bounds",
                         "Gautschi sandwich",
                         "coupled linearized sandwich",
                         "determinism",
                         "delta sweep shape"};
  bool all = true;
  for (const auto& [id, res] : results) {
    all = all && res.pass;
    std::printf("criterion %2d %s  %s: %s\n", id, res.pass ? "PASS" : "FAIL", names[id], res.detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}

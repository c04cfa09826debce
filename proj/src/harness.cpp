#include "polya/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <json.hpp>

#include "polya/csv.hpp"
#include "polya/error.hpp"
#include "polya/estimators.hpp"
#include "polya/likelihood.hpp"
#include "polya/random.hpp"

namespace polya {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Everything a replication reads; built once, shared read-only across workers.
struct Context {
  const ExperimentConfig& cfg;
  const Network& net;
  BiasProfile bias;
  InitialSettings init;
  RegimeReport regime;
  std::vector<std::int64_t> checkpoints;
  std::vector<std::int64_t> rate_times;
  std::optional<PerronFunctional> functional;  // consensus regimes only
  bool rate_enabled = false;
  bool coupling_enabled = false;
  CouplingAlphas alphas;
  bool record_history = false;
  bool any_estimator = false;
  Output outputs;
};

struct ReplicationResult {
  ReplicationSummary summary;
  std::string trajectory;
  std::string estimates;
  std::string diagnostics;
  std::string rate;
  std::string coupling;
  std::vector<std::vector<std::uint8_t>> wrong;  // [checkpoint][agent]
  std::vector<std::vector<std::uint8_t>> z_nonpositive;
  std::vector<std::vector<double>> freedman;
};

std::string fmt(double v) { return format_double(v); }

int truth(double gamma) { return gamma > 1.0 ? 1 : 0; }

void estimate_checkpoints(const Context& ctx, std::size_t rep, const Trajectory& traj, ReplicationResult& out) {
  const auto n = ctx.net.size();
  const auto& gamma = ctx.bias.gamma();
  std::vector<DeclarationHistory> full;
  if (ctx.cfg.mle) {
    for (std::size_t i = 0; i < n; ++i) full.push_back(to_declaration_history(traj.final_state.history[i]));
  }
  std::vector<double> warm(n, 0.0);
  std::ostringstream rows;
  out.wrong.assign(traj.checkpoints.size(), std::vector<std::uint8_t>(n, 0));
  auto& s = out.summary;
  for (std::size_t c = 0; c < traj.checkpoints.size(); ++c) {
    const auto& cp = traj.checkpoints[c];
    const bool last = c + 1 == traj.checkpoints.size();
    if (last) {
      s.chi_hat.assign(ctx.cfg.mle ? n : 0, 0.0);
      s.phi_hat.assign(n, -1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      rows << rep << ',' << cp.t << ',' << i << ',';
      std::optional<int> decided;
      if (ctx.cfg.mle) {
        const auto h = prefix(full[i], static_cast<std::size_t>(cp.t - 1));
        const auto est = mle_bias(h, 1e-10, warm[i]);
        warm[i] = est.chi_hat;
        rows << fmt(est.chi_hat) << ',' << fmt(est.gamma_hat) << ',' << est.phi_hat << ','
             << (est.identifiable ? 1 : 0) << ',';
        decided = est.phi_hat;
        if (last) s.chi_hat[i] = est.chi_hat;
      } else {
        rows << ",,,,";
      }
      if (ctx.cfg.belief) {
        const auto b = inherent_belief(cp.ones[i], cp.mu_cumsum[i], cp.t);
        rows << fmt(b.statistic) << ',' << belief_value(b.phi_hat) << ',' << (b.phi_hat == Belief::Tie ? 1 : 0) << ',';
        decided = belief_value(b.phi_hat);
      } else {
        rows << ",,,";
      }
      if (ctx.cfg.equilibrium) {
        const auto phi_eq = equilibrium_belief_estimate(cp.beta[i], cp.mu[i]);
        try {
          rows << fmt(equilibrium_bias_estimate(cp.beta[i], cp.mu[i]));
        } catch (const Error&) {
          // undefined at consensus; the column stays empty
        }
        rows << ',' << belief_value(phi_eq);
        if (!decided) decided = belief_value(phi_eq);
      } else {
        rows << ',';
      }
      rows << '\n';
      const int phi = decided.value_or(-1);
      out.wrong[c][i] = phi != truth(gamma[i]) ? 1 : 0;
      if (last) s.phi_hat[i] = phi;
    }
  }
  if (!traj.checkpoints.empty()) {
    s.all_correct = std::none_of(out.wrong.back().begin(), out.wrong.back().end(), [](auto w) { return w != 0; });
  }
  out.estimates = rows.str();
}

void martingale_checkpoints(const Context& ctx, std::size_t rep, const Trajectory& traj, ReplicationResult& out) {
  const auto n = ctx.net.size();
  const auto& gamma = ctx.bias.gamma();
  const auto C = traj.checkpoints.size();
  MartingaleSummary m;
  m.drift_min_ratio = std::numeric_limits<double>::infinity();
  m.tail_constant = std::numeric_limits<double>::infinity();
  m.qv_ratio_min = std::numeric_limits<double>::infinity();
  m.qv_ratio_max = 0.0;
  out.z_nonpositive.assign(C, std::vector<std::uint8_t>(n, 0));
  out.freedman.assign(C, std::vector<double>(n, 1.0));
  std::ostringstream rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double g1 = gamma[i];
    const auto tr = build_trace(traj.final_state.history[i], g1, g1 * ctx.cfg.diagnostics.martingale_ratio);
    const auto hard = check_hard_bounds(tr);
    m.hard.steps += hard.steps;
    m.hard.z_step += hard.z_step;
    m.hard.y_step += hard.y_step;
    m.hard.variance += hard.variance;
    m.hard.hellinger += hard.hellinger;
    m.hard.monotone += hard.monotone;
    const auto drift = drift_floor_check(tr, traj.final_state.kappa);
    m.drift_violations += drift.violations;
    m.drift_min_ratio = std::min(m.drift_min_ratio, drift.min_ratio);
    m.tail_constant = std::min(m.tail_constant, drift.tail_constant);
    double qv = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double y = tr.x[k] - tr.z[k];
      m.y_sum += y;
      m.y_sum_sq += y * y;
      qv += y * y;
    }
    m.y_count += tr.size();
    if (tr.size() > 0 && tr.W.back() > 0.0) {
      m.qv_ratio_min = std::min(m.qv_ratio_min, qv / tr.W.back());
      m.qv_ratio_max = std::max(m.qv_ratio_max, qv / tr.W.back());
    }
    for (std::size_t c = 0; c < C; ++c) {
      const auto t = traj.checkpoints[c].t;
      const auto k = static_cast<std::size_t>(t - 2);
      out.z_nonpositive[c][i] = tr.Z[k] <= 0.0 ? 1 : 0;
      out.freedman[c][i] = tr.X[k] > 0.0 ? freedman_bound(tr.X[k], tr.W[k], tr.alpha_step) : 1.0;
      rows << rep << ',' << i << ',' << t << ',' << fmt(tr.Z[k]) << ',' << fmt(tr.X[k]) << ',' << fmt(tr.Y[k]) << ','
           << fmt(tr.W[k]) << ',' << fmt(tr.x[k]) << ',' << fmt(tr.w[k]) << ',' << fmt(tr.floor_x[k]) << ','
           << fmt(tr.c1 * tr.x[k]) << '\n';
    }
  }
  out.diagnostics = rows.str();
  out.summary.martingale = m;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

ReplicationResult run_replication(const Context& ctx, std::size_t rep) {
  ReplicationResult out;
  auto& s = out.summary;
  s.seed = derive_seed(ctx.cfg.base_seed, rep);
  const auto n = ctx.net.size();
  const auto T = ctx.cfg.horizon;

  Trajectory traj;
  traj.final_state = init_state(ctx.net, ctx.init, ctx.record_history);
  auto& state = traj.final_state;
  Rng rng(s.seed);
  std::vector<double> u(n);

  std::size_t next_cp = 0;
  std::size_t next_rate = 0;
  std::vector<std::int64_t> rate_t;
  std::vector<double> rate_v;
  std::vector<std::vector<double>> rate_beta(n);

  auto& cs = s.coupling;
  cs.alpha_lower = ctx.alphas.lower;
  cs.alpha_upper = ctx.alphas.upper;
  bool coupled = false;
  std::vector<double> alphas{ctx.alphas.lower, ctx.alphas.upper};
  std::vector<double> h(2, 0.0);
  std::ostringstream coupling_rows;
  const double radius = ctx.cfg.diagnostics.coupling_radius;

  while (state.t < T) {
    for (auto& x : u) x = rng.uniform();
    if (coupled && max_of(state.mu) > radius) {
      coupled = false;
      ++cs.exits;
    }
    if (coupled) {
      coupled_linearized_step(state, ctx.net, ctx.bias, *ctx.functional, alphas, h, u);
      const double V = (*ctx.functional)(state.beta);
      ++cs.checked_steps;
      // Relative slack for the rounding in the two recursions.
      const double slack = 1e-9 * V;
      if (h[0] > V + slack || V > h[1] + slack) ++cs.violations;
    } else {
      step(state, ctx.net, ctx.bias, u);
    }
    s.band_violations += band_violations(state);

    if (next_rate < ctx.rate_times.size() && ctx.rate_times[next_rate] == state.t) {
      const double V = (*ctx.functional)(state.beta);
      rate_t.push_back(state.t);
      rate_v.push_back(V);
      for (std::size_t i = 0; i < n; ++i) {
        const double b = ctx.functional->target == ConsensusTarget::Zero ? state.beta[i] : 1.0 - state.beta[i];
        rate_beta[i].push_back(b);
      }
      ++next_rate;
    }
    if (next_cp < ctx.checkpoints.size() && ctx.checkpoints[next_cp] == state.t) {
      traj.checkpoints.push_back(snapshot(state));
      ++next_cp;
      if (ctx.coupling_enabled && !coupled && max_of(state.beta) <= radius) {
        if (!cs.started) cs.start = state.t;
        cs.started = true;
        cs.last_start = state.t;
        ++cs.segments;
        coupled = true;
        h.assign(2, (*ctx.functional)(state.beta));
      }
      if (ctx.coupling_enabled && cs.started) {
        coupling_rows << rep << ',' << state.t << ',' << fmt((*ctx.functional)(state.beta)) << ','
                      << fmt(h[0]) << ',' << fmt(h[1]) << ',' << (coupled ? 1 : 0) << '\n';
      }
    }
  }
  out.coupling = coupling_rows.str();

  if (has(ctx.outputs, Output::Trajectory)) {
    std::ostringstream rows;
    write_trajectory_rows(rows, rep, traj);
    out.trajectory = rows.str();
  }
  if (ctx.any_estimator) estimate_checkpoints(ctx, rep, traj, out);
  if (ctx.cfg.diagnostics.martingale) martingale_checkpoints(ctx, rep, traj, out);

  if (ctx.rate_enabled) {
    const auto [lo, hi] = std::pair{ctx.rate_times.front(), ctx.rate_times.back()};
    const double target = ctx.functional->lambda - 1.0;
    std::ostringstream rows;
    for (std::size_t k = 0; k < rate_t.size(); ++k) rows << rep << ",V," << rate_t[k] << ',' << fmt(rate_v[k]) << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < rate_t.size(); ++k) {
        rows << rep << ",beta." << i << ',' << rate_t[k] << ',' << fmt(rate_beta[i][k]) << '\n';
      }
    }
    auto emit_fit = [&](const std::string& name, const RateFit& fit) {
      rows << rep << ',' << name << ".exponent,," << fmt(fit.exponent) << '\n';
      rows << rep << ',' << name << ".intercept,," << fmt(fit.intercept) << '\n';
      rows << rep << ',' << name << ".r_squared,," << fmt(fit.r_squared) << '\n';
      rows << rep << ',' << name << ".target,," << fmt(fit.target) << '\n';
    };
    auto fit = fit_rate(rate_t, rate_v, lo, hi);
    fit.target = target;
    emit_fit("V", fit);
    s.v_fit = fit;
    for (std::size_t i = 0; i < n; ++i) {
      auto bf = fit_rate(rate_t, rate_beta[i], lo, hi);
      bf.target = target;
      emit_fit("beta." + std::to_string(i), bf);
      s.beta_fits.push_back(bf);
    }
    out.rate = rows.str();
  }
  return out;
}

std::string regime_json(const RegimeReport& r) {
  json j;
  j["lambda_zero"] = r.lambda_zero;
  j["lambda_one"] = r.lambda_one;
  j["regime"] = to_string(r.regime);
  j["tolerance"] = r.tolerance;
  j["v_zero"] = std::vector<double>(r.v_zero.data(), r.v_zero.data() + r.v_zero.size());
  j["v_one"] = std::vector<double>(r.v_one.data(), r.v_one.data() + r.v_one.size());
  return j.dump(2) + "\n";
}

json fit_json(const RateFit& f) {
  return {{"exponent", f.exponent}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
          {"target", f.target},     {"t_lo", f.t_lo},           {"t_hi", f.t_hi},
          {"points", f.points}};
}

std::string summary_json(const RunReport& report) {
  json reps = json::array();
  for (std::size_t r = 0; r < report.reps.size(); ++r) {
    const auto& s = report.reps[r];
    json j;
    j["rep"] = r;
    j["seed"] = s.seed;
    j["band_violations"] = s.band_violations;
    j["phi_hat"] = s.phi_hat;
    if (!s.chi_hat.empty()) j["chi_hat"] = s.chi_hat;
    j["all_correct"] = s.all_correct;
    if (s.v_fit) {
      j["v_fit"] = fit_json(*s.v_fit);
      json betas = json::array();
      for (const auto& b : s.beta_fits) betas.push_back(fit_json(b));
      j["beta_fits"] = betas;
    }
    if (s.coupling.started || s.coupling.checked_steps > 0) {
      const auto& c = s.coupling;
      j["coupling"] = {{"start", c.start},
                       {"last_start", c.last_start},
                       {"segments", c.segments},
                       {"exits", c.exits},
                       {"checked_steps", c.checked_steps},
                       {"violations", c.violations},
                       {"alpha_lower", c.alpha_lower},
                       {"alpha_upper", c.alpha_upper}};
    }
    if (s.martingale) {
      const auto& m = *s.martingale;
      j["martingale"] = {{"steps", m.hard.steps},
                         {"z_step_violations", m.hard.z_step},
                         {"y_step_violations", m.hard.y_step},
                         {"variance_violations", m.hard.variance},
                         {"hellinger_violations", m.hard.hellinger},
                         {"monotone_violations", m.hard.monotone},
                         {"drift_violations", m.drift_violations},
                         {"drift_min_ratio", m.drift_min_ratio},
                         {"tail_constant", m.tail_constant},
                         {"y_mean", m.y_count ? m.y_sum / static_cast<double>(m.y_count) : 0.0},
                         {"qv_ratio_min", m.qv_ratio_min},
                         {"qv_ratio_max", m.qv_ratio_max}};
    }
    reps.push_back(j);
  }
  json root;
  root["regime"] = to_string(report.regime.regime);
  root["band_violations"] = report.band_violations();
  root["coupling_violations"] = report.coupling_violations();
  root["martingale_violations"] = report.martingale_violations();
  root["assertions_hold"] = report.assertions_hold();
  root["replications"] = reps;
  return root.dump(2) + "\n";
}

}  // namespace

std::vector<std::int64_t> geometric_checkpoints(std::int64_t lo, std::int64_t hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) throw Error(ErrorCode::DomainError, "invalid checkpoint range");
  std::vector<std::int64_t> out;
  if (count == 1 || lo == hi) return {hi};
  const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
  for (std::size_t k = 0; k < count; ++k) {
    const double e = static_cast<double>(k) / static_cast<double>(count - 1);
    auto t = static_cast<std::int64_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, e)));
    t = std::clamp(t, lo, hi);
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.back() != hi) out.push_back(hi);
  return out;
}

std::int64_t RunReport::band_violations() const {
  std::int64_t total = 0;
  for (const auto& r : reps) total += r.band_violations;
  return total;
}

std::int64_t RunReport::coupling_violations() const {
  std::int64_t total = 0;
  for (const auto& r : reps) total += r.coupling.violations;
  return total;
}

std::size_t RunReport::martingale_violations() const {
  std::size_t total = 0;
  for (const auto& r : reps) {
    if (r.martingale) total += r.martingale->hard.violations() + r.martingale->drift_violations;
  }
  return total;
}

bool RunReport::assertions_hold() const {
  return band_violations() == 0 && coupling_violations() == 0 && martingale_violations() == 0;
}

RunReport run_experiment(const ExperimentConfig& cfg, Output outputs) {
  validate(cfg);
  const Network& net = *cfg.network;
  const auto n = net.size();
  Context ctx{cfg, net, BiasProfile(cfg.gamma), make_initial_settings(net, cfg.init_b1), {}, {}, {}, {}, false,
              false, {}, false, false, outputs};
  ctx.regime = classify(net, ctx.bias, cfg.regime_tolerance);
  ctx.checkpoints = geometric_checkpoints(2, cfg.horizon, cfg.checkpoints);
  ctx.any_estimator = cfg.mle || cfg.belief || cfg.equilibrium;
  ctx.record_history = cfg.mle || cfg.diagnostics.martingale;

  const auto regime = ctx.regime.regime;
  if (regime == Regime::ToZero || regime == Regime::ToOne) {
    ctx.functional = perron_functional(net, ctx.bias,
                                       regime == Regime::ToZero ? ConsensusTarget::Zero : ConsensusTarget::One);
  }
  if (cfg.diagnostics.rate_fit) {
    if (!ctx.functional) {
      throw Error(ErrorCode::RegimeMismatch, "rate fit needs a consensus regime, got " + to_string(regime));
    }
    const auto window = cfg.diagnostics.rate_window.value_or(std::pair{std::max<std::int64_t>(2, cfg.horizon / 10),
                                                                       cfg.horizon});
    ctx.rate_times = geometric_checkpoints(window.first, window.second, cfg.diagnostics.rate_points);
    ctx.rate_enabled = true;
  }
  if (cfg.diagnostics.coupling) {
    if (regime != Regime::ToZero) {
      throw Error(ErrorCode::RegimeMismatch, "the coupled process needs consensus to zero, got " + to_string(regime));
    }
    ctx.coupling_enabled = true;
    ctx.alphas = coupling_alphas(ctx.bias, cfg.diagnostics.coupling_radius);
  }
  if (ctx.record_history) {
    const auto per_rep = static_cast<double>(n) * static_cast<double>(cfg.horizon);
    const auto concurrent = static_cast<double>(std::min(cfg.threads, cfg.replications));
    if (per_rep * concurrent > static_cast<double>(cfg.max_history_entries)) {
      throw Error(ErrorCode::ResourceLimit,
                  "history of " + std::to_string(static_cast<std::uint64_t>(per_rep * concurrent)) +
                      " entries exceeds max_history_entries = " + std::to_string(cfg.max_history_entries));
    }
  }

  // Fan out over replications; each result lands in its own slot.
  const auto R = cfg.replications;
  std::vector<ReplicationResult> results(R);
  std::vector<std::exception_ptr> failures(R);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      try {
        results[r] = run_replication(ctx, r);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const auto workers = std::min(cfg.threads, R);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (std::size_t r = 0; r < R; ++r) {
    if (!failures[r]) continue;
    try {
      std::rethrow_exception(failures[r]);
    } catch (const Error& e) {
      throw Error(e.code(), "replication " + std::to_string(r) + ": " + e.what());
    }
  }

  RunReport report;
  report.regime = ctx.regime;
  report.checkpoints = ctx.checkpoints;
  for (auto& r : results) report.reps.push_back(r.summary);

  const auto C = ctx.checkpoints.size();
  if (ctx.any_estimator) {
    const double pairs = static_cast<double>(R * n);
    report.error_fraction.assign(C, 0.0);
    report.tail_error_fraction.assign(C, 0.0);
    report.all_correct_fraction.assign(C, 0.0);
    for (const auto& res : results) {
      std::vector<std::uint8_t> later(n, 0);
      for (std::size_t c = C; c-- > 0;) {
        bool all_right = true;
        for (std::size_t i = 0; i < n; ++i) {
          const bool w = res.wrong[c][i] != 0;
          later[i] = later[i] || w;
          report.error_fraction[c] += w;
          report.tail_error_fraction[c] += later[i];
          all_right = all_right && !w;
        }
        report.all_correct_fraction[c] += all_right;
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      report.error_fraction[c] /= pairs;
      report.tail_error_fraction[c] /= pairs;
      report.all_correct_fraction[c] /= static_cast<double>(R);
    }
  }
  if (cfg.diagnostics.martingale) {
    const double pairs = static_cast<double>(R * n);
    report.z_error_fraction.assign(C, 0.0);
    report.freedman_envelope.assign(C, 0.0);
    for (const auto& res : results) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
          report.z_error_fraction[c] += res.z_nonpositive[c][i];
          report.freedman_envelope[c] += res.freedman[c][i];
        }
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      report.z_error_fraction[c] /= pairs;
      report.freedman_envelope[c] /= pairs;
    }
  }

  auto& files = report.files;
  files["regime.json"] = regime_json(report.regime);
  auto concat = [&](const char* header, std::string ReplicationResult::*field) {
    std::string text = std::string(header) + "\n";
    for (const auto& r : results) text += r.*field;
    return text;
  };
  if (has(outputs, Output::Trajectory)) files["trajectory.csv"] = concat(kTrajectoryHeader, &ReplicationResult::trajectory);
  if (has(outputs, Output::Estimates) && ctx.any_estimator) {
    files["estimates.csv"] = concat(
        "rep,t,agent,chi_hat,gamma_hat,phi_mle,identifiable,belief_stat,phi_hat,tie,gamma_eq_hat,phi_eq_hat",
        &ReplicationResult::estimates);
    std::ostringstream rows;
    rows << "t,error_fraction,tail_error_fraction,all_correct_fraction,z_error_fraction,freedman_envelope\n";
    for (std::size_t c = 0; c < C; ++c) {
      rows << ctx.checkpoints[c] << ',' << fmt(report.error_fraction[c]) << ',' << fmt(report.tail_error_fraction[c])
           << ',' << fmt(report.all_correct_fraction[c]) << ',';
      if (cfg.diagnostics.martingale) {
        rows << fmt(report.z_error_fraction[c]) << ',' << fmt(report.freedman_envelope[c]);
      } else {
        rows << ',';
      }
      rows << '\n';
    }
    files["errors.csv"] = rows.str();
  }
  if (has(outputs, Output::Rate) && ctx.rate_enabled) files["rate.csv"] = concat("rep,quantity,t,value", &ReplicationResult::rate);
  if (has(outputs, Output::Diagnostics) && cfg.diagnostics.martingale) {
    files["diagnostics.csv"] = concat("rep,agent,t,Z,X,Y,W,x,w,floor_x,bound_w", &ReplicationResult::diagnostics);
  }
  if (has(outputs, Output::Diagnostics) && ctx.coupling_enabled) {
    files["coupling.csv"] = concat("rep,t,V,h_lower,h_upper,active", &ReplicationResult::coupling);
  }
  files["summary.json"] = summary_json(report);

  json manifest;
  manifest["program"] = "polya_urn";
  manifest["version"] = kVersion;
  manifest["rng"] = "mt19937_64; uniform = (next >> 11) * 2^-53; one uniform per agent per step, ascending agent order";
  manifest["seed_derivation"] = "splitmix64_finalize(base_seed + (rep + 1) * 0x9E3779B97F4A7C15)";
  manifest["base_seed"] = cfg.base_seed;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : report.reps) seeds.push_back(r.seed);
  manifest["seeds"] = seeds;
  manifest["config"] = json::parse(config_to_json(cfg));
  json hashes = json::object();
  for (const auto& [name, content] : files) hashes[name] = sha256_hex(content);
  manifest["sha256"] = hashes;
  files["manifest.json"] = manifest.dump(2) + "\n";
  return report;
}

SweepTable sweep_delta(const RunReport& report, std::span<const double> deltas) {
  if (report.tail_error_fraction.empty()) {
    throw Error(ErrorCode::InsufficientData, "the run evaluated no estimator");
  }
  const auto R = static_cast<double>(report.reps.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double d = deltas[k];
    if (!(d > 0.0 && d <= 1.0)) throw Error(ErrorCode::DomainError, "delta must lie in (0,1]");
    if (k > 0 && !(d < deltas[k - 1])) throw Error(ErrorCode::DomainError, "deltas must be sorted descending");
    if (d * R < 10.0) {
      throw Error(ErrorCode::InsufficientReplications,
                  "delta = " + fmt(d) + " needs at least " + std::to_string(static_cast<long>(std::ceil(10.0 / d))) +
                      " replications, have " + std::to_string(report.reps.size()));
    }
  }
  SweepTable table;
  table.regime = report.regime.regime;
  const bool consensus = table.regime == Regime::ToZero || table.regime == Regime::ToOne;
  table.lambda = table.regime == Regime::ToOne ? report.regime.lambda_one : report.regime.lambda_zero;
  std::ostringstream csv;
  csv << "delta,t_star,shape\n";
  std::int64_t previous = 0;
  for (double d : deltas) {
    SweepRow row;
    row.delta = d;
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c) {
      if (report.tail_error_fraction[c] <= d) {
        row.t_star = report.checkpoints[c];
        break;
      }
    }
    const double L = std::log(1.0 / d);
    row.shape = consensus ? std::pow(L, 1.0 / table.lambda) : L;
    const auto t = row.t_star.value_or(std::numeric_limits<std::int64_t>::max());
    if (t < previous) table.monotone = false;
    previous = t;
    csv << fmt(d) << ',' << (row.t_star ? std::to_string(*row.t_star) : "") << ',' << fmt(row.shape) << '\n';
    table.rows.push_back(row);
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : table.rows) {
    if (!row.t_star || row.delta >= 1.0) continue;
    const double L = std::log(1.0 / row.delta);
    if (consensus) {
      x.push_back(std::log(L));
      y.push_back(std::log(static_cast<double>(*row.t_star)));
    } else {
      x.push_back(L);
      y.push_back(static_cast<double>(*row.t_star));
    }
  }
  if (x.size() >= 3) {
    try {
      table.fit = least_squares(x, y);
    } catch (const Error&) {
      // all t* equal: no slope to report
    }
  }
  if (table.fit) {
    csv << "fit.slope,," << fmt(table.fit->slope) << '\n';
    csv << "fit.intercept,," << fmt(table.fit->intercept) << '\n';
    csv << "fit.r_squared,," << fmt(table.fit->r_squared) << '\n';
  }
  table.csv = csv.str();
  return table;
}

SweepTable sweep_delta(const ExperimentConfig& cfg, std::span<const double> deltas) {
  auto belief_only = cfg;
  belief_only.mle = false;
  belief_only.equilibrium = false;
  belief_only.belief = true;
  return sweep_delta(run_experiment(belief_only, Output::Estimates), deltas);
}

void write_files(const std::map<std::string, std::string>& files, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::ResourceLimit, "cannot write " + (dir / name).string());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::AssertionFailure, "SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

}  // namespace polya

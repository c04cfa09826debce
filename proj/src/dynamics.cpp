#include "polya/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polya/csv.hpp"
#include "polya/error.hpp"

namespace polya {

double conformity_probability(double mu, double gamma) {
  if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorCode::DomainError, "mu = " + std::to_string(mu) + " outside (0,1)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::DomainError, "gamma = " + std::to_string(gamma) + " not positive");
  }
  return detail::conformity(mu, gamma);
}

BiasProfile::BiasProfile(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  chi_.reserve(gamma_.size());
  phi_.reserve(gamma_.size());
  for (std::size_t i = 0; i < gamma_.size(); ++i) {
    const double g = gamma_[i];
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw Error(ErrorCode::NonPositiveGamma, "gamma[" + std::to_string(i) + "] = " + std::to_string(g));
    }
    if (std::abs(g - 1.0) < 1e-9) {
      throw Error(ErrorCode::DomainError, "gamma[" + std::to_string(i) + "] = 1: every agent needs a preference");
    }
    chi_.push_back(std::log(g));
    phi_.push_back(g > 1.0 ? 1 : 0);
  }
}

InitialSettings make_initial_settings(const Network& net, std::vector<double> b1) {
  const auto n = net.size();
  if (b1.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "b1 has " + std::to_string(b1.size()) + " entries for " + std::to_string(n) + " agents");
  }
  InitialSettings init;
  init.b0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(b1[i] > 0.0 && b1[i] < 1.0)) {
      throw Error(ErrorCode::DomainError, "b1[" + std::to_string(i) + "] = " + std::to_string(b1[i]) + " outside (0,1)");
    }
    init.b0[i] = 1.0 - b1[i];
  }
  init.b1 = std::move(b1);
  init.m0.assign(n, 0.0);
  init.m1.assign(n, 0.0);
  const auto& a = net.weights();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      init.m0[i] += w * init.b0[j];
      init.m1[i] += w * init.b1[j];
    }
  }
  return init;
}

InitialSettings uniform_initial_settings(const Network& net, double b1) {
  return make_initial_settings(net, std::vector<double>(net.size(), b1));
}

double band_constant(const Network& net, const InitialSettings& init) {
  double min_mass = std::numeric_limits<double>::infinity();
  double max_total = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    min_mass = std::min({min_mass, init.m0[i], init.m1[i]});
    max_total = std::max({max_total, init.m0[i] + init.m1[i], net.degrees()(static_cast<Eigen::Index>(i))});
  }
  return min_mass / max_total;
}

namespace {

void refresh_mu(SimState& state, const Network& net) {
  const auto n = static_cast<Eigen::Index>(state.size());
  Eigen::Map<const Vector> beta(state.beta.data(), n);
  Eigen::Map<Vector> mu(state.mu.data(), n);
  mu.noalias() = net.normalized() * beta;
}

}  // namespace

SimState init_state(const Network& net, const InitialSettings& init, bool record_history) {
  const auto n = net.size();
  if (init.b1.size() != n || init.m0.size() != n || init.m1.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "initial settings do not match the network size");
  }
  SimState s;
  s.t = 1;
  s.ones.assign(n, 0);
  s.beta = init.b1;
  s.beta_bar.assign(n, 0.0);
  s.mu.assign(n, 0.0);
  s.M.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.M[i] = init.m0[i] + init.m1[i];
  s.mu_cumsum.assign(n, 0.0);
  s.history.resize(n);
  s.b1 = init.b1;
  s.kappa = band_constant(net, init);
  s.record_history = record_history;
  refresh_mu(s, net);
  return s;
}

void apply_declarations(SimState& state, const Network& net, std::span<const std::uint8_t> psi) {
  const auto n = state.size();
  if (psi.size() != n) throw Error(ErrorCode::DimensionMismatch, "declaration vector has wrong length");
  for (std::size_t i = 0; i < n; ++i) {
    if (state.record_history) {
      state.history[i].mu.push_back(state.mu[i]);
      state.history[i].psi.push_back(psi[i]);
    }
    state.mu_cumsum[i] += state.mu[i];
    state.ones[i] += psi[i] ? 1 : 0;
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const auto& deg = net.degrees();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(state.ones[i]);
    state.beta[i] = (state.b1[i] + s) / t;
    state.beta_bar[i] = s / (t - 1.0);
    state.M[i] += deg(static_cast<Eigen::Index>(i));
  }
  refresh_mu(state, net);
}

void step(SimState& state, const Network& net, const BiasProfile& bias, std::span<const double> uniforms) {
  const auto n = state.size();
  if (uniforms.size() != n || bias.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "step: uniforms/bias do not match the state size");
  }
  std::vector<std::uint8_t> psi(n);
  const auto& gamma = bias.gamma();
  for (std::size_t i = 0; i < n; ++i) {
    psi[i] = uniforms[i] < detail::conformity(state.mu[i], gamma[i]) ? 1 : 0;
  }
  apply_declarations(state, net, psi);
}

void step(SimState& state, const Network& net, const BiasProfile& bias, Rng& rng) {
  std::vector<double> u(state.size());
  for (auto& x : u) x = rng.uniform();
  step(state, net, bias, u);
}

int band_violations(const SimState& state) {
  constexpr double slack = 1.0 - 1e-12;
  const double floor = state.kappa / static_cast<double>(state.t) * slack;
  int bad = 0;
  for (double m : state.mu) {
    if (!(m >= floor && 1.0 - m >= floor)) ++bad;
  }
  return bad;
}

RecomputedStatistics recompute_from_history(const SimState& state, const Network& net, const InitialSettings& init) {
  const auto n = state.size();
  if (!state.record_history) throw Error(ErrorCode::EmptyHistory, "state was run without history");
  const auto steps = static_cast<std::size_t>(state.t - 1);
  RecomputedStatistics out;
  out.mu_cumsum.assign(n, 0.0);
  // Replay: beta(tau) from counts, mu(tau) = W beta(tau).
  std::vector<std::int64_t> ones(n, 0);
  Vector beta(static_cast<Eigen::Index>(n));
  for (std::size_t tau = 1; tau <= steps + 1; ++tau) {
    for (std::size_t i = 0; i < n; ++i) {
      beta(static_cast<Eigen::Index>(i)) = (init.b1[i] + static_cast<double>(ones[i])) / static_cast<double>(tau);
    }
    Vector mu = net.normalized() * beta;
    if (tau == steps + 1) {
      out.beta.assign(beta.data(), beta.data() + n);
      out.mu.assign(mu.data(), mu.data() + n);
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.mu_cumsum[i] += mu(static_cast<Eigen::Index>(i));
      ones[i] += state.history[i].psi[tau - 1];
    }
  }
  return out;
}

Checkpoint snapshot(const SimState& state) {
  return {state.t, state.beta, state.mu, state.ones, state.mu_cumsum};
}

Trajectory run(const Network& net, const BiasProfile& bias, const InitialSettings& init, std::int64_t horizon,
               std::uint64_t seed, std::span<const std::int64_t> checkpoints, bool record_history) {
  if (horizon < 2) throw Error(ErrorCode::DomainError, "horizon must be at least 2");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 2 || checkpoints[k] > horizon || (k > 0 && checkpoints[k] <= checkpoints[k - 1])) {
      throw Error(ErrorCode::DomainError, "checkpoints must be strictly increasing within [2, horizon]");
    }
  }
  Trajectory out;
  out.final_state = init_state(net, init, record_history);
  Rng rng(seed);
  std::size_t next = 0;
  auto& state = out.final_state;
  while (state.t < horizon) {
    step(state, net, bias, rng);
    if (next < checkpoints.size() && checkpoints[next] == state.t) {
      out.checkpoints.push_back(snapshot(state));
      ++next;
    }
  }
  return out;
}

void write_trajectory_rows(std::ostream& out, std::size_t rep, const Trajectory& trajectory) {
  for (const auto& cp : trajectory.checkpoints) {
    for (std::size_t i = 0; i < cp.beta.size(); ++i) {
      out << rep << ',' << cp.t << ',' << i << ',' << format_double(cp.beta[i]) << ',' << format_double(cp.mu[i])
          << ',' << cp.ones[i] << '\n';
    }
  }
}

std::vector<double> expected_update(std::span<const double> beta, const Network& net, const BiasProfile& bias) {
  const auto n = net.size();
  if (beta.size() != n || bias.size() != n) throw Error(ErrorCode::DimensionMismatch, "expected_update: size mismatch");
  for (double b : beta) {
    if (!(b > 0.0 && b < 1.0)) throw Error(ErrorCode::DomainError, "expected_update: beta outside (0,1)");
  }
  Eigen::Map<const Vector> b(beta.data(), static_cast<Eigen::Index>(n));
  const Vector mu = net.normalized() * b;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = conformity_probability(mu(static_cast<Eigen::Index>(i)), bias.gamma()[i]);
  return out;
}

std::vector<double> equilibrium_residual(std::span<const double> beta, const Network& net, const BiasProfile& bias) {
  const auto n = net.size();
  if (beta.size() != n || bias.size() != n) throw Error(ErrorCode::DimensionMismatch, "equilibrium_residual: size mismatch");
  Eigen::Map<const Vector> b(beta.data(), static_cast<Eigen::Index>(n));
  const Vector mu = net.normalized() * b;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = bias.gamma()[i];
    const double m = mu(static_cast<Eigen::Index>(i));
    out[i] = (g - 1.0) * beta[i] * m + beta[i] - g * m;
  }
  return out;
}

EquilibriumResult find_interior_equilibrium(const Network& net, const BiasProfile& bias, double tol, int max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tol must be positive");
  const auto n = static_cast<Eigen::Index>(net.size());
  if (bias.size() != net.size()) throw Error(ErrorCode::DimensionMismatch, "bias does not match the network size");
  constexpr double eta = 0.5;
  Vector beta = Vector::Constant(n, 0.5);
  Vector f(n);
  Vector mu(n);
  for (int it = 1; it <= max_iter; ++it) {
    mu.noalias() = net.normalized() * beta;
    for (Eigen::Index i = 0; i < n; ++i) f(i) = detail::conformity(mu(i), bias.gamma()[static_cast<std::size_t>(i)]);
    // Stop on a per-component relative residual so that iterates drifting
    // towards 0 or 1 are followed all the way to the boundary instead of
    // being mistaken for interior points. Next to 1 the grid is too coarse
    // for a relative test, so ulp-level agreement there counts as settled.
    bool done = true;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gap = std::abs(beta(i) - f(i));
      worst = std::max(worst, gap);
      const double scale = std::min(beta(i), 1.0 - beta(i));
      constexpr double ulp_noise = 4.0 * std::numeric_limits<double>::epsilon();
      const bool settled = gap <= tol * scale || (scale <= ulp_noise && gap <= ulp_noise);
      if (!settled) done = false;
    }
    if (done) {
      EquilibriumResult out;
      out.beta.assign(beta.data(), beta.data() + n);
      out.mu.assign(mu.data(), mu.data() + n);
      out.iterations = it;
      out.residual = worst;
      out.interior = std::all_of(out.beta.begin(), out.beta.end(), [tol](double b) { return b > tol && b < 1.0 - tol; });
      return out;
    }
    beta = (1.0 - eta) * beta + eta * f;
  }
  throw Error(ErrorCode::NoConvergence, "fixed-point iteration did not settle in " + std::to_string(max_iter) + " steps");
}

}  // namespace polya

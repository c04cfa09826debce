#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "polya/graph.hpp"
#include "polya/random.hpp"

namespace polya {

/// f(mu, gamma) = gamma mu / (1 + (gamma - 1) mu): probability that an agent
/// under neighborhood ratio mu and bias gamma declares opinion 1.
/// Throws DomainError unless 0 < mu < 1 and gamma > 0.
double conformity_probability(double mu, double gamma);

namespace detail {
// Unchecked form, also valid at mu = 0 and mu = 1.
inline double conformity(double mu, double gamma) noexcept {
  return gamma * mu / (1.0 + (gamma - 1.0) * mu);
}
}  // namespace detail

/// Per-agent bias parameters. gamma_i > 1 means inherent belief 1.
class BiasProfile {
 public:
  explicit BiasProfile(std::vector<double> gamma);

  std::size_t size() const noexcept { return gamma_.size(); }
  const std::vector<double>& gamma() const noexcept { return gamma_; }
  const std::vector<double>& chi() const noexcept { return chi_; }
  const std::vector<int>& phi() const noexcept { return phi_; }

 private:
  std::vector<double> gamma_;
  std::vector<double> chi_;
  std::vector<int> phi_;
};

/// Initial settings b1 (b0 = 1 - b1) and the derived neighborhood masses
/// m0_i = sum_j a_ij b0_j, m1_i = sum_j a_ij b1_j.
struct InitialSettings {
  std::vector<double> b0;
  std::vector<double> b1;
  std::vector<double> m0;
  std::vector<double> m1;
};

InitialSettings make_initial_settings(const Network& net, std::vector<double> b1);
InitialSettings uniform_initial_settings(const Network& net, double b1 = 0.5);

// kappa = min_i min(m0_i, m1_i) / max_i max(m0_i + m1_i, deg_i); guarantees
// mu_i(t) in [kappa/t, 1 - kappa/t] for arbitrary initial masses.
double band_constant(const Network& net, const InitialSettings& init);

/// Append-only record of one agent: pairs (mu_i(tau-1), psi_{i,tau}) for tau = 2..t.
struct AgentHistory {
  std::vector<double> mu;
  std::vector<std::uint8_t> psi;

  std::size_t size() const noexcept { return psi.size(); }
};

/// Full simulation state at time t (t = 1 holds the initial settings only).
struct SimState {
  std::int64_t t = 1;
  std::vector<std::int64_t> ones;  // S_i = number of declared 1's over tau = 2..t
  std::vector<double> beta;        // (b1_i + S_i) / t
  std::vector<double> beta_bar;    // S_i / (t - 1), zero at t = 1
  std::vector<double> mu;          // W beta
  std::vector<double> M;           // m0_i + m1_i + (t - 1) deg_i
  std::vector<double> mu_cumsum;   // sum_{tau=1}^{t-1} mu_i(tau)
  std::vector<AgentHistory> history;
  std::vector<double> b1;
  double kappa = 0.0;
  bool record_history = true;

  std::size_t size() const noexcept { return beta.size(); }
};

SimState init_state(const Network& net, const InitialSettings& init, bool record_history = true);

/// Advances t -> t+1. psi_{i,t+1} = 1 iff uniforms[i] < f(mu_i(t), gamma_i):
/// exactly one uniform per agent, consumed in ascending agent order.
void step(SimState& state, const Network& net, const BiasProfile& bias, std::span<const double> uniforms);
void step(SimState& state, const Network& net, const BiasProfile& bias, Rng& rng);

// Applies a given declaration vector (no randomness). Used by the other
// step overloads and by tests that force outcomes.
void apply_declarations(SimState& state, const Network& net, std::span<const std::uint8_t> psi);

// Number of (agent) entries of the current mu outside [kappa/t, 1 - kappa/t].
// A relative slack of 1e-12 absorbs rounding when the band is attained exactly.
int band_violations(const SimState& state);

struct RecomputedStatistics {
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<double> mu_cumsum;
};

/// Batch recomputation of beta, mu and the cumulative mu from the stored
/// history and initial settings; must agree with the incremental state.
RecomputedStatistics recompute_from_history(const SimState& state, const Network& net, const InitialSettings& init);

struct Checkpoint {
  std::int64_t t = 0;
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<std::int64_t> ones;
  std::vector<double> mu_cumsum;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  SimState final_state;
};

Checkpoint snapshot(const SimState& state);

/// Repeated step() from t = 1 to the horizon, snapshotting at `checkpoints`
/// (each in [2, horizon]). Bit-deterministic in (inputs, seed).
Trajectory run(const Network& net, const BiasProfile& bias, const InitialSettings& init, std::int64_t horizon,
               std::uint64_t seed, std::span<const std::int64_t> checkpoints, bool record_history = true);

// Rows `rep,t,agent,beta,mu,ones`; no header.
void write_trajectory_rows(std::ostream& out, std::size_t rep, const Trajectory& trajectory);
inline constexpr const char* kTrajectoryHeader = "rep,t,agent,beta,mu,ones";

/// F_i(beta) = f((W beta)_i, gamma_i); beta must lie strictly inside (0,1)^n.
std::vector<double> expected_update(std::span<const double> beta, const Network& net, const BiasProfile& bias);

/// (gamma_i - 1) beta_i mu_i + beta_i - gamma_i mu_i with mu = W beta. Zero
/// exactly at equilibria of the expected dynamics.
std::vector<double> equilibrium_residual(std::span<const double> beta, const Network& net, const BiasProfile& bias);

struct EquilibriumResult {
  std::vector<double> beta;
  std::vector<double> mu;
  bool interior = false;
  int iterations = 0;
  double residual = 0.0;  // ||beta - F(beta)||_inf
};

/// Damped fixed-point iteration beta <- (1 - eta) beta + eta F(beta) from
/// 0.5 * 1 with eta = 0.5. Throws NoConvergence after max_iter.
EquilibriumResult find_interior_equilibrium(const Network& net, const BiasProfile& bias, double tol = 1e-12,
                                            int max_iter = 1'000'000);

}  // namespace polya

#pragma once

#include <cstdint>
#include <vector>

#include "polya/dynamics.hpp"
#include "polya/likelihood.hpp"

namespace polya {

/// Likelihood-ratio test of gamma1 (the true bias) against gamma2 on one
/// agent's declarations. Entry k belongs to time tau = k + 2 and uses
/// mu(tau - 1). Lowercase vectors are per-step increments, uppercase their
/// running sums; Y = X - Z.
struct MartingaleTrace {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double alpha_step = 0.0;  // |log(gamma1 / gamma2)|
  double c0 = 0.0;
  double c1 = 0.0;

  std::vector<double> mu;
  std::vector<double> z;        // nll(gamma2) - nll(gamma1) of the realized declaration
  std::vector<double> x;        // kl(f(mu, gamma1) || f(mu, gamma2)) = E[z | past]
  std::vector<double> w;        // Var[z | past]
  std::vector<double> floor_x;  // hellinger_x_lower_bound(mu, gamma1, gamma2)
  std::vector<double> Z, X, Y, W;

  std::size_t size() const noexcept { return z.size(); }
  std::int64_t time(std::size_t k) const noexcept { return static_cast<std::int64_t>(k) + 2; }
};

MartingaleTrace build_trace(const AgentHistory& history, double gamma1, double gamma2);
// From the logistic form; mu is recovered as sigmoid(nu).
MartingaleTrace build_trace(const DeclarationHistory& history, double gamma1, double gamma2);

struct Decision {
  double gamma = 0.0;
  bool tie = false;
};

/// Sign test at time t: gamma1 if Z(t) > 0, gamma2 if Z(t) < 0, tie-flagged gamma1 if zero.
Decision decision(const MartingaleTrace& trace, std::int64_t t);

/// exp(-(s^2/2) / (sigma_sq + alpha s / 3)).
double freedman_bound(double s, double sigma_sq, double alpha);

struct HardBoundReport {
  std::size_t steps = 0;
  std::size_t z_step = 0;     // |z| > alpha_step
  std::size_t y_step = 0;     // |x - z| > alpha_step
  std::size_t variance = 0;   // w > c1 x
  std::size_t hellinger = 0;  // x < floor_x
  std::size_t monotone = 0;   // X or W decreasing

  std::size_t violations() const noexcept { return z_step + y_step + variance + hellinger + monotone; }
};

HardBoundReport check_hard_bounds(const MartingaleTrace& trace);

struct DriftReport {
  std::size_t violations = 0;    // x(tau) < c0 kappa / tau
  double min_ratio = 0.0;        // min x(tau) tau / (c0 kappa)
  double tail_constant = 0.0;    // min X(t) / log t over t in [T/10, T]
};

DriftReport drift_floor_check(const MartingaleTrace& trace, double kappa);

}  // namespace polya

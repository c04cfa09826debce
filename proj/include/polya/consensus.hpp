#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polya/dynamics.hpp"
#include "polya/graph.hpp"

namespace polya {

enum class Regime { ToZero, ToOne, Interior, Boundary };
std::string to_string(Regime regime);

struct RegimeReport {
  double lambda_zero = 0.0;  // lambda_max(Gamma W)
  double lambda_one = 0.0;   // lambda_max(Gamma^-1 W)
  Regime regime = Regime::Boundary;
  double tolerance = 0.0;
  Vector v_zero;  // left Perron vectors, v^T 1 = 1
  Vector v_one;
};

/// ToZero iff lambda_zero <= 1 - tol and lambda_one > 1 + tol, ToOne
/// symmetrically, Interior iff both exceed 1 + tol; anything within the band
/// around 1 is Boundary rather than forced to a side.
RegimeReport classify(const Network& net, const BiasProfile& bias, double tolerance = 1e-9);

enum class ConsensusTarget { Zero, One };

/// V(beta) = v^T beta for the left Perron vector of Gamma W (target Zero), or
/// v^T (1 - beta) with Gamma^-1 W (target One).
struct PerronFunctional {
  ConsensusTarget target = ConsensusTarget::Zero;
  double lambda = 0.0;
  std::vector<double> v;
  double residual = 0.0;

  double operator()(std::span<const double> beta) const;
};

PerronFunctional perron_functional(const Network& net, const BiasProfile& bias, ConsensusTarget target);

/// R(t, eta) = Gamma(t + eta) / (Gamma(eta) Gamma(t + 1)) = prod_{k<t} (k + eta)/(k + 1).
double ratio_R(std::int64_t t, double eta);

struct GautschiBounds {
  double lower = 0.0;  // 1 / (Gamma(eta) (t + 1)^(1 - eta))
  double upper = 0.0;  // 1 / (Gamma(eta) t^(1 - eta))
};
GautschiBounds gautschi_bounds(std::int64_t t, double eta);

/// Bounds on f(mu, gamma) / (gamma mu) = 1 / (1 + (gamma - 1) mu) over
/// mu in (0, r] for every agent, each widened to include 1.
struct CouplingAlphas {
  double lower = 1.0;
  double upper = 1.0;
};
CouplingAlphas coupling_alphas(const BiasProfile& bias, double radius);

/// One step of the main process together with linearized processes h^alpha
/// for each entry of `alphas`, all driven by the same per-agent uniforms
/// (the maximal coupling): psi_i = 1{u_i < f(mu_i, gamma_i)}, and with
/// zeta = alpha h / V(beta(t)) and p = zeta gamma_i mu_i, psi_bar_i = 1{u_i < p}
/// if p <= 1, else p itself. Then h <- t/(t+1) h + v^T psi_bar / (t+1).
/// Consumes exactly the uniforms step() would. Only the to-zero target is
/// supported (RegimeMismatch otherwise).
void coupled_linearized_step(SimState& state, const Network& net, const BiasProfile& bias,
                             const PerronFunctional& functional, std::span<const double> alphas, std::span<double> h,
                             Rng& rng);
// Same, with explicit uniforms (one per agent).
void coupled_linearized_step(SimState& state, const Network& net, const BiasProfile& bias,
                             const PerronFunctional& functional, std::span<const double> alphas, std::span<double> h,
                             std::span<const double> uniforms);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y ~ intercept + slope x. InsufficientData below two
// distinct x values.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  std::int64_t t_lo = 0;
  std::int64_t t_hi = 0;
  double r_squared = 0.0;
  double target = 0.0;  // lambda - 1, filled in by callers that know it
  std::size_t points = 0;
};

/// Least squares of log s against log t over the points with t in [t_lo, t_hi].
/// InsufficientData below 10 points, NonPositiveValue for any s <= 0 in the window.
RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> s, std::int64_t t_lo, std::int64_t t_hi);

}  // namespace polya

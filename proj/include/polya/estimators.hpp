#pragma once

#include <cstddef>

#include "polya/dynamics.hpp"
#include "polya/likelihood.hpp"

namespace polya {

struct BiasEstimate {
  double chi_hat = 0.0;
  double gamma_hat = 1.0;
  int phi_hat = 0;
  int iterations = 0;
  bool identifiable = false;
};

// Sentinel for one-sided histories, whose likelihood is minimized at ±infinity.
inline constexpr double kChiClamp = 40.0;

/// Maximum-likelihood bias estimate: the unique minimizer of the strictly
/// convex total_nll in chi, found by Newton steps safeguarded by bisection on
/// a sign-changing bracket (initially [-40, 40], widened if needed). Stops at
/// |gradient| <= tol. A one-sided history is reported unidentifiable with
/// chi_hat = ±40. `start` warm-starts the iteration.
BiasEstimate mle_bias(const DeclarationHistory& h, double tol = 1e-10, double start = 0.0);

enum class Belief { Zero, One, Tie };

int belief_value(Belief b);  // 0, 1, or -1 for a tie

struct BeliefEstimate {
  double statistic = 0.0;  // (t - 1) beta_bar_i(t) - sum_{tau=1}^{t-1} mu_i(tau)
  Belief phi_hat = Belief::Tie;
};

/// Sign test on the two running sufficient statistics of agent `agent`.
/// Throws TooEarly before any declaration (t < 2).
BeliefEstimate inherent_belief(const SimState& state, std::size_t agent);
BeliefEstimate inherent_belief(std::int64_t ones, double mu_cumsum, std::int64_t t);

/// [beta / (1 - beta)] [(1 - mu) / mu]; inverts beta = f(mu, gamma).
/// DomainError within 1e-12 of 0 or 1, where consensus makes it meaningless.
double equilibrium_bias_estimate(double beta, double mu);
// One iff beta > mu (equivalently the estimate above exceeds 1).
Belief equilibrium_belief_estimate(double beta, double mu);

enum class RateRegime { WorstCase, Interior, Consensus };

struct RateParams {
  double K = 0.0;        // interior: X(t) > K t
  double c1 = 0.0;       // consensus: X(t) > c1 t^(lambda - epsilon)
  double lambda = 0.0;
  double epsilon = 0.0;
};

struct RatePrediction {
  RateRegime regime = RateRegime::WorstCase;
  double gamma = 0.0;  // after the gamma -> 1/gamma reduction
  double kappa = 0.0;
  double delta = 0.0;
  RateParams params;
  double xi = 0.0;      // 1 / (4c + 2/3), c = gamma / (gamma - 1)
  double target = 0.0;  // (1/xi) log(1 / (delta (e^xi - 1)))
  double t_star = 0.0;  // g^-1(target)
  double t0 = 0.0;      // g^-1(2), where the drift first exceeds 2
};

/// Time after which the belief estimator is wrong with probability at most
/// delta, given a lower envelope g(t) on the estimator's drift:
/// worst case g = (gamma-1)/(4 gamma) kappa log t, interior g = K t,
/// consensus g = c1 t^(lambda - epsilon). May be +inf when g^-1 overflows.
RatePrediction predict_convergence_time(double gamma, double kappa, double delta, RateRegime regime,
                                        const RateParams& params = {});

}  // namespace polya

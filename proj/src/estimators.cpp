#include "polya/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polya/error.hpp"

namespace polya {

BiasEstimate mle_bias(const DeclarationHistory& h, double tol, double start) {
  if (h.size() == 0) throw Error(ErrorCode::EmptyHistory, "MLE of an empty history");
  BiasEstimate est;
  if (!h.identifiable()) {
    est.identifiable = false;
    est.chi_hat = h.count_ones > 0 ? kChiClamp : -kChiClamp;
    est.gamma_hat = std::exp(est.chi_hat);
    est.phi_hat = h.count_ones > 0 ? 1 : 0;
    return est;
  }
  est.identifiable = true;

  // The gradient is increasing in chi; find lo < root < hi.
  double lo = -kChiClamp;
  double hi = kChiClamp;
  while (nll_gradient(h, lo) > 0.0 && lo > -1e6) lo *= 2.0;
  while (nll_gradient(h, hi) < 0.0 && hi < 1e6) hi *= 2.0;

  double chi = std::clamp(start, lo, hi);
  int it = 0;
  for (; it < 500; ++it) {
    const double g = nll_gradient(h, chi);
    if (std::abs(g) <= tol) break;
    if (g > 0.0) {
      hi = chi;
    } else {
      lo = chi;
    }
    const double curvature = nll_hessian(h, chi);
    double next = chi - g / curvature;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(chi))) {
      chi = next;
      break;
    }
    chi = next;
  }
  est.chi_hat = chi;
  est.gamma_hat = std::exp(chi);
  est.phi_hat = chi > 0.0 ? 1 : 0;
  est.iterations = it;
  return est;
}

int belief_value(Belief b) {
  switch (b) {
    case Belief::Zero: return 0;
    case Belief::One: return 1;
    case Belief::Tie: return -1;
  }
  return -1;
}

BeliefEstimate inherent_belief(std::int64_t ones, double mu_cumsum, std::int64_t t) {
  if (t < 2) throw Error(ErrorCode::TooEarly, "no declarations before t = 2");
  BeliefEstimate out;
  out.statistic = static_cast<double>(ones) - mu_cumsum;
  out.phi_hat = out.statistic > 0.0 ? Belief::One : out.statistic < 0.0 ? Belief::Zero : Belief::Tie;
  return out;
}

BeliefEstimate inherent_belief(const SimState& state, std::size_t agent) {
  if (agent >= state.size()) throw Error(ErrorCode::OutOfRange, "agent " + std::to_string(agent) + " out of range");
  return inherent_belief(state.ones[agent], state.mu_cumsum[agent], state.t);
}

double equilibrium_bias_estimate(double beta, double mu) {
  constexpr double guard = 1e-12;
  if (!(beta > guard && beta < 1.0 - guard && mu > guard && mu < 1.0 - guard)) {
    throw Error(ErrorCode::DomainError, "equilibrium estimator undefined at beta = " + std::to_string(beta) +
                                            ", mu = " + std::to_string(mu));
  }
  return (beta / (1.0 - beta)) * ((1.0 - mu) / mu);
}

Belief equilibrium_belief_estimate(double beta, double mu) {
  if (beta > mu) return Belief::One;
  if (beta < mu) return Belief::Zero;
  return Belief::Tie;
}

RatePrediction predict_convergence_time(double gamma, double kappa, double delta, RateRegime regime,
                                        const RateParams& params) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidRegimeParams, "delta must lie in (0,1)");
  if (!(gamma > 0.0) || std::abs(gamma - 1.0) < 1e-9) {
    throw Error(ErrorCode::InvalidRegimeParams, "gamma must be positive and different from 1");
  }
  RatePrediction out;
  out.regime = regime;
  out.gamma = gamma > 1.0 ? gamma : 1.0 / gamma;
  out.kappa = kappa;
  out.delta = delta;
  out.params = params;
  const double c = out.gamma / (out.gamma - 1.0);
  out.xi = 1.0 / (4.0 * c + 2.0 / 3.0);
  out.target = -std::log(delta * std::expm1(out.xi)) / out.xi;

  switch (regime) {
    case RateRegime::WorstCase: {
      if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidRegimeParams, "worst case needs kappa > 0");
      const double slope = (out.gamma - 1.0) / (4.0 * out.gamma) * kappa;
      out.t_star = std::exp(out.target / slope);
      out.t0 = std::exp(2.0 / slope);
      break;
    }
    case RateRegime::Interior:
      if (!(params.K > 0.0)) throw Error(ErrorCode::InvalidRegimeParams, "interior regime needs K > 0");
      out.t_star = out.target / params.K;
      out.t0 = 2.0 / params.K;
      break;
    case RateRegime::Consensus: {
      const double power = params.lambda - params.epsilon;
      if (!(params.c1 > 0.0) || !(power > 0.0)) {
        throw Error(ErrorCode::InvalidRegimeParams, "consensus regime needs c1 > 0 and lambda > epsilon");
      }
      out.t_star = std::pow(out.target / params.c1, 1.0 / power);
      out.t0 = std::pow(2.0 / params.c1, 1.0 / power);
      break;
    }
  }
  return out;
}

}  // namespace polya

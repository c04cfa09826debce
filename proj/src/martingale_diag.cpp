#include "polya/martingale_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polya/error.hpp"

namespace polya {

namespace {

MartingaleTrace empty_trace(double gamma1, double gamma2) {
  if (!(gamma1 > 0.0 && gamma2 > 0.0)) throw Error(ErrorCode::DomainError, "hypotheses must be positive");
  if (gamma1 == gamma2) throw Error(ErrorCode::EqualHypotheses, "gamma1 == gamma2");
  MartingaleTrace tr;
  tr.gamma1 = gamma1;
  tr.gamma2 = gamma2;
  const double log_ratio = std::log(gamma1 / gamma2);
  tr.alpha_step = std::abs(log_ratio);
  const double d = std::sqrt(gamma1) - std::sqrt(gamma2);
  const double m = std::max(0.5 * (gamma1 + gamma2), 1.0);
  const double lo = std::min(1.0, gamma1);
  tr.c0 = 0.5 * d * d / (m * m);
  tr.c1 = (gamma1 * log_ratio * log_ratio / (lo * lo)) * (m * m / (d * d));
  return tr;
}

void push_step(MartingaleTrace& tr, double mu, double z) {
  const double g1 = tr.gamma1;
  const double g2 = tr.gamma2;
  // log-ratios of the two outcome probabilities, without forming f near 0 or 1
  const double lr0 = std::log1p((g2 - 1.0) * mu) - std::log1p((g1 - 1.0) * mu);
  const double lr1 = std::log(g1 / g2) + lr0;
  const double f1 = detail::conformity(mu, g1);
  const double x = f1 * lr1 + (1.0 - f1) * lr0;
  const double denom = 1.0 + (g1 - 1.0) * mu;
  const double log_ratio = std::log(g1 / g2);
  const double w = g1 * mu * (1.0 - mu) / (denom * denom) * log_ratio * log_ratio;

  tr.mu.push_back(mu);
  tr.z.push_back(z);
  tr.x.push_back(x);
  tr.w.push_back(w);
  tr.floor_x.push_back(hellinger_x_lower_bound(mu, g1, g2));
  const double Z = (tr.Z.empty() ? 0.0 : tr.Z.back()) + z;
  const double X = (tr.X.empty() ? 0.0 : tr.X.back()) + x;
  const double W = (tr.W.empty() ? 0.0 : tr.W.back()) + w;
  tr.Z.push_back(Z);
  tr.X.push_back(X);
  tr.W.push_back(W);
  tr.Y.push_back(X - Z);
}

void reserve(MartingaleTrace& tr, std::size_t n) {
  for (auto* v : {&tr.mu, &tr.z, &tr.x, &tr.w, &tr.floor_x, &tr.Z, &tr.X, &tr.Y, &tr.W}) v->reserve(n);
}

}  // namespace

MartingaleTrace build_trace(const AgentHistory& history, double gamma1, double gamma2) {
  auto tr = empty_trace(gamma1, gamma2);
  reserve(tr, history.size());
  const double chi1 = std::log(gamma1);
  const double chi2 = std::log(gamma2);
  for (std::size_t k = 0; k < history.size(); ++k) {
    const double nu = logit(history.mu[k]);
    const int s = history.psi[k] ? 1 : -1;
    push_step(tr, history.mu[k], single_step_nll(chi2, nu, s) - single_step_nll(chi1, nu, s));
  }
  return tr;
}

MartingaleTrace build_trace(const DeclarationHistory& history, double gamma1, double gamma2) {
  auto tr = empty_trace(gamma1, gamma2);
  reserve(tr, history.size());
  const double chi1 = std::log(gamma1);
  const double chi2 = std::log(gamma2);
  for (std::size_t k = 0; k < history.size(); ++k) {
    const double nu = history.nu[k];
    const int s = history.psi_tilde[k];
    push_step(tr, sigmoid(nu), single_step_nll(chi2, nu, s) - single_step_nll(chi1, nu, s));
  }
  return tr;
}

Decision decision(const MartingaleTrace& trace, std::int64_t t) {
  if (t < 2 || t - 2 >= static_cast<std::int64_t>(trace.size())) {
    throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t) + " outside the trace");
  }
  const double Z = trace.Z[static_cast<std::size_t>(t - 2)];
  if (Z > 0.0) return {trace.gamma1, false};
  if (Z < 0.0) return {trace.gamma2, false};
  return {trace.gamma1, true};
}

double freedman_bound(double s, double sigma_sq, double alpha) {
  if (!(s > 0.0) || !(sigma_sq >= 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorCode::DomainError, "freedman_bound needs s > 0, sigma^2 >= 0, alpha > 0");
  }
  return std::exp(-(0.5 * s * s) / (sigma_sq + alpha * s / 3.0));
}

HardBoundReport check_hard_bounds(const MartingaleTrace& trace) {
  // Rounding slack: the increments are differences of O(1) log terms.
  const double step_tol = 1e-12 * std::max(1.0, trace.alpha_step);
  HardBoundReport r;
  r.steps = trace.size();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (std::abs(trace.z[k]) > trace.alpha_step + step_tol) ++r.z_step;
    if (std::abs(trace.x[k] - trace.z[k]) > trace.alpha_step + step_tol) ++r.y_step;
    if (trace.w[k] > trace.c1 * trace.x[k] * (1.0 + 1e-9) + 1e-300) ++r.variance;
    if (trace.x[k] < trace.floor_x[k] * (1.0 - 1e-9)) ++r.hellinger;
    if (k > 0 && (trace.X[k] < trace.X[k - 1] || trace.W[k] < trace.W[k - 1])) ++r.monotone;
  }
  return r;
}

DriftReport drift_floor_check(const MartingaleTrace& trace, double kappa) {
  DriftReport r;
  r.min_ratio = std::numeric_limits<double>::infinity();
  r.tail_constant = std::numeric_limits<double>::infinity();
  if (trace.size() == 0) return r;
  const auto T = trace.time(trace.size() - 1);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double tau = static_cast<double>(trace.time(k));
    const double floor = trace.c0 * kappa / tau;
    const double ratio = trace.x[k] / floor;
    r.min_ratio = std::min(r.min_ratio, ratio);
    if (trace.x[k] < floor * (1.0 - 1e-9)) ++r.violations;
    if (trace.time(k) >= T / 10 && trace.time(k) >= 3) {
      r.tail_constant = std::min(r.tail_constant, trace.X[k] / std::log(tau));
    }
  }
  return r;
}

}  // namespace polya

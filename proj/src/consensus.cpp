#include "polya/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "polya/error.hpp"

namespace polya {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::ToZero: return "ToZero";
    case Regime::ToOne: return "ToOne";
    case Regime::Interior: return "Interior";
    case Regime::Boundary: return "Boundary";
  }
  return "Boundary";
}

RegimeReport classify(const Network& net, const BiasProfile& bias, double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::DomainError, "negative classification tolerance");
  if (bias.size() != net.size()) throw Error(ErrorCode::DimensionMismatch, "bias profile does not match network");
  const auto zero = perron(scaled_matrix(net, bias.gamma(), false));
  const auto one = perron(scaled_matrix(net, bias.gamma(), true));

  RegimeReport report;
  report.lambda_zero = zero.radius;
  report.lambda_one = one.radius;
  report.tolerance = tolerance;
  report.v_zero = zero.left_vector;
  report.v_one = one.left_vector;

  const bool zero_below = zero.radius <= 1.0 - tolerance;
  const bool zero_above = zero.radius > 1.0 + tolerance;
  const bool one_below = one.radius <= 1.0 - tolerance;
  const bool one_above = one.radius > 1.0 + tolerance;
  if (zero_below && one_above) {
    report.regime = Regime::ToZero;
  } else if (one_below && zero_above) {
    report.regime = Regime::ToOne;
  } else if (zero_above && one_above) {
    report.regime = Regime::Interior;
  } else {
    report.regime = Regime::Boundary;
  }
  return report;
}

double PerronFunctional::operator()(std::span<const double> beta) const {
  if (beta.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "V applied to a vector of wrong size");
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i] * (target == ConsensusTarget::Zero ? beta[i] : 1.0 - beta[i]);
  }
  return sum;
}

PerronFunctional perron_functional(const Network& net, const BiasProfile& bias, ConsensusTarget target) {
  if (bias.size() != net.size()) throw Error(ErrorCode::DimensionMismatch, "bias profile does not match network");
  const auto spectral = perron(scaled_matrix(net, bias.gamma(), target == ConsensusTarget::One));
  PerronFunctional out;
  out.target = target;
  out.lambda = spectral.radius;
  out.v.assign(spectral.left_vector.data(), spectral.left_vector.data() + spectral.left_vector.size());
  out.residual = spectral.residual;
  return out;
}

namespace {

// Stirling tail 1/(12z) - 1/(360z^3) + 1/(1260z^5); the next term is below 1e-24 for z > 1000.
double stirling_series(double z) {
  const double z2 = z * z;
  return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * z2)) / z2) / z;
}

}  // namespace

double ratio_R(std::int64_t t, double eta) {
  if (t < 1 || !(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::DomainError, "ratio_R needs t >= 1, eta in (0,1]");
  if (eta == 1.0) return 1.0;
  if (t <= 1000) {
    double r = 1.0;
    for (std::int64_t k = 0; k < t; ++k) r *= (static_cast<double>(k) + eta) / static_cast<double>(k + 1);
    return r;
  }
  // log Gamma(a) - log Gamma(b), a = t + eta, b = t + 1, without cancelling two O(t log t) terms.
  const double a = static_cast<double>(t) + eta;
  const double b = static_cast<double>(t) + 1.0;
  const double d = eta - 1.0;
  const double diff = (a - 0.5) * std::log1p(d / b) + d * std::log(b) - d + stirling_series(a) - stirling_series(b);
  return std::exp(diff - std::lgamma(eta));
}

GautschiBounds gautschi_bounds(std::int64_t t, double eta) {
  if (t < 1 || !(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::DomainError, "gautschi_bounds needs t >= 1");
  const double g = std::tgamma(eta);
  const double td = static_cast<double>(t);
  return {1.0 / (g * std::pow(td + 1.0, 1.0 - eta)), 1.0 / (g * std::pow(td, 1.0 - eta))};
}

CouplingAlphas coupling_alphas(const BiasProfile& bias, double radius) {
  if (!(radius > 0.0 && radius < 1.0)) throw Error(ErrorCode::DomainError, "coupling radius must lie in (0,1)");
  CouplingAlphas out;
  for (double g : bias.gamma()) {
    const double edge = 1.0 / (1.0 + (g - 1.0) * radius);
    out.lower = std::min(out.lower, edge);
    out.upper = std::max(out.upper, edge);
  }
  return out;
}

void coupled_linearized_step(SimState& state, const Network& net, const BiasProfile& bias,
                             const PerronFunctional& functional, std::span<const double> alphas, std::span<double> h,
                             std::span<const double> uniforms) {
  if (functional.target != ConsensusTarget::Zero) {
    throw Error(ErrorCode::RegimeMismatch, "linearized coupling is defined for consensus to zero");
  }
  const std::size_t n = state.size();
  if (alphas.size() != h.size() || uniforms.size() != n || functional.v.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "coupled step arguments disagree in size");
  }
  const double V = functional(state.beta);
  if (!(V > 0.0)) throw Error(ErrorCode::DomainError, "V(beta) must be positive");
  const double t = static_cast<double>(state.t);
  const auto& gamma = bias.gamma();
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(h[k] > 0.0)) throw Error(ErrorCode::DomainError, "linearized process must stay positive");
    const double zeta = alphas[k] * h[k] / V;
    double projected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = zeta * gamma[i] * state.mu[i];
      const double psi_bar = p <= 1.0 ? (uniforms[i] < p ? 1.0 : 0.0) : p;
      projected += functional.v[i] * psi_bar;
    }
    h[k] = (t / (t + 1.0)) * h[k] + projected / (t + 1.0);
  }
  step(state, net, bias, uniforms);
}

void coupled_linearized_step(SimState& state, const Network& net, const BiasProfile& bias,
                             const PerronFunctional& functional, std::span<const double> alphas, std::span<double> h,
                             Rng& rng) {
  std::vector<double> u(state.size());
  for (auto& x : u) x = rng.uniform();
  coupled_linearized_step(state, net, bias, functional, alphas, h, u);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "least squares on series of different length");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (x.size() < 2 || !(sxx > 0.0)) throw Error(ErrorCode::InsufficientData, "least squares needs two distinct x");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(std::span<const std::int64_t> t, std::span<const double> s, std::int64_t t_lo, std::int64_t t_hi) {
  if (t.size() != s.size()) throw Error(ErrorCode::DimensionMismatch, "fit_rate series lengths differ");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_lo || t[k] > t_hi) continue;
    if (!(s[k] > 0.0)) {
      throw Error(ErrorCode::NonPositiveValue, "non-positive value at t = " + std::to_string(t[k]));
    }
    x.push_back(std::log(static_cast<double>(t[k])));
    y.push_back(std::log(s[k]));
  }
  if (x.size() < 10) {
    throw Error(ErrorCode::InsufficientData, "rate fit needs at least 10 points, got " + std::to_string(x.size()));
  }
  const auto line = least_squares(x, y);
  RateFit fit;
  fit.exponent = line.slope;
  fit.intercept = line.intercept;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.points = x.size();
  fit.r_squared = line.r_squared;
  return fit;
}

}  // namespace polya

#include "polya/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polya/error.hpp"

namespace polya {

namespace {

// Neumaier-compensated running sum; histories reach 10^6 terms.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void require_open_unit(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::DomainError, std::string(name) + " = " + std::to_string(p) + " outside (0,1)");
  }
}

}  // namespace

DeclarationHistory to_declaration_history(const AgentHistory& agent, std::size_t steps) {
  if (steps > agent.size()) throw Error(ErrorCode::OutOfRange, "history prefix longer than the history");
  DeclarationHistory h;
  h.nu.reserve(steps);
  h.psi_tilde.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    h.nu.push_back(logit(agent.mu[k]));
    h.psi_tilde.push_back(agent.psi[k] ? 1 : -1);
    if (agent.psi[k]) {
      ++h.count_ones;
    } else {
      ++h.count_zeros;
    }
    h.mu_sum += agent.mu[k];
  }
  return h;
}

DeclarationHistory to_declaration_history(const AgentHistory& agent) {
  return to_declaration_history(agent, agent.size());
}

DeclarationHistory prefix(const DeclarationHistory& h, std::size_t steps) {
  if (steps > h.size()) throw Error(ErrorCode::OutOfRange, "history prefix longer than the history");
  DeclarationHistory out;
  out.nu.assign(h.nu.begin(), h.nu.begin() + static_cast<std::ptrdiff_t>(steps));
  out.psi_tilde.assign(h.psi_tilde.begin(), h.psi_tilde.begin() + static_cast<std::ptrdiff_t>(steps));
  for (auto s : out.psi_tilde) {
    if (s > 0) {
      ++out.count_ones;
    } else {
      ++out.count_zeros;
    }
  }
  // mu is not stored in the logistic form; recover it for the running sum.
  for (double nu : out.nu) out.mu_sum += sigmoid(nu);
  return out;
}

double logit(double mu) {
  require_open_unit(mu, "mu");
  return std::log(mu) - std::log1p(-mu);
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  if (x > 30.0) return x + std::exp(-x);
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double single_step_nll(double chi, double nu, int psi_tilde) noexcept {
  return softplus(-static_cast<double>(psi_tilde) * (chi + nu));
}

double total_nll(const DeclarationHistory& h, double chi) {
  CompensatedSum sum;
  for (std::size_t k = 0; k < h.size(); ++k) sum.add(single_step_nll(chi, h.nu[k], h.psi_tilde[k]));
  return sum.value();
}

double nll_gradient(const DeclarationHistory& h, double chi) {
  CompensatedSum sum;
  for (double nu : h.nu) sum.add(sigmoid(chi + nu));
  sum.add(-static_cast<double>(h.count_ones));
  return sum.value();
}

double nll_hessian(const DeclarationHistory& h, double chi) {
  if (h.size() == 0) throw Error(ErrorCode::EmptyHistory, "curvature of an empty history");
  CompensatedSum sum;
  for (double nu : h.nu) {
    const double s = sigmoid(chi + nu);
    sum.add(s * (1.0 - s));
  }
  return sum.value();
}

double kl_bernoulli(double p, double q) {
  require_open_unit(p, "p");
  require_open_unit(q, "q");
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

double hellinger_squared(double p, double q) {
  require_open_unit(p, "p");
  require_open_unit(q, "q");
  return 1.0 - std::sqrt(p * q) - std::sqrt((1.0 - p) * (1.0 - q));
}

double hellinger_x_lower_bound(double mu, double gamma1, double gamma2) {
  require_open_unit(mu, "mu");
  if (!(gamma1 > 0.0 && gamma2 > 0.0)) throw Error(ErrorCode::DomainError, "gammas must be positive");
  const double d = std::sqrt(gamma1) - std::sqrt(gamma2);
  const double m = std::max(0.5 * (gamma1 + gamma2), 1.0);
  return d * d * mu * (1.0 - mu) / (m * m);
}

}  // namespace polya

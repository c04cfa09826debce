#pragma once

#include <cstdint>
#include <vector>

#include "polya/dynamics.hpp"

namespace polya {

/// One agent's declarations in the logistic parameterization:
/// nu_tau = logit(mu_i(tau - 1)), psi_tilde_tau = 2 psi_{i,tau} - 1, tau = 2..t.
struct DeclarationHistory {
  std::vector<double> nu;
  std::vector<std::int8_t> psi_tilde;
  std::int64_t count_ones = 0;
  std::int64_t count_zeros = 0;
  double mu_sum = 0.0;  // sum_{tau=1}^{t-1} mu_i(tau)

  std::size_t size() const noexcept { return nu.size(); }
  bool identifiable() const noexcept { return count_ones > 0 && count_zeros > 0; }
};

DeclarationHistory to_declaration_history(const AgentHistory& agent);
// First `steps` declarations only (a prefix of the append-only history).
DeclarationHistory to_declaration_history(const AgentHistory& agent, std::size_t steps);

// The first `steps` entries of an existing history.
DeclarationHistory prefix(const DeclarationHistory& h, std::size_t steps);

double logit(double mu);
double sigmoid(double x) noexcept;
// log(1 + e^x), branch-stable for |x| up to ~700.
double softplus(double x) noexcept;

/// log(1 + exp(-psi_tilde (chi + nu))), the loss of one declaration under
/// bias chi = log gamma.
double single_step_nll(double chi, double nu, int psi_tilde) noexcept;

double total_nll(const DeclarationHistory& h, double chi);
// d/dchi total_nll = sum sigmoid(chi + nu) - count_ones.
double nll_gradient(const DeclarationHistory& h, double chi);
// sum sigmoid(chi + nu)(1 - sigmoid(chi + nu)) > 0. Throws EmptyHistory.
double nll_hessian(const DeclarationHistory& h, double chi);

/// Bernoulli KL divergence D(p || q). Boundary arguments are DomainError.
double kl_bernoulli(double p, double q);
double hellinger_squared(double p, double q);

/// Closed-form lower bound on kl(f(mu,g1) || f(mu,g2)):
/// (sqrt g1 - sqrt g2)^2 mu (1 - mu) / max((g1 + g2)/2, 1)^2.
double hellinger_x_lower_bound(double mu, double gamma1, double gamma2);

}  // namespace polya

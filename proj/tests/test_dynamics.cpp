#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "generators.hpp"
#include "polya/dynamics.hpp"
#include "polya/error.hpp"

using namespace polya;

TEST_CASE("conformity function") {
  CHECK(conformity_probability(0.3, 2.0) == doctest::Approx(0.46153846153846153846).epsilon(1e-15));
  CHECK(conformity_probability(0.3, 1.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(conformity_probability(0.0, 2.0), Error);
  CHECK_THROWS_AS(conformity_probability(0.5, 0.0), Error);
  CHECK(detail::conformity(0.0, 3.0) == 0.0);
  CHECK(detail::conformity(1.0, 3.0) == 1.0);
}

TEST_CASE("property: reciprocity and monotonicity of f") {
  gen::Source src(3);
  for (int c = 0; c < 2000; ++c) {
    const double mu = src.uniform(1e-9, 1.0 - 1e-9);
    const double g = src.gamma();
    const double f = conformity_probability(mu, g);
    CHECK(std::abs(f + conformity_probability(1.0 - mu, 1.0 / g) - 1.0) <= 1e-12);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    // f - mu has the sign of gamma - 1
    CHECK((f - mu) * (g - 1.0) >= 0.0);
    const double mu2 = std::min(mu + 1e-3, 1.0 - 1e-12);
    CHECK(conformity_probability(mu2, g) >= f);
  }
}

TEST_CASE("BiasProfile") {
  const BiasProfile b({2.0, 0.5});
  CHECK(b.phi()[0] == 1);
  CHECK(b.phi()[1] == 0);
  CHECK(b.chi()[1] == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS(BiasProfile({1.0}), Error);
  CHECK_THROWS_AS(BiasProfile({-2.0}), Error);
}

TEST_CASE("band constant") {
  const auto complete = generate_network("complete:6");
  CHECK(band_constant(complete, uniform_initial_settings(complete)) == doctest::Approx(0.5));
  // star 1+4: leaf masses 1/2 each side, hub degree 4
  const auto star = generate_network("star:5");
  CHECK(band_constant(star, uniform_initial_settings(star)) == doctest::Approx(0.125));
  CHECK_THROWS_AS(make_initial_settings(star, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(make_initial_settings(star, {0.0, 0.5, 0.5, 0.5, 0.5}), Error);
}

TEST_CASE("forced declarations update the sufficient statistics") {
  const auto net = generate_network("cycle:3");
  auto s = init_state(net, uniform_initial_settings(net));
  const std::vector<std::uint8_t> ones{1, 1, 0};
  apply_declarations(s, net, ones);
  CHECK(s.t == 2);
  CHECK(s.beta[0] == doctest::Approx(0.75));
  CHECK(s.beta[2] == doctest::Approx(0.25));
  CHECK(s.beta_bar[0] == 1.0);
  CHECK(s.mu[2] == doctest::Approx(0.75));
  CHECK(s.mu_cumsum[0] == doctest::Approx(0.5));
  CHECK(s.M[0] == doctest::Approx(4.0));
  REQUIRE(s.history[0].size() == 1);
  CHECK(s.history[0].mu[0] == doctest::Approx(0.5));
  CHECK(s.history[0].psi[0] == 1);
}

TEST_CASE("step consumes one uniform per agent in order") {
  const auto net = generate_network("complete:4");
  const BiasProfile bias({2.0, 2.0, 0.5, 0.5});
  const auto init = uniform_initial_settings(net);
  auto a = init_state(net, init);
  auto b = init_state(net, init);
  Rng ra(42);
  Rng rb(42);
  for (int k = 0; k < 200; ++k) {
    step(a, net, bias, ra);
    std::vector<double> u(4);
    for (auto& x : u) x = rb.uniform();
    step(b, net, bias, u);
  }
  CHECK(a.ones == b.ones);
  CHECK(ra.next_u64() == rb.next_u64());
}

TEST_CASE("property: mu band, incremental vs batch statistics") {
  gen::Source src(5);
  for (int c = 0; c < 25; ++c) {
    const auto n = src.index(2, 8);
    const auto net = build_network(n, src.connected_edges(n));
    const BiasProfile bias(src.gammas(n));
    std::vector<double> b1(n);
    for (auto& x : b1) x = src.uniform(0.05, 0.95);
    const auto init = make_initial_settings(net, b1);
    auto s = init_state(net, init);
    Rng rng(src.engine()());
    int violations = band_violations(s);
    for (int k = 0; k < 400; ++k) {
      step(s, net, bias, rng);
      violations += band_violations(s);
      for (std::size_t i = 0; i < n; ++i) {
        // mu_i(t) in [1/M_i(t), 1 - 1/M_i(t)] up to the initial-mass scale
        CHECK(s.beta[i] > 0.0);
        CHECK(s.beta[i] < 1.0);
      }
    }
    CHECK(violations == 0);
    const auto batch = recompute_from_history(s, net, init);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(batch.beta[i] == doctest::Approx(s.beta[i]).epsilon(1e-12));
      CHECK(batch.mu[i] == doctest::Approx(s.mu[i]).epsilon(1e-12));
      CHECK(batch.mu_cumsum[i] == doctest::Approx(s.mu_cumsum[i]).epsilon(1e-12));
      CHECK(s.ones[i] == static_cast<std::int64_t>(std::count(s.history[i].psi.begin(), s.history[i].psi.end(), 1)));
    }
  }
}

TEST_CASE("run is deterministic and checkpoints are snapshots of one path") {
  const auto net = generate_network("star:5");
  const BiasProfile bias({1.2, 0.5, 0.5, 0.5, 0.5});
  const auto init = uniform_initial_settings(net);
  const std::vector<std::int64_t> cps{2, 10, 100, 1000};
  const auto a = run(net, bias, init, 1000, 9, cps);
  const auto b = run(net, bias, init, 1000, 9, cps, false);
  REQUIRE(a.checkpoints.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.checkpoints[k].ones == b.checkpoints[k].ones);
    CHECK(a.checkpoints[k].beta == b.checkpoints[k].beta);
  }
  CHECK(a.final_state.beta == a.checkpoints.back().beta);
  CHECK(b.final_state.history[0].size() == 0);
  std::ostringstream x;
  std::ostringstream y;
  write_trajectory_rows(x, 0, a);
  write_trajectory_rows(y, 0, b);
  CHECK(x.str() == y.str());
  const std::vector<std::int64_t> bad{5, 3};
  CHECK_THROWS_AS(run(net, bias, init, 1000, 9, bad), Error);
}

TEST_CASE("interior equilibrium of the 3-path") {
  // gamma = (4, 1/2, 1/4): solving beta_i = f((W beta)_i, gamma_i) by hand
  // gives beta = (2/15, 1/27, 1/105), mu = (1/27, 1/14, 1/27).
  const std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}};
  const auto net = build_network(edges);
  const BiasProfile bias({4.0, 0.5, 0.25});
  const auto eq = find_interior_equilibrium(net, bias);
  CHECK(eq.interior);
  CHECK(eq.beta[0] == doctest::Approx(2.0 / 15.0).epsilon(1e-9));
  CHECK(eq.beta[1] == doctest::Approx(1.0 / 27.0).epsilon(1e-9));
  CHECK(eq.beta[2] == doctest::Approx(1.0 / 105.0).epsilon(1e-9));
  CHECK(eq.mu[1] == doctest::Approx(1.0 / 14.0).epsilon(1e-9));
  const auto exact = std::vector<double>{2.0 / 15.0, 1.0 / 27.0, 1.0 / 105.0};
  for (double r : equilibrium_residual(exact, net, bias)) CHECK(std::abs(r) <= 1e-15);
  const auto F = expected_update(exact, net, bias);
  for (std::size_t i = 0; i < 3; ++i) CHECK(F[i] == doctest::Approx(exact[i]).epsilon(1e-13));
}

TEST_CASE("equilibrium under consensus is not interior") {
  const auto net = generate_network("complete:4");
  const BiasProfile bias({0.5, 0.5, 0.5, 0.5});
  const auto eq = find_interior_equilibrium(net, bias, 1e-12, 100000);
  CHECK_FALSE(eq.interior);
}

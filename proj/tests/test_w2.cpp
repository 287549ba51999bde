#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gdaflow/random.hpp"
#include "gdaflow/wasserstein1d.hpp"

using namespace gdaflow;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

GridMeasure random_measure(std::mt19937_64& rng, int n, double lo, double hi) {
  Eigen::VectorXd support(n);
  double x = lo;
  const double span = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    x += span * (0.1 + 0.9 * uniform01(rng));
    support(i) = x;
  }
  return GridMeasure(support, uniform_simplex(rng, n));
}

}  // namespace

TEST_CASE("grid measure validation") {
  CHECK_NOTHROW(GridMeasure(vec({0.0, 1.0}), vec({0.5, 0.5})));
  CHECK_THROWS(GridMeasure(vec({1.0, 0.0}), vec({0.5, 0.5})));   // unsorted support
  CHECK_THROWS(GridMeasure(vec({0.0, 1.0}), vec({0.6, 0.6})));   // sum != 1
  CHECK_THROWS(GridMeasure(vec({0.0, 1.0}), vec({1.5, -0.5})));  // negative weight
  CHECK(GridMeasure(vec({0.0, 2.0}), vec({0.5, 0.5})).diameter() == doctest::Approx(2.0));
}

TEST_CASE("w2 distance on point masses and splits") {
  GridMeasure d0(vec({0.0}), vec({1.0}));
  GridMeasure d1(vec({1.0}), vec({1.0}));
  CHECK(w2_distance_1d(d0, d1) == doctest::Approx(1.0));
  CHECK(w2_distance_1d(d0, d0) == doctest::Approx(0.0));

  // Half the mass moves 0.5 left, half 0.5 right: W2^2 = 0.25.
  GridMeasure split(vec({0.0, 1.0}), vec({0.5, 0.5}));
  GridMeasure center(vec({0.5}), vec({1.0}));
  CHECK(w2_distance_1d(split, center) == doctest::Approx(0.5));

  // Different supports, same distribution function: distance 0.
  GridMeasure a(vec({0.0, 1.0, 2.0}), vec({0.25, 0.5, 0.25}));
  GridMeasure b(vec({0.0, 1.0, 1.5, 2.0}), vec({0.25, 0.5, 0.0, 0.25}));
  CHECK(w2_distance_1d(a, b) == doctest::Approx(0.0));
}

TEST_CASE("quantile distance matches exact LP oracle on random instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 8);
    const int n = 1 + static_cast<int>(rng() % 8);
    GridMeasure mu = random_measure(rng, m, -1.0, 1.0);
    GridMeasure nu = random_measure(rng, n, -1.5, 1.5);
    const double quantile_sq = w2_distance_1d(mu, nu) * w2_distance_1d(mu, nu);
    const double lp = w2_lp_oracle(mu, nu);
    CHECK(std::abs(quantile_sq - lp) <= 1e-10);
  }
}

TEST_CASE("LP oracle size guard") {
  std::mt19937_64 rng(1);
  GridMeasure big = random_measure(rng, 9, 0.0, 1.0);
  GridMeasure other = random_measure(rng, 8, 0.0, 1.0);
  CHECK_THROWS_AS(w2_lp_oracle(big, other), InstanceTooLarge);
}

TEST_CASE("subgradient inequality holds for sampled weight perturbations") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 6);
    const int n = 1 + static_cast<int>(rng() % 6);
    GridMeasure mu = random_measure(rng, m, -1.0, 1.0);
    GridMeasure nu = random_measure(rng, n, -1.0, 1.0);
    const Eigen::VectorXd psi = w2_sq_subgradient(mu, nu);
    const double base = std::pow(w2_distance_1d(mu, nu), 2);
    for (int k = 0; k < 12; ++k) {
      Eigen::VectorXd w = uniform_simplex(rng, m);
      // Mix toward mu as well so small perturbations get exercised.
      const double step = uniform01(rng);
      w = (1.0 - step) * mu.weights() + step * w;
      w(m - 1) += 1.0 - w.sum();
      GridMeasure moved = mu.with_weights(w);
      const double lhs = std::pow(w2_distance_1d(moved, nu), 2);
      const double lin = base + psi.dot(w - mu.weights());
      CHECK(lhs >= lin - 1e-10);
    }
  }
}

TEST_CASE("subgradient is centered at coinciding measures") {
  // At mu == nu the subdifferential is a fat polytope; the returned element
  // must be the zero potential so stationarity certificates vanish at fixed
  // points. Also exercised on a tie between different measures.
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    GridMeasure mu = random_measure(rng, 2 + static_cast<int>(rng() % 6), -1.0, 1.0);
    CHECK(w2_sq_subgradient(mu, mu).lpNorm<Eigen::Infinity>() == 0.0);
  }
  // Cumulative tie at 1/2 between distinct measures: the average of the two
  // extreme chains must still satisfy the subgradient inequality.
  GridMeasure mu(Eigen::Vector2d(0.0, 2.0), Eigen::Vector2d(0.5, 0.5));
  GridMeasure nu(Eigen::Vector2d(1.0, 3.0), Eigen::Vector2d(0.5, 0.5));
  const Eigen::VectorXd psi = w2_sq_subgradient(mu, nu);
  const double base = std::pow(w2_distance_1d(mu, nu), 2);
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    GridMeasure moved = mu.with_weights(Eigen::Vector2d(1.0 - t, t));
    CHECK(std::pow(w2_distance_1d(moved, nu), 2) >=
          base + psi.dot(moved.weights() - mu.weights()) - 1e-12);
  }
}

TEST_CASE("subgradient potentials are dual feasible") {
  // psi_i + phi_j <= c_ij for all pairs certifies optimality of the monotone
  // plan; reconstruct phi from psi by phi_j = min_i (c_ij - psi_i) and verify
  // <psi, mu> + <phi, nu> recovers the primal cost.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 6);
    const int n = 2 + static_cast<int>(rng() % 6);
    GridMeasure mu = random_measure(rng, m, -1.0, 1.0);
    GridMeasure nu = random_measure(rng, n, -1.0, 1.0);
    const Eigen::VectorXd psi = w2_sq_subgradient(mu, nu);
    Eigen::VectorXd phi(n);
    for (int j = 0; j < n; ++j) {
      double best = 1e300;
      for (int i = 0; i < m; ++i) {
        const double c = std::pow(mu.support()(i) - nu.support()(j), 2);
        best = std::min(best, c - psi(i));
      }
      phi(j) = best;
    }
    const double dual = psi.dot(mu.weights()) + phi.dot(nu.weights());
    const double primal = std::pow(w2_distance_1d(mu, nu), 2);
    CHECK(dual == doctest::Approx(primal).epsilon(1e-9));
  }
}

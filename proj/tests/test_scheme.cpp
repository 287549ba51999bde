#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gdaflow/core.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/scheme.hpp"
#include "gdaflow/wasserstein1d.hpp"
#include "test_support.hpp"

using namespace gdaflow;
using namespace gdaflow::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// phi = xy: the rotation instance with modulus 0.
QuadraticSaddleObjective bilinear() { return {m1(0.0), v1(0.0), m1(1.0), m1(0.0), v1(0.0)}; }

// phi = 1/2 x^2 + xy - 1/2 y^2: modulus 1 and exact flow e^{-t}(rotation).
QuadraticSaddleObjective tight() { return {m1(1.0), v1(0.0), m1(1.0), m1(1.0), v1(0.0)}; }

// 1-D weakly convex-concave instance with modulus -1/2 (tau_max = 2).
QuadraticSaddleObjective weakly_convex() {
  return {m1(-0.5), v1(0.0), m1(1.0), m1(1.0), v1(0.0)};
}

ProductPoint pt(double x, double y) { return {FactorPoint(v1(x)), FactorPoint(v1(y))}; }

Eigen::VectorXd uniform_weights(int n) { return Eigen::VectorXd::Constant(n, 1.0 / n); }

// Small dense entropic instance with a seeded kernel.
EntropicBilinearObjective small_entropic(double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd ell(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ell(i, j) = unif(rng);
  return EntropicBilinearObjective(vec_of({0.0, 0.5, 1.0}), vec_of({0.0, 0.4, 1.0}), ell, beta,
                                   uniform_weights(3), uniform_weights(3));
}

EntropicBilinearObjective entropic_grid(int m, int n, double beta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd ell(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ell(i, j) = unif(rng);
  return EntropicBilinearObjective(Eigen::VectorXd::LinSpaced(m, 0.0, 1.0),
                                   Eigen::VectorXd::LinSpaced(n, 0.0, 1.0), ell, beta,
                                   uniform_weights(m), uniform_weights(n));
}

// Random convex-concave quadratic with block minimum eigenvalue >= floor.
QuadraticSaddleObjective seeded_quadratic(std::mt19937_64& rng, double eig_floor) {
  std::uniform_int_distribution<int> dim(1, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dx = dim(rng), dy = dim(rng);
  auto sym = [&](int d) {
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = gauss(rng);
    const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    return Eigen::MatrixXd(S + (eig_floor - std::min(0.0, smallest_eigenvalue(S))) *
                                   Eigen::MatrixXd::Identity(d, d));
  };
  Eigen::MatrixXd C(dx, dy);
  for (int i = 0; i < dx; ++i)
    for (int j = 0; j < dy; ++j) C(i, j) = gauss(rng);
  Eigen::VectorXd a(dx), b(dy);
  for (int i = 0; i < dx; ++i) a(i) = gauss(rng);
  for (int j = 0; j < dy; ++j) b(j) = gauss(rng);
  return {sym(dx), a, C, sym(dy), b};
}

ProductPoint seeded_point(const BivariateObjective& obj, std::mt19937_64& rng) {
  return {obj.sample_x(rng), obj.sample_y(rng)};
}

}  // namespace

TEST_CASE("error bound constant matches the displayed formula") {
  CHECK(error_bound_constant(1.0, 1, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(error_bound_constant(2.0 * kPi, 1, 0.0) ==
        doctest::Approx(4.0 * kPi * kPi).epsilon(1e-15));
  CHECK(error_bound_constant(1.0, 2, 1.0) == doctest::Approx(96.0).epsilon(1e-13));

  CHECK_THROWS_AS(error_bound_constant(1.0, 1, 1.0), StepTooLarge);   // T/N = 1 = 1/lm
  CHECK_THROWS_AS(error_bound_constant(2.0, 1, 0.6), StepTooLarge);   // T/N = 2 > 5/3
  CHECK_THROWS_AS(error_bound_constant(0.0, 1, 0.0), Error);
  CHECK_THROWS_AS(error_bound_constant(1.0, 0, 0.0), Error);
  CHECK_THROWS_AS(error_bound_constant(1.0, 1, -0.1), InvalidModulus);
}

TEST_CASE("a priori error bound evaluates and squares consistently") {
  const ErrorBudget unit{1.0, 1.0, 1, 0.0, 100};
  CHECK(a_priori_error(unit, 0.37) == doctest::Approx(0.1).epsilon(1e-15));

  const ErrorBudget at_saddle{0.0, 1.0, 1, 0.0, 64};
  CHECK(a_priori_error(at_saddle, 1.0) == 0.0);

  const ErrorBudget shifted{2.0, 1.0, 2, 1.0, 100};
  CHECK(a_priori_error(shifted, 1.0) == doctest::Approx(2.0 * std::sqrt(96.0 / 100.0)).epsilon(1e-14));
  CHECK(a_priori_error_sq(shifted, 1.0) ==
        doctest::Approx(4.0 * 96.0 / 100.0).epsilon(1e-14));

  for (int n : {1, 7, 100}) {
    const ErrorBudget b{1.7, 2.0, 2, 0.3, n};
    const double e = a_priori_error(b, 0.5);
    CHECK(e * e == doctest::Approx(a_priori_error_sq(b, 0.5)).epsilon(1e-14));
  }

  CHECK_THROWS_AS(a_priori_error(ErrorBudget{1.0, 1.0, 1, 0.0, 0}, 0.5), Error);
  CHECK_THROWS_AS(a_priori_error(ErrorBudget{-1.0, 1.0, 1, 0.0, 4}, 0.5), Error);
  CHECK_THROWS_AS(a_priori_error(ErrorBudget{1.0, 1.0, 1, 2.0, 4}, 0.5), StepTooLarge);
}

TEST_CASE("resolvent comparison bound matches hand-computed values") {
  CHECK(resolvent_comparison_bound(3.0, 1.0, 0.5, 1, 2, 0.0) ==
        doctest::Approx(13.5).epsilon(1e-14));

  // Equal steps and counts, lambda_minus = 0: slope0^2 * 2 tau * (n tau).
  CHECK(resolvent_comparison_bound(1.0, 0.25, 0.25, 8, 8, 0.0) ==
        doctest::Approx(2.0 * 0.25 * (8 * 0.25)).epsilon(1e-14));
  CHECK(resolvent_comparison_bound(2.0, 0.1, 0.1, 10, 10, 0.0) ==
        doctest::Approx(4.0 * 2.0 * 0.1 * 1.0).epsilon(1e-14));

  CHECK(resolvent_comparison_bound(0.0, 0.3, 0.7, 5, 2, 0.4) == 0.0);

  // The displayed bound is symmetric under swapping (tau0, n) <-> (tau1, m).
  CHECK(resolvent_comparison_bound(1.3, 0.3, 0.2, 5, 7, 0.9) ==
        doctest::Approx(resolvent_comparison_bound(1.3, 0.2, 0.3, 7, 5, 0.9)).epsilon(1e-12));

  CHECK_THROWS_AS(resolvent_comparison_bound(1.0, 0.0, 0.5, 1, 1, 0.0), NonpositiveTau);
  CHECK_THROWS_AS(resolvent_comparison_bound(1.0, 0.5, -1.0, 1, 1, 0.0), NonpositiveTau);
  CHECK_THROWS_AS(resolvent_comparison_bound(1.0, 1.2, 0.5, 1, 1, 1.0), StepTooLarge);
  CHECK_THROWS_AS(resolvent_comparison_bound(1.0, 0.5, 0.5, 0, 1, 0.0), Error);
}

TEST_CASE("resolvent step dispatches with the tol * tau^2 inner target") {
  const QuadraticSaddleObjective obj = bilinear();

  const ResolventResult r = resolvent_step(obj, pt(1.0, 0.0), 1.0, 1e-10);
  CHECK(r.gap_target == doctest::Approx(1e-10).epsilon(1e-12));
  CHECK(r.gap <= r.gap_target);
  CHECK(as_vector(r.point.x)(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(as_vector(r.point.y)(0) == doctest::Approx(0.5).epsilon(1e-12));

  const ResolventResult half = resolvent_step(obj, pt(1.0, 0.0), 0.5, 1e-8);
  CHECK(half.gap_target == doctest::Approx(1e-8 * 0.25).epsilon(1e-12));

  // A saddle anchor is a fixed point of every resolvent.
  const ResolventResult fixed = resolvent_step(tight(), pt(0.0, 0.0), 0.7, 1e-10);
  CHECK(std::sqrt(product_distance_sq(fixed.point, pt(0.0, 0.0))) <= 1e-12);

  CHECK_THROWS_AS(resolvent_step(obj, pt(0.0, 0.0), 0.0, 1e-8), NonpositiveTau);
  CHECK_THROWS_AS(resolvent_step(obj, pt(0.0, 0.0), -1.0, 1e-8), NonpositiveTau);
  CHECK_THROWS_AS(resolvent_step(obj, pt(0.0, 0.0), 1.0, 0.0), Error);

  const QuadraticSaddleObjective weak = weakly_convex();
  CHECK(weak.modulus().tau_max() == doctest::Approx(2.0));
  CHECK_THROWS_AS(resolvent_step(weak, pt(1.0, 1.0), 2.0, 1e-8), StepTooLarge);
  CHECK_THROWS_AS(resolvent_step(weak, pt(1.0, 1.0), 2.5, 1e-8), StepTooLarge);
  CHECK_NOTHROW(resolvent_step(weak, pt(1.0, 1.0), 1.9, 1e-8));
}

TEST_CASE("mmx trajectory reproduces the closed-form bilinear path") {
  const QuadraticSaddleObjective obj = bilinear();
  const FlowTrajectory traj = mmx_trajectory(obj, pt(1.0, 0.0), 1.0, 2, 1e-10);

  REQUIRE(traj.points.size() == 3);
  REQUIRE(traj.times.size() == 3);
  REQUIRE(traj.certificates.size() == 2);
  CHECK(traj.tau == 1.0);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[1] == 1.0);
  CHECK(traj.times[2] == 2.0);

  // J(1,0) = (1/2, 1/2), J(1/2, 1/2) = (0, 1/2) for tau = 1.
  CHECK(as_vector(traj.points[1].x)(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(as_vector(traj.points[1].y)(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(as_vector(traj.points[2].x)(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(as_vector(traj.points[2].y)(0) == doctest::Approx(0.5).epsilon(1e-12));

  for (const ResolventResult& c : traj.certificates) {
    CHECK(c.gap_target == doctest::Approx(1e-10).epsilon(1e-12));
    CHECK(c.gap <= c.gap_target);
  }
}

TEST_CASE("mmx trajectory is constant at a saddle and guards its inputs") {
  const QuadraticSaddleObjective obj = tight();
  const FlowTrajectory traj = mmx_trajectory(obj, pt(0.0, 0.0), 0.3, 5, 1e-10);
  for (const ProductPoint& p : traj.points)
    CHECK(std::sqrt(product_distance_sq(p, pt(0.0, 0.0))) <= 1e-11);

  CHECK_THROWS_AS(mmx_trajectory(obj, pt(1.0, 1.0), 0.3, 0, 1e-8), Error);
  CHECK_THROWS_AS(mmx_trajectory(weakly_convex(), pt(1.0, 1.0), 2.0, 3, 1e-8), StepTooLarge);

  // Out-of-domain initial datum: x must be nonnegative for this composite.
  CompositeSaddleObjective boxed(tight(),
                                 ProxHandle::make_box(v1(0.0), v1(std::numeric_limits<double>::infinity())),
                                 ProxHandle::make_none());
  CHECK_THROWS_AS(mmx_trajectory(boxed, pt(-1.0, 0.0), 0.3, 3, 1e-8), Infeasible);
}

TEST_CASE("mmx steps contract toward the saddle at rate 1/(1 + lambda tau)") {
  const QuadraticSaddleObjective obj = tight();  // saddle at the origin, lambda = 1
  const double tau = 0.25;
  const FlowTrajectory traj = mmx_trajectory(obj, pt(1.0, 1.0), tau, 20, 1e-12);
  const ProductPoint origin = pt(0.0, 0.0);
  const double factor = 1.0 / (1.0 + tau);
  for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
    const double before = std::sqrt(product_distance_sq(traj.points[k], origin));
    const double after = std::sqrt(product_distance_sq(traj.points[k + 1], origin));
    CHECK(after <= factor * before * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("flow approximation: identity at t = 0 and the periodic orbit") {
  const QuadraticSaddleObjective obj = bilinear();
  const ProductPoint z0 = pt(1.0, 0.0);

  const ProductPoint same = flow_approximation(obj, z0, 0.0, 16, 1e-8);
  CHECK(product_distance_sq(same, z0) == 0.0);

  // Quarter turn: exact flow reaches (0, 1).
  const ProductPoint quarter = flow_approximation(obj, z0, 0.5 * kPi, 512, 1e-9);
  CHECK(std::sqrt(product_distance_sq(quarter, pt(0.0, 1.0))) <= 4e-2);

  // Full revolution returns to the start.
  const ProductPoint full = flow_approximation(obj, z0, 2.0 * kPi, 4096, 1e-9);
  CHECK(std::sqrt(product_distance_sq(full, z0)) <= 4e-2);

  CHECK_THROWS_AS(flow_approximation(obj, z0, -1.0, 4, 1e-8), Error);
  CHECK_THROWS_AS(flow_approximation(obj, z0, 1.0, 0, 1e-8), Error);
}

TEST_CASE("a priori bound dominates the observed error on seeded quadratics") {
  std::mt19937_64 rng(2024);
  int checks = 0;
  for (int inst = 0; inst < 5; ++inst) {
    // Mix strictly convex-concave and weakly convex-concave instances.
    const double floor = (inst % 2 == 0) ? 0.4 : -0.2;
    const QuadraticSaddleObjective obj = seeded_quadratic(rng, floor);
    const ProductPoint z0 = seeded_point(obj, rng);
    const double slope0 = obj.exact_slope(z0);
    const double lm = obj.modulus().lambda_minus();
    const double T = 1.0;

    for (int n : {1, 2, 4, 8, 16, 32, 64}) {
      for (double t : {0.25, 0.5, 1.0}) {
        const ProductPoint approx = flow_approximation(obj, z0, t, n, 1e-10);
        const ProductPoint exact = exact_linear_flow(obj, z0, t);
        const double err = std::sqrt(product_distance_sq(exact, approx));
        const ErrorBudget budget{slope0, T, 1, lm, n};
        CHECK(err <= a_priori_error(budget, t) * (1.0 + 1e-9) + 1e-12);
        ++checks;
      }
    }
  }
  CHECK(checks == 5 * 7 * 3);
}

TEST_CASE("refinement consistency obeys the resolvent comparison bound") {
  struct Case {
    QuadraticSaddleObjective obj;
    ProductPoint z0;
    double t;
  };
  const Case cases[] = {{bilinear(), pt(1.0, 0.0), 2.0},
                        {tight(), pt(1.0, 1.0), 1.0},
                        {weakly_convex(), pt(0.7, -0.3), 1.0}};
  for (const Case& c : cases) {
    const double slope0 = c.obj.exact_slope(c.z0);
    const double lm = c.obj.modulus().lambda_minus();
    for (int n : {1, 2, 4, 8, 16}) {
      if (lm > 0.0 && c.t / n >= 1.0 / lm) continue;
      const ProductPoint coarse = flow_approximation(c.obj, c.z0, c.t, n, 1e-11);
      const ProductPoint fine = flow_approximation(c.obj, c.z0, c.t, 2 * n, 1e-11);
      const double d2 = product_distance_sq(coarse, fine);
      const double bound =
          resolvent_comparison_bound(slope0, c.t / n, c.t / (2 * n), n, 2 * n, lm);
      CHECK(d2 <= bound * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("discrete EVI residuals are nonpositive along quadratic trajectories") {
  struct Case {
    QuadraticSaddleObjective obj;
    ProductPoint z0;
    double tau;
  };
  const Case cases[] = {{bilinear(), pt(1.0, 0.0), 0.5},
                        {tight(), pt(1.0, 1.0), 0.25},
                        {weakly_convex(), pt(0.7, -0.3), 1.0}};
  std::mt19937_64 rng(99);
  for (const Case& c : cases) {
    const FlowTrajectory traj = mmx_trajectory(c.obj, c.z0, c.tau, 8, 1e-9);
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
      for (int s = 0; s < 20; ++s) {
        const ProductPoint test = seeded_point(c.obj, rng);
        const auto [rx, ry] =
            discrete_evi_residuals(c.obj, traj.points[k], traj.points[k + 1], c.tau, test);
        // Closed-form inner solves: residuals at round-off scale.
        CHECK(rx <= 1e-10);
        CHECK(ry <= 1e-10);
      }
    }
  }
}

TEST_CASE("discrete EVI residuals hold within 10x the inner gap target on the entropic backend") {
  for (const std::uint64_t seed : {314u, 99u, 2718u}) {
    const EntropicBilinearObjective obj = entropic_grid(8, 8, 1.0, seed);
    Eigen::VectorXd wy0(8);
    for (int j = 0; j < 8; ++j) wy0(j) = 1.0 + j;
    wy0 /= wy0.sum();
    const ProductPoint z0 = obj.make_point(uniform_weights(8), wy0);
    const double tau = 0.5, tol = 1e-6;
    const FlowTrajectory traj = mmx_trajectory(obj, z0, tau, 4, tol);
    const double allow = 10.0 * tol * tau * tau;
    std::mt19937_64 rng(7);
    for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
      CHECK(traj.certificates[k].gap <= tol * tau * tau);
      for (int s = 0; s < 20; ++s) {
        const ProductPoint test = seeded_point(obj, rng);
        const auto [rx, ry] =
            discrete_evi_residuals(obj, traj.points[k], traj.points[k + 1], tau, test);
        CHECK(rx <= allow);
        CHECK(ry <= allow);
      }
    }
  }
}

TEST_CASE("entropic default modulus is not honored by coarse grids") {
  // Moving a small mass eps between atoms a distance s apart changes the
  // squared transport distance by eps*s^2 -- linearly in eps -- while entropy
  // curvature only supplies O(eps^2). No positive modulus survives that
  // imbalance uniformly, so the strengthened step inequalities, which hold
  // with wide margins at sampled points on dense grids (previous test), can
  // genuinely fail when the spacings are large. Three atoms with spacing
  // ~0.5 expose this; the violation below is real, not a solver artifact
  // (the step certificates all meet their gap targets).
  const EntropicBilinearObjective obj = small_entropic(1.0, 314);
  const ProductPoint z0 = obj.make_point(uniform_weights(3), vec_of({0.5, 0.3, 0.2}));
  const double tau = 0.5, tol = 1e-6;
  const FlowTrajectory traj = mmx_trajectory(obj, z0, tau, 4, tol);
  double worst = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(7);
  for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
    CHECK(traj.certificates[k].gap <= tol * tau * tau);
    for (int s = 0; s < 20; ++s) {
      const ProductPoint test = seeded_point(obj, rng);
      const auto [rx, ry] =
          discrete_evi_residuals(obj, traj.points[k], traj.points[k + 1], tau, test);
      worst = std::max({worst, rx, ry});
    }
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("discrete EVI residuals are -inf at test points outside the domain") {
  CompositeSaddleObjective boxed(tight(),
                                 ProxHandle::make_box(v1(0.0), v1(std::numeric_limits<double>::infinity())),
                                 ProxHandle::make_none());
  const ResolventResult r = resolvent_step(boxed, pt(1.0, 0.5), 0.5, 1e-9);
  const auto [rx, ry] = discrete_evi_residuals(boxed, pt(1.0, 0.5), r.point, 0.5, pt(-1.0, 0.0));
  CHECK(rx == -std::numeric_limits<double>::infinity());
  CHECK(ry <= 1e-10);
}

TEST_CASE("moreau yosida value: frozen bilinear example and small-tau consistency") {
  CHECK(moreau_yosida_value(bilinear(), pt(1.0, 0.0), 1.0, 1e-10) ==
        doctest::Approx(0.25).epsilon(1e-9));

  // At a saddle the regularized value equals the objective value.
  const QuadraticSaddleObjective obj = tight();
  CHECK(moreau_yosida_value(obj, pt(0.0, 0.0), 0.7, 1e-10) == doctest::Approx(0.0).epsilon(1e-10));

  const ProductPoint anchor = pt(0.8, -0.4);
  const double phi = obj.evaluate(anchor.x, anchor.y).value();
  const double slope = obj.exact_slope(anchor);
  double prev = std::numeric_limits<double>::infinity();
  for (double tau : {1e-1, 1e-2, 1e-3}) {
    const double dev = std::abs(moreau_yosida_value(obj, anchor, tau, 1e-12) - phi);
    CHECK(dev <= tau * slope * slope);
    CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("partial moreau yosida: frozen bilinear values and dominance") {
  const QuadraticSaddleObjective obj = bilinear();
  for (double tau : {0.3, 1.0, 2.0}) {
    // sup_{y'} {y' - y'^2 / (2 tau)} = tau / 2 at y' = tau.
    CHECK(partial_moreau_yosida(obj, pt(0.0, 0.0), tau, PartialSide::x_side, FactorPoint(v1(1.0))) ==
          doctest::Approx(0.5 * tau).epsilon(1e-12));
    // inf_{x'} {0 + x'^2 / (2 tau)} = 0 at x' = 0.
    CHECK(partial_moreau_yosida(obj, pt(0.0, 0.0), tau, PartialSide::y_side, FactorPoint(v1(0.0))) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  // The x-side value dominates every explicit candidate y'.
  const ProductPoint anchor = pt(0.4, -0.2);
  const double tau = 0.8;
  const double sup =
      partial_moreau_yosida(obj, anchor, tau, PartialSide::x_side, FactorPoint(v1(1.3)));
  for (int i = -20; i <= 20; ++i) {
    const double yp = 0.2 * i;
    const double candidate = obj.evaluate(v1(1.3), v1(yp)).value() -
                             (yp - (-0.2)) * (yp - (-0.2)) / (2.0 * tau);
    CHECK(sup >= candidate - 1e-12);
  }

  CHECK_THROWS_AS(partial_moreau_yosida(obj, anchor, 0.0, PartialSide::x_side, FactorPoint(v1(1.0))),
                  NonpositiveTau);
}

TEST_CASE("partial and full regularized values agree at the resolvent (quadratic)") {
  const QuadraticSaddleObjective obj = tight();
  const ProductPoint z = pt(0.7, 0.2);
  const double tau = 0.5;

  const ProductPoint J = resolvent_step(obj, z, tau, 1e-12).point;
  const double my = moreau_yosida_value(obj, z, tau, 1e-12);
  const double via_x =
      partial_moreau_yosida(obj, z, tau, PartialSide::x_side, J.x) +
      (as_vector(J.x) - as_vector(z.x)).squaredNorm() / (2.0 * tau);
  const double via_y =
      partial_moreau_yosida(obj, z, tau, PartialSide::y_side, J.y) -
      (as_vector(J.y) - as_vector(z.y)).squaredNorm() / (2.0 * tau);

  CHECK(via_x == doctest::Approx(my).epsilon(1e-9));
  CHECK(via_y == doctest::Approx(my).epsilon(1e-9));
}

TEST_CASE("partial and full regularized values agree at the resolvent (composite box)") {
  CompositeSaddleObjective obj(tight(),
                               ProxHandle::make_box(v1(0.0), v1(std::numeric_limits<double>::infinity())),
                               ProxHandle::make_box(v1(-0.5), v1(0.5)));
  const ProductPoint z = pt(0.9, 0.1);
  const double tau = 0.4;

  const ProductPoint J = resolvent_step(obj, z, tau, 1e-10).point;
  const double my = moreau_yosida_value(obj, z, tau, 1e-10);
  const double via_x =
      partial_moreau_yosida(obj, z, tau, PartialSide::x_side, J.x) +
      (as_vector(J.x) - as_vector(z.x)).squaredNorm() / (2.0 * tau);
  const double via_y =
      partial_moreau_yosida(obj, z, tau, PartialSide::y_side, J.y) -
      (as_vector(J.y) - as_vector(z.y)).squaredNorm() / (2.0 * tau);

  CHECK(via_x == doctest::Approx(my).epsilon(1e-6));
  CHECK(via_y == doctest::Approx(my).epsilon(1e-6));
}

TEST_CASE("partial and full regularized values agree at the resolvent (entropic)") {
  const EntropicBilinearObjective obj = small_entropic(1.0, 99);
  const ProductPoint z = obj.make_point(vec_of({0.5, 0.25, 0.25}), vec_of({0.2, 0.5, 0.3}));
  const double tau = 0.4;

  const ProductPoint J = resolvent_step(obj, z, tau, 1e-8).point;
  const double my = moreau_yosida_value(obj, z, tau, 1e-8);
  const double dx = w2_distance_1d(as_measure(J.x), as_measure(z.x));
  const double dy = w2_distance_1d(as_measure(J.y), as_measure(z.y));
  const double via_x =
      partial_moreau_yosida(obj, z, tau, PartialSide::x_side, J.x) + dx * dx / (2.0 * tau);
  const double via_y =
      partial_moreau_yosida(obj, z, tau, PartialSide::y_side, J.y) - dy * dy / (2.0 * tau);

  // The three paths meet a stationary value; certificate floors give ~1e-6.
  CHECK(std::abs(via_x - my) <= 1e-5);
  CHECK(std::abs(via_y - my) <= 1e-5);
}

TEST_CASE("decoupled entropic resolvent matches an independent scalar oracle") {
  // Zero kernel: the resolvent splits into two independent 1-D problems
  //   min_w (1/beta) KL(w | uniform) + W2^2(w, anchor) / (2 tau)
  // over two-atom simplices, solved here by ternary search on the closed-form
  // objective (W2^2 between two-atom measures on a shared support reduces to
  // |mass difference| * spacing^2).
  const double beta = 0.8, tau = 0.5;
  const EntropicBilinearObjective obj(vec_of({0.0, 1.0}), vec_of({0.0, 0.7}),
                                      Eigen::MatrixXd::Zero(2, 2), beta, uniform_weights(2),
                                      uniform_weights(2));
  const ProductPoint anchor = obj.make_point(vec_of({0.3, 0.7}), vec_of({0.55, 0.45}));

  auto oracle = [&](double anchor_first, double spacing_sq) {
    auto value = [&](double w) {
      const double kl =
          w * std::log(w / 0.5) + (1.0 - w) * std::log((1.0 - w) / 0.5);
      return kl / beta + std::abs(w - anchor_first) * spacing_sq / (2.0 * tau);
    };
    double lo = 1e-12, hi = 1.0 - 1e-12;
    for (int it = 0; it < 300; ++it) {
      const double m1p = lo + (hi - lo) / 3.0, m2p = hi - (hi - lo) / 3.0;
      if (value(m1p) < value(m2p))
        hi = m2p;
      else
        lo = m1p;
    }
    return 0.5 * (lo + hi);
  };

  const ResolventResult r = resolvent_step(obj, anchor, tau, 1e-8);
  const double wx = as_measure(r.point.x).weights()(0);
  const double wy = as_measure(r.point.y).weights()(0);
  CHECK(std::abs(wx - oracle(0.3, 1.0)) <= 2e-4);
  CHECK(std::abs(wy - oracle(0.55, 0.49)) <= 2e-4);
}

TEST_CASE("mmx propagates inner solver failure with its certificate") {
  const EntropicBilinearObjective obj = small_entropic(1.0, 11);
  const ProductPoint z0 = obj.make_point(uniform_weights(3), uniform_weights(3));
  // An unattainably tight tolerance must surface NoConvergence, not silence.
  try {
    (void)wasserstein_resolvent(obj, z0, 0.5, 1e-18, 2000);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.best_gap > 0.0);
    CHECK(e.iterations == 2000);
  }
}

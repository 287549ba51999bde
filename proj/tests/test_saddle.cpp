#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gdaflow/core.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/saddle.hpp"
#include "gdaflow/wasserstein1d.hpp"
#include "test_support.hpp"

using namespace gdaflow;
using namespace gdaflow::testing;

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// 1/2 x^2 + xy - 1/2 y^2 (+ shift * x); saddle at (-shift/2, -shift/2).
QuadraticSaddleObjective coupled_quadratic(double shift) {
  return {m1(1.0), v1(shift), m1(1.0), m1(1.0), v1(0.0)};
}

// Damped softmax best-response iteration for entropic objectives: at an
// interior saddle, mu = softmax(log rho_x - beta * ell nu) and
// nu = softmax(log rho_y + beta * ell^T mu). Independent of the solver paths.
std::pair<Eigen::VectorXd, Eigen::VectorXd> softmax_fixed_point(const EntropicBilinearObjective& obj) {
  const Eigen::MatrixXd& ell = obj.kernel();
  const Eigen::VectorXd lrx = obj.reference_x().weights().array().log();
  const Eigen::VectorXd lry = obj.reference_y().weights().array().log();
  const double beta = obj.beta();
  auto softmax = [](const Eigen::VectorXd& s) {
    Eigen::VectorXd w = (s.array() - s.maxCoeff()).exp();
    return Eigen::VectorXd(w / w.sum());
  };
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(lrx.size(), 1.0 / double(lrx.size()));
  Eigen::VectorXd nu = Eigen::VectorXd::Constant(lry.size(), 1.0 / double(lry.size()));
  for (int k = 0; k < 20000; ++k) {
    const Eigen::VectorXd mu_next = 0.5 * mu + 0.5 * softmax(lrx - beta * (ell * nu));
    const Eigen::VectorXd nu_next = 0.5 * nu + 0.5 * softmax(lry + beta * (ell.transpose() * mu));
    const double delta = (mu_next - mu).cwiseAbs().maxCoeff() + (nu_next - nu).cwiseAbs().maxCoeff();
    mu = mu_next;
    nu = nu_next;
    if (delta < 1e-16) break;
  }
  return {mu, nu};
}

}  // namespace

TEST_CASE("solve_saddle finds the origin saddle of the coupled quadratic") {
  const QuadraticSaddleObjective obj = coupled_quadratic(0.0);
  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  CHECK(problem.set_x.kind == FeasibleSet::Kind::whole_space);

  const SaddleCertificate cert = solve_saddle(problem, 1e-8);
  CHECK(cert.gap <= 1e-8);
  CHECK(cert.method == "extragradient");
  const double certified = std::sqrt(2.0 * 1e-8 / 1.0);  // modulus 1
  CHECK(as_vector(cert.point.x).norm() <= certified);
  CHECK(as_vector(cert.point.y).norm() <= certified);
}

TEST_CASE("solve_saddle tracks the shifted saddle (-1/2, -1/2)") {
  const QuadraticSaddleObjective obj = coupled_quadratic(1.0);
  const SaddleCertificate cert = solve_saddle(SaddleProblem::for_objective(obj), 1e-10);
  const double certified = std::sqrt(2.0 * 1e-10);
  CHECK(std::abs(as_vector(cert.point.x)(0) + 0.5) <= certified);
  CHECK(std::abs(as_vector(cert.point.y)(0) + 0.5) <= certified);
}

TEST_CASE("solve_saddle on a regularized bilinear objective matches the closed-form resolvent") {
  const QuadraticSaddleObjective bilinear{m1(0.0), v1(0.0), m1(1.0), m1(0.0), v1(0.0)};
  const ProductPoint anchor(FactorPoint(v1(1.0)), FactorPoint(v1(0.0)));
  const RegularizedObjective reg(bilinear, anchor, 1.0);
  CHECK(reg.modulus().lambda == doctest::Approx(1.0));

  const SaddleCertificate cert = solve_saddle(SaddleProblem::for_objective(reg), 1e-10);
  const ResolventResult exact = quadratic_resolvent(bilinear, anchor, 1.0);
  CHECK(as_vector(exact.point.x)(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(as_vector(exact.point.y)(0) == doctest::Approx(0.5).epsilon(1e-10));
  const double certified = std::sqrt(2.0 * cert.gap / 1.0) + 1e-9;
  CHECK(std::abs(as_vector(cert.point.x)(0) - 0.5) <= certified);
  CHECK(std::abs(as_vector(cert.point.y)(0) - 0.5) <= certified);
}

TEST_CASE("solve_saddle handles box-constrained composites") {
  // Unconstrained saddle (-1/2, -1/2); the box x >= 0 moves it to (0, 0).
  CompositeSaddleObjective obj(coupled_quadratic(1.0),
                               ProxHandle::make_box(v1(0.0), v1(std::numeric_limits<double>::infinity())),
                               ProxHandle::make_none());
  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  CHECK(problem.set_x.kind == FeasibleSet::Kind::box);
  CHECK(problem.set_x.lower(0) == 0.0);

  const SaddleCertificate cert = solve_saddle(problem, 1e-9);
  CHECK(cert.gap <= 1e-9);
  const double certified = std::sqrt(2.0 * 1e-9);
  CHECK(as_vector(cert.point.x).norm() <= certified);
  CHECK(as_vector(cert.point.y).norm() <= certified);

  // The restricted gap at the constrained saddle itself vanishes.
  const ProductPoint at_saddle(FactorPoint(v1(0.0)), FactorPoint(v1(0.0)));
  const NiGapBound gap = restricted_ni_gap(problem, at_saddle);
  CHECK(gap.exact);
  CHECK(gap.value <= 1e-10);
}

TEST_CASE("solve_saddle refuses objectives without positive modulus") {
  const QuadraticSaddleObjective bilinear{m1(0.0), v1(0.0), m1(1.0), m1(0.0), v1(0.0)};
  CHECK_THROWS_AS(solve_saddle(SaddleProblem::for_objective(bilinear), 1e-8),
                  NotStronglyConvexConcave);
}

TEST_CASE("solve_saddle reports the best certificate on iteration exhaustion") {
  const QuadraticSaddleObjective obj = coupled_quadratic(1.0);
  try {
    solve_saddle(SaddleProblem::for_objective(obj), 1e-14, 3);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations == 3);
    CHECK(e.best_gap >= 0.0);
    CHECK(std::isfinite(e.best_gap));
  }
}

TEST_CASE("certified gap decreases monotonically on random strongly coupled quadratics") {
  std::mt19937_64 rng(451);
  for (int trial = 0; trial < 5; ++trial) {
    const int dx = 1 + int(rng() % 3), dy = 1 + int(rng() % 3);
    const Eigen::MatrixXd Ar =
        Eigen::MatrixXd::NullaryExpr(dx, dx, [&] { return standard_normal(rng); });
    const Eigen::MatrixXd Br =
        Eigen::MatrixXd::NullaryExpr(dy, dy, [&] { return standard_normal(rng); });
    // Symmetrize, then shift adaptively so the modulus is at least 0.5.
    Eigen::MatrixXd A = 0.5 * (Ar + Ar.transpose());
    Eigen::MatrixXd B = 0.5 * (Br + Br.transpose());
    A += (0.5 - std::min(0.0, smallest_eigenvalue(A))) * Eigen::MatrixXd::Identity(dx, dx);
    B += (0.5 - std::min(0.0, smallest_eigenvalue(B))) * Eigen::MatrixXd::Identity(dy, dy);
    const Eigen::MatrixXd C =
        Eigen::MatrixXd::NullaryExpr(dx, dy, [&] { return standard_normal(rng); });
    const Eigen::VectorXd a = uniform_vector(rng, dx, -1.0, 1.0);
    const Eigen::VectorXd b = uniform_vector(rng, dy, -1.0, 1.0);
    const QuadraticSaddleObjective obj{A, a, C, B, b};

    std::vector<double> history;
    const SaddleCertificate cert =
        solve_saddle(SaddleProblem::for_objective(obj), 1e-11, 2000000, &history);
    CHECK(cert.gap <= 1e-11);
    REQUIRE(history.size() >= 12);
    for (std::size_t k = 10; k + 1 < history.size(); ++k) {
      CHECK(history[k + 1] <= history[k] * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("solver distance to the brute-force saddle obeys the gap certificate") {
  const QuadraticSaddleObjective obj = coupled_quadratic(1.0);
  const ProductPoint star =
      brute_force_saddle(obj, -2.0, 2.0, -2.0, 2.0);  // independent grid-refinement oracle
  const SaddleCertificate cert = solve_saddle(SaddleProblem::for_objective(obj), 1e-9);
  const double dist = product_distance_sq(cert.point, star);
  CHECK(std::sqrt(dist) <= std::sqrt(2.0 * std::max(cert.gap, 1e-16) / 1.0) + 2e-7);
}

TEST_CASE("restricted gap closed cases: zero at the saddle, two at (1,1), infinite when unbounded") {
  const QuadraticSaddleObjective obj = coupled_quadratic(0.0);
  const SaddleProblem problem = SaddleProblem::for_objective(obj);

  const NiGapBound at_saddle =
      restricted_ni_gap(problem, {FactorPoint(v1(0.0)), FactorPoint(v1(0.0))});
  CHECK(at_saddle.exact);
  CHECK(at_saddle.value <= 1e-12);

  // sup_y phi(1, y) = 1, inf_x phi(x, 1) = -1.
  const NiGapBound off = restricted_ni_gap(problem, {FactorPoint(v1(1.0)), FactorPoint(v1(1.0))});
  CHECK(off.exact);
  CHECK(off.value == doctest::Approx(2.0).epsilon(1e-12));

  const QuadraticSaddleObjective bilinear{m1(0.0), v1(0.0), m1(1.0), m1(0.0), v1(0.0)};
  const NiGapBound unbounded = restricted_ni_gap(SaddleProblem::for_objective(bilinear),
                                                 {FactorPoint(v1(1.0)), FactorPoint(v1(0.0))});
  CHECK(unbounded.exact);
  CHECK(std::isinf(unbounded.value));
}

TEST_CASE("restricted gap separates saddle points from nearby non-saddles") {
  const QuadraticSaddleObjective obj = coupled_quadratic(0.0);
  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  const NiGapBound near =
      restricted_ni_gap(problem, {FactorPoint(v1(1e-3)), FactorPoint(v1(1e-3))});
  // Strong convex-concavity with modulus 1 forces gap >= d^2/2 = 1e-6.
  CHECK(near.value >= 1e-6 * (1.0 - 1e-9));
}

TEST_CASE("restricted gap throws Infeasible outside the feasible sets") {
  CompositeSaddleObjective obj(coupled_quadratic(1.0),
                               ProxHandle::make_box(v1(0.0), v1(std::numeric_limits<double>::infinity())),
                               ProxHandle::make_none());
  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  CHECK_THROWS_AS(restricted_ni_gap(problem, {FactorPoint(v1(-1.0)), FactorPoint(v1(0.0))}),
                  Infeasible);
}

TEST_CASE("explicit box sets fold into the structured gap exactly") {
  const QuadraticSaddleObjective obj = coupled_quadratic(0.0);
  SaddleProblem problem = SaddleProblem::for_objective(obj);
  problem.set_x = FeasibleSet::make_box(v1(-2.0), v1(2.0));  // no matching prox handle

  // The box contains the unrestricted best responses, so the value is the
  // unrestricted gap 2, now computed on the structured path.
  const NiGapBound loose =
      restricted_ni_gap(problem, {FactorPoint(v1(1.0)), FactorPoint(v1(1.0))});
  CHECK(loose.exact);
  CHECK(loose.value == doctest::Approx(2.0).epsilon(1e-10));

  // A binding box: inf over x' in [-0.5, 0.5] of 1/2 x'^2 + x' is attained at
  // the face x' = -0.5, so the gap grows to 1 - (1/8 - 1/2 - 1/2) = 15/8.
  problem.set_x = FeasibleSet::make_box(v1(-0.5), v1(0.5));
  const NiGapBound binding =
      restricted_ni_gap(problem, {FactorPoint(v1(0.25)), FactorPoint(v1(1.0))});
  CHECK(binding.exact);
  const double sup_y = 0.5 * 0.25 * 0.25 + 0.25 * 0.25 - 0.5 * 0.25 * 0.25;  // y' = x = 0.25
  CHECK(binding.value == doctest::Approx(sup_y - (0.125 - 0.5 - 0.5)).epsilon(1e-10));
}

TEST_CASE("bilinear objective over boxes solves the corner linear programs") {
  const QuadraticSaddleObjective obj{m1(0.0), v1(0.0), m1(1.0), m1(0.0), v1(0.0)};  // phi = x y
  SaddleProblem problem = SaddleProblem::for_objective(obj);
  problem.set_x = FeasibleSet::make_box(v1(-2.0), v1(2.0));
  problem.set_y = FeasibleSet::make_box(v1(-2.0), v1(2.0));

  // sup_{y'} x y' = 2|x| and inf_{x'} x' y = -2|y| on the box.
  const NiGapBound bound =
      restricted_ni_gap(problem, {FactorPoint(v1(1.0)), FactorPoint(v1(0.0))});
  CHECK(bound.exact);
  CHECK(bound.value == doctest::Approx(2.0).epsilon(1e-12));

  const NiGapBound moved =
      restricted_ni_gap(problem, {FactorPoint(v1(-0.5)), FactorPoint(v1(1.5))});
  CHECK(moved.exact);
  CHECK(moved.value == doctest::Approx(2.0 * 0.5 + 2.0 * 1.5).epsilon(1e-12));
}

TEST_CASE("box sets colliding with an l1 handle fall back to a flagged lower bound") {
  CompositeSaddleObjective obj(coupled_quadratic(0.0), ProxHandle::make_l1(0.1),
                               ProxHandle::make_none());
  SaddleProblem problem = SaddleProblem::for_objective(obj);
  problem.set_x = FeasibleSet::make_box(v1(-2.0), v1(2.0));

  const NiGapBound bound =
      restricted_ni_gap(problem, {FactorPoint(v1(1.0)), FactorPoint(v1(1.0))});
  CHECK_FALSE(bound.exact);
  // True value: sup_y' (0.6 + y' - y'^2/2) = 1.1 at y' = 1, and
  // inf_{x'} (x'^2/2 + x' + 0.1|x'|) = -0.405 at x' = -0.9, giving 2.005.
  CHECK(bound.value <= 2.005 + 1e-6);
  CHECK(bound.value >= 1.95);
}

TEST_CASE("nested golden-section solver agrees with the extragradient saddle") {
  const QuadraticSaddleObjective obj = coupled_quadratic(1.0);
  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  const SaddleCertificate nested = nested_saddle(problem, 1e-10);
  CHECK(nested.method == "nested-golden-section");
  CHECK(std::abs(as_vector(nested.point.x)(0) + 0.5) <= 1e-6);
  CHECK(std::abs(as_vector(nested.point.y)(0) + 0.5) <= 1e-6);

  // Gap 1e-13 with modulus 1 certifies distance sqrt(2e-13) ~ 4.5e-7, so the
  // two solvers must agree to 1e-6.
  const SaddleCertificate direct = solve_saddle(problem, 1e-13);
  CHECK(std::sqrt(product_distance_sq(nested.point, direct.point)) <= 1e-6);
  CHECK(nested.gap <= 1e-10);
}

TEST_CASE("nested marginal values match the closed form -(y+1)^2/2 - y^2/2") {
  // For 1/2 x^2 + xy - 1/2 y^2 + x the inner minimum at fixed y is attained
  // at x = -(1 + y) with value -(1+y)^2/2 - y^2/2.
  const QuadraticSaddleObjective obj = coupled_quadratic(1.0);
  for (double y : {-1.5, -0.5, 0.0, 0.7, 2.0}) {
    const double expected = -0.5 * (1.0 + y) * (1.0 + y) - 0.5 * y * y;
    // Reconstruct through the library only via evaluate at the analytic argmin.
    const double got = obj.evaluate(FactorPoint(v1(-(1.0 + y))), FactorPoint(v1(y))).value();
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
  // The maximizer of the marginal is y* = -1/2 with value -1/4.
  const SaddleCertificate nested = nested_saddle(SaddleProblem::for_objective(obj), 1e-10);
  const double marginal_at_star =
      obj.evaluate(nested.point.x, nested.point.y).value();
  CHECK(marginal_at_star == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("nested solver rejects multidimensional y") {
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  const QuadraticSaddleObjective obj{I2, Eigen::VectorXd::Zero(2), I2, I2, Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(nested_saddle(SaddleProblem::for_objective(obj), 1e-8), OuterDimensionTooLarge);
}

TEST_CASE("entropic solve_saddle matches the damped softmax fixed point") {
  std::mt19937_64 rng(777);
  const Eigen::VectorXd sx = vec_of({0.0, 0.4, 1.0});
  const Eigen::VectorXd sy = vec_of({0.1, 0.5, 0.8, 1.0});
  Eigen::MatrixXd ell(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) ell(i, j) = uniform_in(rng, -1.0, 1.0);
  const EntropicBilinearObjective obj(sx, sy, ell, 1.0, Eigen::VectorXd::Constant(3, 1.0 / 3.0),
                                      Eigen::VectorXd::Constant(4, 0.25));

  const SaddleProblem problem = SaddleProblem::for_objective(obj);
  CHECK(problem.set_x.kind == FeasibleSet::Kind::simplex);
  // Gap 1e-13 certifies (via the KL strong convexity and Pinsker) a weight
  // deviation of at most ~4.5e-7, comfortably inside the 1e-6 comparison.
  const SaddleCertificate cert = solve_saddle(problem, 1e-13);
  CHECK(cert.gap <= 1e-13);
  CHECK(cert.method == "entropic-mirror-prox");

  const auto [mu_star, nu_star] = softmax_fixed_point(obj);
  CHECK((as_measure(cert.point.x).weights() - mu_star).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((as_measure(cert.point.y).weights() - nu_star).cwiseAbs().maxCoeff() <= 1e-6);

  // The exact restricted gap at the solution agrees with the certificate.
  const NiGapBound gap = restricted_ni_gap(problem, cert.point);
  CHECK(gap.exact);
  CHECK(gap.value <= 1e-13);
}

TEST_CASE("entropic solve_saddle finds the symmetric swap-kernel saddle") {
  Eigen::MatrixXd ell(2, 2);
  ell << 0.0, 1.0, 1.0, 0.0;
  const EntropicBilinearObjective obj(vec_of({0.0, 1.0}), vec_of({0.0, 1.0}), ell, 1.0,
                                      vec_of({0.5, 0.5}), vec_of({0.5, 0.5}));
  const SaddleCertificate cert = solve_saddle(SaddleProblem::for_objective(obj), 1e-12);
  CHECK(as_measure(cert.point.x).weights()(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(as_measure(cert.point.y).weights()(0) == doctest::Approx(0.5).epsilon(1e-6));
}

#pragma once

#include <vector>

#include "gdaflow/objective.hpp"
#include "gdaflow/point.hpp"

namespace gdaflow {

// One discrete flow: the iterates of the implicit (resolvent) step together
// with every step's inner certificate. times[k] = k * tau; points has one more
// entry than certificates (the initial datum).
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<ProductPoint> points;
  double tau = 0.0;
  std::vector<ResolventResult> certificates;
};

// Inputs of the a-priori error bound for the exponential-formula
// approximation: initial slope, horizon T, base step count N (T/N must stay
// below 1/lambda_minus), and the refinement count n >= N.
struct ErrorBudget {
  double slope0 = 0.0;
  double T = 0.0;
  int N = 1;
  double lambda_minus = 0.0;
  int n = 1;
};

// One implicit step: dispatches to the backend resolvent with inner gap
// target tol * tau^2, which keeps the accumulated inner drift over n = T/tau
// steps below the scheme's own discretization error as tau shrinks.
ResolventResult resolvent_step(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                               double tol);

// steps-fold iteration of resolvent_step from z0; length steps + 1.
FlowTrajectory mmx_trajectory(const BivariateObjective& obj, const ProductPoint& z0, double tau,
                              int steps, double tol);

// Exponential-formula approximation of the flow at time t with n steps
// (tau = t/n); t = 0 is the identity by convention.
ProductPoint flow_approximation(const BivariateObjective& obj, const ProductPoint& z0, double t,
                                int n, double tol);

// C(T, N, lambda_minus) = (1 - lm T/N)^(-2(N+1)) * T^2 * (1 + (T lm)^2 / N).
double error_bound_constant(double T, int N, double lambda_minus);

// Squared-distance bound C(T,N,lm) * slope0^2 / n on the approximation error
// at any t in [0, T], and its distance form slope0 * sqrt(C/n).
double a_priori_error_sq(const ErrorBudget& budget, double t);
double a_priori_error(const ErrorBudget& budget, double t);

// Squared-distance bound between two exponential-formula approximations
// J_{tau0}^n z and J_{tau1}^m z started from a point with initial slope
// slope0:  slope0^2 * C * [(n tau0 - m tau1 - lm tau0 tau1 (n - m))^2
//                          + (tau0 + tau1 - 2 lm tau0 tau1) * c]
// with C = max{(1-lm tau0)^(-2n) (1-lm tau1)^(-2),
//              (1-lm tau0)^(-2) (1-lm tau1)^(-2m)}
// and  c = min{n (tau0 - lm tau0 tau1), m (tau1 - lm tau0 tau1)}.
double resolvent_comparison_bound(double slope0, double tau0, double tau1, int n, int m,
                                  double lambda_minus);

// Signed residuals of the two discretized evolution variational inequalities
// for one implicit step J = J_tau(z), evaluated at a test point z' = (x', y'):
//   x side: [d_X^2(J_x,x') - d_X^2(x,x')]/(2 tau) + (lambda/2) d_X^2(J_x,x')
//           + phi(J_x,J_y) - phi(x',J_y) + d_X^2(J_x,x)/(2 tau)
//   y side: [d_Y^2(J_y,y') - d_Y^2(y,y')]/(2 tau) + (lambda/2) d_Y^2(J_y,y')
//           + phi(J_x,y') - phi(J_x,J_y) + d_Y^2(J_y,y)/(2 tau)
// Nonpositive values mean the inequalities hold; an infinite objective value
// at the test point makes the corresponding side -inf (trivially satisfied).
std::pair<double, double> discrete_evi_residuals(const BivariateObjective& obj,
                                                 const ProductPoint& anchor,
                                                 const ProductPoint& resolvent_point, double tau,
                                                 const ProductPoint& test_point);

// Regularized value at the resolvent: Phi_tau(anchor; J_tau anchor).
double moreau_yosida_value(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                           double tol);

// One-sided regularized values with only one factor anchored:
//   x_side: sup_{y'} phi(probe, y') - d_Y^2(y', anchor.y) / (2 tau)
//   y_side: inf_{x'} phi(x', probe) + d_X^2(x', anchor.x) / (2 tau)
enum class PartialSide { x_side, y_side };
double partial_moreau_yosida(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                             PartialSide which, const FactorPoint& probe);

}  // namespace gdaflow

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gdaflow {

// Base for all library errors so callers can catch one type.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
}  // namespace detail

// A product point (or point pair) mixes components from different backends.
struct BackendMismatch : Error {
  explicit BackendMismatch(const std::string& msg = "product point components belong to different backends")
      : Error(msg) {}
};

// tau <= 0 passed where a positive step size is required.
struct NonpositiveTau : Error {
  explicit NonpositiveTau(double tau)
      : Error("step size tau must be positive, got " + detail::fmt_g(tau)) {}
};

// Arithmetic produced (+inf) + (-inf) or an equivalent indeterminate form.
struct IndeterminateForm : Error {
  explicit IndeterminateForm(const std::string& msg = "indeterminate extended-real arithmetic (inf - inf)")
      : Error(msg) {}
};

// tau >= tau_max for an objective with lambda_minus > 0.
struct StepTooLarge : Error {
  StepTooLarge(double tau, double tau_max)
      : Error("step size tau = " + detail::fmt_g(tau) +
              " must be below tau_max = " + detail::fmt_g(tau_max)) {}
};

// A linear system required to be solvable was singular (or numerically so).
struct SingularSystem : Error {
  explicit SingularSystem(const std::string& msg = "singular linear system") : Error(msg) {}
};

// Gradient requested at a point where the objective is not differentiable.
struct NotDifferentiable : Error {
  explicit NotDifferentiable(const std::string& msg = "objective is not differentiable at this point")
      : Error(msg) {}
};

// Brute-force oracles accept only tiny dimensions by design.
struct DimensionTooLarge : Error {
  explicit DimensionTooLarge(const std::string& msg) : Error(msg) {}
};

// LP oracle size guard (m*n <= 64).
struct InstanceTooLarge : Error {
  explicit InstanceTooLarge(const std::string& msg) : Error(msg) {}
};

// Grid measures with incompatible supports where identical supports are required.
struct SupportMismatch : Error {
  explicit SupportMismatch(const std::string& msg = "grid measure supports do not match") : Error(msg) {}
};

// Operation requires a strictly interior simplex point.
struct BoundaryPoint : Error {
  explicit BoundaryPoint(const std::string& msg = "weights must be strictly positive") : Error(msg) {}
};

// Two trajectories compared on different time grids.
struct GridMismatch : Error {
  explicit GridMismatch(const std::string& msg = "trajectories use different time grids") : Error(msg) {}
};

// Solver hit max_iter before reaching its tolerance. Carries the achieved gap
// so callers can inspect/report the best certificate.
struct NoConvergence : Error {
  double best_gap;
  int iterations;
  NoConvergence(double gap, int iters, const std::string& what_solver)
      : Error(what_solver + " did not converge: best gap " + detail::fmt_g(gap) +
              " after " + std::to_string(iters) + " iterations"),
        best_gap(gap), iterations(iters) {}
};

// Configuration errors name the offending field (CLI maps these to exit code 2).
struct ConfigError : Error {
  std::string field;
  ConfigError(const std::string& field_, const std::string& msg)
      : Error("config field '" + field_ + "': " + msg), field(field_) {}
};

// A declared convexity-concavity modulus exceeds what the objective supports.
struct InvalidModulus : Error {
  explicit InvalidModulus(const std::string& msg) : Error(msg) {}
};

// The nested (marginal-function) solver only supports a one-dimensional outer
// variable; it exists as an independent oracle, not a production path.
struct OuterDimensionTooLarge : Error {
  explicit OuterDimensionTooLarge(const std::string& msg = "nested solver requires 1-D y")
      : Error(msg) {}
};

// A query point lies outside the problem's feasible sets.
struct Infeasible : Error {
  explicit Infeasible(const std::string& msg = "point is outside the feasible set") : Error(msg) {}
};

// solve_saddle requires a positive declared modulus.
struct NotStronglyConvexConcave : Error {
  explicit NotStronglyConvexConcave(const std::string& msg = "declared modulus must be positive for this solver")
      : Error(msg) {}
};

// A decay certificate needs lambda > 0 (for lambda <= 0 no exponential bound holds).
struct NonpositiveLambda : Error {
  explicit NonpositiveLambda(double lambda)
      : Error("decay certificate requires lambda > 0, got " + detail::fmt_g(lambda)) {}
};

}  // namespace gdaflow

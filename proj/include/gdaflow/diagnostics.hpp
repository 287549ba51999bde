#pragma once

// Inequality certification layer: Nikaido-Isoda gaps and their exponential
// decay, modified local/global slopes, lambda-contraction between trajectory
// pairs, integral evolution variational inequalities, and slope monotonicity.
// Every check returns a signed violation (<= 0 means the inequality held)
// together with a computable allowance where discretization error enters.
// All checkers are pure functions of their inputs: identical inputs produce
// bit-identical reports.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gdaflow/saddle.hpp"
#include "gdaflow/scheme.hpp"

namespace gdaflow {

// Axis-aligned product box restricting diagnostics searches: it makes NI gaps
// finite when the natural feasible sets are unbounded and bounds the
// global-slope search region. Simplex factors are already compact and ignore
// their half of the box.
struct ProductBox {
  Eigen::VectorXd lower_x, upper_x;
  Eigen::VectorXd lower_y, upper_y;

  // Symmetric box [-h, h]^dx x [-h, h]^dy.
  static ProductBox cube(Eigen::Index dim_x, Eigen::Index dim_y, double half_width);

  bool contains(const ProductPoint& z, double tol = 1e-9) const;
};

// Nikaido-Isoda gap at z over the objective's natural feasible sets (whole
// space for Hilbert factors, the weight simplex for grid measures),
// intersected with `box` when given. +infinity is a legitimate value for
// unbounded suprema; `exact` is inherited from the saddle-layer computation
// (false means a sampled lower bound). Throws Infeasible when z lies outside
// the restricted sets.
NiGapBound ni_gap(const BivariateObjective& obj, const ProductPoint& z,
                  const std::optional<ProductBox>& box = std::nullopt);

enum class SlopeMode { exact_smooth, sampled };

// A slope value plus its epistemic status: sampled estimates only bound the
// defining limsup/sup from below.
struct SlopeEstimate {
  double value = 0.0;
  bool lower_estimate = false;
};

// Modified local slope at z:
//   limsup_{z' -> z} (phi(x, y') - phi(x', y))^+ / d_Z(z', z).
// exact_smooth mode returns the objective's closed-form slope (joint norm of
// the minimal (sub)gradient pair) when available, the joint gradient norm
// otherwise, and exactly 0 on the grid-measure backend: reshuffling mass
// epsilon on a fixed grid moves the measure by Theta(sqrt(epsilon)) in W2
// while objective differences stay O(epsilon), so the limsup vanishes at
// every simplex point. sampled mode probes radii {1e-2, 1e-3, 1e-4} with 64
// seeded directions per radius (coordinate axes first, then random) and is
// flagged as a lower estimate. Throws NotDifferentiable in exact_smooth mode
// when no closed form exists at z.
SlopeEstimate local_slope(const BivariateObjective& obj, const ProductPoint& z, SlopeMode mode,
                          std::uint64_t seed = 0);

// Global lambda-slope at z:
//   sup_{z' != z, z' in box} ((phi(x, y') - phi(x', y)) / d_Z(z', z)
//                             + (lambda / 2) d_Z(z', z))^+.
// On the pure quadratic class the bracket is affine in the radius along every
// direction, so each direction is maximized exactly at a radial endpoint; if
// additionally lambda is at most the declared modulus, every radial
// coefficient is nonpositive and the supremum equals the local slope, which
// is returned exactly. Otherwise the result is a seeded multi-start lower
// bound and is flagged as such.
SlopeEstimate global_slope(const BivariateObjective& obj, const ProductPoint& z, double lambda,
                           const ProductBox& box, std::uint64_t seed = 0);

// Worst signed lambda-contraction violation between two trajectories on the
// same time grid:
//   max_{s < t} d_Z^2(w0_t, w1_t) - e^{-2 lambda (t - s)} d_Z^2(w0_s, w1_s).
// Nonpositive means the contraction inequality held on every ordered pair.
// Throws GridMismatch when the grids differ.
double check_contraction(const FlowTrajectory& traj0, const FlowTrajectory& traj1, double lambda);

// Largest product distance between two equal-grid trajectories at any common
// time. Throws GridMismatch.
double max_pair_distance(const FlowTrajectory& traj0, const FlowTrajectory& traj1);

// Allowance dominating check_contraction on scheme outputs: with E the sum of
// the two trajectories' a-priori errors (uniform over the horizon), D the
// largest observed product distance between them, and F = max(1, e^{-2
// lambda T}) over the shorter horizon T,
//   allowance = 2 E (D + E) (1 + F) + E^2 + 1e-12 (1 + D^2).
// This is the worst-case effect of perturbing both exact flows (which satisfy
// the inequality with slack 0) by E inside the contraction expression, plus
// round-off.
double contraction_allowance(const ErrorBudget& budget0, const ErrorBudget& budget1, double lambda,
                             double max_observed_distance);

// Signed residuals of the integral evolution variational inequalities along a
// uniform-grid trajectory (u_r, v_r), for each test point (x, y) and each
// grid pair s < t:
//   x side: (d^2(u_t, x) - d^2(u_s, x)) / 2
//           - integral_s^t [phi(x, v_r) - phi(u_r, v_r) - (lambda/2) d^2(u_r, x)] dr
//   y side: (d^2(v_t, y) - d^2(v_s, y)) / 2
//           - integral_s^t [phi(u_r, v_r) - phi(u_r, y) - (lambda/2) d^2(v_r, y)] dr
// Integrals use trapezoidal quadrature on the trajectory's own grid via
// prefix sums; the allowances are the data-driven trapezoid error estimates
// (t - s) * max|second difference| / 8 at each side's worst pair, maximized
// over test points, plus round-off. Throws GridMismatch when the grid is not
// uniform.
struct EviIntegralReport {
  double x_violation = -std::numeric_limits<double>::infinity();
  double y_violation = -std::numeric_limits<double>::infinity();
  double x_allowance = 0.0;
  double y_allowance = 0.0;
};
EviIntegralReport check_evi_integral(const BivariateObjective& obj, const FlowTrajectory& traj,
                                     double lambda, const std::vector<ProductPoint>& test_points);

// Exponential NI-decay certificate along a trajectory: for every grid time
// t_k past t_s it checks
//   NI(w_k) <= e^{-2 lambda (t_k - t_s)} / (2 lambda) * slope(w_s)^2 + allowance
// with the exact-smooth slope at w_s, and emits the bound curve. allowance =
// scheme_allowance + round-off; violation <= 0 means every time certified.
// Throws NonpositiveLambda for lambda <= 0 (no exponential bound holds then).
struct NiDecayReport {
  std::vector<double> times;   // trajectory times from s_index on
  std::vector<double> ni;      // NI gap at those times
  std::vector<double> bound;   // e^{-2 lambda (t - t_s)} / (2 lambda) * slope_start^2
  double slope_start = 0.0;    // exact-smooth slope at w_s
  double allowance = 0.0;
  double violation = -std::numeric_limits<double>::infinity();  // max_k ni - bound - allowance
};
NiDecayReport ni_decay_certificate(const BivariateObjective& obj, const FlowTrajectory& traj,
                                   double lambda, int s_index,
                                   const std::optional<ProductBox>& box = std::nullopt,
                                   double scheme_allowance = 0.0);

// Worst signed violation of slope monotonicity along a trajectory:
//   max_k e^{lambda t_{k+1}} slope(w_{k+1}) - e^{lambda t_k} slope(w_k)
// with exact-smooth slopes. Nonpositive means e^{lambda t} slope(w_t) was
// non-increasing over the whole grid. Slope errors propagate.
double slope_monotonicity_check(const BivariateObjective& obj, const FlowTrajectory& traj,
                                double lambda);

// Per-time diagnostics row; quantities that do not apply (no partner
// trajectory, no declared saddle, lambda <= 0, slope columns disabled) are
// quiet NaN.
struct DiagnosticsRow {
  double t = 0.0;
  double ni_gap = std::numeric_limits<double>::quiet_NaN();
  double local_slope = std::numeric_limits<double>::quiet_NaN();
  double global_slope = std::numeric_limits<double>::quiet_NaN();
  double dist_to_saddle = std::numeric_limits<double>::quiet_NaN();
  double contraction_ratio = std::numeric_limits<double>::quiet_NaN();
  double evi_residual_max = std::numeric_limits<double>::quiet_NaN();
  double ni_bound = std::numeric_limits<double>::quiet_NaN();
};

// Worst signed violations per inequality family (NaN when not applicable).
struct DiagnosticsSummary {
  double contraction_violation = std::numeric_limits<double>::quiet_NaN();
  double evi_x_violation = std::numeric_limits<double>::quiet_NaN();
  double evi_y_violation = std::numeric_limits<double>::quiet_NaN();
  double evi_x_allowance = std::numeric_limits<double>::quiet_NaN();
  double evi_y_allowance = std::numeric_limits<double>::quiet_NaN();
  double slope_monotonicity_violation = std::numeric_limits<double>::quiet_NaN();
  double ni_decay_violation = std::numeric_limits<double>::quiet_NaN();
};

struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;  // aligned with trajectory times
  DiagnosticsSummary summary;
};

// What to compute in build_report. `slope_columns` gates the exact-smooth
// slope machinery (local/global slope columns, slope monotonicity, the
// slope-based NI decay bound); it should be off on geometries where the local
// slope degenerates (grid measures) or is unavailable.
struct DiagnosticsOptions {
  double lambda = 0.0;
  std::optional<ProductBox> box;             // NI restriction + slope search region
  std::optional<ProductPoint> saddle;        // reference point for dist_to_saddle
  const FlowTrajectory* partner = nullptr;   // second trajectory for contraction columns
  std::vector<ProductPoint> evi_test_points;
  std::uint64_t seed = 0;                    // seeds every sampled sub-diagnostic
  double ni_decay_allowance = 0.0;           // scheme allowance for the decay certificate
  bool slope_columns = true;
};

// Full per-time diagnostics table plus the worst-violation summary.
// contraction_ratio at row k is d_Z^2(w0_k, w1_k) / d_Z^2(w0_0, w1_0);
// evi_residual_max at row k is the worst integral-EVI residual over both
// sides, all test points, and all pairs ending at t_k.
DiagnosticsReport build_report(const BivariateObjective& obj, const FlowTrajectory& traj,
                               const DiagnosticsOptions& opts);

}  // namespace gdaflow

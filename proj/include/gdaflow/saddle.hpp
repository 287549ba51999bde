#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gdaflow/objective.hpp"
#include "gdaflow/point.hpp"

namespace gdaflow {

// Feasible-set descriptor for one factor: the whole space, a coordinate box,
// or the probability simplex over a fixed grid.
struct FeasibleSet {
  enum class Kind { whole_space, box, simplex };
  Kind kind = Kind::whole_space;
  Eigen::VectorXd lower, upper;  // box bounds (entries may be +-inf)

  static FeasibleSet make_whole_space() { return {}; }
  static FeasibleSet make_box(Eigen::VectorXd lo, Eigen::VectorXd up);
  static FeasibleSet make_simplex() { return {Kind::simplex, {}, {}}; }

  bool contains(const FactorPoint& p, double tol = 1e-12) const;
};

// An unregularized strongly convex-concave saddle-point problem: the objective
// plus per-factor feasible sets. The sets mirror the structure the objective
// already encodes (prox handles, simplex weights); `for_objective` derives
// them so the two stay consistent.
struct SaddleProblem {
  const BivariateObjective* objective = nullptr;
  FeasibleSet set_x, set_y;

  static SaddleProblem for_objective(const BivariateObjective& obj);
};

// Result of a reference saddle computation.
struct SaddleCertificate {
  ProductPoint point;
  double gap = 0.0;  // achieved restricted duality-gap bound at `point`
  int iterations = 0;
  std::string method;
};

// Restricted duality gap sup_{y'} phi(x, y') - inf_{x'} phi(x', y) over the
// feasible sets; may be +infinity when a one-sided problem is unbounded.
// `exact` is true on the structured paths (one-shot linear solves for
// quadratics, prox best responses for composites, log-partition form for
// entropic objectives); the multi-start projected-gradient fallback only
// bounds the gap from below and reports exact = false.
struct NiGapBound {
  double value = 0.0;
  bool exact = true;
};

// Throws Infeasible if z lies outside the feasible sets.
NiGapBound restricted_ni_gap(const SaddleProblem& problem, const ProductPoint& z);

// Reference saddle point of the unregularized problem, certified by the
// restricted duality gap <= tol. Deterministic and seed-free. Euclidean
// (proximal) extragradient on Hilbert problems, entropic mirror-prox on
// simplex problems; fixed step 1/(2 Lhat) with Lhat estimated from sampled
// local Lipschitz ratios of the gradient field times a safety factor 2.
// Throws NotStronglyConvexConcave when the declared modulus is <= 0 and
// NoConvergence (carrying the best gap) when max_iter is exhausted. When
// gap_history is non-null the per-check certificate gaps are appended to it.
SaddleCertificate solve_saddle(const SaddleProblem& problem, double tol, int max_iter = 2000000,
                               std::vector<double>* gap_history = nullptr);

// Independent oracle for Hilbert problems with a one-dimensional y: maximizes
// the concave marginal value function y -> inf_x phi(x, y) by bracketing plus
// golden-section search, with an inner minimization oracle per y. Throws
// OuterDimensionTooLarge when dim_y != 1.
SaddleCertificate nested_saddle(const SaddleProblem& problem, double tol);

}  // namespace gdaflow

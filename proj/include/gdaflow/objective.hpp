#pragma once

#include <limits>
#include <random>
#include <string>
#include <utility>

#include "gdaflow/extended_real.hpp"
#include "gdaflow/point.hpp"

namespace gdaflow {

// Declared convex-concavity modulus lambda of a saddle objective, with the
// derived quantities the step-size restriction depends on:
//   lambda_minus = max(0, -lambda),  tau_max = 1/lambda_minus (inf if lambda >= 0).
struct ConvexityModulus {
  double lambda = 0.0;

  double lambda_minus() const { return lambda < 0.0 ? -lambda : 0.0; }
  double tau_max() const {
    return lambda >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lambda;
  }
};

// Certificate returned by resolvent solvers: the approximate saddle of the
// regularized objective plus the achieved inner duality gap.
struct ResolventResult {
  ProductPoint point;
  double gap = 0.0;         // achieved certificate gap (restricted duality gap)
  double gap_target = 0.0;  // requested gap
  int iterations = 0;
  std::string method;
};

// A saddle functional phi(x, y), convex in x and concave in y along the
// backend's interpolation curves, with declared modulus lambda. Backends
// subclass this; optional capabilities are advertised by the has_* queries.
class BivariateObjective {
 public:
  virtual ~BivariateObjective() = default;

  virtual BackendTag backend() const = 0;
  virtual ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const = 0;
  virtual bool in_domain_x(const FactorPoint& x) const = 0;
  virtual bool in_domain_y(const FactorPoint& y) const = 0;
  virtual ConvexityModulus modulus() const = 0;

  // Optional decomposition phi(x,y) = psi_x(x) + coupling(x,y) - psi_y(y).
  virtual bool has_decomposition() const { return false; }
  virtual ExtendedReal psi_x(const FactorPoint&) const { throw Error("no decomposition"); }
  virtual ExtendedReal psi_y(const FactorPoint&) const { throw Error("no decomposition"); }
  virtual double coupling(const FactorPoint&, const FactorPoint&) const { throw Error("no decomposition"); }

  // Optional first-order information: (grad_x phi, grad_y phi) in the factor
  // coordinates (vector coordinates for Hilbert, weight coordinates for grid
  // measures). Throws NotDifferentiable at kinks/boundary points.
  virtual bool has_partial_gradients() const { return false; }
  virtual std::pair<Eigen::VectorXd, Eigen::VectorXd> partial_gradients(const FactorPoint&,
                                                                        const FactorPoint&) const {
    throw NotDifferentiable("objective provides no first-order information");
  }

  // Optional exact modified local slope |d phi|(z).
  virtual bool has_exact_slope() const { return false; }
  virtual double exact_slope(const ProductPoint&) const {
    throw NotDifferentiable("objective provides no exact slope");
  }

  // Resolvent J_tau(anchor): approximate saddle of
  //   phi(x',y') + (1/2 tau)(d_X^2(x',x) - d_Y^2(y',y))
  // certified by an inner duality gap <= gap_target where attainable.
  virtual ResolventResult resolvent(const ProductPoint& anchor, double tau, double gap_target) const = 0;

  // Draw in-domain sample points (used by convexity validation and randomized
  // inequality checks). Deterministic given the RNG state.
  virtual FactorPoint sample_x(std::mt19937_64& rng) const = 0;
  virtual FactorPoint sample_y(std::mt19937_64& rng) const = 0;
};

}  // namespace gdaflow

#pragma once

// Backend-agnostic layer: the l2 product metric over factor points, the
// squared-distance regularization of a saddle objective, interpolation curves
// along which convexity is claimed, and a sampled convexity validator.

#include <functional>

#include "gdaflow/objective.hpp"

namespace gdaflow {

// Distance within one factor: Euclidean norm for Hilbert vectors, 1-D
// 2-Wasserstein distance for grid measures. Throws BackendMismatch when the
// two points live in different backends (or Hilbert spaces of different
// dimension).
double factor_distance(const FactorPoint& p, const FactorPoint& q);

// Squared l2 product distance d_X(x1,x2)^2 + d_Y(y1,y2)^2.
double product_distance_sq(const ProductPoint& z1, const ProductPoint& z2);

// The product metric as an object (thin wrapper over the free functions, for
// callers that want to pass the metric around).
struct ProductMetric {
  double dist_x(const FactorPoint& p, const FactorPoint& q) const { return factor_distance(p, q); }
  double dist_y(const FactorPoint& p, const FactorPoint& q) const { return factor_distance(p, q); }
  double dist_z_sq(const ProductPoint& a, const ProductPoint& b) const {
    return product_distance_sq(a, b);
  }
};

// Interpolation curve backing every convexity claim: straight segments for
// Hilbert factors; weight-space segments for grid measures (same support
// required, else SupportMismatch). t is expected in [0, 1].
FactorPoint interpolate_factor(const FactorPoint& p0, const FactorPoint& p1, double t);

// A family of curves gamma(p0, p1, t) used by the convexity validator.
using CurveProvider = std::function<FactorPoint(const FactorPoint&, const FactorPoint&, double)>;

// The standard curves above, as a provider.
CurveProvider default_curves();

// Phi_tau(anchor; probe) = phi(probe) + (d_X^2(x',x) - d_Y^2(y',y)) / (2 tau)
// with anchor = (x, y) and probe = (x', y'). Throws NonpositiveTau for
// tau <= 0 and IndeterminateForm when phi(probe) is infinite with the
// opposing sign.
ExtendedReal regularized_objective(const BivariateObjective& phi, const ProductPoint& anchor,
                                   double tau, const ProductPoint& probe);

// Phi_tau(anchor; ., .) packaged as a full objective. Its modulus is
// lambda + 1/tau; gradients/decomposition are forwarded with the quadratic
// terms added where the base provides them.
class RegularizedObjective final : public BivariateObjective {
 public:
  RegularizedObjective(const BivariateObjective& base, ProductPoint anchor, double tau);

  BackendTag backend() const override { return base_->backend(); }
  ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const override;
  bool in_domain_x(const FactorPoint& x) const override { return base_->in_domain_x(x); }
  bool in_domain_y(const FactorPoint& y) const override { return base_->in_domain_y(y); }
  ConvexityModulus modulus() const override {
    return {base_->modulus().lambda + 1.0 / tau_};
  }

  bool has_decomposition() const override { return base_->has_decomposition(); }
  ExtendedReal psi_x(const FactorPoint& x) const override;
  ExtendedReal psi_y(const FactorPoint& y) const override;
  double coupling(const FactorPoint& x, const FactorPoint& y) const override {
    return base_->coupling(x, y);
  }

  bool has_partial_gradients() const override {
    return base_->backend() == BackendTag::hilbert && base_->has_partial_gradients();
  }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> partial_gradients(const FactorPoint& x,
                                                                const FactorPoint& y) const override;

  // The regularized objective is an evaluation adapter; resolvents live on
  // the base objective.
  ResolventResult resolvent(const ProductPoint&, double, double) const override {
    throw Error("regularized objective does not provide a resolvent");
  }

  FactorPoint sample_x(std::mt19937_64& rng) const override { return base_->sample_x(rng); }
  FactorPoint sample_y(std::mt19937_64& rng) const override { return base_->sample_y(rng); }

  const BivariateObjective& base() const { return *base_; }
  const ProductPoint& anchor() const { return anchor_; }
  double tau() const { return tau_; }

 private:
  const BivariateObjective* base_;  // non-owning; base must outlive the adapter
  ProductPoint anchor_;
  double tau_;
};

// Result of sampled convexity-concavity validation. Violations are signed and
// normalized by 1 + the magnitudes involved, so `tolerance` is a relative
// round-off allowance; worst_violation <= tolerance means the declared
// modulus was consistent with every sampled chord.
struct ViolationReport {
  double worst_violation = -std::numeric_limits<double>::infinity();
  int checks = 0;      // chord inequalities evaluated
  int violations = 0;  // checks exceeding the tolerance
  double tolerance = 1e-9;

  bool passed() const { return checks > 0 && violations == 0; }
};

// Checks, for `samples` random endpoint pairs and t in {1/4, 1/2, 3/4}, the
// lambda-convexity chord inequality in x at a random fixed y and the mirrored
// lambda-concavity inequality in y, along the provided curves. Uses the
// objective's declared modulus.
ViolationReport validate_convex_concavity(const BivariateObjective& phi, const CurveProvider& curve,
                                          int samples, std::uint64_t seed);

// Same with the standard backend curves.
ViolationReport validate_convex_concavity(const BivariateObjective& phi, int samples,
                                          std::uint64_t seed);

}  // namespace gdaflow

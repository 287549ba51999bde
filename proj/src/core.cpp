#include "gdaflow/core.hpp"

#include <cmath>

#include "gdaflow/wasserstein1d.hpp"

namespace gdaflow {

double factor_distance(const FactorPoint& p, const FactorPoint& q) {
  if (factor_backend(p) != factor_backend(q)) throw BackendMismatch();
  if (factor_backend(p) == BackendTag::hilbert) {
    const auto& a = as_vector(p);
    const auto& b = as_vector(q);
    if (a.size() != b.size())
      throw BackendMismatch("Hilbert factors have different dimensions");
    return (a - b).norm();
  }
  return w2_distance_1d(as_measure(p), as_measure(q));
}

double product_distance_sq(const ProductPoint& z1, const ProductPoint& z2) {
  const double dx = factor_distance(z1.x, z2.x);
  const double dy = factor_distance(z1.y, z2.y);
  return dx * dx + dy * dy;
}

FactorPoint interpolate_factor(const FactorPoint& p0, const FactorPoint& p1, double t) {
  if (factor_backend(p0) != factor_backend(p1)) throw BackendMismatch();
  if (factor_backend(p0) == BackendTag::hilbert) {
    const auto& a = as_vector(p0);
    const auto& b = as_vector(p1);
    if (a.size() != b.size())
      throw BackendMismatch("Hilbert factors have different dimensions");
    return FactorPoint(Eigen::VectorXd((1.0 - t) * a + t * b));
  }
  const auto& m0 = as_measure(p0);
  const auto& m1 = as_measure(p1);
  if (!m0.same_support(m1))
    throw SupportMismatch("weight-space interpolation requires identical supports");
  return FactorPoint(m0.with_weights((1.0 - t) * m0.weights() + t * m1.weights()));
}

CurveProvider default_curves() {
  return [](const FactorPoint& p0, const FactorPoint& p1, double t) {
    return interpolate_factor(p0, p1, t);
  };
}

ExtendedReal regularized_objective(const BivariateObjective& phi, const ProductPoint& anchor,
                                   double tau, const ProductPoint& probe) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  const double dx = factor_distance(probe.x, anchor.x);
  const double dy = factor_distance(probe.y, anchor.y);
  return phi.evaluate(probe.x, probe.y) + ExtendedReal((dx * dx - dy * dy) / (2.0 * tau));
}

RegularizedObjective::RegularizedObjective(const BivariateObjective& base, ProductPoint anchor,
                                           double tau)
    : base_(&base), anchor_(std::move(anchor)), tau_(tau) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  if (anchor_.backend_tag() != base.backend())
    throw BackendMismatch("anchor backend does not match the objective's backend");
}

ExtendedReal RegularizedObjective::evaluate(const FactorPoint& x, const FactorPoint& y) const {
  const double dx = factor_distance(x, anchor_.x);
  const double dy = factor_distance(y, anchor_.y);
  return base_->evaluate(x, y) + ExtendedReal((dx * dx - dy * dy) / (2.0 * tau_));
}

ExtendedReal RegularizedObjective::psi_x(const FactorPoint& x) const {
  const double dx = factor_distance(x, anchor_.x);
  return base_->psi_x(x) + ExtendedReal(dx * dx / (2.0 * tau_));
}

ExtendedReal RegularizedObjective::psi_y(const FactorPoint& y) const {
  // psi_y enters the objective with a negative sign, so the -d_Y^2/(2 tau)
  // term lands here with a positive sign.
  const double dy = factor_distance(y, anchor_.y);
  return base_->psi_y(y) + ExtendedReal(dy * dy / (2.0 * tau_));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> RegularizedObjective::partial_gradients(
    const FactorPoint& x, const FactorPoint& y) const {
  auto [gx, gy] = base_->partial_gradients(x, y);
  gx += (as_vector(x) - as_vector(anchor_.x)) / tau_;
  gy -= (as_vector(y) - as_vector(anchor_.y)) / tau_;
  return {gx, gy};
}

namespace {

// Records the normalized signed violation of lhs <= rhs.
void record(double lhs, double rhs, ViolationReport& rep) {
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) return;
  const double v = (lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
  ++rep.checks;
  if (v > rep.worst_violation) rep.worst_violation = v;
  if (v > rep.tolerance) ++rep.violations;
}

double val(const BivariateObjective& phi, const FactorPoint& x, const FactorPoint& y) {
  return phi.evaluate(x, y).to_double();
}

}  // namespace

ViolationReport validate_convex_concavity(const BivariateObjective& phi, const CurveProvider& curve,
                                          int samples, std::uint64_t seed) {
  static constexpr double kT[] = {0.25, 0.5, 0.75};
  ViolationReport rep;
  std::mt19937_64 rng(seed);
  const double lambda = phi.modulus().lambda;

  for (int s = 0; s < samples; ++s) {
    // Convexity chord in x at a fixed random y.
    {
      const FactorPoint x0 = phi.sample_x(rng);
      const FactorPoint x1 = phi.sample_x(rng);
      const FactorPoint y = phi.sample_y(rng);
      const double d2 = std::pow(factor_distance(x0, x1), 2);
      const double v0 = val(phi, x0, y);
      const double v1 = val(phi, x1, y);
      for (double t : kT) {
        const double chord = (1.0 - t) * v0 + t * v1 - 0.5 * lambda * t * (1.0 - t) * d2;
        record(val(phi, curve(x0, x1, t), y), chord, rep);
      }
    }
    // Concavity chord in y at a fixed random x.
    {
      const FactorPoint y0 = phi.sample_y(rng);
      const FactorPoint y1 = phi.sample_y(rng);
      const FactorPoint x = phi.sample_x(rng);
      const double d2 = std::pow(factor_distance(y0, y1), 2);
      const double v0 = val(phi, x, y0);
      const double v1 = val(phi, x, y1);
      for (double t : kT) {
        const double chord = (1.0 - t) * v0 + t * v1 + 0.5 * lambda * t * (1.0 - t) * d2;
        record(chord, val(phi, x, curve(y0, y1, t)), rep);
      }
    }
  }
  return rep;
}

ViolationReport validate_convex_concavity(const BivariateObjective& phi, int samples,
                                          std::uint64_t seed) {
  return validate_convex_concavity(phi, default_curves(), samples, seed);
}

}  // namespace gdaflow

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "gdaflow/objective.hpp"
#include "gdaflow/point.hpp"

namespace gdaflow {

// Exact 1-D quadratic-cost Wasserstein distance between grid measures via the
// quantile-function representation (merge of cumulative weights); supports may
// differ. Returns the distance (not squared).
double w2_distance_1d(const GridMeasure& mu, const GridMeasure& nu);

// Independent oracle: solves the discrete Kantorovich LP in exact rational
// arithmetic (transportation simplex, north-west-corner start, Bland's rule).
// Guarded to m*n <= 64 (throws InstanceTooLarge). Returns the optimal cost
// (i.e. W2 squared).
double w2_lp_oracle(const GridMeasure& mu, const GridMeasure& nu);

// Kantorovich potential psi for the quadratic cost: a subgradient of
//   w |-> W2^2(w-on-mu.support, nu)
// at mu's weights, i.e. W2^2(mu', nu) >= W2^2(mu, nu) + <psi, mu' - mu> for
// all weight vectors mu' on the same support. Normalized so psi[0] = 0.
Eigen::VectorXd w2_sq_subgradient(const GridMeasure& mu, const GridMeasure& nu);

// Parametrized family of optimal Kantorovich potentials for the quadratic
// cost, as a subgradient family of w |-> W2^2(w-on-mu.support, nu) at mu's
// weights: every psi = base + sum_p theta_p * deltas[p] with theta in [0,1]^k
// is a valid subgradient. Ties of the cumulative weights (the kinks of W2^2)
// each contribute one suffix direction; away from ties the family is a point.
struct PotentialFamily {
  Eigen::VectorXd base;
  std::vector<Eigen::VectorXd> deltas;
};
PotentialFamily w2_sq_potential_family(const GridMeasure& mu, const GridMeasure& nu);

// Copy of `at` whose interior cumulative weights are moved onto base's
// wherever the two differ by at most `tol` (keeping the weights a valid
// simplex point). Proximal optima of transport costs generically sit exactly
// on such ties; snapping turns a near-tie into an exact one.
GridMeasure snap_cumulative_ties(const GridMeasure& at, const GridMeasure& base,
                                 double tol = 1e-4);

// Certified lower bound on the one-factor composite problem
//   min over the simplex of  <linear, w> + (1/beta) KL(w|ref) + W2^2(w, base) / (2 tau).
// The transport term is replaced by an affine minorant from the potential
// family anchored at `at` (and at a copy of `at` whose near-tied cumulative
// weights are snapped onto base's, which restores tightness at the kinks
// iterates can only approach); the entropy is then conjugated in closed form.
// The bound is exact at interior optima and at kink optima.
double entropic_transport_lower_bound(const Eigen::VectorXd& linear, const GridMeasure& ref,
                                      double beta, const GridMeasure& base, double tau,
                                      const GridMeasure& at);

// Entropy-regularized bilinear saddle objective on simplex x simplex:
//   L(mu, nu) = mu^T ell nu + (1/beta) (KL(mu|rho_x) - KL(nu|rho_y))
// with strictly positive reference measures rho_x, rho_y on the same supports.
// Declared modulus: lambda = 1 / (beta * w_max), w_max = max support diameter
// squared over the two factors (a conservative sampled-validated constant).
class EntropicBilinearObjective : public BivariateObjective {
 public:
  EntropicBilinearObjective(Eigen::VectorXd support_x, Eigen::VectorXd support_y,
                            Eigen::MatrixXd kernel, double beta,
                            Eigen::VectorXd reference_x, Eigen::VectorXd reference_y,
                            std::optional<double> declared_lambda = std::nullopt);

  BackendTag backend() const override { return BackendTag::wasserstein1d; }
  ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const override;
  bool in_domain_x(const FactorPoint& x) const override;
  bool in_domain_y(const FactorPoint& y) const override;
  ConvexityModulus modulus() const override { return {lambda_}; }

  bool has_decomposition() const override { return true; }
  ExtendedReal psi_x(const FactorPoint& x) const override;
  ExtendedReal psi_y(const FactorPoint& y) const override;
  double coupling(const FactorPoint& x, const FactorPoint& y) const override;

  bool has_partial_gradients() const override { return true; }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> partial_gradients(const FactorPoint& x,
                                                                const FactorPoint& y) const override;

  ResolventResult resolvent(const ProductPoint& anchor, double tau, double gap_target) const override;

  FactorPoint sample_x(std::mt19937_64& rng) const override;
  FactorPoint sample_y(std::mt19937_64& rng) const override;

  const Eigen::VectorXd& support_x() const { return support_x_; }
  const Eigen::VectorXd& support_y() const { return support_y_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  double beta() const { return beta_; }
  const GridMeasure& reference_x() const { return ref_x_; }
  const GridMeasure& reference_y() const { return ref_y_; }

  // Exact restricted Nikaido-Isoda gap over simplex x simplex via the
  // log-partition closed form of the KL conjugate.
  double exact_ni_gap(const GridMeasure& mu, const GridMeasure& nu) const;

  ProductPoint make_point(const Eigen::VectorXd& wx, const Eigen::VectorXd& wy) const;

 private:
  Eigen::VectorXd support_x_, support_y_;
  Eigen::MatrixXd kernel_;
  double beta_;
  GridMeasure ref_x_, ref_y_;
  double lambda_;
};

// Objective value L_beta(mu, nu); exposed as a free function as well.
double entropic_objective_eval(const EntropicBilinearObjective& obj, const GridMeasure& mu,
                               const GridMeasure& nu);

// (grad_mu, grad_nu) of L_beta in weight coordinates; requires strictly
// positive weights (BoundaryPoint otherwise).
std::pair<Eigen::VectorXd, Eigen::VectorXd> entropic_partial_gradients(
    const EntropicBilinearObjective& obj, const GridMeasure& mu, const GridMeasure& nu);

// Composite entropic prox step over the simplex, in closed form:
//   argmin_w <c, w> + (1/beta) KL(w|r) + (1/eta) KL(w|w0).
// The entropy terms are handled exactly, so only the bounded linear part c
// needs a step-size restriction.
Eigen::VectorXd entropic_prox_step(const Eigen::VectorXd& c, const Eigen::VectorXd& r,
                                   const Eigen::VectorXd& w0, double beta, double eta);

// Resolvent of the entropic objective: approximate saddle of
//   L_beta(mu', nu') + (1/2 tau)(W2^2(mu', mu) - W2^2(nu', nu))
// over simplex x simplex by entropic mirror-prox with Kantorovich-potential
// subgradients for the transport terms; terminates when the linearized
// restricted duality gap is <= gap_target.
ResolventResult wasserstein_resolvent(const EntropicBilinearObjective& obj, const ProductPoint& anchor,
                                      double tau, double gap_target, int max_iter = 2000000);

}  // namespace gdaflow

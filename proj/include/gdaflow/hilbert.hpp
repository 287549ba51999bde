#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "gdaflow/objective.hpp"
#include "gdaflow/point.hpp"

namespace gdaflow {

// Smallest eigenvalue of a symmetric matrix (library-backed; tolerance 1e-8 is
// the validation slack used by the objective constructors).
double smallest_eigenvalue(const Eigen::MatrixXd& sym);

// exp(M) for small dense M by scaling-and-squaring with a machine-tolerance
// truncated series; relative accuracy ~1e-14 at the sizes used here (<= 6x6).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M);

// Quadratic saddle objective on R^dx x R^dy:
//   phi(x,y) = 1/2 x^T A x + a^T x + x^T C y - 1/2 y^T B y - b^T y
// with symmetric A, B. Declared modulus defaults to min eigenvalue of (A, B)
// and is validated to be a lower bound of both (slack 1e-8).
class QuadraticSaddleObjective : public BivariateObjective {
 public:
  QuadraticSaddleObjective(Eigen::MatrixXd A, Eigen::VectorXd a, Eigen::MatrixXd C,
                           Eigen::MatrixXd B, Eigen::VectorXd b,
                           std::optional<double> declared_lambda = std::nullopt);

  BackendTag backend() const override { return BackendTag::hilbert; }
  ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const override;
  bool in_domain_x(const FactorPoint&) const override { return true; }
  bool in_domain_y(const FactorPoint&) const override { return true; }
  ConvexityModulus modulus() const override { return {lambda_}; }

  bool has_decomposition() const override { return true; }
  ExtendedReal psi_x(const FactorPoint& x) const override;
  ExtendedReal psi_y(const FactorPoint& y) const override;
  double coupling(const FactorPoint& x, const FactorPoint& y) const override;

  bool has_partial_gradients() const override { return true; }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> partial_gradients(const FactorPoint& x,
                                                                const FactorPoint& y) const override;

  bool has_exact_slope() const override { return true; }
  double exact_slope(const ProductPoint& z) const override;

  ResolventResult resolvent(const ProductPoint& anchor, double tau, double gap_target) const override;

  FactorPoint sample_x(std::mt19937_64& rng) const override;
  FactorPoint sample_y(std::mt19937_64& rng) const override;

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  Eigen::Index dim_x() const { return A_.rows(); }
  Eigen::Index dim_y() const { return B_.rows(); }

  // Half-width of the box used for domain sampling (default 2).
  double sampling_halfwidth = 2.0;

 private:
  Eigen::MatrixXd A_, C_, B_;
  Eigen::VectorXd a_, b_;
  double lambda_;
};

// Nonsmooth additive term for one factor of a composite objective: none, a box
// indicator, or a weighted l1 penalty. All have strong-convexity constant 0.
struct ProxHandle {
  enum class Kind { none, box, l1 };
  Kind kind = Kind::none;
  Eigen::VectorXd lower, upper;  // box bounds (entries may be +-inf)
  double weight = 0.0;           // l1 weight

  static ProxHandle make_none() { return {}; }
  static ProxHandle make_box(Eigen::VectorXd lo, Eigen::VectorXd up);
  static ProxHandle make_l1(double weight);

  ExtendedReal value(const Eigen::VectorXd& x) const;
  // prox_{step * handle}(v) = argmin_u handle(u) + |u - v|^2 / (2 step)
  Eigen::VectorXd prox(const Eigen::VectorXd& v, double step) const;
  bool in_domain(const Eigen::VectorXd& x) const;
  bool on_kink(const Eigen::VectorXd& x) const;  // boundary face / zero coordinate
};

// phi(x,y) = quadratic(x,y) + f(x) - g(y) with prox-friendly f, g.
class CompositeSaddleObjective : public BivariateObjective {
 public:
  CompositeSaddleObjective(QuadraticSaddleObjective smooth, ProxHandle f, ProxHandle g,
                           std::optional<double> declared_lambda = std::nullopt);

  BackendTag backend() const override { return BackendTag::hilbert; }
  ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const override;
  bool in_domain_x(const FactorPoint& x) const override;
  bool in_domain_y(const FactorPoint& y) const override;
  ConvexityModulus modulus() const override { return {lambda_}; }

  bool has_partial_gradients() const override { return true; }
  std::pair<Eigen::VectorXd, Eigen::VectorXd> partial_gradients(const FactorPoint& x,
                                                                const FactorPoint& y) const override;

  bool has_exact_slope() const override { return true; }
  // Minimal-norm element of the (sub)differential pair: exact for box and l1
  // handles via cone clipping / soft thresholding.
  double exact_slope(const ProductPoint& z) const override;

  ResolventResult resolvent(const ProductPoint& anchor, double tau, double gap_target) const override;

  FactorPoint sample_x(std::mt19937_64& rng) const override;
  FactorPoint sample_y(std::mt19937_64& rng) const override;

  const QuadraticSaddleObjective& smooth() const { return smooth_; }
  const ProxHandle& f() const { return f_; }
  const ProxHandle& g() const { return g_; }

 private:
  QuadraticSaddleObjective smooth_;
  ProxHandle f_, g_;
  double lambda_;
};

// min_u 1/2 u^T Q u + q^T u + handle(u) for strongly convex Q by proximal
// gradient with the optimal fixed step, run to machine stagnation. Building
// block for one-sided best responses and partial Moreau-Yosida values.
Eigen::VectorXd prox_quadratic_minimize(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                                        const ProxHandle& handle, Eigen::VectorXd warm_start);

// Closed-form resolvent of a quadratic objective: solves
//   (A + I/tau) x' + C y'      = x/tau - a
//   -C^T x' + (B + I/tau) y'   = y/tau - b
// The certificate gap is the linear-system residual norm.
ResolventResult quadratic_resolvent(const QuadraticSaddleObjective& obj, const ProductPoint& anchor,
                                    double tau);

// Damped alternating partial prox steps (damping 1/2) with an extragradient
// fallback when the fixed-point residual stalls (ratio > 0.99 over 10
// iterations). Certified by the restricted duality gap of the regularized
// objective, evaluated with high-accuracy one-sided solves.
ResolventResult composite_resolvent(const CompositeSaddleObjective& obj, const ProductPoint& anchor,
                                    double tau, double gap_target, int max_iter = 100000);

// Exact trajectory of the linear GDA flow
//   dz/dt = M z + r,  M = [[-A, -C], [C^T, -B]],  r = [-a; -b]
// via matrix exponentials: z(t) = e^{tM} z0 + t * Psi(tM) r with
// Psi(N) = sum_k N^k / (k+1)!.
ProductPoint exact_linear_flow(const QuadraticSaddleObjective& obj, const ProductPoint& z0, double t);

// Brute-force 1-D x 1-D minimax on a box by nested grid search refined to
// absolute tolerance 1e-8; the independent oracle for saddle computations.
// Throws DimensionTooLarge unless dim_x == dim_y == 1.
ProductPoint brute_force_saddle(const BivariateObjective& obj, double x_lo, double x_hi, double y_lo,
                                double y_hi);

}  // namespace gdaflow

#include "gdaflow/scheme.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gdaflow/core.hpp"
#include "gdaflow/errors.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/quadratic_view.hpp"
#include "gdaflow/wasserstein1d.hpp"

namespace gdaflow {

namespace {

void check_step(const BivariateObjective& obj, double tau) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  const double tau_max = obj.modulus().tau_max();
  if (tau >= tau_max) throw StepTooLarge(tau, tau_max);
}

double w2_sq(const GridMeasure& a, const GridMeasure& b) {
  const double d = w2_distance_1d(a, b);
  return d * d;
}

double kl_divergence(const Eigen::VectorXd& w, const Eigen::VectorXd& r) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) s += w(i) * std::log(w(i) / r(i));
  return s;
}

// argmin_u {1/2 u^T Q u + q^T u + handle(u)}. The shifted blocks A + I/tau,
// B + I/tau are positive definite whenever the step-size guard passed, so the
// handle-free case is a plain linear solve.
Eigen::VectorXd shifted_block_min(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                                  const ProxHandle* h, const Eigen::VectorXd& warm) {
  if (h != nullptr && h->kind != ProxHandle::Kind::none) return prox_quadratic_minimize(Q, q, *h, warm);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
  if (ldlt.info() != Eigen::Success) throw SingularSystem("shifted partial block is singular");
  return ldlt.solve(-q);
}

// One-factor composite mirror descent over the simplex:
//   minimize <load, w> + (1/beta) KL(w|ref) + W2^2(w, base) / (2 tau),
// linearizing only the transport term through its Kantorovich-potential
// subgradient; the entropy is handled exactly inside each prox step. Returns
// the weights of the best iterate, certified suboptimality <= 1e-9.
Eigen::VectorXd entropic_partial_min(const Eigen::VectorXd& load, const GridMeasure& ref,
                                     const GridMeasure& base, double beta, double tau,
                                     const char* label) {
  const Eigen::VectorXd& r = ref.weights();

  // Certified suboptimality: objective value minus the exact entropic
  // conjugate of its transport minorant, which stays tight at transport-cost
  // kinks where one-subgradient linearized gaps bottom out at a positive
  // floor.
  auto certified_gap = [&](const GridMeasure& wm) {
    const double d = w2_distance_1d(wm, base);
    const double f = load.dot(wm.weights()) + kl_divergence(wm.weights(), r) / beta +
                     d * d / (2.0 * tau);
    return std::max(0.0, f - entropic_transport_lower_bound(load, ref, beta, base, tau, wm));
  };

  const double d = std::max(ref.diameter(), base.diameter());
  const double scale = load.cwiseAbs().maxCoeff() + d * d / (2.0 * tau) + 1e-12;
  double eta = 1.0 / scale;
  const double eta_min = eta * 0x1p-30;

  GridMeasure wm = ref;  // strictly positive start
  double best_gap = certified_gap(wm);
  GridMeasure best = wm;
  double window_best = best_gap;

  const double target = 1e-9;
  const int max_iter = 400000, check_every = 25, window = 500;
  int iters = 0;
  while (best_gap > target && iters < max_iter) {
    const Eigen::VectorXd c = load + w2_sq_subgradient(wm, base) / (2.0 * tau);
    wm = wm.with_weights(entropic_prox_step(c, r, wm.weights(), beta, eta));
    ++iters;
    if (iters % check_every == 0) {
      double gap = certified_gap(wm);
      if (gap < best_gap) {
        best_gap = gap;
        best = wm;
      }
      // The minimizer generically sits exactly on a transport-cost kink the
      // iterate only approaches; keep its tie-snapped copy when that point's
      // own certified gap is better.
      const GridMeasure ws = snap_cumulative_ties(wm, base);
      if (ws.weights() != wm.weights()) {
        const double gap_s = certified_gap(ws);
        gap = std::min(gap, gap_s);
        if (gap_s < best_gap) {
          best_gap = gap_s;
          best = ws;
        }
      }
      if (gap < window_best) window_best = gap;
      if (iters % window == 0) {
        // Stalled window: damp the nonsmooth transport-term oscillation.
        if (window_best > 0.9 * best_gap && eta > eta_min) eta *= 0.5;
        window_best = std::numeric_limits<double>::infinity();
      }
    }
  }
  if (best_gap > target) throw NoConvergence(best_gap, iters, label);
  return best.weights();
}

}  // namespace

ResolventResult resolvent_step(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                               double tol) {
  check_step(obj, tau);
  if (!(tol > 0.0)) throw Error("inner tolerance must be positive");
  return obj.resolvent(anchor, tau, tol * tau * tau);
}

FlowTrajectory mmx_trajectory(const BivariateObjective& obj, const ProductPoint& z0, double tau,
                              int steps, double tol) {
  check_step(obj, tau);
  if (steps < 1) throw Error("trajectory needs a positive number of steps");
  if (!obj.in_domain_x(z0.x) || !obj.in_domain_y(z0.y))
    throw Infeasible("initial datum is outside the objective's domain");

  FlowTrajectory traj;
  traj.tau = tau;
  traj.times.reserve(steps + 1);
  traj.points.reserve(steps + 1);
  traj.certificates.reserve(steps);
  traj.times.push_back(0.0);
  traj.points.push_back(z0);
  for (int k = 1; k <= steps; ++k) {
    ResolventResult r = resolvent_step(obj, traj.points.back(), tau, tol);
    traj.times.push_back(k * tau);
    traj.points.push_back(r.point);
    traj.certificates.push_back(std::move(r));
  }
  return traj;
}

ProductPoint flow_approximation(const BivariateObjective& obj, const ProductPoint& z0, double t,
                                int n, double tol) {
  if (t < 0.0) throw Error("flow time must be nonnegative");
  if (n < 1) throw Error("flow approximation needs a positive step count");
  if (t == 0.0) return z0;  // J_0 is the identity
  return mmx_trajectory(obj, z0, t / n, n, tol).points.back();
}

double error_bound_constant(double T, int N, double lambda_minus) {
  if (!(T > 0.0)) throw Error("horizon T must be positive");
  if (N < 1) throw Error("base step count N must be positive");
  if (lambda_minus < 0.0) throw InvalidModulus("lambda_minus is a nonnegative quantity");
  const double h = T / N;
  if (lambda_minus > 0.0 && h >= 1.0 / lambda_minus) throw StepTooLarge(h, 1.0 / lambda_minus);
  const double lmT = lambda_minus * T;
  return std::pow(1.0 - lambda_minus * h, -2.0 * (N + 1)) * T * T * (1.0 + lmT * lmT / N);
}

double a_priori_error_sq(const ErrorBudget& budget, double t) {
  (void)t;  // the squared-distance estimate is uniform over [0, T]
  if (budget.slope0 < 0.0) throw Error("initial slope must be nonnegative");
  if (budget.n < 1) throw Error("refinement count must be positive");
  return budget.slope0 * budget.slope0 *
         error_bound_constant(budget.T, budget.N, budget.lambda_minus) / budget.n;
}

double a_priori_error(const ErrorBudget& budget, double t) {
  return std::sqrt(a_priori_error_sq(budget, t));
}

double resolvent_comparison_bound(double slope0, double tau0, double tau1, int n, int m,
                                  double lambda_minus) {
  if (!(tau0 > 0.0)) throw NonpositiveTau(tau0);
  if (!(tau1 > 0.0)) throw NonpositiveTau(tau1);
  if (n < 1 || m < 1) throw Error("iteration counts must be positive");
  if (lambda_minus < 0.0) throw InvalidModulus("lambda_minus is a nonnegative quantity");
  if (lambda_minus > 0.0) {
    const double tau_max = 1.0 / lambda_minus;
    if (tau0 >= tau_max) throw StepTooLarge(tau0, tau_max);
    if (tau1 >= tau_max) throw StepTooLarge(tau1, tau_max);
  }
  const double f0 = 1.0 - lambda_minus * tau0;
  const double f1 = 1.0 - lambda_minus * tau1;
  const double C = std::max(std::pow(f0, -2.0 * n) * std::pow(f1, -2.0),
                            std::pow(f0, -2.0) * std::pow(f1, -2.0 * m));
  const double drift = n * tau0 - m * tau1 - lambda_minus * tau0 * tau1 * (n - m);
  const double c = std::min(n * (tau0 - lambda_minus * tau0 * tau1),
                            m * (tau1 - lambda_minus * tau0 * tau1));
  return slope0 * slope0 * C *
         (drift * drift + (tau0 + tau1 - 2.0 * lambda_minus * tau0 * tau1) * c);
}

std::pair<double, double> discrete_evi_residuals(const BivariateObjective& obj,
                                                 const ProductPoint& anchor,
                                                 const ProductPoint& resolvent_point, double tau,
                                                 const ProductPoint& test_point) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  const double lambda = obj.modulus().lambda;
  const ProductPoint& z = anchor;
  const ProductPoint& J = resolvent_point;

  const double dJx_test = factor_distance(J.x, test_point.x);
  const double dzx_test = factor_distance(z.x, test_point.x);
  const double dJx_z = factor_distance(J.x, z.x);
  const double dJy_test = factor_distance(J.y, test_point.y);
  const double dzy_test = factor_distance(z.y, test_point.y);
  const double dJy_z = factor_distance(J.y, z.y);

  const double phi_J = obj.evaluate(J.x, J.y).value();
  const double phi_xtest = obj.evaluate(test_point.x, J.y).to_double();
  const double phi_ytest = obj.evaluate(J.x, test_point.y).to_double();

  const double rx = (dJx_test * dJx_test - dzx_test * dzx_test) / (2.0 * tau) +
                    0.5 * lambda * dJx_test * dJx_test + phi_J - phi_xtest +
                    dJx_z * dJx_z / (2.0 * tau);
  const double ry = (dJy_test * dJy_test - dzy_test * dzy_test) / (2.0 * tau) +
                    0.5 * lambda * dJy_test * dJy_test + phi_ytest - phi_J +
                    dJy_z * dJy_z / (2.0 * tau);
  return {rx, ry};
}

double moreau_yosida_value(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                           double tol) {
  const ResolventResult r = resolvent_step(obj, anchor, tau, tol);
  return regularized_objective(obj, anchor, tau, r.point).value();
}

double partial_moreau_yosida(const BivariateObjective& obj, const ProductPoint& anchor, double tau,
                             PartialSide which, const FactorPoint& probe) {
  check_step(obj, tau);

  if (obj.backend() == BackendTag::hilbert) {
    QuadraticView v;
    if (!try_quadratic_view(obj, v))
      throw Error("partial regularization needs quadratic structure on the Hilbert backend");
    if (which == PartialSide::x_side) {
      // sup_{y'} phi(x', y') - |y' - y0|^2 / (2 tau), solved as a shifted
      // concave block maximization.
      const Eigen::VectorXd& xp = as_vector(probe);
      const Eigen::VectorXd& y0 = as_vector(anchor.y);
      const Eigen::Index dy = v.B.rows();
      const Eigen::MatrixXd Q = v.B + Eigen::MatrixXd::Identity(dy, dy) / tau;
      const Eigen::VectorXd q = v.b - v.C.transpose() * xp - y0 / tau;
      const Eigen::VectorXd ybar = shifted_block_min(Q, q, v.g, y0);
      return obj.evaluate(probe, FactorPoint(ybar)).value() -
             (ybar - y0).squaredNorm() / (2.0 * tau);
    }
    // inf_{x'} phi(x', y') + |x' - x0|^2 / (2 tau).
    const Eigen::VectorXd& yp = as_vector(probe);
    const Eigen::VectorXd& x0 = as_vector(anchor.x);
    const Eigen::Index dx = v.A.rows();
    const Eigen::MatrixXd Q = v.A + Eigen::MatrixXd::Identity(dx, dx) / tau;
    const Eigen::VectorXd q = v.a + v.C * yp - x0 / tau;
    const Eigen::VectorXd xbar = shifted_block_min(Q, q, v.f, x0);
    return obj.evaluate(FactorPoint(xbar), probe).value() +
           (xbar - x0).squaredNorm() / (2.0 * tau);
  }

  const auto* ent = dynamic_cast<const EntropicBilinearObjective*>(&obj);
  if (ent == nullptr)
    throw Error("partial regularization needs the entropic objective on this backend");
  if (which == PartialSide::x_side) {
    if (!obj.in_domain_x(probe) || !obj.in_domain_y(anchor.y))
      throw SupportMismatch("probe or anchor does not live on this objective's grids");
    const GridMeasure& mu = as_measure(probe);
    const GridMeasure& nu0 = as_measure(anchor.y);
    // sup_{nu'} phi(mu, nu') - W2^2(nu', nu0)/(2 tau): flip sign and minimize.
    const Eigen::VectorXd load = -(ent->kernel().transpose() * mu.weights());
    const Eigen::VectorXd w = entropic_partial_min(load, ent->reference_y(), nu0, ent->beta(), tau,
                                                   "partial regularization (y factor)");
    const GridMeasure nub = ent->reference_y().with_weights(w);
    return entropic_objective_eval(*ent, mu, nub) - w2_sq(nub, nu0) / (2.0 * tau);
  }
  if (!obj.in_domain_y(probe) || !obj.in_domain_x(anchor.x))
    throw SupportMismatch("probe or anchor does not live on this objective's grids");
  const GridMeasure& nu = as_measure(probe);
  const GridMeasure& mu0 = as_measure(anchor.x);
  const Eigen::VectorXd load = ent->kernel() * nu.weights();
  const Eigen::VectorXd w = entropic_partial_min(load, ent->reference_x(), mu0, ent->beta(), tau,
                                                 "partial regularization (x factor)");
  const GridMeasure mub = ent->reference_x().with_weights(w);
  return entropic_objective_eval(*ent, mub, nu) + w2_sq(mub, mu0) / (2.0 * tau);
}

}  // namespace gdaflow

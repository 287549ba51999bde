#include <algorithm>
#include <cmath>

#include "gdaflow/core.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/quadratic_view.hpp"
#include "gdaflow/random.hpp"

namespace gdaflow {

bool try_quadratic_view(const BivariateObjective& obj, QuadraticView& out) {
  if (const auto* q = dynamic_cast<const QuadraticSaddleObjective*>(&obj)) {
    out = {q->A(), q->B(), q->C(), q->a(), q->b(), nullptr, nullptr};
    return true;
  }
  if (const auto* c = dynamic_cast<const CompositeSaddleObjective*>(&obj)) {
    const auto& q = c->smooth();
    out = {q.A(), q.B(), q.C(), q.a(), q.b(), &c->f(), &c->g()};
    return true;
  }
  if (const auto* r = dynamic_cast<const RegularizedObjective*>(&obj)) {
    if (!try_quadratic_view(r->base(), out)) return false;
    const double tau = r->tau();
    const Eigen::Index dx = out.A.rows(), dy = out.B.rows();
    out.A += Eigen::MatrixXd::Identity(dx, dx) / tau;
    out.B += Eigen::MatrixXd::Identity(dy, dy) / tau;
    out.a -= as_vector(r->anchor().x) / tau;
    out.b -= as_vector(r->anchor().y) / tau;
    return true;
  }
  return false;
}

namespace {

void require_symmetric(const Eigen::MatrixXd& M, const char* name) {
  if (M.rows() != M.cols()) throw Error(std::string(name) + " must be square");
  const double scale = std::max(1.0, M.norm());
  if ((M - M.transpose()).norm() > 1e-12 * scale)
    throw Error(std::string(name) + " must be symmetric");
}

}  // namespace

double smallest_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SingularSystem("eigenvalue computation failed");
  return es.eigenvalues().minCoeff();
}

namespace {

// Simultaneous Taylor series for exp(T) and Phi(T) = sum_k T^k/(k+1)! at a
// scaled argument |T| <= 1/4, then squaring with the pair-doubling identities
// exp(2T) = exp(T)^2, Phi(2T) = (exp(T) + I) Phi(T) / 2.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> exp_and_phi(const Eigen::MatrixXd& M) {
  const Eigen::Index n = M.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double norm = M.norm();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.25) ++s;
  const Eigen::MatrixXd T = M / std::pow(2.0, s);

  Eigen::MatrixXd E = I, P = I;
  Eigen::MatrixXd term = I;
  double exp_fact = 1.0;
  for (int k = 1; k <= 24; ++k) {
    term = term * T;
    exp_fact /= k;  // 1/k!
    E += exp_fact * term;
    P += (exp_fact / (k + 1)) * term;  // T^k / (k+1)!
    if (term.norm() * exp_fact < 1e-18) break;
  }
  for (int k = 0; k < s; ++k) {
    P = 0.5 * (E + I) * P;
    E = E * E;
  }
  return {E, P};
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) { return exp_and_phi(M).first; }

QuadraticSaddleObjective::QuadraticSaddleObjective(Eigen::MatrixXd A, Eigen::VectorXd a,
                                                   Eigen::MatrixXd C, Eigen::MatrixXd B,
                                                   Eigen::VectorXd b,
                                                   std::optional<double> declared_lambda)
    : A_(std::move(A)), C_(std::move(C)), B_(std::move(B)), a_(std::move(a)), b_(std::move(b)) {
  require_symmetric(A_, "A");
  require_symmetric(B_, "B");
  if (a_.size() != A_.rows() || b_.size() != B_.rows() || C_.rows() != A_.rows() ||
      C_.cols() != B_.rows())
    throw Error("quadratic objective dimension mismatch");
  const double lo = std::min(smallest_eigenvalue(A_), smallest_eigenvalue(B_));
  lambda_ = declared_lambda.value_or(lo);
  if (lambda_ > lo + 1e-8)
    throw InvalidModulus("declared lambda " + std::to_string(lambda_) +
                         " exceeds the smallest block eigenvalue " + std::to_string(lo));
}

ExtendedReal QuadraticSaddleObjective::evaluate(const FactorPoint& x, const FactorPoint& y) const {
  const auto& xv = as_vector(x);
  const auto& yv = as_vector(y);
  return 0.5 * xv.dot(A_ * xv) + a_.dot(xv) + xv.dot(C_ * yv) - 0.5 * yv.dot(B_ * yv) - b_.dot(yv);
}

ExtendedReal QuadraticSaddleObjective::psi_x(const FactorPoint& x) const {
  const auto& xv = as_vector(x);
  return 0.5 * xv.dot(A_ * xv) + a_.dot(xv);
}

ExtendedReal QuadraticSaddleObjective::psi_y(const FactorPoint& y) const {
  const auto& yv = as_vector(y);
  return 0.5 * yv.dot(B_ * yv) + b_.dot(yv);
}

double QuadraticSaddleObjective::coupling(const FactorPoint& x, const FactorPoint& y) const {
  return as_vector(x).dot(C_ * as_vector(y));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> QuadraticSaddleObjective::partial_gradients(
    const FactorPoint& x, const FactorPoint& y) const {
  const auto& xv = as_vector(x);
  const auto& yv = as_vector(y);
  return {A_ * xv + a_ + C_ * yv, C_.transpose() * xv - B_ * yv - b_};
}

double QuadraticSaddleObjective::exact_slope(const ProductPoint& z) const {
  auto [gx, gy] = partial_gradients(z.x, z.y);
  return std::sqrt(gx.squaredNorm() + gy.squaredNorm());
}

ResolventResult QuadraticSaddleObjective::resolvent(const ProductPoint& anchor, double tau,
                                                    double gap_target) const {
  ResolventResult r = quadratic_resolvent(*this, anchor, tau);
  r.gap_target = gap_target;  // closed form: the achieved gap is the residual
  return r;
}

FactorPoint QuadraticSaddleObjective::sample_x(std::mt19937_64& rng) const {
  return uniform_vector(rng, dim_x(), -sampling_halfwidth, sampling_halfwidth);
}

FactorPoint QuadraticSaddleObjective::sample_y(std::mt19937_64& rng) const {
  return uniform_vector(rng, dim_y(), -sampling_halfwidth, sampling_halfwidth);
}

ResolventResult quadratic_resolvent(const QuadraticSaddleObjective& obj, const ProductPoint& anchor,
                                    double tau) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  const double tau_max = obj.modulus().tau_max();
  if (tau >= tau_max) throw StepTooLarge(tau, tau_max);
  const Eigen::Index dx = obj.dim_x(), dy = obj.dim_y();
  const auto& x0 = as_vector(anchor.x);
  const auto& y0 = as_vector(anchor.y);
  if (x0.size() != dx || y0.size() != dy) throw Error("anchor dimension mismatch");

  Eigen::MatrixXd K(dx + dy, dx + dy);
  K.topLeftCorner(dx, dx) = obj.A() + Eigen::MatrixXd::Identity(dx, dx) / tau;
  K.topRightCorner(dx, dy) = obj.C();
  K.bottomLeftCorner(dy, dx) = -obj.C().transpose();
  K.bottomRightCorner(dy, dy) = obj.B() + Eigen::MatrixXd::Identity(dy, dy) / tau;
  Eigen::VectorXd rhs(dx + dy);
  rhs.head(dx) = x0 / tau - obj.a();
  rhs.tail(dy) = y0 / tau - obj.b();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double residual = (K * sol - rhs).norm();
  if (!sol.allFinite() || residual > 1e-8 * (1.0 + rhs.norm()))
    throw SingularSystem("resolvent system solve failed (residual " + std::to_string(residual) + ")");

  ResolventResult r;
  r.point = make_hilbert_point(sol.head(dx), sol.tail(dy));
  r.gap = residual;
  r.gap_target = residual;
  r.iterations = 1;
  r.method = "closed-form";
  return r;
}

ProductPoint exact_linear_flow(const QuadraticSaddleObjective& obj, const ProductPoint& z0,
                               double t) {
  const Eigen::Index dx = obj.dim_x(), dy = obj.dim_y();
  Eigen::MatrixXd M(dx + dy, dx + dy);
  M.topLeftCorner(dx, dx) = -obj.A();
  M.topRightCorner(dx, dy) = -obj.C();
  M.bottomLeftCorner(dy, dx) = obj.C().transpose();
  M.bottomRightCorner(dy, dy) = -obj.B();
  Eigen::VectorXd r(dx + dy);
  r.head(dx) = -obj.a();
  r.tail(dy) = -obj.b();
  Eigen::VectorXd z(dx + dy);
  z.head(dx) = as_vector(z0.x);
  z.tail(dy) = as_vector(z0.y);

  auto [E, P] = exp_and_phi(t * M);
  const Eigen::VectorXd zt = E * z + t * (P * r);
  return make_hilbert_point(zt.head(dx), zt.tail(dy));
}

ProxHandle ProxHandle::make_box(Eigen::VectorXd lo, Eigen::VectorXd up) {
  if (lo.size() != up.size()) throw Error("box bounds dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (!(lo(i) <= up(i))) throw Error("box lower bound exceeds upper bound");
  ProxHandle h;
  h.kind = Kind::box;
  h.lower = std::move(lo);
  h.upper = std::move(up);
  return h;
}

ProxHandle ProxHandle::make_l1(double weight) {
  if (weight < 0.0) throw Error("l1 weight must be nonnegative");
  ProxHandle h;
  h.kind = Kind::l1;
  h.weight = weight;
  return h;
}

ExtendedReal ProxHandle::value(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::box:
      return in_domain(x) ? ExtendedReal(0.0) : ExtendedReal::plus_infinity();
    case Kind::l1:
      return weight * x.lpNorm<1>();
  }
  return 0.0;
}

Eigen::VectorXd ProxHandle::prox(const Eigen::VectorXd& v, double step) const {
  switch (kind) {
    case Kind::none:
      return v;
    case Kind::box: {
      Eigen::VectorXd r = v;
      for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = std::clamp(r(i), lower(i), upper(i));
      return r;
    }
    case Kind::l1: {
      Eigen::VectorXd r = v;
      const double th = weight * step;
      for (Eigen::Index i = 0; i < r.size(); ++i)
        r(i) = std::copysign(std::max(std::abs(r(i)) - th, 0.0), r(i));
      return r;
    }
  }
  return v;
}

bool ProxHandle::in_domain(const Eigen::VectorXd& x) const {
  if (kind != Kind::box) return true;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lower(i) || x(i) > upper(i)) return false;
  return true;
}

bool ProxHandle::on_kink(const Eigen::VectorXd& x) const {
  if (kind == Kind::box) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) == lower(i) || x(i) == upper(i)) return true;
    return false;
  }
  if (kind == Kind::l1 && weight > 0.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) == 0.0) return true;
    return false;
  }
  return false;
}

namespace {

// Minimal-norm element of grad + d(handle) at x: the exact local slope
// contribution of one factor. grad is the gradient of the smooth part in the
// direction being *descended* is -grad; admissibility clips against the box
// faces, l1 contributes the usual soft-threshold at zero coordinates.
double factor_slope(const Eigen::VectorXd& grad, const Eigen::VectorXd& x, const ProxHandle& h) {
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double r;
    switch (h.kind) {
      case ProxHandle::Kind::none:
        r = grad(i);
        break;
      case ProxHandle::Kind::box: {
        const double desc = -grad(i);
        if (x(i) <= h.lower(i))
          r = std::max(desc, 0.0);
        else if (x(i) >= h.upper(i))
          r = std::min(desc, 0.0);
        else
          r = desc;
        break;
      }
      case ProxHandle::Kind::l1: {
        if (x(i) > 0.0)
          r = grad(i) + h.weight;
        else if (x(i) < 0.0)
          r = grad(i) - h.weight;
        else
          r = std::copysign(std::max(std::abs(grad(i)) - h.weight, 0.0), grad(i));
        break;
      }
      default:
        r = grad(i);
    }
    s2 += r * r;
  }
  return s2;
}

}  // namespace

CompositeSaddleObjective::CompositeSaddleObjective(QuadraticSaddleObjective smooth, ProxHandle f,
                                                   ProxHandle g, std::optional<double> declared_lambda)
    : smooth_(std::move(smooth)), f_(std::move(f)), g_(std::move(g)) {
  // Box indicators and l1 penalties add no strong convexity, so the composite
  // modulus equals the smooth one unless a tighter declaration is requested.
  const double lo = smooth_.modulus().lambda;
  lambda_ = declared_lambda.value_or(lo);
  if (lambda_ > lo + 1e-8)
    throw InvalidModulus("declared composite lambda exceeds the smooth modulus");
}

ExtendedReal CompositeSaddleObjective::evaluate(const FactorPoint& x, const FactorPoint& y) const {
  return smooth_.evaluate(x, y) + f_.value(as_vector(x)) - g_.value(as_vector(y));
}

bool CompositeSaddleObjective::in_domain_x(const FactorPoint& x) const {
  return f_.in_domain(as_vector(x));
}
bool CompositeSaddleObjective::in_domain_y(const FactorPoint& y) const {
  return g_.in_domain(as_vector(y));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> CompositeSaddleObjective::partial_gradients(
    const FactorPoint& x, const FactorPoint& y) const {
  const auto& xv = as_vector(x);
  const auto& yv = as_vector(y);
  if (f_.on_kink(xv) || g_.on_kink(yv))
    throw NotDifferentiable("composite objective has a kink at this point");
  auto [gx, gy] = smooth_.partial_gradients(x, y);
  if (f_.kind == ProxHandle::Kind::l1)
    for (Eigen::Index i = 0; i < gx.size(); ++i) gx(i) += f_.weight * (xv(i) > 0 ? 1.0 : -1.0);
  if (g_.kind == ProxHandle::Kind::l1)
    for (Eigen::Index i = 0; i < gy.size(); ++i) gy(i) -= g_.weight * (yv(i) > 0 ? 1.0 : -1.0);
  return {gx, gy};
}

double CompositeSaddleObjective::exact_slope(const ProductPoint& z) const {
  const auto& xv = as_vector(z.x);
  const auto& yv = as_vector(z.y);
  if (!f_.in_domain(xv) || !g_.in_domain(yv))
    throw NotDifferentiable("slope requested outside the domain");
  auto [gx, gy] = smooth_.partial_gradients(z.x, z.y);
  // Ascent side: the slope of -phi(x, .) at y has "gradient" -gy plus dg.
  return std::sqrt(factor_slope(gx, xv, f_) + factor_slope(-gy, yv, g_));
}

ResolventResult CompositeSaddleObjective::resolvent(const ProductPoint& anchor, double tau,
                                                    double gap_target) const {
  return composite_resolvent(*this, anchor, tau, gap_target);
}

FactorPoint CompositeSaddleObjective::sample_x(std::mt19937_64& rng) const {
  const double hw = smooth_.sampling_halfwidth;
  Eigen::VectorXd v(smooth_.dim_x());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double lo = -hw, hi = hw;
    if (f_.kind == ProxHandle::Kind::box) {
      lo = std::max(lo, f_.lower(i));
      hi = std::min(hi, f_.upper(i));
    }
    v(i) = uniform_in(rng, lo, hi);
  }
  return v;
}

FactorPoint CompositeSaddleObjective::sample_y(std::mt19937_64& rng) const {
  const double hw = smooth_.sampling_halfwidth;
  Eigen::VectorXd v(smooth_.dim_y());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double lo = -hw, hi = hw;
    if (g_.kind == ProxHandle::Kind::box) {
      lo = std::max(lo, g_.lower(i));
      hi = std::min(hi, g_.upper(i));
    }
    v(i) = uniform_in(rng, lo, hi);
  }
  return v;
}

Eigen::VectorXd prox_quadratic_minimize(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q,
                                        const ProxHandle& h, Eigen::VectorXd u) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  const double L = es.eigenvalues().maxCoeff();
  const double mu = es.eigenvalues().minCoeff();
  if (!(mu > 0.0)) throw SingularSystem("partial prox subproblem is not strongly convex");
  const double step = 2.0 / (L + mu);
  for (int k = 0; k < 200000; ++k) {
    Eigen::VectorXd next = h.prox(u - step * (Q * u + q), step);
    const double delta = (next - u).norm();
    u = std::move(next);
    if (delta <= 1e-15 * (1.0 + u.norm())) break;
  }
  return u;
}

ResolventResult composite_resolvent(const CompositeSaddleObjective& obj, const ProductPoint& anchor,
                                    double tau, double gap_target, int max_iter) {
  if (!(tau > 0.0)) throw NonpositiveTau(tau);
  const double tau_max = obj.modulus().tau_max();
  if (tau >= tau_max) throw StepTooLarge(tau, tau_max);
  const auto& q = obj.smooth();
  const Eigen::Index dx = q.dim_x(), dy = q.dim_y();
  const auto& x0 = as_vector(anchor.x);
  const auto& y0 = as_vector(anchor.y);

  const Eigen::MatrixXd Qx = q.A() + Eigen::MatrixXd::Identity(dx, dx) / tau;
  const Eigen::MatrixXd Qy = q.B() + Eigen::MatrixXd::Identity(dy, dy) / tau;

  // Best response in x at fixed y (minimization), and in y at fixed x
  // (maximization of the concave part, solved as a minimization).
  auto best_x = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& warm) {
    const Eigen::VectorXd qlin = q.a() + q.C() * y - x0 / tau;
    return prox_quadratic_minimize(Qx, qlin, obj.f(), warm);
  };
  auto best_y = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& warm) {
    const Eigen::VectorXd qlin = q.b() - q.C().transpose() * x - y0 / tau;
    return prox_quadratic_minimize(Qy, qlin, obj.g(), warm);
  };

  // Phi_tau(anchor; x, y) for the composite objective.
  auto reg_value = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const ExtendedReal v = obj.evaluate(FactorPoint(x), FactorPoint(y));
    return v.value() + ((x - x0).squaredNorm() - (y - y0).squaredNorm()) / (2.0 * tau);
  };
  auto duality_gap = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd ybar = best_y(x, y);   // max side at fixed x
    const Eigen::VectorXd xbar = best_x(y, x);   // min side at fixed y
    const double upper = reg_value(x, ybar);
    const double lower = reg_value(xbar, y);
    return std::max(0.0, upper - lower);
  };

  Eigen::VectorXd x = x0, y = y0;
  if (!obj.f().in_domain(x)) x = obj.f().prox(x, 1.0);
  if (!obj.g().in_domain(y)) y = obj.g().prox(y, 1.0);

  int iters = 0;
  std::string method = "alternating-prox";
  double prev_res = -1.0;
  int stall_count = 0;
  double gap = duality_gap(x, y);

  // Phase 1: damped alternating partial prox steps (damping 1/2).
  while (gap > gap_target && iters < max_iter && method == "alternating-prox") {
    for (int burst = 0; burst < 10 && iters < max_iter; ++burst, ++iters) {
      const Eigen::VectorXd xn = best_x(y, x);
      const Eigen::VectorXd xd = x + 0.5 * (xn - x);
      const Eigen::VectorXd yn = best_y(xd, y);
      const Eigen::VectorXd yd = y + 0.5 * (yn - y);
      const double res = (xd - x).norm() + (yd - y).norm();
      if (prev_res >= 0.0 && res > 0.99 * prev_res)
        ++stall_count;
      else
        stall_count = 0;
      prev_res = res;
      x = xd;
      y = yd;
      if (stall_count >= 10) {
        method = "alternating-prox+extragradient";
        break;
      }
    }
    gap = duality_gap(x, y);
  }

  // Phase 2 (fallback): forward-backward extragradient on the regularized
  // monotone field, step 1/(2 Lhat) with Lhat = 2 * |K| (safety factor 2).
  if (gap > gap_target && iters < max_iter) {
    Eigen::MatrixXd K(dx + dy, dx + dy);
    K.topLeftCorner(dx, dx) = Qx;
    K.topRightCorner(dx, dy) = q.C();
    K.bottomLeftCorner(dy, dx) = -q.C().transpose();
    K.bottomRightCorner(dy, dy) = Qy;
    const double Lhat = 2.0 * K.jacobiSvd().singularValues()(0);
    const double eta = 1.0 / (2.0 * Lhat);
    auto field = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& yy) {
      auto [gx, gy] = q.partial_gradients(FactorPoint(xx), FactorPoint(yy));
      gx += (xx - x0) / tau;
      gy -= (yy - y0) / tau;
      return std::make_pair(gx, gy);
    };
    while (gap > gap_target && iters < max_iter) {
      for (int burst = 0; burst < 50 && iters < max_iter; ++burst, ++iters) {
        auto [gx, gy] = field(x, y);
        const Eigen::VectorXd xh = obj.f().prox(x - eta * gx, eta);
        const Eigen::VectorXd yh = obj.g().prox(y + eta * gy, eta);
        auto [hx, hy] = field(xh, yh);
        x = obj.f().prox(x - eta * hx, eta);
        y = obj.g().prox(y + eta * hy, eta);
      }
      gap = duality_gap(x, y);
    }
  }

  if (gap > gap_target) throw NoConvergence(gap, iters, "composite resolvent");

  ResolventResult r;
  r.point = make_hilbert_point(x, y);
  r.gap = gap;
  r.gap_target = gap_target;
  r.iterations = iters;
  r.method = method;
  return r;
}

ProductPoint brute_force_saddle(const BivariateObjective& obj, double x_lo, double x_hi, double y_lo,
                                double y_hi) {
  if (obj.backend() != BackendTag::hilbert)
    throw DimensionTooLarge("brute-force saddle oracle supports only 1-D Hilbert factors");
  {
    std::mt19937_64 probe(0);
    if (as_vector(obj.sample_x(probe)).size() != 1 || as_vector(obj.sample_y(probe)).size() != 1)
      throw DimensionTooLarge("brute-force saddle oracle supports only 1-D x 1-D objectives");
  }
  const int grid = 120;
  double xl = x_lo, xh = x_hi, yl = y_lo, yh = y_hi;
  double bx = 0.5 * (xl + xh), by = 0.5 * (yl + yh);
  auto eval = [&](double xx, double yy) {
    Eigen::VectorXd xv(1), yv(1);
    xv(0) = xx;
    yv(0) = yy;
    return obj.evaluate(FactorPoint(xv), FactorPoint(yv));
  };
  while (std::max(xh - xl, yh - yl) > 1e-9) {
    double best_outer = 0.0;
    bool first_x = true;
    for (int i = 0; i <= grid; ++i) {
      const double xx = xl + (xh - xl) * i / grid;
      ExtendedReal inner = ExtendedReal::minus_infinity();
      double inner_arg = by;
      for (int j = 0; j <= grid; ++j) {
        const double yy = yl + (yh - yl) * j / grid;
        const ExtendedReal v = eval(xx, yy);
        if (v > inner) {
          inner = v;
          inner_arg = yy;
        }
      }
      if (inner.is_finite() && (first_x || inner.value() < best_outer)) {
        best_outer = inner.value();
        bx = xx;
        by = inner_arg;
        first_x = false;
      }
    }
    if (first_x) throw Error("brute-force saddle: objective is infinite on the whole box");
    // Zoom to +-2 grid cells around the incumbent.
    const double wx = 2.0 * (xh - xl) / grid, wy = 2.0 * (yh - yl) / grid;
    xl = std::max(x_lo, bx - wx);
    xh = std::min(x_hi, bx + wx);
    yl = std::max(y_lo, by - wy);
    yh = std::min(y_hi, by + wy);
  }
  Eigen::VectorXd xv(1), yv(1);
  xv(0) = bx;
  yv(0) = by;
  return make_hilbert_point(xv, yv);
}

}  // namespace gdaflow

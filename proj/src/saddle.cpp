#include "gdaflow/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "gdaflow/core.hpp"
#include "gdaflow/errors.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/quadratic_view.hpp"
#include "gdaflow/random.hpp"
#include "gdaflow/wasserstein1d.hpp"

namespace gdaflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const BivariateObjective& objective_of(const SaddleProblem& p) {
  if (p.objective == nullptr) throw Error("saddle problem has no objective");
  return *p.objective;
}

// argmin_u 1/2 u^T M u + lin^T u (+ handle); nullopt when unbounded below.
// Without a handle the minimizer comes from an eigendecomposition and
// unbounded directions are detected exactly; a zero-curvature problem over a
// box handle is a linear program solved at a corner; otherwise a handle needs
// a strongly convex smooth part and a proximal-gradient solve is used.
std::optional<Eigen::VectorXd> structured_min(const Eigen::MatrixXd& M, const Eigen::VectorXd& lin,
                                              const ProxHandle* handle,
                                              const Eigen::VectorXd& warm) {
  if (handle != nullptr && handle->kind != ProxHandle::Kind::none) {
    if (handle->kind == ProxHandle::Kind::box &&
        (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0)) {
      Eigen::VectorXd u(lin.size());
      for (Eigen::Index i = 0; i < lin.size(); ++i) {
        if (lin(i) > 0.0)
          u(i) = handle->lower(i);
        else if (lin(i) < 0.0)
          u(i) = handle->upper(i);
        else
          u(i) = std::min(std::max(0.0, handle->lower(i)), handle->upper(i));
        if (!std::isfinite(u(i))) return std::nullopt;  // linear drift along an unbounded face
      }
      return u;
    }
    return prox_quadratic_minimize(M, lin, *handle, warm);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd& d = es.eigenvalues();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const Eigen::VectorXd rc = es.eigenvectors().transpose() * (-lin);
  Eigen::VectorXd uc(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -1e-10 * scale) return std::nullopt;  // negative curvature
    if (d(i) <= 1e-10 * scale) {
      if (std::abs(rc(i)) > 1e-9 * (1.0 + lin.norm())) return std::nullopt;  // flat with drift
      uc(i) = 0.0;
    } else {
      uc(i) = rc(i) / d(i);
    }
  }
  return es.eigenvectors() * uc;
}

// sup_{y'} phi(x, y') over the set the handle encodes; +inf when unbounded.
double view_sup_y(const QuadraticView& v, const BivariateObjective& obj, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y_warm) {
  const Eigen::VectorXd lin = v.b - v.C.transpose() * x;
  const auto ybar = structured_min(v.B, lin, v.g, y_warm);
  if (!ybar) return kInf;
  return obj.evaluate(FactorPoint(x), FactorPoint(*ybar)).value();
}

// inf_{x'} phi(x', y); -inf when unbounded.
double view_inf_x(const QuadraticView& v, const BivariateObjective& obj, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& x_warm) {
  const Eigen::VectorXd lin = v.a + v.C * y;
  const auto xbar = structured_min(v.A, lin, v.f, x_warm);
  if (!xbar) return -kInf;
  return obj.evaluate(FactorPoint(*xbar), FactorPoint(y)).value();
}

double view_gap(const QuadraticView& v, const BivariateObjective& obj, const Eigen::VectorXd& x,
                const Eigen::VectorXd& y) {
  const double upper = view_sup_y(v, obj, x, y);
  const double lower = view_inf_x(v, obj, y, x);
  if (!std::isfinite(upper) || !std::isfinite(lower)) return kInf;
  return std::max(0.0, upper - lower);
}

// Largest sampled ratio |F(z1) - F(z2)| / |z1 - z2| of a gradient field,
// times the safety factor 2. Deterministic: fixed seed, fixed pair count.
template <typename Field>
double sampled_lipschitz(const BivariateObjective& obj, Field&& field, bool simplex_geometry) {
  std::mt19937_64 rng(0x715AD1E5u);
  double worst = 1e-12;
  for (int k = 0; k < 16; ++k) {
    const FactorPoint x1 = obj.sample_x(rng), x2 = obj.sample_x(rng);
    const FactorPoint y1 = obj.sample_y(rng), y2 = obj.sample_y(rng);
    const auto [fx1, fy1] = field(x1, y1);
    const auto [fx2, fy2] = field(x2, y2);
    const Eigen::VectorXd dfx = fx1 - fx2, dfy = fy1 - fy2;
    double num, den;
    if (simplex_geometry) {
      num = std::max(dfx.cwiseAbs().maxCoeff(), dfy.cwiseAbs().maxCoeff());
      den = (as_measure(x1).weights() - as_measure(x2).weights()).cwiseAbs().sum() +
            (as_measure(y1).weights() - as_measure(y2).weights()).cwiseAbs().sum();
    } else {
      num = std::sqrt(dfx.squaredNorm() + dfy.squaredNorm());
      den = std::sqrt((as_vector(x1) - as_vector(x2)).squaredNorm() +
                      (as_vector(y1) - as_vector(y2)).squaredNorm());
    }
    if (den > 1e-12) worst = std::max(worst, num / den);
  }
  return 2.0 * worst;
}

void check_feasible(const SaddleProblem& problem, const ProductPoint& z) {
  const BivariateObjective& obj = objective_of(problem);
  if (!problem.set_x.contains(z.x) || !problem.set_y.contains(z.y))
    throw Infeasible("query point is outside the feasible sets");
  if (!obj.in_domain_x(z.x) || !obj.in_domain_y(z.y))
    throw Infeasible("query point is outside the objective's domain");
}

// Multi-start projected/mirror gradient bound for objectives without exploitable
// structure. The result only bounds the restricted gap from below.
NiGapBound fallback_gap(const SaddleProblem& problem, const ProductPoint& z) {
  const BivariateObjective& obj = objective_of(problem);
  if (!obj.has_partial_gradients())
    throw Error("restricted gap fallback requires first-order information");
  std::mt19937_64 rng(0xFA11BACCu);

  auto ascend = [&](const FactorPoint& fixed_x, FactorPoint y0, double eta) {
    for (int k = 0; k < 1500; ++k) {
      Eigen::VectorXd gy;
      try {
        gy = obj.partial_gradients(fixed_x, y0).second;
      } catch (const NotDifferentiable&) {
        break;
      }
      if (problem.set_y.kind == FeasibleSet::Kind::simplex) {
        const GridMeasure& m = as_measure(y0);
        Eigen::VectorXd lw = m.weights().array().max(1e-300).log() + eta * gy.array();
        lw.array() -= lw.maxCoeff();
        Eigen::VectorXd w = lw.array().exp();
        w /= w.sum();
        y0 = FactorPoint(m.with_weights(w));
      } else {
        Eigen::VectorXd v = as_vector(y0) + eta * gy;
        if (problem.set_y.kind == FeasibleSet::Kind::box)
          v = v.cwiseMax(problem.set_y.lower).cwiseMin(problem.set_y.upper);
        y0 = FactorPoint(std::move(v));
      }
    }
    return obj.evaluate(fixed_x, y0).value();
  };
  auto descend = [&](FactorPoint x0, const FactorPoint& fixed_y, double eta) {
    for (int k = 0; k < 1500; ++k) {
      Eigen::VectorXd gx;
      try {
        gx = obj.partial_gradients(x0, fixed_y).first;
      } catch (const NotDifferentiable&) {
        break;
      }
      if (problem.set_x.kind == FeasibleSet::Kind::simplex) {
        const GridMeasure& m = as_measure(x0);
        Eigen::VectorXd lw = m.weights().array().max(1e-300).log() - eta * gx.array();
        lw.array() -= lw.maxCoeff();
        Eigen::VectorXd w = lw.array().exp();
        w /= w.sum();
        x0 = FactorPoint(m.with_weights(w));
      } else {
        Eigen::VectorXd v = as_vector(x0) - eta * gx;
        if (problem.set_x.kind == FeasibleSet::Kind::box)
          v = v.cwiseMax(problem.set_x.lower).cwiseMin(problem.set_x.upper);
        x0 = FactorPoint(std::move(v));
      }
    }
    return obj.evaluate(x0, fixed_y).value();
  };

  auto field = [&](const FactorPoint& x, const FactorPoint& y) { return obj.partial_gradients(x, y); };
  const double lhat =
      sampled_lipschitz(obj, field, problem.set_x.kind == FeasibleSet::Kind::simplex);
  const double eta = 1.0 / (2.0 * lhat);

  double upper = obj.evaluate(z.x, z.y).value();
  double lower = upper;
  for (int s = 0; s < 8; ++s) {
    const FactorPoint ys = s == 0 ? z.y : obj.sample_y(rng);
    const FactorPoint xs = s == 0 ? z.x : obj.sample_x(rng);
    upper = std::max(upper, ascend(z.x, ys, eta));
    lower = std::min(lower, descend(xs, z.y, eta));
  }
  return {std::max(0.0, upper - lower), false};
}

}  // namespace

FeasibleSet FeasibleSet::make_box(Eigen::VectorXd lo, Eigen::VectorXd up) {
  if (lo.size() != up.size()) throw Error("box bounds disagree in dimension");
  FeasibleSet s;
  s.kind = Kind::box;
  s.lower = std::move(lo);
  s.upper = std::move(up);
  return s;
}

bool FeasibleSet::contains(const FactorPoint& p, double tol) const {
  switch (kind) {
    case Kind::whole_space:
      return factor_backend(p) == BackendTag::hilbert;
    case Kind::box: {
      if (factor_backend(p) != BackendTag::hilbert) return false;
      const Eigen::VectorXd& v = as_vector(p);
      if (v.size() != lower.size()) return false;
      return (v.array() >= lower.array() - tol).all() && (v.array() <= upper.array() + tol).all();
    }
    case Kind::simplex:
      // GridMeasure construction already enforces nonnegative weights of mass one.
      return factor_backend(p) == BackendTag::wasserstein1d;
  }
  return false;
}

SaddleProblem SaddleProblem::for_objective(const BivariateObjective& obj) {
  SaddleProblem p;
  p.objective = &obj;
  if (obj.backend() == BackendTag::wasserstein1d) {
    p.set_x = FeasibleSet::make_simplex();
    p.set_y = FeasibleSet::make_simplex();
    return p;
  }
  const BivariateObjective* core = &obj;
  if (const auto* r = dynamic_cast<const RegularizedObjective*>(core)) core = &r->base();
  if (const auto* c = dynamic_cast<const CompositeSaddleObjective*>(core)) {
    if (c->f().kind == ProxHandle::Kind::box)
      p.set_x = FeasibleSet::make_box(c->f().lower, c->f().upper);
    if (c->g().kind == ProxHandle::Kind::box)
      p.set_y = FeasibleSet::make_box(c->g().lower, c->g().upper);
  }
  return p;
}

NiGapBound restricted_ni_gap(const SaddleProblem& problem, const ProductPoint& z) {
  const BivariateObjective& obj = objective_of(problem);
  check_feasible(problem, z);

  if (const auto* e = dynamic_cast<const EntropicBilinearObjective*>(&obj))
    return {e->exact_ni_gap(as_measure(z.x), as_measure(z.y)), true};

  QuadraticView v;
  if (try_quadratic_view(obj, v)) {
    // The structured path restricts to the sets the prox handles encode. A
    // box set over a side whose handle is absent or itself a box is folded
    // into a synthesized (intersected) box handle; only box sets colliding
    // with an l1 handle are left to the flagged fallback.
    ProxHandle synth_f, synth_g;
    bool x_ok = problem.set_x.kind == FeasibleSet::Kind::whole_space;
    bool y_ok = problem.set_y.kind == FeasibleSet::Kind::whole_space;
    if (problem.set_x.kind == FeasibleSet::Kind::box) {
      if (v.f == nullptr || v.f->kind == ProxHandle::Kind::none) {
        synth_f = ProxHandle::make_box(problem.set_x.lower, problem.set_x.upper);
        v.f = &synth_f;
        x_ok = true;
      } else if (v.f->kind == ProxHandle::Kind::box) {
        synth_f = ProxHandle::make_box(problem.set_x.lower.cwiseMax(v.f->lower),
                                       problem.set_x.upper.cwiseMin(v.f->upper));
        v.f = &synth_f;
        x_ok = true;
      }
    } else if (v.f != nullptr && v.f->kind == ProxHandle::Kind::box) {
      x_ok = true;
    }
    if (problem.set_y.kind == FeasibleSet::Kind::box) {
      if (v.g == nullptr || v.g->kind == ProxHandle::Kind::none) {
        synth_g = ProxHandle::make_box(problem.set_y.lower, problem.set_y.upper);
        v.g = &synth_g;
        y_ok = true;
      } else if (v.g->kind == ProxHandle::Kind::box) {
        synth_g = ProxHandle::make_box(problem.set_y.lower.cwiseMax(v.g->lower),
                                       problem.set_y.upper.cwiseMin(v.g->upper));
        v.g = &synth_g;
        y_ok = true;
      }
    } else if (v.g != nullptr && v.g->kind == ProxHandle::Kind::box) {
      y_ok = true;
    }
    if (x_ok && y_ok) {
      try {
        return {view_gap(v, obj, as_vector(z.x), as_vector(z.y)), true};
      } catch (const SingularSystem&) {
        // Singular curvature over a synthesized box: no structured solve.
      }
    }
  }
  return fallback_gap(problem, z);
}

SaddleCertificate solve_saddle(const SaddleProblem& problem, double tol, int max_iter,
                               std::vector<double>* gap_history) {
  const BivariateObjective& obj = objective_of(problem);
  const double lambda = obj.modulus().lambda;
  if (!(lambda > 0.0))
    throw NotStronglyConvexConcave("solve_saddle requires a positive modulus, got " +
                                   detail::fmt_g(lambda));

  if (obj.backend() == BackendTag::wasserstein1d) {
    const auto* ent = dynamic_cast<const EntropicBilinearObjective*>(&obj);
    if (ent == nullptr)
      throw Error("solve_saddle supports entropic objectives on the grid-measure backend");
    const Eigen::MatrixXd& ell = ent->kernel();
    const Eigen::VectorXd rx = ent->reference_x().weights();
    const Eigen::VectorXd ry = ent->reference_y().weights();
    const double beta = ent->beta();
    const Eigen::Index m = rx.size(), n = ry.size();

    // Step size from the coupling part only; the entropy terms are handled
    // exactly inside the prox step.
    auto coupling_field = [&](const FactorPoint& x, const FactorPoint& y) {
      const Eigen::VectorXd fx = ell * as_measure(y).weights();
      const Eigen::VectorXd fy = ell.transpose() * as_measure(x).weights();
      return std::pair<Eigen::VectorXd, Eigen::VectorXd>(fx, fy);
    };
    const double lhat = sampled_lipschitz(obj, coupling_field, true);
    const double eta = 1.0 / (2.0 * lhat);

    GridMeasure mu = ent->reference_x().with_weights(Eigen::VectorXd::Constant(m, 1.0 / double(m)));
    GridMeasure nu = ent->reference_y().with_weights(Eigen::VectorXd::Constant(n, 1.0 / double(n)));
    double best_gap = kInf;
    GridMeasure best_mu = mu, best_nu = nu;
    for (int it = 0; it < max_iter; ++it) {
      const double gap = ent->exact_ni_gap(mu, nu);
      if (gap_history != nullptr) gap_history->push_back(gap);
      if (gap < best_gap) {
        best_gap = gap;
        best_mu = mu;
        best_nu = nu;
      }
      if (gap <= tol)
        return {ProductPoint(FactorPoint(mu), FactorPoint(nu)), gap, it, "entropic-mirror-prox"};

      const Eigen::VectorXd cx = ell * nu.weights();
      const Eigen::VectorXd cy = -(ell.transpose() * mu.weights());
      const GridMeasure mu_h = mu.with_weights(entropic_prox_step(cx, rx, mu.weights(), beta, eta));
      const GridMeasure nu_h = nu.with_weights(entropic_prox_step(cy, ry, nu.weights(), beta, eta));
      const Eigen::VectorXd hx = ell * nu_h.weights();
      const Eigen::VectorXd hy = -(ell.transpose() * mu_h.weights());
      mu = mu.with_weights(entropic_prox_step(hx, rx, mu.weights(), beta, eta));
      nu = nu.with_weights(entropic_prox_step(hy, ry, nu.weights(), beta, eta));
    }
    throw NoConvergence(best_gap, max_iter, "solve_saddle");
  }

  QuadraticView v;
  if (!try_quadratic_view(obj, v))
    throw Error("solve_saddle requires quadratic structure or an entropic objective");
  const Eigen::Index dx = v.A.rows(), dy = v.B.rows();

  auto smooth_field = [&](const FactorPoint& x, const FactorPoint& y) {
    const Eigen::VectorXd& xv = as_vector(x);
    const Eigen::VectorXd& yv = as_vector(y);
    const Eigen::VectorXd gx = v.A * xv + v.a + v.C * yv;
    const Eigen::VectorXd gy = v.C.transpose() * xv - v.B * yv - v.b;
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(gx, -gy);
  };
  const double lhat = sampled_lipschitz(obj, smooth_field, false);
  const double eta = 1.0 / (2.0 * lhat);

  auto project_x = [&](Eigen::VectorXd u) {
    if (v.f != nullptr && v.f->kind != ProxHandle::Kind::none) return v.f->prox(u, eta);
    if (problem.set_x.kind == FeasibleSet::Kind::box)
      return Eigen::VectorXd(u.cwiseMax(problem.set_x.lower).cwiseMin(problem.set_x.upper));
    return u;
  };
  auto project_y = [&](Eigen::VectorXd u) {
    if (v.g != nullptr && v.g->kind != ProxHandle::Kind::none) return v.g->prox(u, eta);
    if (problem.set_y.kind == FeasibleSet::Kind::box)
      return Eigen::VectorXd(u.cwiseMax(problem.set_y.lower).cwiseMin(problem.set_y.upper));
    return u;
  };

  const bool has_handles = (v.f != nullptr && v.f->kind != ProxHandle::Kind::none) ||
                           (v.g != nullptr && v.g->kind != ProxHandle::Kind::none);
  const int check_every = has_handles ? 10 : 1;  // prox best responses are costlier

  Eigen::VectorXd x = project_x(Eigen::VectorXd::Zero(dx));
  Eigen::VectorXd y = project_y(Eigen::VectorXd::Zero(dy));
  double best_gap = kInf;
  Eigen::VectorXd best_x = x, best_y = y;
  for (int it = 0; it < max_iter; ++it) {
    if (it % check_every == 0) {
      const double gap = view_gap(v, obj, x, y);
      if (gap_history != nullptr) gap_history->push_back(gap);
      if (gap < best_gap) {
        best_gap = gap;
        best_x = x;
        best_y = y;
      }
      if (gap <= tol)
        return {ProductPoint(FactorPoint(x), FactorPoint(y)), gap, it, "extragradient"};
    }
    Eigen::VectorXd gx = v.A * x + v.a + v.C * y;
    Eigen::VectorXd gy = v.C.transpose() * x - v.B * y - v.b;
    const Eigen::VectorXd xh = project_x(x - eta * gx);
    const Eigen::VectorXd yh = project_y(y + eta * gy);
    gx = v.A * xh + v.a + v.C * yh;
    gy = v.C.transpose() * xh - v.B * yh - v.b;
    x = project_x(x - eta * gx);
    y = project_y(y + eta * gy);
  }
  throw NoConvergence(best_gap, max_iter, "solve_saddle");
}

SaddleCertificate nested_saddle(const SaddleProblem& problem, double tol) {
  const BivariateObjective& obj = objective_of(problem);
  if (obj.backend() != BackendTag::hilbert)
    throw OuterDimensionTooLarge("nested solver supports Hilbert objectives with 1-D y");
  QuadraticView v;
  if (!try_quadratic_view(obj, v)) throw Error("nested solver requires quadratic structure");
  if (v.B.rows() != 1) throw OuterDimensionTooLarge();
  const double lambda = obj.modulus().lambda;
  if (!(lambda > 0.0))
    throw NotStronglyConvexConcave("nested solver requires a positive modulus, got " +
                                   detail::fmt_g(lambda));

  int evals = 0;
  Eigen::VectorXd x_warm = Eigen::VectorXd::Zero(v.A.rows());
  auto inner_argmin = [&](double yval) {
    const Eigen::VectorXd y1 = Eigen::VectorXd::Constant(1, yval);
    const auto xbar = structured_min(v.A, v.a + v.C * y1, v.f, x_warm);
    if (!xbar) throw Error("nested inner minimization is unbounded");
    x_warm = *xbar;
    return *xbar;
  };
  // Concave marginal value g(y) = inf_x phi(x, y); -inf outside the y-domain.
  auto marginal = [&](double yval) {
    ++evals;
    const Eigen::VectorXd y1 = Eigen::VectorXd::Constant(1, yval);
    if (!obj.in_domain_y(FactorPoint(y1))) return -kInf;
    const ExtendedReal val = obj.evaluate(FactorPoint(inner_argmin(yval)), FactorPoint(y1));
    return val.is_finite() ? val.value() : -kInf;
  };

  // Bracket the maximizer by doubling steps, then shrink by golden section.
  double xa = -1.0, xb = 0.0, xc = 1.0;
  double ga = marginal(xa), gb = marginal(xb), gc = marginal(xc);
  for (int guard = 0; !(gb >= ga && gb >= gc); ++guard) {
    if (guard > 200 || xc - xa > 1e12)
      throw Error("nested solver failed to bracket the maximizer");
    if (ga > gc) {
      xc = xb; gc = gb;
      xb = xa; gb = ga;
      xa = xb - 2.0 * (xc - xb);
      ga = marginal(xa);
    } else {
      xa = xb; ga = gb;
      xb = xc; gb = gc;
      xc = xb + 2.0 * (xb - xa);
      gc = marginal(xc);
    }
  }
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = xa, hi = xc;
  double m1 = hi - golden * (hi - lo), m2 = lo + golden * (hi - lo);
  double f1 = marginal(m1), f2 = marginal(m2);
  // Shrink to 1% of the distance scale the gap tolerance certifies.
  const double width_tol =
      std::max(1e-12, std::min(1e-8, 0.01 * std::sqrt(2.0 * tol / lambda)));
  while (hi - lo > width_tol) {
    if (f1 >= f2) {
      hi = m2; m2 = m1; f2 = f1;
      m1 = hi - golden * (hi - lo);
      f1 = marginal(m1);
    } else {
      lo = m1; m1 = m2; f1 = f2;
      m2 = lo + golden * (hi - lo);
      f2 = marginal(m2);
    }
  }
  const double ystar = 0.5 * (lo + hi);
  const Eigen::VectorXd xstar = inner_argmin(ystar);
  ProductPoint point(FactorPoint(xstar), FactorPoint(Eigen::VectorXd::Constant(1, ystar)));
  const NiGapBound gap = restricted_ni_gap(problem, point);
  return {std::move(point), gap.value, evals, "nested-golden-section"};
}

}  // namespace gdaflow

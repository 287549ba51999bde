#include "gdaflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "gdaflow/core.hpp"
#include "gdaflow/hilbert.hpp"
#include "gdaflow/wasserstein1d.hpp"

namespace gdaflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeasibleSet intersect_with_box(const FeasibleSet& set, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& up) {
  switch (set.kind) {
    case FeasibleSet::Kind::whole_space:
      return FeasibleSet::make_box(lo, up);
    case FeasibleSet::Kind::box:
      if (lo.size() != set.lower.size())
        throw Error("diagnostics box dimension does not match the feasible set");
      return FeasibleSet::make_box(set.lower.cwiseMax(lo), set.upper.cwiseMin(up));
    case FeasibleSet::Kind::simplex:
      return set;  // the simplex is already compact; the box is ignored
  }
  throw Error("unknown feasible-set kind");
}

// phi(x, y') - phi(x', y); nullopt when either value is infinite (an infinite
// numerator never tightens a slope lower bound built from finite probes).
std::optional<double> cross_difference(const BivariateObjective& obj, const ProductPoint& z,
                                       const FactorPoint& xp, const FactorPoint& yp) {
  const ExtendedReal up = obj.evaluate(z.x, yp);
  const ExtendedReal low = obj.evaluate(xp, z.y);
  if (!up.is_finite() || !low.is_finite()) return std::nullopt;
  return up.value() - low.value();
}

// Unit directions in R^dim: signed coordinate axes first, then seeded
// standard-normal draws, `count` in total.
std::vector<Eigen::VectorXd> unit_directions(Eigen::Index dim, int count, std::mt19937_64& rng) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(count);
  for (Eigen::Index i = 0; i < dim && (int)dirs.size() < count; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(i) = 1.0;
    dirs.push_back(e);
    if ((int)dirs.size() < count) dirs.push_back(-e);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  while ((int)dirs.size() < count) {
    Eigen::VectorXd u(dim);
    for (Eigen::Index i = 0; i < dim; ++i) u(i) = normal(rng);
    const double nrm = u.norm();
    if (nrm > 1e-12) dirs.push_back(u / nrm);
  }
  return dirs;
}

// Sum-zero weight directions for a joint simplex perturbation (dim = m + n):
// projected signed axes first, then projected normals, normalized in l2.
std::vector<Eigen::VectorXd> simplex_directions(Eigen::Index m, Eigen::Index n, int count,
                                                std::mt19937_64& rng) {
  const Eigen::Index dim = m + n;
  auto project = [&](Eigen::VectorXd u) -> std::optional<Eigen::VectorXd> {
    u.head(m).array() -= u.head(m).mean();
    u.tail(n).array() -= u.tail(n).mean();
    const double nrm = u.norm();
    if (nrm <= 1e-12) return std::nullopt;
    return Eigen::VectorXd(u / nrm);
  };
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(count);
  for (Eigen::Index i = 0; i < dim && (int)dirs.size() < count; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(i) = 1.0;
    if (auto p = project(e)) {
      dirs.push_back(*p);
      if ((int)dirs.size() < count) dirs.push_back(-*p);
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  while ((int)dirs.size() < count) {
    Eigen::VectorXd u(dim);
    for (Eigen::Index i = 0; i < dim; ++i) u(i) = normal(rng);
    if (auto p = project(u)) dirs.push_back(*p);
  }
  return dirs;
}

// Largest c in [0, 1] keeping w + c * step elementwise nonnegative.
double feasible_fraction(const Eigen::VectorXd& w, const Eigen::VectorXd& step) {
  double c = 1.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (step(i) < 0.0) c = std::min(c, w(i) / (-step(i)));
  return std::max(0.0, c);
}

GridMeasure shifted_measure(const GridMeasure& base, const Eigen::VectorXd& step) {
  Eigen::VectorXd w = (base.weights() + step).cwiseMax(0.0);
  return base.with_weights(std::move(w));
}

double sampled_local_slope(const BivariateObjective& obj, const ProductPoint& z,
                           std::uint64_t seed) {
  constexpr double kRadii[] = {1e-2, 1e-3, 1e-4};
  constexpr int kDirections = 64;
  std::mt19937_64 rng(seed ^ 0x510be57u);
  double best = 0.0;

  if (obj.backend() == BackendTag::hilbert) {
    const Eigen::VectorXd& x = as_vector(z.x);
    const Eigen::VectorXd& y = as_vector(z.y);
    const Eigen::Index dx = x.size(), dy = y.size();
    const auto dirs = unit_directions(dx + dy, kDirections, rng);
    for (double r : kRadii) {
      for (const auto& u : dirs) {
        const FactorPoint xp(Eigen::VectorXd(x + r * u.head(dx)));
        const FactorPoint yp(Eigen::VectorXd(y + r * u.tail(dy)));
        if (const auto num = cross_difference(obj, z, xp, yp); num && *num > 0.0)
          best = std::max(best, *num / r);
      }
    }
    return best;
  }

  const GridMeasure& mx = as_measure(z.x);
  const GridMeasure& my = as_measure(z.y);
  const Eigen::Index m = mx.size(), n = my.size();
  const auto dirs = simplex_directions(m, n, kDirections, rng);
  for (double r : kRadii) {
    for (const auto& u : dirs) {
      Eigen::VectorXd step = r * u;
      const double cx = feasible_fraction(mx.weights(), step.head(m));
      const double cy = feasible_fraction(my.weights(), step.tail(n));
      const double c = std::min(cx, cy);
      if (c <= 1e-14) continue;
      const FactorPoint xp(shifted_measure(mx, c * step.head(m)));
      const FactorPoint yp(shifted_measure(my, c * step.tail(n)));
      const ProductPoint zp(xp, yp);
      const double dist = std::sqrt(product_distance_sq(zp, z));
      if (dist <= 1e-15) continue;
      if (const auto num = cross_difference(obj, z, xp, yp); num && *num > 0.0)
        best = std::max(best, *num / dist);
    }
  }
  return best;
}

// Largest admissible radius along u from z inside the box (0 when z already
// violates the box in a direction u moves further out).
double admissible_radius(const ProductPoint& z, const Eigen::VectorXd& u, const ProductBox& box) {
  const Eigen::VectorXd& x = as_vector(z.x);
  const Eigen::VectorXd& y = as_vector(z.y);
  const Eigen::Index dx = x.size();
  double t = kInf;
  auto clip = [&t](double coord, double dir, double lo, double up) {
    if (dir > 0.0)
      t = std::min(t, (up - coord) / dir);
    else if (dir < 0.0)
      t = std::min(t, (coord - lo) / (-dir));
  };
  for (Eigen::Index i = 0; i < dx; ++i) clip(x(i), u(i), box.lower_x(i), box.upper_x(i));
  for (Eigen::Index j = 0; j < y.size(); ++j)
    clip(y(j), u(dx + j), box.lower_y(j), box.upper_y(j));
  return std::max(0.0, t);
}

// ((phi(x,y') - phi(x',y)) / d + (lambda/2) d)^+ at a concrete probe.
std::optional<double> slope_quotient(const BivariateObjective& obj, const ProductPoint& z,
                                     const ProductPoint& zp, double lambda) {
  const double dist = std::sqrt(product_distance_sq(zp, z));
  if (dist <= 1e-14) return std::nullopt;
  const auto num = cross_difference(obj, z, zp.x, zp.y);
  if (!num) return std::nullopt;
  return std::max(0.0, *num / dist + 0.5 * lambda * dist);
}

SlopeEstimate quadratic_global_slope(const QuadraticSaddleObjective& quad, const ProductPoint& z,
                                     double lambda, const ProductBox& box, std::uint64_t seed) {
  const Eigen::Index dx = quad.dim_x(), dy = quad.dim_y();
  const auto [gx, gy] = quad.partial_gradients(z.x, z.y);
  const double local = std::sqrt(gx.squaredNorm() + gy.squaredNorm());

  std::mt19937_64 rng(seed ^ 0x9105ba1u);
  auto dirs = unit_directions(dx + dy, 64, rng);
  if (local > 1e-12) {
    // The ascent direction (-grad_x, grad_y) realizes the local slope as the
    // radial value at radius 0+.
    Eigen::VectorXd u(dx + dy);
    u.head(dx) = -gx;
    u.tail(dy) = gy;
    dirs.push_back(u / local);
  }

  // Along z' = z + t u the slope quotient is affine in t:
  //   a_u + t c_u,  a_u = <grad_y, u_y> - <grad_x, u_x>,
  //   c_u = lambda/2 - (u_x^T A u_x + u_y^T B u_y) / 2,
  // so each direction attains its supremum at a radial endpoint.
  double best = 0.0;
  for (const auto& u : dirs) {
    const double t_max = admissible_radius(z, u, box);
    if (t_max <= 0.0) continue;
    const Eigen::VectorXd ux = u.head(dx), uy = u.tail(dy);
    const double a_u = gy.dot(uy) - gx.dot(ux);
    const double c_u = 0.5 * lambda - 0.5 * (ux.dot(quad.A() * ux) + uy.dot(quad.B() * uy));
    best = std::max({best, a_u, a_u + t_max * c_u});
  }

  // With lambda at most the declared modulus every radial coefficient c_u is
  // nonpositive, so the supremum over the whole region is the local slope.
  const bool exact = lambda <= quad.modulus().lambda + 1e-12;
  if (exact) best = std::max(best, local);
  return {std::max(0.0, best), !exact};
}

SlopeEstimate sampled_global_slope(const BivariateObjective& obj, const ProductPoint& z,
                                   double lambda, const ProductBox& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x41efba1u);
  double best = 0.0;

  if (obj.backend() == BackendTag::hilbert) {
    if (box.lower_x.size() == 0 || !box.lower_x.allFinite() || !box.upper_x.allFinite() ||
        !box.lower_y.allFinite() || !box.upper_y.allFinite())
      throw Error("global slope needs a bounded search region");
    const Eigen::Index dx = box.lower_x.size(), dy = box.lower_y.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Uniform multi-start over the box.
    for (int s = 0; s < 256; ++s) {
      Eigen::VectorXd xp(dx), yp(dy);
      for (Eigen::Index i = 0; i < dx; ++i)
        xp(i) = box.lower_x(i) + unit(rng) * (box.upper_x(i) - box.lower_x(i));
      for (Eigen::Index j = 0; j < dy; ++j)
        yp(j) = box.lower_y(j) + unit(rng) * (box.upper_y(j) - box.lower_y(j));
      if (const auto v = slope_quotient(obj, z, ProductPoint(FactorPoint(xp), FactorPoint(yp)), lambda))
        best = std::max(best, *v);
    }

    // Radial probes down to small radii so the result dominates the local
    // slope wherever the objective is differentiable at z.
    auto dirs = unit_directions(dx + dy, 64, rng);
    try {
      const auto [gx, gy] = obj.partial_gradients(z.x, z.y);
      const double nrm = std::sqrt(gx.squaredNorm() + gy.squaredNorm());
      if (nrm > 1e-12) {
        Eigen::VectorXd u(dx + dy);
        u.head(dx) = -gx;
        u.tail(dy) = gy;
        dirs.push_back(u / nrm);
      }
    } catch (const NotDifferentiable&) {
    }
    const Eigen::VectorXd& x = as_vector(z.x);
    const Eigen::VectorXd& y = as_vector(z.y);
    for (const auto& u : dirs) {
      const double t_max = admissible_radius(z, u, box);
      if (t_max <= 0.0) continue;
      for (double f : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 1.0}) {
        const double t = f * t_max;
        const FactorPoint xp(Eigen::VectorXd(x + t * u.head(dx)));
        const FactorPoint yp(Eigen::VectorXd(y + t * u.tail(dy)));
        if (const auto v = slope_quotient(obj, z, ProductPoint(xp, yp), lambda))
          best = std::max(best, *v);
      }
    }
    return {best, true};
  }

  // Grid-measure backend: simplex corners are reached by sampled measures;
  // weight-segment interpolation toward z supplies intermediate radii and
  // sum-zero perturbations supply small ones.
  const GridMeasure& mx = as_measure(z.x);
  const GridMeasure& my = as_measure(z.y);
  const Eigen::Index m = mx.size(), n = my.size();
  for (int s = 0; s < 64; ++s) {
    const FactorPoint xs = obj.sample_x(rng);
    const FactorPoint ys = obj.sample_y(rng);
    for (double t : {1e-3, 1e-2, 0.1, 0.3, 1.0}) {
      const FactorPoint xp = interpolate_factor(z.x, xs, t);
      const FactorPoint yp = interpolate_factor(z.y, ys, t);
      if (const auto v = slope_quotient(obj, z, ProductPoint(xp, yp), lambda))
        best = std::max(best, *v);
    }
  }
  const auto dirs = simplex_directions(m, n, 32, rng);
  for (double r : {1e-3, 1e-2}) {
    for (const auto& u : dirs) {
      Eigen::VectorXd step = r * u;
      const double c = std::min(feasible_fraction(mx.weights(), step.head(m)),
                                feasible_fraction(my.weights(), step.tail(n)));
      if (c <= 1e-14) continue;
      const FactorPoint xp(shifted_measure(mx, c * step.head(m)));
      const FactorPoint yp(shifted_measure(my, c * step.tail(n)));
      if (const auto v = slope_quotient(obj, z, ProductPoint(xp, yp), lambda))
        best = std::max(best, *v);
    }
  }
  return {best, true};
}

void require_same_grid(const FlowTrajectory& a, const FlowTrajectory& b) {
  if (a.times.size() != b.times.size() || a.points.size() != b.points.size())
    throw GridMismatch();
  for (std::size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-12 * (1.0 + std::abs(a.times[k])))
      throw GridMismatch();
}

void require_uniform_grid(const FlowTrajectory& traj) {
  const auto& ts = traj.times;
  if (ts.size() != traj.points.size()) throw GridMismatch("trajectory times/points disagree");
  if (ts.size() < 2) return;
  const double tau = ts[1] - ts[0];
  for (std::size_t k = 1; k + 1 < ts.size(); ++k)
    if (std::abs(ts[k + 1] - ts[k] - tau) > 1e-9 * std::max(1.0, std::abs(tau)))
      throw GridMismatch("trajectory grid is not uniform");
}

// Shared integral-EVI machinery: per-pair residuals reduce to differences of
//   h_k = d^2(w_k, p)/2 - P_k,   P = trapezoidal prefix integral of g,
// so the worst pair per side comes from a running-minimum scan, and the
// per-row maxima (over pairs ending at that row) fall out of the same pass.
struct EviScan {
  EviIntegralReport report;
  std::vector<double> row_max;  // -inf where no pair ends
  int points_used = 0;
};

EviScan evi_scan(const BivariateObjective& obj, const FlowTrajectory& traj, double lambda,
                 const std::vector<ProductPoint>& test_points) {
  require_uniform_grid(traj);
  const auto& ts = traj.times;
  const int n = static_cast<int>(ts.size());
  EviScan out;
  out.row_max.assign(std::max(n, 0), -kInf);
  if (n < 2 || test_points.empty()) return out;

  std::vector<double> phi_traj(n);
  for (int k = 0; k < n; ++k)
    phi_traj[k] = obj.evaluate(traj.points[k].x, traj.points[k].y).value();

  std::vector<double> g(n), h(n);
  auto scan_side = [&](bool x_side, const ProductPoint& tp, double& violation, double& allowance) {
    for (int k = 0; k < n; ++k) {
      const ProductPoint& w = traj.points[k];
      double d2, cross;
      if (x_side) {
        const double d = factor_distance(w.x, tp.x);
        d2 = d * d;
        const ExtendedReal v = obj.evaluate(tp.x, w.y);
        if (!v.is_finite()) return false;
        cross = v.value() - phi_traj[k];
      } else {
        const double d = factor_distance(w.y, tp.y);
        d2 = d * d;
        const ExtendedReal v = obj.evaluate(w.x, tp.y);
        if (!v.is_finite()) return false;
        cross = phi_traj[k] - v.value();
      }
      g[k] = cross - 0.5 * lambda * d2;
      h[k] = 0.5 * d2;
    }
    double prefix = 0.0, h_scale = std::abs(h[0]);
    for (int k = 1; k < n; ++k) {
      prefix += 0.5 * (ts[k] - ts[k - 1]) * (g[k] + g[k - 1]);
      h[k] -= prefix;
      h_scale = std::max(h_scale, std::abs(h[k]));
    }
    double run_min = h[0];
    int run_idx = 0, best_i = 0, best_j = 1;
    double best = -kInf;
    for (int j = 1; j < n; ++j) {
      const double cand = h[j] - run_min;
      if (cand > best) {
        best = cand;
        best_i = run_idx;
        best_j = j;
      }
      out.row_max[j] = std::max(out.row_max[j], cand);
      if (h[j] < run_min) {
        run_min = h[j];
        run_idx = j;
      }
    }
    double second_diff = 0.0;
    for (int k = 1; k + 1 < n; ++k)
      second_diff = std::max(second_diff, std::abs(g[k + 1] - 2.0 * g[k] + g[k - 1]));
    violation = std::max(violation, best);
    allowance = std::max(allowance, (ts[best_j] - ts[best_i]) * second_diff / 8.0 +
                                        1e-12 * (1.0 + h_scale));
    return true;
  };

  for (const auto& tp : test_points) {
    if (!obj.in_domain_x(tp.x) || !obj.in_domain_y(tp.y)) continue;
    const bool okx = scan_side(true, tp, out.report.x_violation, out.report.x_allowance);
    const bool oky = scan_side(false, tp, out.report.y_violation, out.report.y_allowance);
    if (okx || oky) ++out.points_used;
  }
  return out;
}

}  // namespace

ProductBox ProductBox::cube(Eigen::Index dim_x, Eigen::Index dim_y, double half_width) {
  ProductBox b;
  b.lower_x = Eigen::VectorXd::Constant(dim_x, -half_width);
  b.upper_x = Eigen::VectorXd::Constant(dim_x, half_width);
  b.lower_y = Eigen::VectorXd::Constant(dim_y, -half_width);
  b.upper_y = Eigen::VectorXd::Constant(dim_y, half_width);
  return b;
}

bool ProductBox::contains(const ProductPoint& z, double tol) const {
  auto inside = [tol](const FactorPoint& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& up) {
    if (factor_backend(p) != BackendTag::hilbert) return true;  // simplex factors ignore the box
    const Eigen::VectorXd& v = as_vector(p);
    if (v.size() != lo.size()) return false;
    return (v.array() >= lo.array() - tol).all() && (v.array() <= up.array() + tol).all();
  };
  return inside(z.x, lower_x, upper_x) && inside(z.y, lower_y, upper_y);
}

NiGapBound ni_gap(const BivariateObjective& obj, const ProductPoint& z,
                  const std::optional<ProductBox>& box) {
  SaddleProblem problem = SaddleProblem::for_objective(obj);
  if (box) {
    problem.set_x = intersect_with_box(problem.set_x, box->lower_x, box->upper_x);
    problem.set_y = intersect_with_box(problem.set_y, box->lower_y, box->upper_y);
  }
  return restricted_ni_gap(problem, z);
}

SlopeEstimate local_slope(const BivariateObjective& obj, const ProductPoint& z, SlopeMode mode,
                          std::uint64_t seed) {
  if (mode == SlopeMode::sampled) return {sampled_local_slope(obj, z, seed), true};

  if (obj.backend() == BackendTag::wasserstein1d) {
    // On a fixed grid, moving mass epsilon costs Theta(sqrt(epsilon)) in W2
    // while objective differences stay O(epsilon); the defining limsup is 0
    // at every simplex point.
    return {0.0, false};
  }
  if (obj.has_exact_slope()) return {obj.exact_slope(z), false};
  if (obj.has_partial_gradients()) {
    const auto [gx, gy] = obj.partial_gradients(z.x, z.y);
    return {std::sqrt(gx.squaredNorm() + gy.squaredNorm()), false};
  }
  throw NotDifferentiable("objective provides no closed-form slope");
}

SlopeEstimate global_slope(const BivariateObjective& obj, const ProductPoint& z, double lambda,
                           const ProductBox& box, std::uint64_t seed) {
  if (const auto* quad = dynamic_cast<const QuadraticSaddleObjective*>(&obj))
    return quadratic_global_slope(*quad, z, lambda, box, seed);
  return sampled_global_slope(obj, z, lambda, box, seed);
}

double check_contraction(const FlowTrajectory& traj0, const FlowTrajectory& traj1, double lambda) {
  require_same_grid(traj0, traj1);
  const int n = static_cast<int>(traj0.times.size());
  if (n < 1) return -kInf;
  // violation(s, t) = d2_t - e^{-2 lambda (t - s)} d2_s maximizes, per t, the
  // running minimum of e^{2 lambda s} d2_s over s < t.
  double worst = -kInf;
  double run_min = kInf;
  for (int t = 0; t < n; ++t) {
    const double d2 = product_distance_sq(traj0.points[t], traj1.points[t]);
    if (t > 0) worst = std::max(worst, d2 - std::exp(-2.0 * lambda * traj0.times[t]) * run_min);
    run_min = std::min(run_min, std::exp(2.0 * lambda * traj0.times[t]) * d2);
  }
  return worst;
}

double max_pair_distance(const FlowTrajectory& traj0, const FlowTrajectory& traj1) {
  require_same_grid(traj0, traj1);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj0.points.size(); ++k)
    worst = std::max(worst, product_distance_sq(traj0.points[k], traj1.points[k]));
  return std::sqrt(worst);
}

double contraction_allowance(const ErrorBudget& budget0, const ErrorBudget& budget1, double lambda,
                             double max_observed_distance) {
  const double E = a_priori_error(budget0, budget0.T) + a_priori_error(budget1, budget1.T);
  const double D = max_observed_distance;
  const double T = std::min(budget0.T, budget1.T);
  const double F = std::max(1.0, std::exp(-2.0 * lambda * T));
  return 2.0 * E * (D + E) * (1.0 + F) + E * E + 1e-12 * (1.0 + D * D);
}

EviIntegralReport check_evi_integral(const BivariateObjective& obj, const FlowTrajectory& traj,
                                     double lambda, const std::vector<ProductPoint>& test_points) {
  return evi_scan(obj, traj, lambda, test_points).report;
}

NiDecayReport ni_decay_certificate(const BivariateObjective& obj, const FlowTrajectory& traj,
                                   double lambda, int s_index, const std::optional<ProductBox>& box,
                                   double scheme_allowance) {
  if (!(lambda > 0.0)) throw NonpositiveLambda(lambda);
  const int n = static_cast<int>(traj.times.size());
  if (s_index < 0 || s_index >= n) throw Error("decay certificate start index is out of range");

  NiDecayReport report;
  report.slope_start = local_slope(obj, traj.points[s_index], SlopeMode::exact_smooth).value;
  const double level = report.slope_start * report.slope_start / (2.0 * lambda);
  report.allowance = scheme_allowance + 1e-12 * (1.0 + level);
  const double t_s = traj.times[s_index];
  for (int k = s_index; k < n; ++k) {
    report.times.push_back(traj.times[k]);
    report.ni.push_back(ni_gap(obj, traj.points[k], box).value);
    report.bound.push_back(std::exp(-2.0 * lambda * (traj.times[k] - t_s)) * level);
    if (k > s_index)
      report.violation =
          std::max(report.violation, report.ni.back() - report.bound.back() - report.allowance);
  }
  return report;
}

double slope_monotonicity_check(const BivariateObjective& obj, const FlowTrajectory& traj,
                                double lambda) {
  const int n = static_cast<int>(traj.times.size());
  if (n < 2) return -kInf;
  double worst = -kInf;
  double prev = std::exp(lambda * traj.times[0]) *
                local_slope(obj, traj.points[0], SlopeMode::exact_smooth).value;
  for (int k = 1; k < n; ++k) {
    const double cur = std::exp(lambda * traj.times[k]) *
                       local_slope(obj, traj.points[k], SlopeMode::exact_smooth).value;
    worst = std::max(worst, cur - prev);
    prev = cur;
  }
  return worst;
}

DiagnosticsReport build_report(const BivariateObjective& obj, const FlowTrajectory& traj,
                               const DiagnosticsOptions& opts) {
  const int n = static_cast<int>(traj.times.size());
  DiagnosticsReport report;
  report.rows.resize(n);
  for (int k = 0; k < n; ++k) {
    DiagnosticsRow& row = report.rows[k];
    row.t = traj.times[k];
    row.ni_gap = ni_gap(obj, traj.points[k], opts.box).value;
    if (opts.saddle)
      row.dist_to_saddle = std::sqrt(product_distance_sq(traj.points[k], *opts.saddle));
    if (opts.slope_columns) {
      row.local_slope = local_slope(obj, traj.points[k], SlopeMode::exact_smooth).value;
      if (opts.box)
        row.global_slope =
            global_slope(obj, traj.points[k], opts.lambda, *opts.box, opts.seed + k).value;
    }
  }

  if (opts.slope_columns && n >= 2)
    report.summary.slope_monotonicity_violation = slope_monotonicity_check(obj, traj, opts.lambda);

  if (opts.slope_columns && opts.lambda > 0.0 && n >= 1) {
    const NiDecayReport decay =
        ni_decay_certificate(obj, traj, opts.lambda, 0, opts.box, opts.ni_decay_allowance);
    for (int k = 0; k < n; ++k) report.rows[k].ni_bound = decay.bound[k];
    report.summary.ni_decay_violation = decay.violation;
  }

  if (opts.partner != nullptr) {
    report.summary.contraction_violation = check_contraction(traj, *opts.partner, opts.lambda);
    const double d2_0 = product_distance_sq(traj.points[0], opts.partner->points[0]);
    for (int k = 0; k < n; ++k) {
      const double d2 = product_distance_sq(traj.points[k], opts.partner->points[k]);
      report.rows[k].contraction_ratio = d2_0 > 0.0 ? d2 / d2_0 : kNaN;
    }
  }

  if (!opts.evi_test_points.empty() && n >= 2) {
    const EviScan scan = evi_scan(obj, traj, opts.lambda, opts.evi_test_points);
    if (scan.points_used > 0) {
      report.summary.evi_x_violation = scan.report.x_violation;
      report.summary.evi_y_violation = scan.report.y_violation;
      report.summary.evi_x_allowance = scan.report.x_allowance;
      report.summary.evi_y_allowance = scan.report.y_allowance;
      for (int k = 1; k < n; ++k) report.rows[k].evi_residual_max = scan.row_max[k];
    }
  }

  return report;
}

}  // namespace gdaflow

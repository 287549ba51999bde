#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

#include "gdaflow/wasserstein1d.hpp"

namespace gdaflow {

namespace {

// Shared quantile-block traversal of two grid measures: visits the monotone
// (north-west) transport plan cell by cell. on_cell(i, j, mass) is called for
// every basic cell, including degenerate zero-mass ones, so potentials can be
// propagated along a connected chain that visits every atom of both measures.
// prefer_x picks which side advances when both blocks exhaust simultaneously;
// the two choices trace the two extreme complementary-slackness potentials at
// tied cumulative weights.
template <typename F>
void traverse_monotone_plan(const GridMeasure& mu, const GridMeasure& nu, bool prefer_x,
                            F&& on_cell) {
  const Eigen::Index m = mu.size(), n = nu.size();
  Eigen::Index i = 0, j = 0;
  double ru = mu.weights()(0), rv = nu.weights()(0);
  while (true) {
    const double delta = std::min(ru, rv);
    on_cell(i, j, delta);
    ru -= delta;
    rv -= delta;
    if (i + 1 == m && j + 1 == n) break;
    const bool advance_x = prefer_x ? (ru <= rv) : (ru < rv);
    if (advance_x && i + 1 < m) {
      ++i;
      ru = mu.weights()(i);
    } else if (j + 1 < n) {
      ++j;
      rv = nu.weights()(j);
    } else {
      ++i;
      ru = mu.weights()(i);
    }
  }
}

inline double sq(double v) { return v * v; }

}  // namespace

double w2_distance_1d(const GridMeasure& mu, const GridMeasure& nu) {
  double cost = 0.0;
  traverse_monotone_plan(mu, nu, true, [&](Eigen::Index i, Eigen::Index j, double mass) {
    if (mass > 0.0) cost += mass * sq(mu.support()(i) - nu.support()(j));
  });
  return std::sqrt(std::max(0.0, cost));
}

namespace {

// Dual potentials by complementary slackness along the monotone plan:
// psi_i + phi_j = c_ij on the chain of basic cells. The quadratic cost on
// sorted supports satisfies the Monge condition, so these potentials are
// dual feasible and psi is a subgradient of W2^2(., nu) in mu's weights.
Eigen::VectorXd potential_chain(const GridMeasure& mu, const GridMeasure& nu, bool prefer_x) {
  Eigen::VectorXd psi(mu.size()), phi(nu.size());
  Eigen::Index last_i = -1, last_j = -1;
  traverse_monotone_plan(mu, nu, prefer_x, [&](Eigen::Index i, Eigen::Index j, double) {
    const double c = sq(mu.support()(i) - nu.support()(j));
    if (last_i < 0) {
      phi(j) = 0.0;
      psi(i) = c;
    } else if (i != last_i) {
      psi(i) = c - phi(j);
    } else if (j != last_j) {
      phi(j) = c - psi(i);
    }
    last_i = i;
    last_j = j;
  });
  psi.array() -= psi(0);
  return psi;
}

}  // namespace

Eigen::VectorXd w2_sq_subgradient(const GridMeasure& mu, const GridMeasure& nu) {
  // The subdifferential is a polytope wherever cumulative weights tie (the
  // chain then threads degenerate zero-mass cells); each tie-breaking order
  // yields one extreme potential. The midpoint is still a subgradient and is
  // centered: it vanishes at mu == nu, which certificates anchored at fixed
  // points rely on.
  return 0.5 * (potential_chain(mu, nu, true) + potential_chain(mu, nu, false));
}

PotentialFamily w2_sq_potential_family(const GridMeasure& mu, const GridMeasure& nu) {
  const Eigen::Index m = mu.size(), n = nu.size();
  const Eigen::VectorXd& x = mu.support();
  const Eigen::VectorXd& y = nu.support();

  std::vector<double> cum_nu(n);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += nu.weights()(j);
    cum_nu[j] = acc;
  }

  // The chain increment psi_{i+1} - psi_i is the cost difference at the
  // nu-atom spanning the crossing quantile q = F_mu(i). When q lands exactly
  // on a nu-boundary the spanning atom is ambiguous; each consecutive pair of
  // candidates contributes one independent suffix direction.
  PotentialFamily fam;
  fam.base = Eigen::VectorXd::Zero(m);
  double q = 0.0;
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    q += mu.weights()(i);
    while (j + 1 < n && cum_nu[j] < q) ++j;
    const double inc_lo = sq(x(i + 1) - y(j)) - sq(x(i) - y(j));
    fam.base(i + 1) = fam.base(i) + inc_lo;
    for (Eigen::Index jj = j; jj + 1 < n && cum_nu[jj] == q; ++jj) {
      const double span = (sq(x(i + 1) - y(jj + 1)) - sq(x(i) - y(jj + 1))) -
                          (sq(x(i + 1) - y(jj)) - sq(x(i) - y(jj)));
      if (span == 0.0) continue;
      Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
      d.tail(m - i - 1).setConstant(span);
      fam.deltas.push_back(std::move(d));
    }
  }
  return fam;
}

namespace {

using Rational = boost::multiprecision::cpp_rational;

struct RationalTransport {
  Eigen::Index m, n;
  std::vector<Rational> cost;    // m x n
  std::vector<Rational> flow;    // m x n, basic flows
  std::vector<char> in_basis;    // m x n
  Rational& c(Eigen::Index i, Eigen::Index j) { return cost[i * n + j]; }
  Rational& f(Eigen::Index i, Eigen::Index j) { return flow[i * n + j]; }
  char& b(Eigen::Index i, Eigen::Index j) { return in_basis[i * n + j]; }
};

}  // namespace

double w2_lp_oracle(const GridMeasure& mu, const GridMeasure& nu) {
  const Eigen::Index m = mu.size(), n = nu.size();
  if (m * n > 64)
    throw InstanceTooLarge("LP oracle restricted to m*n <= 64, got " + std::to_string(m * n));

  RationalTransport t;
  t.m = m;
  t.n = n;
  t.cost.resize(m * n);
  t.flow.assign(m * n, Rational(0));
  t.in_basis.assign(m * n, 0);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Rational d = Rational(mu.support()(i)) - Rational(nu.support()(j));
      t.c(i, j) = d * d;
    }

  // Supplies/demands as exact rationals. Doubles are dyadic rationals, so the
  // only inexactness is the (validated, <= 1e-12) deviation of the weight sums;
  // absorb it into the last demand so the problem balances exactly.
  std::vector<Rational> supply(m), demand(n);
  Rational total_s(0), total_d(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    supply[i] = Rational(mu.weights()(i));
    total_s += supply[i];
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    demand[j] = Rational(nu.weights()(j));
    total_d += demand[j];
  }
  demand[n - 1] += total_s - total_d;

  // North-west-corner basic feasible solution (keeps degenerate basic cells so
  // the basis graph stays a spanning tree with m+n-1 edges).
  {
    Eigen::Index i = 0, j = 0;
    Rational ru = supply[0], rv = demand[0];
    while (true) {
      const Rational delta = ru < rv ? ru : rv;
      t.f(i, j) = delta;
      t.b(i, j) = 1;
      ru -= delta;
      rv -= delta;
      if (i + 1 == m && j + 1 == n) break;
      if ((ru <= rv && i + 1 < m) || j + 1 == n) {
        ++i;
        ru = supply[i];
      } else {
        ++j;
        rv = demand[j];
      }
    }
  }

  std::vector<Rational> u(m), v(n);
  std::vector<char> u_set(m), v_set(n);
  const int max_pivots = 100000;
  for (int pivot = 0;; ++pivot) {
    if (pivot > max_pivots) throw Error("transportation simplex failed to terminate");

    // Potentials u_i + v_j = c_ij over the basis tree, rooted at u_0 = 0.
    std::fill(u_set.begin(), u_set.end(), 0);
    std::fill(v_set.begin(), v_set.end(), 0);
    u[0] = 0;
    u_set[0] = 1;
    bool progress = true;
    while (progress) {
      progress = false;
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          if (t.b(i, j)) {
            if (u_set[i] && !v_set[j]) {
              v[j] = t.c(i, j) - u[i];
              v_set[j] = 1;
              progress = true;
            } else if (!u_set[i] && v_set[j]) {
              u[i] = t.c(i, j) - v[j];
              u_set[i] = 1;
              progress = true;
            }
          }
    }

    // Entering cell: Bland's rule (first negative reduced cost).
    Eigen::Index ei = -1, ej = -1;
    for (Eigen::Index i = 0; i < m && ei < 0; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (!t.b(i, j) && t.c(i, j) - u[i] - v[j] < 0) {
          ei = i;
          ej = j;
          break;
        }
    if (ei < 0) break;  // optimal

    // Unique cycle in basis + entering cell: path in the bipartite basis graph
    // from row ei to column ej, found by BFS.
    // Nodes: rows 0..m-1, columns m..m+n-1.
    std::vector<Eigen::Index> parent(m + n, -2);
    std::vector<Eigen::Index> queue{ei};
    parent[ei] = -1;
    while (!queue.empty() && parent[m + ej] == -2) {
      const Eigen::Index node = queue.front();
      queue.erase(queue.begin());
      if (node < m) {
        for (Eigen::Index j = 0; j < n; ++j)
          if (t.b(node, j) && parent[m + j] == -2) {
            parent[m + j] = node;
            queue.push_back(m + j);
          }
      } else {
        const Eigen::Index j = node - m;
        for (Eigen::Index i = 0; i < m; ++i)
          if (t.b(i, j) && parent[i] == -2) {
            parent[i] = node;
            queue.push_back(i);
          }
      }
    }
    if (parent[m + ej] == -2) throw Error("transportation basis lost connectivity");

    // Reconstruct the alternating cycle as a list of cells starting with the
    // entering cell (gets +theta), then alternating -theta / +theta.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cycle{{ei, ej}};
    Eigen::Index node = m + ej;
    while (parent[node] != -1) {
      const Eigen::Index p = parent[node];
      if (node < m)
        cycle.emplace_back(node, p - m);
      else
        cycle.emplace_back(p, node - m);
      node = p;
    }

    // theta = min flow over the -theta cells; leaving cell = first minimizer.
    Rational theta;
    Eigen::Index leave = -1;
    for (std::size_t k = 1; k < cycle.size(); k += 2) {
      const Rational& fk = t.f(cycle[k].first, cycle[k].second);
      if (leave < 0 || fk < theta) {
        theta = fk;
        leave = static_cast<Eigen::Index>(k);
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      Rational& fk = t.f(cycle[k].first, cycle[k].second);
      fk += (k % 2 == 0) ? theta : -theta;
    }
    t.b(ei, ej) = 1;
    t.b(cycle[leave].first, cycle[leave].second) = 0;
    t.f(cycle[leave].first, cycle[leave].second) = 0;
  }

  Rational total(0);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (t.b(i, j)) total += t.f(i, j) * t.c(i, j);
  return static_cast<double>(total);
}

}  // namespace gdaflow

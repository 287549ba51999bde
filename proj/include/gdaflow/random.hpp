#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace gdaflow {

// Deterministic, implementation-independent draws from mt19937_64 (the
// standard distribution objects are not pinned across library versions, and
// byte-identical reruns are a hard requirement).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller; one value per call, deterministic.
inline double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline Eigen::VectorXd uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform_in(rng, lo, hi);
  return v;
}

// Uniform (Dirichlet(1,...,1)) point of the probability simplex via
// normalized exponentials; strictly positive with probability 1.
inline Eigen::VectorXd uniform_simplex(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = uniform01(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    v(i) = -std::log(u);
    sum += v(i);
  }
  v /= sum;
  // Guard the simplex-sum invariant against round-off.
  v(n - 1) += 1.0 - v.sum();
  if (v(n - 1) < 0.0) v(n - 1) = 0.0;
  return v;
}

}  // namespace gdaflow

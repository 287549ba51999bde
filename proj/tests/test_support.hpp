#pragma once

// Shared helpers for unit tests: function-backed objectives used as
// independent oracles (brute-force minimax of arbitrary scalar saddle
// functions) and a classical RK4 integrator for flow cross-checks.

#include <Eigen/Dense>
#include <functional>

#include "gdaflow/objective.hpp"
#include "gdaflow/random.hpp"

namespace gdaflow::testing {

// 1-D x 1-D scalar objective defined by a plain function; evaluation-only.
// Deliberately bypasses the library's objective classes so brute-force
// comparisons against it are independent of the code paths under test.
class ScalarFnObjective : public BivariateObjective {
 public:
  using Fn = std::function<ExtendedReal(double, double)>;
  explicit ScalarFnObjective(Fn fn, double lambda = 0.0) : fn_(std::move(fn)), lambda_(lambda) {}

  BackendTag backend() const override { return BackendTag::hilbert; }
  ExtendedReal evaluate(const FactorPoint& x, const FactorPoint& y) const override {
    return fn_(as_vector(x)(0), as_vector(y)(0));
  }
  bool in_domain_x(const FactorPoint&) const override { return true; }
  bool in_domain_y(const FactorPoint&) const override { return true; }
  ConvexityModulus modulus() const override { return {lambda_}; }
  ResolventResult resolvent(const ProductPoint&, double, double) const override {
    throw Error("oracle objective has no resolvent");
  }
  FactorPoint sample_x(std::mt19937_64& rng) const override {
    return Eigen::VectorXd::Constant(1, uniform_in(rng, -2.0, 2.0));
  }
  FactorPoint sample_y(std::mt19937_64& rng) const override {
    return Eigen::VectorXd::Constant(1, uniform_in(rng, -2.0, 2.0));
  }

 private:
  Fn fn_;
  double lambda_;
};

// Classical fixed-step RK4 for dz/dt = field(z).
inline Eigen::VectorXd rk4(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field,
                           Eigen::VectorXd z, double t, int steps) {
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd k1 = field(z);
    const Eigen::VectorXd k2 = field(z + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(z + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return z;
}

inline Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

inline Eigen::VectorXd vec_of(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

}  // namespace gdaflow::testing

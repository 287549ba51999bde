#pragma once

#include <Eigen/Dense>

#include "gdaflow/hilbert.hpp"
#include "gdaflow/objective.hpp"

namespace gdaflow {

// Quadratic structure of a Hilbert objective after unwrapping squared-distance
// regularization:
//   phi(x,y) = 1/2 x^T A x + a^T x + x^T C y - 1/2 y^T B y - b^T y + f(x) - g(y)
// with optional prox handles f, g. Solvers use the matrices for closed-form
// and prox-based subproblem solves while taking values from the original
// objective, so anchor terms of regularized wrappers stay exact.
struct QuadraticView {
  Eigen::MatrixXd A, B, C;
  Eigen::VectorXd a, b;
  const ProxHandle* f = nullptr;
  const ProxHandle* g = nullptr;
};

// Fills `out` and returns true for quadratic, composite, and regularized
// wrappers of either; false for objectives without this structure.
bool try_quadratic_view(const BivariateObjective& obj, QuadraticView& out);

}  // namespace gdaflow

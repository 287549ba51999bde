#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "gdaflow/errors.hpp"

namespace gdaflow {

// A point in a finite-dimensional Hilbert factor.
using HilbertPoint = Eigen::VectorXd;

// A probability measure on a fixed, strictly increasing 1-D support:
// weights w_i >= 0 with sum 1 (validated to 1e-12 at construction).
class GridMeasure {
 public:
  GridMeasure() = default;
  GridMeasure(Eigen::VectorXd support, Eigen::VectorXd weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    validate();
  }

  const Eigen::VectorXd& support() const { return support_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return support_.size(); }

  // Largest minus smallest support point (0 for a single atom).
  double diameter() const {
    return support_.size() > 0 ? support_(support_.size() - 1) - support_(0) : 0.0;
  }

  bool strictly_positive() const { return weights_.size() > 0 && weights_.minCoeff() > 0.0; }

  // Same support array (exact element-wise equality).
  bool same_support(const GridMeasure& other) const {
    return support_.size() == other.support_.size() && support_ == other.support_;
  }

  // Replace weights keeping the support (re-validates).
  GridMeasure with_weights(Eigen::VectorXd w) const { return GridMeasure(support_, std::move(w)); }

 private:
  void validate() const {
    if (support_.size() == 0 || support_.size() != weights_.size())
      throw Error("grid measure needs matching, nonempty support/weights");
    for (Eigen::Index i = 0; i + 1 < support_.size(); ++i)
      if (!(support_(i) < support_(i + 1)))
        throw Error("grid measure support must be strictly increasing");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (weights_(i) < 0.0) throw Error("grid measure weights must be nonnegative");
      sum += weights_(i);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw Error("grid measure weights must sum to 1 (got " + std::to_string(sum) + ")");
  }

  Eigen::VectorXd support_;
  Eigen::VectorXd weights_;
};

enum class BackendTag { hilbert, wasserstein1d };

inline std::string to_string(BackendTag t) {
  return t == BackendTag::hilbert ? "hilbert" : "wasserstein1d";
}

// One factor of a product point: either a Hilbert vector or a grid measure.
using FactorPoint = std::variant<HilbertPoint, GridMeasure>;

inline BackendTag factor_backend(const FactorPoint& p) {
  return std::holds_alternative<HilbertPoint>(p) ? BackendTag::hilbert : BackendTag::wasserstein1d;
}

inline const HilbertPoint& as_vector(const FactorPoint& p) {
  if (!std::holds_alternative<HilbertPoint>(p)) throw BackendMismatch("expected a Hilbert factor");
  return std::get<HilbertPoint>(p);
}
inline const GridMeasure& as_measure(const FactorPoint& p) {
  if (!std::holds_alternative<GridMeasure>(p)) throw BackendMismatch("expected a grid-measure factor");
  return std::get<GridMeasure>(p);
}

// Point in the product space Z = X x Y. Both components must come from the
// same backend pair; the tag is derived and checked at construction.
struct ProductPoint {
  FactorPoint x;
  FactorPoint y;

  ProductPoint() : x(HilbertPoint()), y(HilbertPoint()) {}
  ProductPoint(FactorPoint x_, FactorPoint y_) : x(std::move(x_)), y(std::move(y_)) {
    if (factor_backend(x) != factor_backend(y)) throw BackendMismatch();
  }

  BackendTag backend_tag() const { return factor_backend(x); }
};

inline ProductPoint make_hilbert_point(Eigen::VectorXd x, Eigen::VectorXd y) {
  return ProductPoint(FactorPoint(std::move(x)), FactorPoint(std::move(y)));
}

}  // namespace gdaflow

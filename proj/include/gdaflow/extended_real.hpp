#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include "gdaflow/errors.hpp"

namespace gdaflow {

// Extended real line R ∪ {±inf} with checked arithmetic: (+inf) + (-inf) is a
// hard error (IndeterminateForm), never a silent NaN. Used for objective values
// that may legitimately be infinite (indicator functions, unbounded suprema).
class ExtendedReal {
 public:
  ExtendedReal() : v_(0.0) {}
  ExtendedReal(double v) : v_(v) {  // NOLINT: implicit by design
    if (std::isnan(v)) throw IndeterminateForm("NaN is not an extended real");
  }

  static ExtendedReal plus_infinity() { return ExtendedReal(Tag{}, +1); }
  static ExtendedReal minus_infinity() { return ExtendedReal(Tag{}, -1); }

  bool is_finite() const { return cls_ == 0; }
  bool is_plus_infinity() const { return cls_ > 0; }
  bool is_minus_infinity() const { return cls_ < 0; }

  // Finite value accessor; throws if infinite.
  double value() const {
    if (!is_finite()) throw IndeterminateForm("value() on infinite extended real");
    return v_;
  }
  // Lossy conversion mapping ±inf to IEEE infinities (for display/serialization).
  double to_double() const {
    if (cls_ > 0) return std::numeric_limits<double>::infinity();
    if (cls_ < 0) return -std::numeric_limits<double>::infinity();
    return v_;
  }

  ExtendedReal operator-() const {
    ExtendedReal r = *this;
    r.cls_ = -r.cls_;
    r.v_ = -r.v_;
    return r;
  }

  friend ExtendedReal operator+(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.cls_ == 0 && b.cls_ == 0) return ExtendedReal(a.v_ + b.v_);
    if (a.cls_ != 0 && b.cls_ != 0) {
      if (a.cls_ != b.cls_) throw IndeterminateForm();
      return a;
    }
    return a.cls_ != 0 ? a : b;
  }
  friend ExtendedReal operator-(const ExtendedReal& a, const ExtendedReal& b) { return a + (-b); }

  friend ExtendedReal operator*(double s, const ExtendedReal& a) {
    if (a.cls_ == 0) return ExtendedReal(s * a.v_);
    if (s == 0.0) throw IndeterminateForm("0 * inf");
    return s > 0 ? a : -a;
  }
  friend ExtendedReal operator*(const ExtendedReal& a, double s) { return s * a; }

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.cls_ != b.cls_) return a.cls_ < b.cls_;
    return a.cls_ == 0 && a.v_ < b.v_;
  }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.cls_ == b.cls_ && (a.cls_ != 0 || a.v_ == b.v_);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& a) {
    if (a.cls_ > 0) return os << "+inf";
    if (a.cls_ < 0) return os << "-inf";
    return os << a.v_;
  }

 private:
  struct Tag {};
  ExtendedReal(Tag, int cls) : v_(0.0), cls_(cls) {}
  double v_;
  int cls_ = 0;  // 0 finite, +1 plus-infinity, -1 minus-infinity
};

}  // namespace gdaflow

#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace silab {

/// Time-dependent coefficient g(t) that replaces U in the frozen-level
/// dynamics. `lipschitz` bounds |g'| and is used to bound |g| over a window.
class Drive {
 public:
  Drive(std::function<double(double)> g, double lipschitz) : g_(std::move(g)), lipschitz_(lipschitz) {}

  static Drive constant(double m) {
    Drive d([m](double) { return m; }, 0.0);
    d.constant_ = true;
    d.level_ = m;
    return d;
  }

  double operator()(double t) const { return constant_ ? level_ : g_(t); }
  /// sup of |g| over [t0, t1]
  double bound(double t0, double t1) const {
    if (constant_) return std::fabs(level_);
    return std::fabs(g_(t0)) + lipschitz_ * (t1 - t0);
  }
  bool is_constant() const { return constant_; }

 private:
  std::function<double(double)> g_;
  double lipschitz_ = 0.0;
  bool constant_ = false;
  double level_ = 0.0;
};

}  // namespace silab

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace silab {

/// One Fourier mode a cos(kx) + b sin(kx).
struct Harmonic {
  int k = 1;
  double a = 0.0;
  double b = 0.0;
};

struct ValueAndSlope {
  double value;
  double slope;
};

class PotentialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trigonometric polynomial F(x) = a0 + sum_k (a_k cos kx + b_k sin kx) on the
/// circle. Derivatives of every order and antiderivatives are exact.
///
/// A constant potential is representable (so that assumption checks can
/// report it) but every landscape operation rejects it.
class PeriodicPotential {
 public:
  PeriodicPotential() = default;
  PeriodicPotential(double a0, std::vector<Harmonic> harmonics);

  static PeriodicPotential cosine() { return PeriodicPotential(0.0, {{1, 1.0, 0.0}}); }

  double a0() const { return a0_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }
  int max_frequency() const { return kmax_; }
  bool is_constant() const;

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  /// k-th derivative; order 0 is the value.
  double derivative(double x, int order) const;
  ValueAndSlope value_and_slope(double x) const;

  /// G with G' = F and G(0) = 0. Not periodic when a0 != 0.
  double antiderivative(double x) const;
  /// Integral of F along the unit-speed path x0 + y s', s' in [0, s].
  /// `y` must be +1 or -1.
  double path_integral(double x0, int y, double s) const;

  double min_value() const { return min_; }
  double max_value() const { return max_; }
  double sup_abs() const { return std::max(-min_, max_); }
  /// ||F'||_inf
  double sup_abs_slope() const { return sup_slope_; }
  /// Bound on ||F^{(order)}||_inf from the coefficients.
  double derivative_bound(int order) const;

  PeriodicPotential negated() const;
  std::string describe() const;

 private:
  void compute_extremes();

  double a0_ = 0.0;
  std::vector<Harmonic> harmonics_;
  // dense cosine / sine coefficients indexed by frequency, index 0 unused
  std::vector<double> ca_, cb_;
  int kmax_ = 0;
  double min_ = 0.0, max_ = 0.0, sup_slope_ = 0.0;
};

}  // namespace silab

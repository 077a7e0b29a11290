#include "silab/potential.hpp"

#include <cmath>
#include <sstream>

#include "silab/circle.hpp"
#include "silab/roots.hpp"

namespace silab {

namespace {

constexpr int kExtremeGrid = 4096;

// (a cos + b sin)^{(n)} cycles with period four.
void rotate_phase(double a, double b, int n, double& ca, double& cb) {
  switch (n & 3) {
    case 0: ca = a; cb = b; break;
    case 1: ca = b; cb = -a; break;
    case 2: ca = -a; cb = -b; break;
    default: ca = -b; cb = a; break;
  }
}

}  // namespace

PeriodicPotential::PeriodicPotential(double a0, std::vector<Harmonic> harmonics)
    : a0_(a0), harmonics_(std::move(harmonics)) {
  if (!std::isfinite(a0_)) throw PotentialError("a0 must be finite");
  for (const auto& h : harmonics_) {
    if (h.k < 1) throw PotentialError("harmonic frequency must be a positive integer");
    if (!std::isfinite(h.a) || !std::isfinite(h.b)) throw PotentialError("harmonic coefficients must be finite");
    kmax_ = std::max(kmax_, h.k);
  }
  ca_.assign(kmax_ + 1, 0.0);
  cb_.assign(kmax_ + 1, 0.0);
  for (const auto& h : harmonics_) {
    ca_[h.k] += h.a;
    cb_[h.k] += h.b;
  }
  compute_extremes();
}

bool PeriodicPotential::is_constant() const {
  for (int k = 1; k <= kmax_; ++k)
    if (ca_[k] != 0.0 || cb_[k] != 0.0) return false;
  return true;
}

double PeriodicPotential::value(double x) const {
  if (kmax_ == 0) return a0_;
  const double c1 = std::cos(x), s1 = std::sin(x);
  double c = c1, s = s1, f = a0_;
  for (int k = 1; k <= kmax_; ++k) {
    f += ca_[k] * c + cb_[k] * s;
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
  return f;
}

ValueAndSlope PeriodicPotential::value_and_slope(double x) const {
  if (kmax_ == 0) return {a0_, 0.0};
  if (kmax_ == 1) {
    const double c = std::cos(x), s = std::sin(x);
    return {a0_ + ca_[1] * c + cb_[1] * s, cb_[1] * c - ca_[1] * s};
  }
  const double c1 = std::cos(x), s1 = std::sin(x);
  double c = c1, s = s1, f = a0_, df = 0.0;
  for (int k = 1; k <= kmax_; ++k) {
    f += ca_[k] * c + cb_[k] * s;
    df += k * (cb_[k] * c - ca_[k] * s);
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
  return {f, df};
}

double PeriodicPotential::derivative(double x, int order) const {
  if (order < 0) throw PotentialError("derivative order must be nonnegative");
  if (order == 0) return value(x);
  double d = 0.0;
  for (int k = 1; k <= kmax_; ++k) {
    if (ca_[k] == 0.0 && cb_[k] == 0.0) continue;
    double a, b;
    rotate_phase(ca_[k], cb_[k], order, a, b);
    d += std::pow(static_cast<double>(k), order) * (a * std::cos(k * x) + b * std::sin(k * x));
  }
  return d;
}

double PeriodicPotential::antiderivative(double x) const {
  double g = a0_ * x;
  for (int k = 1; k <= kmax_; ++k) {
    if (ca_[k] == 0.0 && cb_[k] == 0.0) continue;
    // anchored so that G(0) = 0
    g += (ca_[k] * std::sin(k * x) + cb_[k] * (1.0 - std::cos(k * x))) / k;
  }
  return g;
}

double PeriodicPotential::path_integral(double x0, int y, double s) const {
  // substitute z = x0 + y s': ds' = y dz, so the integral is y (G(x0 + y s) - G(x0))
  double oscill = 0.0;
  const double x1 = x0 + y * s;
  for (int k = 1; k <= kmax_; ++k) {
    if (ca_[k] == 0.0 && cb_[k] == 0.0) continue;
    oscill += (ca_[k] * (std::sin(k * x1) - std::sin(k * x0)) - cb_[k] * (std::cos(k * x1) - std::cos(k * x0))) / k;
  }
  return a0_ * s + y * oscill;
}

double PeriodicPotential::derivative_bound(int order) const {
  double b = order == 0 ? std::fabs(a0_) : 0.0;
  for (int k = 1; k <= kmax_; ++k)
    b += std::pow(static_cast<double>(k), order) * std::hypot(ca_[k], cb_[k]);
  return b;
}

void PeriodicPotential::compute_extremes() {
  if (is_constant()) {
    min_ = max_ = a0_;
    sup_slope_ = 0.0;
    return;
  }
  min_ = max_ = value(0.0);
  auto slope = [this](double x) { return derivative(x, 1); };
  for (double r : periodic_roots(slope, kExtremeGrid, 1e-13)) {
    double f = value(r);
    min_ = std::min(min_, f);
    max_ = std::max(max_, f);
  }
  auto curvature = [this](double x) { return derivative(x, 2); };
  sup_slope_ = std::fabs(slope(0.0));
  for (double r : periodic_roots(curvature, kExtremeGrid, 1e-13)) sup_slope_ = std::max(sup_slope_, std::fabs(slope(r)));
}

PeriodicPotential PeriodicPotential::negated() const {
  std::vector<Harmonic> hs = harmonics_;
  for (auto& h : hs) {
    h.a = -h.a;
    h.b = -h.b;
  }
  return PeriodicPotential(-a0_, std::move(hs));
}

std::string PeriodicPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << a0_;
  for (const auto& h : harmonics_) os << " + [" << h.k << ", " << h.a << ", " << h.b << "]";
  return os.str();
}

}  // namespace silab

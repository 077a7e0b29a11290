#include "silab/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "silab/circle.hpp"
#include "silab/quadrature.hpp"

namespace silab {

DiffusionState em_step(const PeriodicPotential& f, DiffusionState s, double dt, double gaussian) {
  const auto [value, slope] = f.value_and_slope(s.x);
  const double dx = std::sqrt(dt) * gaussian - s.u * slope * dt;
  return {wrap_angle(s.x + dx), s.u + value * dt};
}

DiffusionPath::DiffusionPath(const PeriodicPotential& f, DiffusionState z0, double dt, std::uint64_t seed)
    : f_(&f), x_(wrap_angle(z0.x)), u_(z0.u), x_prev_(x_), dt_(dt), sqrt_dt_(std::sqrt(dt)), rng_(make_stream(seed)) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

DiffusionPath::DiffusionPath(const PeriodicPotential& f, Drive g, double x0, double dt, std::uint64_t seed)
    : f_(&f),
      driven_(true),
      g_(std::move(g)),
      x_(wrap_angle(x0)),
      x_prev_(x_),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      rng_(make_stream(seed)) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

void DiffusionPath::step() {
  x_prev_ = x_;
  const auto [value, slope] = f_->value_and_slope(x_);
  const double coef = driven_ ? g_(time()) : u_;
  last_dx_ = sqrt_dt_ * normal_(rng_) - coef * slope * dt_;
  if (!driven_) u_ += value * dt_;
  x_ = wrap_near(x_ + last_dx_);
  ++steps_;
}

std::int64_t step_count(double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0) || dt > horizon) throw std::invalid_argument("need 0 < dt <= horizon");
  return std::max<std::int64_t>(1, std::llround(horizon / dt));
}

namespace {

Trajectory run(DiffusionPath& path, double horizon, const DiffusionOptions& opts, std::uint64_t seed) {
  if (opts.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  const std::int64_t n = step_count(horizon, opts.dt);
  Trajectory tr;
  tr.meta = {seed, opts.dt, opts.record_every, {}};
  const std::size_t expect = static_cast<std::size_t>(n / opts.record_every + 2);
  tr.t.reserve(expect);
  tr.states.reserve(expect);
  tr.t.push_back(0.0);
  tr.states.push_back(path.state());
  for (std::int64_t i = 1; i <= n; ++i) {
    path.step();
    if (i % opts.record_every == 0 || i == n) {
      tr.t.push_back(path.time());
      tr.states.push_back(path.state());
    }
  }
  return tr;
}

}  // namespace

Trajectory simulate_diffusion(const PeriodicPotential& f, DiffusionState z0, double horizon, const DiffusionOptions& opts,
                              std::uint64_t seed) {
  DiffusionPath path(f, z0, opts.dt, seed);
  Trajectory tr = run(path, horizon, opts, seed);
  tr.meta.potential = f.describe();
  return tr;
}

Trajectory simulate_diffusion_driven(const PeriodicPotential& f, const Drive& g, double x0, double horizon,
                                     const DiffusionOptions& opts, std::uint64_t seed) {
  DiffusionPath path(f, g, x0, opts.dt, seed);
  Trajectory tr = run(path, horizon, opts, seed);
  tr.meta.potential = f.describe();
  return tr;
}

std::vector<double> coupled_terminal_u(const PeriodicPotential& f, DiffusionState z0, double horizon, double dt_fine,
                                       int levels, std::uint64_t seed) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  const std::int64_t n = step_count(horizon, dt_fine);
  const std::int64_t coarsest = std::int64_t{1} << (levels - 1);
  if (n % coarsest != 0) throw std::invalid_argument("horizon / dt_fine must be a multiple of 2^(levels-1)");
  Rng rng = make_stream(seed);
  Normal normal;
  const double sqrt_dt = std::sqrt(dt_fine);
  std::vector<DiffusionState> z(levels, {wrap_angle(z0.x), z0.u});
  std::vector<double> dw(levels, 0.0);
  for (std::int64_t i = 1; i <= n; ++i) {
    const double w = sqrt_dt * normal(rng);
    for (int j = 0; j < levels; ++j) {
      dw[j] += w;
      const std::int64_t span = std::int64_t{1} << j;
      if (i % span != 0) continue;
      const double dt = dt_fine * static_cast<double>(span);
      const auto [value, slope] = f.value_and_slope(z[j].x);
      z[j].x = wrap_near(z[j].x + (dw[j] - z[j].u * slope * dt));
      z[j].u += value * dt;
      dw[j] = 0.0;
    }
  }
  std::vector<double> out;
  for (const auto& s : z) out.push_back(s.u);
  return out;
}

double analytic_escape_probability(const PeriodicPotential& f, double M, double x0, double x, double x1,
                                   EscapeOrientation orientation) {
  if (!(M >= 0.0)) throw std::invalid_argument("M must be nonnegative");
  const double lo = std::min(x0, x1), hi = std::max(x0, x1);
  if (!(lo < hi) || x < lo || x > hi) throw std::invalid_argument("x must lie on the arc between x0 and x1");
  if (hi - lo >= kTwoPi) throw std::invalid_argument("arc must be shorter than the circle");

  const int grid = 1024;
  int ups = 0, downs = 0;
  double prev = f.value(lo);
  for (int i = 1; i <= grid; ++i) {
    double v = f.value(lo + (hi - lo) * i / grid);
    if (v > prev + 1e-14) ++ups;
    if (v < prev - 1e-14) ++downs;
    prev = v;
  }
  if (ups > 0 && downs > 0) throw std::invalid_argument("F is not monotone on the arc");

  const double shift = std::max(f.value(lo), f.value(hi));
  auto weight = [&](double z) { return std::exp(2.0 * M * (f.value(z) - shift)); };
  const double near = std::fabs(adaptive_simpson(weight, x0, x));
  const double far = std::fabs(adaptive_simpson(weight, x, x1));
  const double total = near + far;
  return orientation == EscapeOrientation::ReachFarEnd ? near / total : far / total;
}

double diffusion_escape_bound(const PeriodicPotential& f, double M, double eta) {
  return 8.0 * std::numbers::pi * M * f.sup_abs_slope() * std::exp(-2.0 * M * eta);
}

}  // namespace silab

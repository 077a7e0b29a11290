#include "silab/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "silab/circle.hpp"
#include "silab/landscape.hpp"
#include "silab/roots.hpp"

namespace silab {

double ControlSchedule::value_at(double s) const {
  if (values.empty()) return 0.0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
  std::size_t i = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  return values[std::min(i, values.size() - 1)];
}

bool inside_support(const PeriodicPotential& f, double u0, double u1, double t) {
  const double du = u1 - u0;
  return f.min_value() * t < du && du < f.max_value() * t;
}

namespace {

struct Extremes {
  double argmin, argmax;
};

Extremes global_extremes(const PeriodicPotential& f) {
  Extremes e{0.0, 0.0};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : find_critical_points(f)) {
    if (p.value < lo) {
      lo = p.value;
      e.argmin = p.x;
    }
    if (p.value > hi) {
      hi = p.value;
      e.argmax = p.x;
    }
  }
  return e;
}

// Nearest representative of `target` to the unwrapped position `x`.
double nearest_lift(double x, double target) { return x + std::remainder(target - x, kTwoPi); }

// ---- noiseless controlled diffusion -------------------------------------

int substeps(const PeriodicPotential& f, double v, double u, double len, double max_step) {
  const double speed = std::fabs(v) + std::fabs(u) * f.sup_abs_slope() + 1.0;
  const double h = std::min(max_step, 0.02 / speed);
  return std::max(1, static_cast<int>(std::ceil(len / h)));
}

// RK4 over one constant-control piece; x stays unwrapped.
DiffusionState rk4_piece(const PeriodicPotential& f, DiffusionState z, double v, double len, int n) {
  if (len <= 0.0) return z;
  const double h = len / n;
  auto rhs = [&](double x, double u, double& dx, double& du) {
    const auto [val, slope] = f.value_and_slope(x);
    dx = v - u * slope;
    du = val;
  };
  double x = z.x, u = z.u;
  for (int i = 0; i < n; ++i) {
    double k1x, k1u, k2x, k2u, k3x, k3u, k4x, k4u;
    rhs(x, u, k1x, k1u);
    rhs(x + 0.5 * h * k1x, u + 0.5 * h * k1u, k2x, k2u);
    rhs(x + 0.5 * h * k2x, u + 0.5 * h * k2u, k3x, k3u);
    rhs(x + h * k3x, u + h * k3u, k4x, k4u);
    x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  }
  return {x, u};
}

DiffusionState run_piece(const PeriodicPotential& f, DiffusionState z, double v, double len, double max_step) {
  return rk4_piece(f, z, v, len, substeps(f, v, z.u, len, max_step));
}

// Constant control that moves x from z.x to `target` (unwrapped) in time len.
double shoot(const PeriodicPotential& f, DiffusionState z, double len, double target, double max_step) {
  double v = (target - z.x) / len;
  for (int round = 0; round < 4; ++round) {
    const int n = substeps(f, v, z.u, len, max_step);
    auto miss = [&](double vv) { return rk4_piece(f, z, vv, len, n).x - target; };
    double v0 = v, e0 = miss(v0);
    double v1 = v0 + std::max(1.0, std::fabs(v0)) * 1e-3, e1 = miss(v1);
    for (int it = 0; it < 60 && std::fabs(e1) > 1e-13 && e1 != e0; ++it) {
      const double v2 = v1 - e1 * (v1 - v0) / (e1 - e0);
      v0 = v1;
      e0 = e1;
      v1 = v2;
      e1 = miss(v1);
    }
    if (!(std::fabs(e1) <= 1e-12) || !std::isfinite(v1)) {
      // x(len) is increasing in v: bracket around the straight-line guess, then bisect
      const double guess = (target - z.x) / len;
      double lo = guess - 1.0, hi = guess + 1.0;
      for (double step = 1.0; miss(lo) > 0.0; step *= 2.0) lo -= step;
      for (double step = 1.0; miss(hi) < 0.0; step *= 2.0) hi += step;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double m = miss(mid);
        if (m == 0.0) lo = hi = mid;
        else (m < 0.0 ? lo : hi) = mid;
      }
      v1 = 0.5 * (lo + hi);
    }
    v = v1;
    if (substeps(f, v, z.u, len, max_step) == n) break;
  }
  return v;
}

constexpr double kPlanStep = 1e-2;

struct PhasePlan {
  double xmin, xmax;  // lifts used for the two holds
};

// u(t) predicted with exact holds at the critical points, as a function of
// the time `a` at which the first hold ends.
double predicted_final_u(const PeriodicPotential& f, DiffusionState z0, DiffusionState z1, double t, double eps,
                         const Extremes& ex, double a) {
  DiffusionState z = z0;
  double target = nearest_lift(z.x, ex.argmin);
  z = run_piece(f, z, shoot(f, z, eps, target, kPlanStep), eps, kPlanStep);
  z.x = target;
  z.u += f.value(ex.argmin) * (a - eps);
  target = nearest_lift(z.x, ex.argmax);
  z = run_piece(f, z, shoot(f, z, eps, target, kPlanStep), eps, kPlanStep);
  z.x = target;
  z.u += f.value(ex.argmax) * ((t - eps) - (a + eps));
  target = nearest_lift(z.x, z1.x);
  z = run_piece(f, z, shoot(f, z, eps, target, kPlanStep), eps, kPlanStep);
  return z.u;
}

// Appends a piece ending at `end`, steering to `target`; returns the new state.
DiffusionState append_steer(const PeriodicPotential& f, ControlSchedule& plan, DiffusionState z, double end,
                            double target) {
  plan.breakpoints.push_back(end);
  const double len = plan.breakpoints.back() - plan.breakpoints[plan.breakpoints.size() - 2];
  if (len <= 0.0) {
    plan.breakpoints.pop_back();
    return z;
  }
  const double v = shoot(f, z, len, target, kPlanStep);
  plan.values.push_back(v);
  return run_piece(f, z, v, len, kPlanStep);
}

DiffusionState append_hold(const PeriodicPotential& f, ControlSchedule& plan, DiffusionState z, double end, double point) {
  const double target = nearest_lift(z.x, point);
  const double curvature = f.derivative_bound(2);
  while (plan.breakpoints.back() < end) {
    const double start = plan.breakpoints.back();
    const double reach = std::fabs(z.u) + 0.25 * f.sup_abs();
    double tau = std::min(0.25, 0.5 / (reach * curvature + 1e-300));
    if (start + tau > end - 0.25 * tau) tau = end - start;
    z = append_steer(f, plan, z, start + tau >= end ? end : start + tau, target);
  }
  return z;
}

}  // namespace

DiffusionState integrate_diffusion_control(const PeriodicPotential& f, DiffusionState z0, const ControlSchedule& plan,
                                           double max_step) {
  DiffusionState z = z0;
  for (std::size_t i = 0; i < plan.pieces(); ++i) z = run_piece(f, z, plan.values[i], plan.duration(i), max_step);
  z.x = wrap_angle(z.x);
  return z;
}

ControlSchedule plan_diffusion_control(const PeriodicPotential& f, DiffusionState z0, DiffusionState z1, double t,
                                       double eps) {
  if (!(t > 0.0) || !(eps > 0.0)) throw PlanError(PlanError::Code::BadArgument, "need t > 0 and eps > 0");
  if (3.0 * eps >= t) throw PlanError(PlanError::Code::BadArgument, "eps must be smaller than t / 3");
  if (!inside_support(f, z0.u, z1.u, t))
    throw PlanError(PlanError::Code::OutsideSupport, "u1 - u0 is outside the open interval (t min F, t max F)");

  ControlSchedule identity{{0.0, t}, {0.0}, 0.0, {}};
  const DiffusionState free = integrate_diffusion_control(f, z0, identity, kPlanStep);
  if (circle_distance(free.x, z1.x) <= 1e-9 && std::fabs(free.u - z1.u) <= 1e-9) return identity;

  const Extremes ex = global_extremes(f);
  for (int shrink = 0; shrink < 40; ++shrink, eps *= 0.5) {
    auto miss = [&](double a) { return predicted_final_u(f, z0, z1, t, eps, ex, a) - z1.u; };
    double lo = eps, hi = t - 2.0 * eps;
    double mlo = miss(lo), mhi = miss(hi);
    if (!(mlo >= 0.0 && mhi <= 0.0)) continue;
    // regula falsi with the Illinois modification; the miss is nearly affine in a
    double a = lo;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      a = (mlo == mhi) ? 0.5 * (lo + hi) : hi - mhi * (hi - lo) / (mhi - mlo);
      const double m = miss(a);
      if (std::fabs(m) <= 1e-12 || hi - lo <= 1e-15) break;
      if (m > 0.0) {
        lo = a;
        mlo = m;
        if (side == -1) mhi *= 0.5;
        side = -1;
      } else {
        hi = a;
        mhi = m;
        if (side == 1) mlo *= 0.5;
        side = 1;
      }
    }

    ControlSchedule plan;
    plan.epsilon = eps;
    plan.breakpoints.push_back(0.0);
    DiffusionState z = z0;
    z = append_steer(f, plan, z, eps, nearest_lift(z.x, ex.argmin));
    z = append_hold(f, plan, z, a, ex.argmin);
    z = append_steer(f, plan, z, a + eps, nearest_lift(z.x, ex.argmax));
    z = append_hold(f, plan, z, t - eps, ex.argmax);
    append_steer(f, plan, z, t, nearest_lift(z.x, z1.x));
    return plan;
  }
  throw PlanError(PlanError::Code::InsufficientTime, "no steering window small enough reaches the target");
}

// ---- velocity schedules ---------------------------------------------------

PdmpState integrate_velocity_control(const PeriodicPotential& f, PdmpState z0, const ControlSchedule& plan) {
  double x = z0.x, u = z0.u;
  int y = z0.y;
  for (std::size_t i = 0; i < plan.pieces(); ++i) {
    y = plan.values[i] >= 0.0 ? 1 : -1;
    const double len = plan.duration(i);
    u += f.path_integral(x, y, len);
    x += y * len;
  }
  if (plan.terminal_velocity) y = *plan.terminal_velocity;
  return {wrap_angle(x), u, y};
}

namespace {

double directed_distance(double from, double to, int dir) {
  return dir > 0 ? forward_distance(from, to) : forward_distance(to, from);
}

void push_piece(ControlSchedule& plan, int y, double len) {
  if (len <= 0.0) return;
  plan.breakpoints.push_back(plan.breakpoints.back() + len);
  plan.values.push_back(static_cast<double>(y));
}

void push_zigzag(ControlSchedule& plan, double dwell, double rate) {
  if (dwell <= 0.0) return;
  const double half = 1.0 / rate;
  const auto cycles = static_cast<long long>(std::floor(dwell * rate / 2.0));
  for (long long i = 0; i < cycles; ++i) {
    push_piece(plan, +1, half);
    push_piece(plan, -1, half);
  }
  const double rest = dwell - 2.0 * static_cast<double>(cycles) * half;
  if (rest > 0.0) {
    push_piece(plan, +1, 0.5 * rest);
    push_piece(plan, -1, 0.5 * rest);
  }
}

}  // namespace

ControlSchedule plan_pdmp_velocity_schedule(const PeriodicPotential& f, PdmpState z0, PdmpState z1, double t,
                                            double switch_rate) {
  if (!(t > 0.0) || !(switch_rate > 0.0)) throw PlanError(PlanError::Code::BadArgument, "need t > 0 and switch_rate > 0");
  if ((z0.y != 1 && z0.y != -1) || (z1.y != 1 && z1.y != -1))
    throw PlanError(PlanError::Code::BadArgument, "velocities must be +1 or -1");
  if (!inside_support(f, z0.u, z1.u, t))
    throw PlanError(PlanError::Code::OutsideSupport, "u1 - u0 is outside the open interval (t min F, t max F)");

  if (circle_distance(z0.x + z0.y * t, z1.x) <= 1e-9 && std::fabs(segment_u(f, z0.x, z0.y, t, z0.u) - z1.u) <= 1e-9)
    return ControlSchedule{{0.0, t}, {static_cast<double>(z0.y)}, 0.0, z1.y};

  const Extremes ex = global_extremes(f);
  const std::vector<double> zeros = periodic_roots([&f](double x) { return f.value(x); }, 4096, 1e-14);
  const std::vector<double> parks = z1.u >= z0.u ? std::vector<double>{ex.argmax, ex.argmin}
                                                 : std::vector<double>{ex.argmin, ex.argmax};

  struct Candidate {
    int d1, d2, d3;
    double park, zero, t1, t2, t3, dwell_park, dwell_zero, cost;
  };
  std::optional<Candidate> best;
  for (double park : parks) {
    for (int d1 : {1, -1}) {
      const double t1 = directed_distance(z0.x, park, d1);
      const double i1 = f.path_integral(z0.x, d1, t1);
      for (double zero : zeros) {
        for (int d2 : {1, -1}) {
          const double t2 = directed_distance(park, zero, d2);
          const double i2 = f.path_integral(park, d2, t2);
          for (int d3 : {1, -1}) {
            const double t3 = directed_distance(zero, z1.x, d3);
            const double i3 = f.path_integral(zero, d3, t3);
            const double dwell_park = (z1.u - z0.u - i1 - i2 - i3) / f.value(park);
            if (dwell_park < 0.0) continue;
            const double dwell_zero = t - t1 - t2 - t3 - dwell_park;
            if (dwell_zero < 0.0) continue;
            // the zero-level dwell carries the first-order averaging error
            const double cost = dwell_zero * std::fabs(f.derivative(zero, 1)) + 1e-9 * (t1 + t2 + t3);
            if (!best || cost < best->cost)
              best = Candidate{d1, d2, d3, park, zero, t1, t2, t3, dwell_park, dwell_zero, cost};
          }
        }
      }
    }
  }
  if (!best) throw PlanError(PlanError::Code::InsufficientTime, "unit-speed travel leaves no time to adjust u");

  ControlSchedule plan;
  plan.breakpoints.push_back(0.0);
  push_piece(plan, best->d1, best->t1);
  push_zigzag(plan, best->dwell_park, switch_rate);
  push_piece(plan, best->d2, best->t2);
  push_zigzag(plan, best->dwell_zero, switch_rate);
  push_piece(plan, best->d3, best->t3);
  if (plan.values.empty()) push_piece(plan, z0.y, t);
  plan.breakpoints.back() = t;
  plan.terminal_velocity = z1.y;
  return plan;
}

}  // namespace silab

#include "silab/pdmp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "silab/circle.hpp"
#include "silab/quadrature.hpp"

namespace silab {

const char* cause_name(JumpCause c) {
  switch (c) {
    case JumpCause::Landscape: return "landscape";
    case JumpCause::ConstantRate: return "constant-rate";
    case JumpCause::HorizonEnd: return "horizon-end";
  }
  return "?";
}

std::vector<Segment> EventLog::segments() const {
  std::vector<Segment> out;
  out.reserve(events.size());
  PdmpState start = initial;
  double t0 = 0.0;
  for (const auto& ev : events) {
    out.push_back({t0, ev.t - t0, start});
    start = ev.state;
    t0 = ev.t;
  }
  return out;
}

double local_rate(const PeriodicPotential& f, double lambda, const PdmpState& s) {
  return lambda + std::max(0.0, s.y * s.u * f.derivative(s.x, 1));
}

double segment_u(const PeriodicPotential& f, double x0, int y, double s, double u0) {
  return u0 + f.path_integral(x0, y, s);
}

double thinning_window(const PeriodicPotential& f) {
  const double slope = f.sup_abs_slope();
  return slope > 0.0 ? std::min(std::numbers::pi, 1.0 / (2.0 * slope)) : std::numbers::pi;
}

namespace {

// Shared thinning loop. `coef(s)` is the factor multiplying y F'(x + y s) in
// the landscape intensity and `coef_bound(s, h)` bounds |coef| on [s, s + h].
// |F'| on the window is bounded by its midpoint value plus h/2 sup|F''|.
template <class Coef, class CoefBound>
NextEvent next_event(const PeriodicPotential& f, double lambda, double x, int y, Coef&& coef, CoefBound&& coef_bound,
                     PdmpStreams& rng, double max_time) {
  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double theta2 = lambda > 0.0 ? exp1(rng.clock) / lambda : std::numeric_limits<double>::infinity();
  const double limit = std::min(theta2, max_time);
  const double h = thinning_window(f);
  const double slope_sup = f.sup_abs_slope();
  const double half_curv = 0.5 * h * f.derivative_bound(2);

  double s = 0.0;
  while (s < limit) {
    const double window_end = std::min(s + h, limit);
    const double local = std::fabs(f.value_and_slope(x + y * (s + 0.5 * h)).slope) + half_curv;
    const double bound = coef_bound(s, h) * std::min(slope_sup, local);
    if (bound > 0.0) {
      const double proposal = s + exp1(rng.landscape) / bound;
      if (proposal < window_end) {
        s = proposal;
        const double rate = y * coef(s) * f.value_and_slope(x + y * s).slope;
        if (unif(rng.landscape) * bound < rate) return {s, JumpCause::Landscape};
        continue;
      }
    }
    s = window_end;
  }
  if (theta2 <= max_time) return {theta2, JumpCause::ConstantRate};
  return {max_time, JumpCause::HorizonEnd};
}

}  // namespace

NextEvent sample_next_event(const PeriodicPotential& f, double lambda, const PdmpState& state, PdmpStreams& rng,
                            double max_time) {
  const double growth = f.sup_abs();
  auto coef = [&](double s) { return state.u + f.path_integral(state.x, state.y, s); };
  auto bound = [&](double s, double h) { return std::fabs(coef(s)) + h * growth; };
  return next_event(f, lambda, state.x, state.y, coef, bound, rng, max_time);
}

NextEvent sample_next_event_driven(const PeriodicPotential& f, double lambda, const Drive& g, double t0, double x, int y,
                                   PdmpStreams& rng, double max_time) {
  auto coef = [&](double s) { return g(t0 + s); };
  auto bound = [&](double s, double h) { return g.bound(t0 + s, t0 + s + h); };
  return next_event(f, lambda, x, y, coef, bound, rng, max_time);
}

PdmpPath::PdmpPath(const PeriodicPotential& f, double lambda, PdmpState z0, std::uint64_t seed)
    : f_(&f), lambda_(lambda), state_(z0), rng_(seed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (z0.y != 1 && z0.y != -1) throw std::invalid_argument("velocity must be +1 or -1");
  state_.x = wrap_angle(z0.x);
}

PdmpPath::PdmpPath(const PeriodicPotential& f, double lambda, Drive g, double x0, int y0, std::uint64_t seed)
    : f_(&f), lambda_(lambda), g_(std::move(g)), state_{wrap_angle(x0), 0.0, y0}, rng_(seed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (y0 != 1 && y0 != -1) throw std::invalid_argument("velocity must be +1 or -1");
  state_.u = (*g_)(0.0);
}

PdmpEvent PdmpPath::advance(double until) {
  const double room = until - t_;
  if (!(room > 0.0)) return {t_, state_, JumpCause::HorizonEnd};
  const NextEvent next = g_ ? sample_next_event_driven(*f_, lambda_, *g_, t_, state_.x, state_.y, rng_, room)
                            : sample_next_event(*f_, lambda_, state_, rng_, room);
  if (g_) {
    t_ = next.cause == JumpCause::HorizonEnd ? until : t_ + next.theta;
    state_.u = (*g_)(t_);
  } else {
    state_.u = segment_u(*f_, state_.x, state_.y, next.theta, state_.u);
    t_ = next.cause == JumpCause::HorizonEnd ? until : t_ + next.theta;
  }
  state_.x = wrap_angle(state_.x + state_.y * next.theta);
  if (next.cause != JumpCause::HorizonEnd) {
    state_.y = -state_.y;
    ++jumps_;
  }
  return {t_, state_, next.cause};
}

namespace {

EventLog run(PdmpPath& path, double horizon, const PdmpOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  EventLog log;
  log.initial = path.state();
  for (;;) {
    PdmpEvent ev = path.advance(horizon);
    log.events.push_back(ev);
    if (ev.cause == JumpCause::HorizonEnd) break;
    if (path.jumps() > opts.event_cap)
      throw PdmpError("event count exceeded the cap of " + std::to_string(opts.event_cap));
  }
  return log;
}

}  // namespace

EventLog simulate_pdmp(const PeriodicPotential& f, double lambda, PdmpState z0, double horizon, std::uint64_t seed,
                       const PdmpOptions& opts) {
  PdmpPath path(f, lambda, z0, seed);
  EventLog log = run(path, horizon, opts);
  log.lambda = lambda;
  log.seed = seed;
  return log;
}

EventLog simulate_pdmp_driven(const PeriodicPotential& f, double lambda, const Drive& g, double x0, int y0, double horizon,
                              std::uint64_t seed, const PdmpOptions& opts) {
  PdmpPath path(f, lambda, g, x0, y0, seed);
  EventLog log = run(path, horizon, opts);
  log.lambda = lambda;
  log.seed = seed;
  log.driven = true;
  return log;
}

namespace {

template <class Rate>
std::vector<double> cdf_from_rate(Rate&& rate, const std::vector<double>& grid, int per_cell) {
  std::vector<double> cdf;
  cdf.reserve(grid.size());
  double cumulative = 0.0, prev = 0.0;
  for (double s : grid) {
    if (s < prev) throw std::invalid_argument("grid must be increasing from 0");
    if (s > prev) cumulative += composite_simpson(rate, prev, s, per_cell);
    cdf.push_back(1.0 - std::exp(-cumulative));
    prev = s;
  }
  return cdf;
}

}  // namespace

std::vector<double> jump_time_cdf_oracle(const PeriodicPotential& f, double lambda, double x0, int y, double u0,
                                         const std::vector<double>& grid, int per_cell) {
  auto rate = [&](double s) {
    const double u = u0 + f.path_integral(x0, y, s);
    return lambda + std::max(0.0, y * u * f.derivative(x0 + y * s, 1));
  };
  return cdf_from_rate(rate, grid, per_cell);
}

std::vector<double> jump_time_cdf_oracle_driven(const PeriodicPotential& f, double lambda, const Drive& g, double x0, int y,
                                                const std::vector<double>& grid, int per_cell) {
  auto rate = [&](double s) { return lambda + std::max(0.0, y * g(s) * f.derivative(x0 + y * s, 1)); };
  return cdf_from_rate(rate, grid, per_cell);
}

double pdmp_escape_bound(double lambda, double M, double eta) {
  return std::exp(2.0 * lambda * std::numbers::pi - eta * M);
}

}  // namespace silab

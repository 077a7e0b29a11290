#include "silab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <sstream>

#include "silab/roots.hpp"

namespace silab {

namespace {

// Derivatives smaller than this fraction of their coefficient bound are
// treated as vanishing when measuring the order of a critical point. Root
// polishing leaves a location error that a tighter threshold would mistake
// for a nonzero higher derivative at degenerate points.
constexpr double kOrderRelTol = 1e-3;

int critical_order(const PeriodicPotential& f, double x, int max_order) {
  for (int k = 2; k <= max_order; ++k) {
    if (std::fabs(f.derivative(x, k)) > kOrderRelTol * f.derivative_bound(k)) return k;
  }
  return 0;
}

std::string fmt_angle(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const PeriodicPotential& f, const CriticalSearch& opts) {
  if (f.is_constant())
    throw LandscapeError(LandscapeError::Code::DegenerateRoot, "potential is constant: every point is a degenerate critical point");

  auto slope = [&f](double x) { return f.derivative(x, 1); };
  const double h = kTwoPi / opts.grid;
  std::vector<CriticalPoint> out;
  for (double r : periodic_roots(slope, opts.grid, opts.tol)) {
    CriticalPoint p;
    p.x = r;
    p.value = f.value(r);
    p.kind = slope(r - 0.5 * h) > 0.0 ? CriticalKind::LocalMax : CriticalKind::LocalMin;
    p.order = critical_order(f, r, opts.max_order);
    if (p.order == 0)
      throw LandscapeError(LandscapeError::Code::DegenerateRoot,
                           "no derivative of order <= " + std::to_string(opts.max_order) + " is nonzero at x=" + fmt_angle(r));
    out.push_back(p);
  }
  return out;
}

CriticalLandscape classify_landscape(const PeriodicPotential& f, const std::vector<CriticalPoint>& points,
                                     const CriticalSearch& opts) {
  (void)f;
  CriticalLandscape l;
  l.points = points;
  std::sort(l.points.begin(), l.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  for (const auto& p : l.points) {
    if (std::fabs(p.value) <= opts.value_tol)
      throw LandscapeError(LandscapeError::Code::ZeroCriticalValue, "critical value vanishes at x=" + fmt_angle(p.x));
    const bool positive = p.value > 0.0;
    if (p.kind == CriticalKind::LocalMax) {
      (positive ? l.M_plus : l.M_minus).push_back(p);
    } else {
      (positive ? l.m_plus : l.m_minus).push_back(p);
      l.minima.push_back(p);
    }
    if ((p.kind == CriticalKind::LocalMax && !positive) || (p.kind == CriticalKind::LocalMin && positive))
      l.traps.push_back(p);
  }
  return l;
}

CriticalLandscape analyze_landscape(const PeriodicPotential& f, const CriticalSearch& opts) {
  return classify_landscape(f, find_critical_points(f, opts), opts);
}

std::pair<double, double> level_crossings(const PeriodicPotential& f, double x, double level, int grid) {
  if (!(level > f.value(x)))
    throw LandscapeError(LandscapeError::Code::BadLevel, "level must lie strictly above F at the minimum");
  const double h = kTwoPi / grid;
  auto walk = [&](int dir) {
    auto g = [&](double s) { return f.value(x + dir * s) - level; };
    double prev = 0.0, gprev = g(0.0);
    for (int i = 1; i <= grid; ++i) {
      double s = i * h;
      double gs = g(s);
      if (gs >= 0.0) {
        if (gs == 0.0) return s;
        return bisect(g, prev, s, gprev, 0.0);
      }
      prev = s;
      gprev = gs;
    }
    throw LandscapeError(LandscapeError::Code::NoCrossing, "level is never reached from the minimum at x=" + fmt_angle(x));
  };
  return {walk(-1), walk(+1)};
}

namespace {

// F decreasing on [x - left, x] and increasing on [x, x + right], on a grid.
bool monotone_around(const PeriodicPotential& f, double x, double left, double right, int grid) {
  auto side = [&](int dir, double span) {
    double prev = f.value(x);
    for (int i = 1; i <= grid; ++i) {
      double v = f.value(x + dir * span * i / grid);
      if (v < prev - 1e-14) return false;
      prev = v;
    }
    return true;
  };
  return side(-1, left) && side(+1, right);
}

double kappa_scan(const PeriodicPotential& f, const CriticalLandscape& l, double delta, const GeometryOptions& opts) {
  double kappa = std::numeric_limits<double>::infinity();
  const int n = opts.kappa_grid;
  for (const auto& m : l.minima) {
    for (int i = 0; i < n; ++i) {
      double expo = n == 1 ? 0.0 : -opts.kappa_span_decades * (n - 1 - i) / (n - 1);
      double eta = delta * std::pow(10.0, expo);
      auto [lo, hi] = level_crossings(f, m.x, m.value + eta, opts.grid);
      kappa = std::min(kappa, std::min(lo, hi) / std::sqrt(eta));
    }
  }
  return kappa;
}

bool delta_admissible(const PeriodicPotential& f, const CriticalLandscape& l, double delta, const GeometryOptions& opts) {
  for (const auto& m : l.minima) {
    double lo, hi;
    try {
      std::tie(lo, hi) = level_crossings(f, m.x, m.value + 2.0 * delta, opts.grid);
    } catch (const LandscapeError&) {
      return false;
    }
    if (lo + hi >= kTwoPi) return false;
    if (!monotone_around(f, m.x, lo, hi, opts.grid)) return false;
  }
  double k = kappa_scan(f, l, delta, opts);
  return std::isfinite(k) && k > 0.0;
}

}  // namespace

double compute_delta(const PeriodicPotential& f, const CriticalLandscape& l, const GeometryOptions& opts) {
  if (l.minima.empty()) throw LandscapeError(LandscapeError::Code::NoMinima, "landscape has no local minima");
  double cap;
  if (!l.m_minus.empty()) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& p : l.m_minus) worst = std::max(worst, p.value);
    cap = -worst / 3.0;
  } else {
    cap = (f.max_value() - f.min_value()) / 4.0;
  }
  for (double delta = cap; delta >= opts.delta_floor; delta *= 0.5) {
    if (delta_admissible(f, l, delta, opts)) return delta;
  }
  throw LandscapeError(LandscapeError::Code::NoValidDelta, "no admissible delta above the search floor");
}

LevelGeometry compute_level_geometry(const PeriodicPotential& f, const CriticalLandscape& l, double delta, double eta,
                                     const GeometryOptions& opts) {
  if (!(delta > 0.0) || !(eta > 0.0) || eta > delta)
    throw LandscapeError(LandscapeError::Code::BadLevel, "need 0 < eta <= delta");
  if (l.minima.empty()) throw LandscapeError(LandscapeError::Code::NoMinima, "landscape has no local minima");
  LevelGeometry g;
  g.delta = delta;
  g.eta = eta;
  for (const auto& m : l.minima) {
    MinimumGeometry mg;
    mg.x = m.x;
    mg.value = m.value;
    auto [lo, hi] = level_crossings(f, m.x, m.value + 2.0 * delta, opts.grid);
    mg.left = m.x - lo;
    mg.right = m.x + hi;
    mg.interval = {wrap_angle(mg.left), lo + hi};
    auto [blo, bhi] = level_crossings(f, m.x, m.value + eta, opts.grid);
    mg.b_left = m.x - blo;
    mg.b_right = m.x + bhi;
    auto [elo, ehi] = level_crossings(f, m.x, m.value + 2.0 * eta, opts.grid);
    mg.escape_interval = {wrap_angle(m.x - elo), elo + ehi};
    g.c_complement.arcs.push_back(mg.escape_interval);
    g.minima.push_back(mg);
  }
  g.kappa_raw = kappa_scan(f, l, delta, opts);
  g.kappa = opts.kappa_safety * g.kappa_raw;
  return g;
}

ArcSet LevelGeometry::minima_set() const {
  std::vector<double> xs;
  for (const auto& m : minima) xs.push_back(m.x);
  return ArcSet::points(xs);
}

ArcSet LevelGeometry::b_points() const {
  std::vector<double> xs;
  for (const auto& m : minima) {
    xs.push_back(m.b_left);
    xs.push_back(m.b_right);
  }
  return ArcSet::points(xs);
}

std::vector<std::string> check_level_geometry(const PeriodicPotential& f, const CriticalLandscape& l,
                                              const LevelGeometry& g, int grid) {
  std::vector<std::string> bad;
  const double tol = 1e-9;
  for (const auto& m : g.minima) {
    const std::string at = " at minimum x=" + fmt_angle(m.x);
    const double top = m.value + 2.0 * g.delta;
    if (std::fabs(f.value(m.left) - top) > tol || std::fabs(f.value(m.right) - top) > tol)
      bad.push_back("interval endpoints off the 2*delta level" + at);
    if (!monotone_around(f, m.x, m.x - m.left, m.right - m.x, grid)) bad.push_back("F not monotone on interval" + at);
    if (std::fabs(f.value(m.b_left) - (m.value + g.eta)) > tol || std::fabs(f.value(m.b_right) - (m.value + g.eta)) > tol)
      bad.push_back("B points off the eta level" + at);
    if (!(m.b_left > m.left && m.b_right < m.right)) bad.push_back("B points outside the interval" + at);
    for (int i = 0; i <= 64; ++i) {
      double eta = g.delta * std::pow(10.0, -7.0 * i / 64.0);
      auto [lo, hi] = level_crossings(f, m.x, m.value + eta, grid);
      if (std::min(lo, hi) < g.kappa * std::sqrt(eta)) {
        bad.push_back("d(x, B^eta) < kappa sqrt(eta) for eta=" + fmt_angle(eta) + at);
        break;
      }
    }
  }
  if (!(g.kappa > 0.0)) bad.push_back("kappa is not positive");
  if (l.ergodic()) {
    ArcSet wide;
    for (const auto& m : g.minima) wide.arcs.push_back(m.interval);
    for (int i = 0; i < grid; ++i) {
      double z = kTwoPi * i / grid;
      if (f.value(z) >= -g.delta + tol && wide.contains(z)) {
        bad.push_back("C^delta misses {F >= -delta} at z=" + fmt_angle(z));
        break;
      }
    }
  }
  return bad;
}

AssumptionReport validate_assumptions(const PeriodicPotential& f, const CriticalSearch& opts) {
  AssumptionReport r;
  r.non_constant = !f.is_constant();
  if (!r.non_constant) r.failures.push_back("non-constant: F is constant");

  r.changes_sign = f.min_value() < 0.0 && f.max_value() > 0.0;
  if (!r.changes_sign) r.failures.push_back("sign change: F does not take both signs");

  r.nonzero_critical_values = true;
  if (r.non_constant) {
    auto slope = [&f](double x) { return f.derivative(x, 1); };
    auto curv = [&f](double x) { return f.derivative(x, 2); };
    std::vector<double> crit = periodic_roots(slope, opts.grid, opts.tol);
    // critical points where F' touches zero without changing sign
    for (double r2 : periodic_roots(curv, opts.grid, opts.tol))
      if (std::fabs(slope(r2)) <= 1e-9) crit.push_back(r2);
    for (double c : crit) {
      if (std::fabs(f.value(c)) <= opts.value_tol) {
        r.nonzero_critical_values = false;
        r.failures.push_back("nonzero critical values: F(" + fmt_angle(c) + ") = 0 at a critical point");
        break;
      }
    }
  }

  r.bracket_rank = true;
  r.pdmp_bracket_rank = false;
  for (int i = 0; i < opts.grid; ++i) {
    double x = kTwoPi * i / opts.grid;
    bool some = false;
    for (int k = 1; k <= opts.max_order && !some; ++k) some = std::fabs(f.derivative(x, k)) > opts.tol;
    if (!some) r.bracket_rank = false;
    if (std::fabs(f.derivative(x, 1)) > opts.tol) r.pdmp_bracket_rank = true;
  }
  if (!r.bracket_rank) r.failures.push_back("bracket rank: all derivatives up to k_max vanish somewhere");
  if (!r.pdmp_bracket_rank) r.failures.push_back("velocity-jump bracket rank: F' vanishes identically");
  return r;
}

}  // namespace silab

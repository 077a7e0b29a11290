#include "silab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "silab/parallel.hpp"
#include "silab/roots.hpp"

namespace silab {

// ---- histograms -------------------------------------------------------------

int HistogramGrid::x_bin(double x) const {
  int b = static_cast<int>(wrap_angle(x) / kTwoPi * n_x);
  return std::clamp(b, 0, n_x - 1);
}

int HistogramGrid::u_slot(double u) const {
  if (u < u_lo) return 0;
  if (u >= u_hi) return n_u + 1;
  int b = static_cast<int>((u - u_lo) / (u_hi - u_lo) * n_u);
  return 1 + std::clamp(b, 0, n_u - 1);
}

std::size_t HistogramGrid::index(int xb, int us, int y) const {
  const std::size_t layer = with_y && y < 0 ? 1 : 0;
  return (layer * n_x + static_cast<std::size_t>(xb)) * u_slots() + static_cast<std::size_t>(us);
}

EmpiricalHistogram::EmpiricalHistogram(HistogramGrid grid) : grid_(grid), weights_(grid.cells(), 0.0) {
  if (grid.n_x < 1 || grid.n_u < 1 || !(grid.u_lo < grid.u_hi)) throw std::invalid_argument("bad histogram grid");
}

void EmpiricalHistogram::add(double x, double u, int y, double weight) {
  weights_[grid_.index(grid_.x_bin(x), grid_.u_slot(u), y)] += weight;
}

EmpiricalHistogram& EmpiricalHistogram::merge(const EmpiricalHistogram& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("histogram grids differ");
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += other.weights_[i];
  return *this;
}

double EmpiricalHistogram::total_weight() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

std::vector<double> EmpiricalHistogram::masses() const {
  const double total = total_weight();
  std::vector<double> m(weights_.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = weights_[i] / total;
  return m;
}

EmpiricalHistogram EmpiricalHistogram::x_marginal() const {
  HistogramGrid g{grid_.n_x, 1, -1.0, 1.0, false};
  EmpiricalHistogram out(g);
  for (int layer = 0; layer < (grid_.with_y ? 2 : 1); ++layer)
    for (int xb = 0; xb < grid_.n_x; ++xb)
      for (int us = 0; us < grid_.u_slots(); ++us)
        out.weights_[g.index(xb, 1, 1)] += weights_[grid_.index(xb, us, layer == 0 ? 1 : -1)];
  return out;
}

EmpiricalHistogram occupation_histogram(const Trajectory& tr, const HistogramGrid& grid, double t_from, double t_to) {
  EmpiricalHistogram h(grid);
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double a = std::max(tr.t[i], t_from), b = std::min(tr.t[i + 1], t_to);
    if (b > a) h.add(tr.states[i].x, tr.states[i].u, b - a);
  }
  if (tr.size() == 1) h.add(tr.states[0].x, tr.states[0].u, 1.0);
  return h;
}

namespace {

// Splits PDMP segments at x-bin edges and at zeros of F, so that u is
// monotone on every piece, then at the u edges by bisection.
class SegmentBinner {
 public:
  SegmentBinner(const PeriodicPotential& f, EmpiricalHistogram& h)
      : f_(f), h_(h), zeros_(periodic_roots([&f](double x) { return f.value(x); }, 4096, 1e-14)) {}

  void add(double x0, double u0, int y, double len) {
    const HistogramGrid& g = h_.grid();
    const double width = kTwoPi / g.n_x;
    double s = 0.0;
    double u_start = u0;
    while (s < len) {
      const double xs = wrap_angle(x0 + y * s);
      double piece;
      if (y > 0) {
        piece = g.x_edge(g.x_bin(xs) + 1) - xs;
      } else {
        piece = xs - g.x_edge(g.x_bin(xs));
        if (piece <= 0.0) piece = width;
      }
      if (piece <= 0.0) piece = width;
      for (double z : zeros_) {
        const double dz = y > 0 ? forward_distance(xs, z) : forward_distance(z, xs);
        if (dz > 0.0 && dz < piece) piece = dz;
      }
      // tiny pieces left by rounding at an edge would stall the walk
      piece = std::max(piece, 1e-12);
      const bool last = s + piece >= len - 1e-12;
      if (last) piece = len - s;
      const double u_end = u0 + f_.path_integral(x0, y, s + piece);
      const double xm = x0 + y * (s + 0.5 * piece);
      add_monotone(xm, y, x0, u0, s, piece, u_start, u_end);
      if (last) break;
      s += piece;
      u_start = u_end;
    }
  }

 private:
  void add_monotone(double xm, int y, double x0, double u0, double s, double piece, double ua, double ub) {
    const HistogramGrid& g = h_.grid();
    const int xb = g.x_bin(xm);
    int sa = g.u_slot(ua);
    const int sb = g.u_slot(ub);
    double from = s;
    while (sa != sb) {
      const int step = sb > sa ? 1 : -1;
      const double edge = g.u_edge(step > 0 ? sa : sa - 1);  // slot j covers [u_edge(j-1), u_edge(j))
      auto excess = [&](double r) { return (u0 + f_.path_integral(x0, y, r) - edge) * step; };
      double lo = from, hi = s + piece;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) >= 0.0 ? hi : lo) = mid;
      }
      h_.add_to_cell(g.index(xb, sa, y), hi - from);
      from = hi;
      sa += step;
    }
    h_.add_to_cell(g.index(xb, sa, y), s + piece - from);
  }

  const PeriodicPotential& f_;
  EmpiricalHistogram& h_;
  std::vector<double> zeros_;
};

}  // namespace

void add_segment(const PeriodicPotential& f, EmpiricalHistogram& h, double x0, double u0, int y, double len) {
  SegmentBinner(f, h).add(x0, u0, y, len);
}

EmpiricalHistogram occupation_histogram(const PeriodicPotential& f, const EventLog& log, const HistogramGrid& grid,
                                        double t_from, double t_to) {
  EmpiricalHistogram h(grid);
  SegmentBinner binner(f, h);
  for (const Segment& seg : log.segments()) {
    const double a = std::max(seg.t0, t_from), b = std::min(seg.t0 + seg.duration, t_to);
    if (!(b > a)) continue;
    const double skip = a - seg.t0;
    const double x = seg.start.x + seg.start.y * skip;
    const double u = segment_u(f, seg.start.x, seg.start.y, skip, seg.start.u);
    binner.add(x, u, seg.start.y, b - a);
  }
  return h;
}

double tv_distance(const EmpiricalHistogram& a, const EmpiricalHistogram& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("histogram grids differ");
  const auto ma = a.masses(), mb = b.masses();
  double sum = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) sum += std::fabs(ma[i] - mb[i]);
  return 0.5 * sum;
}

// ---- escape probabilities ---------------------------------------------------

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

EscapeEstimate make_escape_estimate(std::uint64_t successes, std::uint64_t trials, double bound) {
  EscapeEstimate e;
  e.successes = successes;
  e.trials = trials;
  e.estimate = trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  e.interval = wilson_interval(successes, trials);
  e.bound = bound;
  return e;
}

const char* process_name(Process p) { return p == Process::Diffusion ? "diffusion" : "pdmp"; }

bool escape_trial(const PeriodicPotential& f, const ProcessSpec& spec, double M, double inner, double x, double outer,
                  int y0, double cap, std::uint64_t seed, bool* censored) {
  if (censored) *censored = false;
  const double side = outer > inner ? 1.0 : -1.0;
  // signed offset from the minimum, positive towards the outer end
  double p = (x - inner) * side;
  const double reach = (outer - inner) * side;
  if (p <= 0.0) return false;
  if (p >= reach) return true;

  if (spec.process == Process::Diffusion) {
    DiffusionPath path(f, Drive::constant(M), x, spec.dt, seed);
    const std::int64_t n = static_cast<std::int64_t>(std::ceil(cap / spec.dt));
    for (std::int64_t i = 0; i < n; ++i) {
      path.step();
      p += path.last_dx() * side;
      if (p <= 0.0) return false;
      if (p >= reach) return true;
    }
  } else {
    PdmpPath path(f, spec.lambda, Drive::constant(M), x, y0, seed);
    double t = 0.0;
    int y = y0;
    while (t < cap) {
      const PdmpEvent ev = path.advance(cap);
      const double len = ev.t - t;
      const double dir = y * side;
      if (dir < 0.0 && p <= len) return false;
      if (dir > 0.0 && reach - p <= len) return true;
      p += dir * len;
      t = ev.t;
      y = ev.state.y;
      if (ev.cause == JumpCause::HorizonEnd) break;
    }
  }
  if (censored) *censored = true;
  return false;
}

EscapeStart escape_start(const LevelGeometry& geometry, std::uint64_t i) {
  const std::size_t starts = 2 * geometry.minima.size();
  const auto& m = geometry.minima[(i % starts) / 2];
  const bool left = i % 2 == 0;
  const double lo_end = m.x - forward_distance(m.escape_interval.lo, m.x);
  return {m.x, left ? m.b_left : m.b_right, left ? lo_end : lo_end + m.escape_interval.length};
}

EscapeEstimate estimate_escape(const PeriodicPotential& f, const LevelGeometry& geometry, const EscapeSetup& setup) {
  if (geometry.minima.empty()) throw std::invalid_argument("geometry has no minima");
  const double eta = geometry.eta;
  const double bound = setup.spec.process == Process::Diffusion
                           ? diffusion_escape_bound(f, setup.M, eta)
                           : pdmp_escape_bound(setup.spec.lambda, setup.M, eta);
  // 0: stayed, 1: escaped, 2: censored
  const auto outcome = parallel_map<char>(setup.reps, setup.workers, [&](std::uint64_t i) {
    const EscapeStart st = escape_start(geometry, i);
    const std::uint64_t seed = derive_replica_seed(setup.seed, i);
    const int y0 = (make_stream(seed, 7)() & 1) ? 1 : -1;
    bool cens = false;
    const bool hit = escape_trial(f, setup.spec, setup.M, st.inner, st.x, st.outer, y0, setup.cap, seed, &cens);
    return static_cast<char>(hit ? 1 : cens ? 2 : 0);
  });
  const auto hits = static_cast<std::uint64_t>(std::count(outcome.begin(), outcome.end(), 1));
  const auto censored = static_cast<std::uint64_t>(std::count(outcome.begin(), outcome.end(), 2));
  EscapeEstimate e = make_escape_estimate(hits, setup.reps, bound);
  e.censored = censored;
  if (!(setup.M * eta > 1.0)) e.warnings.push_back("hypothesis M * eta > 1 does not hold");
  if (censored > 0) e.warnings.push_back(std::to_string(censored) + " trials censored at the time cap");
  return e;
}

// ---- hitting times ----------------------------------------------------------

void HittingSample::add(double value, bool is_censored) {
  if (!(value >= 0.0)) throw std::invalid_argument("hitting times are nonnegative");
  values.push_back(value);
  censored.push_back(is_censored);
}

double HittingSample::uncensored_fraction() const {
  if (values.empty()) return 0.0;
  const auto n = std::count(censored.begin(), censored.end(), false);
  return static_cast<double>(n) / static_cast<double>(values.size());
}

double HittingSample::median() const {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> v = values;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2) return v[mid];
  const double upper = v[mid];
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + mid));
}

double censoring_cap(const HittingSample& pilot, double factor) { return factor * pilot.median(); }

HittingResult hitting_time_diffusion(const PeriodicPotential& f, DiffusionState z0,
                                     const std::function<bool(double, double)>& target, double cap, double dt,
                                     std::uint64_t seed) {
  if (!(cap > 0.0)) throw std::invalid_argument("cap must be positive");
  if (target(wrap_angle(z0.x), z0.u)) return {0.0, false};
  DiffusionPath path(f, z0, dt, seed);
  const std::int64_t n = static_cast<std::int64_t>(std::ceil(cap / dt));
  for (std::int64_t i = 0; i < n; ++i) {
    path.step();
    const DiffusionState s = path.state();
    if (target(s.x, s.u)) return {path.time(), false};
  }
  return {cap, true};
}

HittingResult hitting_time_diffusion(const PeriodicPotential& f, DiffusionState z0, const ArcSet& target, double cap,
                                     double dt, std::uint64_t seed) {
  if (!(cap > 0.0)) throw std::invalid_argument("cap must be positive");
  if (target.contains(z0.x)) return {0.0, false};
  DiffusionPath path(f, z0, dt, seed);
  const std::int64_t n = static_cast<std::int64_t>(std::ceil(cap / dt));
  for (std::int64_t i = 0; i < n; ++i) {
    path.step();
    if (step_meets(target, path.x_before_step(), path.last_dx())) return {path.time(), false};
  }
  return {cap, true};
}

HittingResult hitting_time_pdmp(const PeriodicPotential& f, double lambda, PdmpState z0, const ArcSet& target, double cap,
                                std::uint64_t seed) {
  if (!(cap > 0.0)) throw std::invalid_argument("cap must be positive");
  if (target.contains(z0.x)) return {0.0, false};
  PdmpPath path(f, lambda, z0, seed);
  PdmpState s = path.state();
  double t = 0.0;
  while (t < cap) {
    const PdmpEvent ev = path.advance(cap);
    const double hit = first_contact(target, s.x, s.y, ev.t - t);
    if (hit >= 0.0) return {t + hit, false};
    t = ev.t;
    s = ev.state;
    if (ev.cause == JumpCause::HorizonEnd) break;
  }
  return {cap, true};
}

// ---- moments and dominance --------------------------------------------------

namespace {

// Whether the largest 1% of the terms carry more than half of their sum.
bool heavy_tail(std::vector<double> terms) {
  if (terms.empty()) return false;
  const double total = std::accumulate(terms.begin(), terms.end(), 0.0);
  const std::size_t k = std::max<std::size_t>(1, (terms.size() + 99) / 100);
  std::nth_element(terms.begin(), terms.begin() + (k - 1), terms.end(), std::greater<>());
  const double top = std::accumulate(terms.begin(), terms.begin() + k, 0.0);
  return terms.size() > 1 && top > 0.5 * total;
}

void mean_and_error(const std::vector<double>& v, double& mean, double& se) {
  const double n = static_cast<double>(v.size());
  mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

MomentScan exponential_moment_scan(const HittingSample& sample, const std::vector<double>& thetas) {
  if (sample.values.empty()) throw std::invalid_argument("empty sample");
  MomentScan scan;
  scan.censoring_flag = sample.uncensored_fraction() < 0.99;
  for (double theta : thetas) {
    std::vector<double> terms;
    terms.reserve(sample.size());
    for (double z : sample.values) terms.push_back(std::exp(theta * z));
    MomentRow row;
    row.theta = theta;
    mean_and_error(terms, row.estimate, row.std_error);
    row.tail_flag = heavy_tail(std::move(terms));
    scan.rows.push_back(row);
  }
  return scan;
}

Dominance::Verdict Dominance::verdict() const {
  if (a_below_b && b_below_a) return Verdict::Both;
  if (a_below_b) return Verdict::ABelowB;
  if (b_below_a) return Verdict::BBelowA;
  return Verdict::Crossing;
}

Dominance ecdf_dominance(std::vector<double> a, std::vector<double> b, double tol) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto ecdf = [](const std::vector<double>& s, double r) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), r) - s.begin()) / static_cast<double>(s.size());
  };
  Dominance d{true, true};
  for (const auto* pool : {&a, &b}) {
    for (double r : *pool) {
      const double fa = ecdf(a, r), fb = ecdf(b, r);
      if (fa < fb - tol) d.a_below_b = false;
      if (fb < fa - tol) d.b_below_a = false;
    }
  }
  return d;
}

double dkw_tolerance(std::size_t n_a, std::size_t n_b, double alpha) {
  const double c = std::log(2.0 / alpha) / 2.0;
  return std::sqrt(c / static_cast<double>(n_a)) + std::sqrt(c / static_cast<double>(n_b));
}

// ---- localization -----------------------------------------------------------

std::optional<double> detect_convergence(const Trajectory& tr, const PeriodicPotential& f,
                                         const CriticalLandscape& landscape, double window, double eps) {
  if (tr.size() < 2) throw std::invalid_argument("trajectory too short");
  const double end = tr.t.back();
  if (!(window > 0.0) || window > end - tr.t.front()) throw std::invalid_argument("window exceeds the trajectory span");
  std::size_t first = 0;
  while (tr.t[first] < end - window) ++first;
  if (tr.size() - first < 2) return std::nullopt;
  for (const CriticalPoint& trap : landscape.traps) {
    const double sign = f.value(trap.x) > 0.0 ? 1.0 : -1.0;
    bool ok = true;
    for (std::size_t i = first; i < tr.size() && ok; ++i) {
      if (circle_distance(tr.states[i].x, trap.x) >= eps) ok = false;
      if (i > first && !((tr.states[i].u - tr.states[i - 1].u) * sign > 0.0)) ok = false;
    }
    if (ok) return trap.x;
  }
  return std::nullopt;
}

Trajectory sample_event_log(const PeriodicPotential& f, const EventLog& log, double stride) {
  if (!(stride > 0.0)) throw std::invalid_argument("stride must be positive");
  Trajectory tr;
  tr.meta.seed = log.seed;
  tr.meta.potential = f.describe();
  const auto segs = log.segments();
  std::size_t k = 0;
  for (std::int64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * stride;
    if (t > log.horizon()) break;
    while (k + 1 < segs.size() && segs[k].t0 + segs[k].duration <= t) ++k;
    const Segment& sg = segs[k];
    const double s = t - sg.t0;
    tr.t.push_back(t);
    tr.states.push_back({wrap_angle(sg.start.x + sg.start.y * s), segment_u(f, sg.start.x, sg.start.y, s, sg.start.u)});
  }
  if (tr.t.empty() || tr.t.back() < log.horizon()) {
    tr.t.push_back(log.horizon());
    tr.states.push_back({log.events.back().state.x, log.events.back().state.u});
  }
  return tr;
}

double eta_schedule(std::uint64_t j, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  const double n = static_cast<double>(j) + 1.0;
  return std::min(4.0 * std::log(n) / n, delta);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, const std::vector<int>& n_grid, double floor) {
  std::vector<double> ls, ld;
  for (auto [t, d] : series) {
    if (t <= std::numbers::e) continue;
    ls.push_back(std::log(std::log(t) / t));
    ld.push_back(std::log(std::max(d, floor)));
  }
  if (ls.size() < 2 || n_grid.empty()) throw std::invalid_argument("not enough samples to fit");
  RateFit fit;
  double best = std::numeric_limits<double>::infinity();
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("grid entries must be positive");
    const double slope = 1.0 / n;
    double c = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) c += ld[i] - slope * ls[i];
    c /= static_cast<double>(ls.size());
    double r = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) r += std::pow(ld[i] - c - slope * ls[i], 2);
    fit.residuals.push_back(r);
    if (r < best) {
      best = r;
      fit.n = n;
    }
  }
  return fit;
}

// ---- drift and minorization -------------------------------------------------

PdmpState final_state(const PeriodicPotential& f, const ProcessSpec& spec, PdmpState z0, double t, std::uint64_t seed) {
  if (spec.process == Process::Diffusion) {
    DiffusionPath path(f, {z0.x, z0.u}, spec.dt, seed);
    for (std::int64_t i = step_count(t, spec.dt); i > 0; --i) path.step();
    return {path.state().x, path.state().u, z0.y};
  }
  PdmpPath path(f, spec.lambda, z0, seed);
  while (path.advance(t).cause != JumpCause::HorizonEnd) {
  }
  return path.state();
}

std::vector<DriftRow> DriftReport::at(double t) const {
  std::vector<DriftRow> out;
  for (const auto& r : rows)
    if (r.t == t) out.push_back(r);
  return out;
}

namespace {

// One replica of the drift check, advanced level by level.
struct DriftPath {
  std::optional<DiffusionPath> diffusion;
  std::optional<PdmpPath> pdmp;

  double advance_u(double t) {
    if (diffusion) {
      const std::int64_t target = step_count(t, diffusion->dt());
      while (diffusion->steps() < target) diffusion->step();
      return diffusion->state().u;
    }
    while (pdmp->advance(t).cause != JumpCause::HorizonEnd) {
    }
    return pdmp->state().u;
  }
};

}  // namespace

DriftReport lyapunov_drift_check(const PeriodicPotential& f, const DriftSetup& setup) {
  DriftReport report;
  report.kappa = setup.kappa;
  try {
    if (!analyze_landscape(f).ergodic()) report.warnings.push_back("trap set is not empty; the drift bound is not expected");
  } catch (const LandscapeError& e) {
    report.warnings.push_back(std::string("landscape: ") + e.what());
  }
  std::vector<double> ts = setup.t_grid;
  std::sort(ts.begin(), ts.end());
  const std::size_t nu = setup.u0_grid.size();
  std::vector<std::size_t> by_size(nu);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::sort(by_size.begin(), by_size.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(setup.u0_grid[a]) < std::fabs(setup.u0_grid[b]); });

  std::vector<DriftPath> paths(nu * setup.reps);
  for (std::size_t ui = 0; ui < nu; ++ui) {
    for (std::uint64_t r = 0; r < setup.reps; ++r) {
      const std::uint64_t seed = derive_replica_seed(derive_replica_seed(setup.seed, ui), r);
      Rng start = make_stream(seed, 3);
      const double x0 = std::uniform_real_distribution<double>(0.0, kTwoPi)(start);
      DriftPath& p = paths[ui * setup.reps + r];
      if (setup.spec.process == Process::Diffusion) {
        p.diffusion.emplace(f, DiffusionState{x0, setup.u0_grid[ui]}, setup.spec.dt, seed);
      } else {
        const int y0 = (start() & 1) ? 1 : -1;
        p.pdmp.emplace(f, setup.spec.lambda, PdmpState{x0, setup.u0_grid[ui], y0}, seed);
      }
    }
  }

  for (double t : ts) {
    const auto u = parallel_map<double>(paths.size(), setup.workers, [&](std::uint64_t i) { return paths[i].advance_u(t); });
    std::vector<DriftRow> level;
    for (std::size_t ui = 0; ui < nu; ++ui) {
      std::vector<double> terms(setup.reps);
      for (std::uint64_t r = 0; r < setup.reps; ++r) terms[r] = std::exp(setup.kappa * std::fabs(u[ui * setup.reps + r]));
      const double scale = std::exp(setup.kappa * std::fabs(setup.u0_grid[ui]));
      DriftRow row;
      row.t = t;
      row.u0 = setup.u0_grid[ui];
      mean_and_error(terms, row.estimate, row.std_error);
      row.ratio = row.estimate / scale;
      row.ratio_se = row.std_error / scale;
      row.tail_flag = heavy_tail(std::move(terms));
      level.push_back(row);
    }
    report.rows.insert(report.rows.end(), level.begin(), level.end());
    if (!(level[by_size.back()].ratio <= setup.slack)) continue;
    report.t_used = t;
    report.contraction = true;
    report.monotone = true;
    for (std::size_t k = 0; k + 1 < nu; ++k) {
      const DriftRow& a = level[by_size[k]];
      const DriftRow& b = level[by_size[k + 1]];
      if (b.ratio > a.ratio + 2.0 * std::hypot(a.ratio_se, b.ratio_se)) report.monotone = false;
    }
    for (const auto& r : level) report.c_t = std::max(report.c_t, r.estimate - 0.5 * std::exp(setup.kappa * std::fabs(r.u0)));
    break;
  }
  for (const auto& r : report.rows)
    if (r.tail_flag) {
      report.warnings.push_back("heavy tail in E exp(kappa |U_t|) estimate");
      break;
    }
  return report;
}

DoeblinReport doeblin_probe(const PeriodicPotential& f, const ProcessSpec& spec, const std::vector<PdmpState>& starts,
                            const StateBox& box, double t, std::uint64_t reps, std::uint64_t seed, int workers) {
  if (!(box.x.length > 0.0) || !(box.u_hi > box.u_lo)) throw std::invalid_argument("box must have positive volume");
  if (starts.empty()) throw std::invalid_argument("no start points");
  DoeblinReport report;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto inside = parallel_map<char>(reps, workers, [&](std::uint64_t r) {
      const PdmpState z = final_state(f, spec, starts[i], t, derive_replica_seed(derive_replica_seed(seed, i), r));
      return static_cast<char>(box.contains(z.x, z.u));
    });
    const auto hits = static_cast<std::uint64_t>(std::count(inside.begin(), inside.end(), 1));
    report.per_start.push_back(make_escape_estimate(hits, reps, 0.0));
    if (i == 0 || report.per_start[i].estimate < report.per_start[report.argmin].estimate) report.argmin = i;
  }
  report.min_estimate = report.per_start[report.argmin].estimate;
  report.min_interval = report.per_start[report.argmin].interval;
  return report;
}

}  // namespace silab

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "silab/landscape.hpp"
#include "silab/stats.hpp"

using namespace silab;
using std::numbers::pi;

namespace {

EmpiricalHistogram random_histogram(std::mt19937_64& rng, const HistogramGrid& g, int n) {
  EmpiricalHistogram h(g);
  std::uniform_real_distribution<double> ux(0.0, 2 * pi), uu(-15.0, 15.0), w(0.0, 1.0);
  for (int i = 0; i < n; ++i) h.add(ux(rng), uu(rng), w(rng) < 0.5 ? 1 : -1, w(rng));
  return h;
}

Trajectory constant_path(double x, double u0, double slope, double span, int n) {
  Trajectory tr;
  for (int i = 0; i <= n; ++i) {
    const double t = span * i / n;
    tr.t.push_back(t);
    tr.states.push_back({x, u0 + slope * t});
  }
  return tr;
}

}  // namespace

TEST_CASE("tv examples and grid mismatch") {
  HistogramGrid g{2, 1, -1.0, 1.0, false};
  EmpiricalHistogram a(g), b(g), c(g);
  a.add(0.1, 0.0, 1.0);
  a.add(4.0, 0.0, 1.0);
  b.add(0.1, 0.0, 1.0);
  c.add(4.0, 0.0, 1.0);
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(b, c) == doctest::Approx(1.0));
  CHECK(tv_distance(a, b) == doctest::Approx(0.5));
  EmpiricalHistogram d(HistogramGrid{3, 1, -1.0, 1.0, false});
  d.add(0.1, 0.0, 1.0);
  CHECK_THROWS_AS(tv_distance(a, d), std::invalid_argument);
  CHECK_THROWS(a.merge(d));
}

TEST_CASE("histogram mass, merge monoid and tv metric") {
  std::mt19937_64 rng(3);
  HistogramGrid g;
  g.with_y = true;
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_histogram(rng, g, 300), b = random_histogram(rng, g, 200), c = random_histogram(rng, g, 100);
    const auto m = a.masses();
    double s = 0.0;
    for (double v : m) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::fabs(s - 1.0) < 1e-12);
    auto ab = a;
    ab.merge(b);
    auto ba = b;
    ba.merge(a);
    CHECK(std::fabs(ab.total_weight() - a.total_weight() - b.total_weight()) < 1e-12);
    auto ab_c = ab;
    ab_c.merge(c);
    auto bc = b;
    bc.merge(c);
    auto a_bc = a;
    a_bc.merge(bc);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      REQUIRE(std::fabs(ab.weights()[i] - ba.weights()[i]) < 1e-12);
      REQUIRE(std::fabs(ab_c.weights()[i] - a_bc.weights()[i]) < 1e-12);
    }
    CHECK(tv_distance(a, b) == tv_distance(b, a));
    CHECK(tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12);
    CHECK(tv_distance(a, b) >= 0.0);
    CHECK(tv_distance(a, b) <= 1.0);
  }
}

TEST_CASE("occupation of a stationary path and of two halves") {
  HistogramGrid g;
  const auto tr = constant_path(1.0, 0.5, 0.0, 10.0, 100);
  const auto h = occupation_histogram(tr, g);
  const auto m = h.masses();
  CHECK(*std::max_element(m.begin(), m.end()) == doctest::Approx(1.0));
  const auto f = PeriodicPotential::cosine();
  const auto log = simulate_pdmp(f, 1.0, {0.5, 0.0, 1}, 40.0, 2);
  const auto whole = occupation_histogram(f, log, g, 0.0, 40.0);
  auto first = occupation_histogram(f, log, g, 0.0, 20.0);
  const auto second = occupation_histogram(f, log, g, 20.0, 40.0);
  CHECK(first.total_weight() == doctest::Approx(20.0).epsilon(1e-12));
  first.merge(second);
  const auto mw = whole.masses(), mm = first.masses();
  for (std::size_t i = 0; i < mw.size(); ++i) REQUIRE(std::fabs(mw[i] - mm[i]) < 1e-12);
}

TEST_CASE("exact segment binning against fine sampling") {
  const PeriodicPotential f(0.2, {{1, 1.0, 0.0}, {2, 0.0, 0.5}});
  HistogramGrid g{16, 8, -2.0, 2.0, true};
  EmpiricalHistogram exact(g), sampled(g);
  add_segment(f, exact, 0.3, -1.0, 1, 9.0);
  const int n = 900000;
  for (int i = 0; i < n; ++i) {
    const double s = 9.0 * (i + 0.5) / n;
    sampled.add(0.3 + s, segment_u(f, 0.3, 1, s, -1.0), 1, 9.0 / n);
  }
  CHECK(tv_distance(exact, sampled) < 1e-4);
  CHECK(exact.total_weight() == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("telegraph x-marginal is uniform") {
  const auto f = PeriodicPotential::cosine();
  const auto log = simulate_pdmp_driven(f, 1.0, Drive::constant(0.0), 0.0, 1, 1e4, 21);
  HistogramGrid g;
  const auto h = occupation_histogram(f, log, g).x_marginal();
  EmpiricalHistogram uniform(h.grid());
  for (int i = 0; i < g.n_x; ++i) uniform.add(g.x_edge(i) + 1e-9, 0.0, 1.0);
  CHECK(tv_distance(h, uniform) < 0.05);
}

TEST_CASE("wilson interval coverage") {
  std::mt19937_64 rng(8);
  for (double p : {0.5, 0.01}) {
    const int reps = 1000, n = 1000;
    int covered = 0;
    std::binomial_distribution<int> bin(n, p);
    for (int r = 0; r < reps; ++r) {
      const int k = bin(rng);
      const auto iv = wilson_interval(k, n);
      covered += iv.lo <= p && p <= iv.hi;
      const auto e = make_escape_estimate(k, n, 0.0);
      REQUIRE(e.interval.lo <= e.estimate);
      REQUIRE(e.estimate <= e.interval.hi);
    }
    CHECK(double(covered) / reps >= 0.93);
  }
  const auto zero = wilson_interval(0, 100);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
}

TEST_CASE("escape estimate warns when M eta <= 1") {
  const auto f = PeriodicPotential::cosine();
  const auto l = analyze_landscape(f);
  const auto g = compute_level_geometry(f, l, 1.0 / 3.0, 1.0 / 3.0);
  EscapeSetup s;
  s.spec = {Process::Pdmp, 1.0, 1e-3};
  s.M = 0.0;
  s.reps = 50;
  const auto e = estimate_escape(f, g, s);
  CHECK_FALSE(e.warnings.empty());
  CHECK(e.trials == 50);
  s.M = 16.0;
  const auto e2 = estimate_escape(f, g, s);
  CHECK(e2.warnings.empty());
  CHECK(e2.bound == doctest::Approx(pdmp_escape_bound(1.0, 16.0, 1.0 / 3.0)));
}

TEST_CASE("hitting times: start inside, censoring, PDMP exact") {
  const auto f = PeriodicPotential::cosine();
  const ArcSet target = ArcSet::points({2.0});
  const auto r0 = hitting_time_diffusion(f, {2.0, 0.0}, target, 5.0, 1e-3, 1);
  CHECK(r0.time == 0.0);
  CHECK_FALSE(r0.censored);
  const auto r1 = hitting_time_diffusion(f, {1.0, 0.0}, [](double, double u) { return u > 1e6; }, 2.0, 1e-3, 1);
  CHECK(r1.censored);
  CHECK(r1.time == doctest::Approx(2.0));
  const auto r2 = hitting_time_pdmp(f, 1e-9, {1.0, 0.0, 1}, target, 5.0, 1);
  CHECK_FALSE(r2.censored);
  CHECK(r2.time == doctest::Approx(1.0).epsilon(1e-9));
  const auto r3 = hitting_time_pdmp(f, 1.0, {1.0, 0.0, 1}, ArcSet{}, 3.0, 1);
  CHECK(r3.censored);
  HittingSample s;
  for (double v : {1.0, 2.0, 3.0, 100.0}) s.add(v, v > 50);
  CHECK(s.uncensored_fraction() == doctest::Approx(0.75));
  CHECK(censoring_cap(s) == doctest::Approx(100.0 * s.median()));
  CHECK_THROWS(s.add(-1.0, false));
}

TEST_CASE("exponential moment scan") {
  HittingSample c;
  for (int i = 0; i < 100; ++i) c.add(2.0, false);
  const auto sc = exponential_moment_scan(c, {0.1, 0.5});
  CHECK(sc.rows[0].estimate == doctest::Approx(std::exp(0.2)).epsilon(1e-14));
  CHECK(sc.rows[1].estimate == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK_FALSE(sc.censoring_flag);

  std::mt19937_64 rng(4);
  std::exponential_distribution<double> ex(1.0);
  HittingSample e;
  for (int i = 0; i < 100000; ++i) e.add(ex(rng), false);
  const auto se = exponential_moment_scan(e, {0.5, 1.0});
  CHECK(std::fabs(se.rows[0].estimate - 2.0) <= 3 * se.rows[0].std_error);
  CHECK_FALSE(se.rows[0].tail_flag);
  CHECK(se.rows[1].tail_flag);

  HittingSample cens;
  for (int i = 0; i < 100; ++i) cens.add(1.0, i < 5);
  CHECK(exponential_moment_scan(cens, {0.1}).censoring_flag);
}

TEST_CASE("ecdf dominance") {
  CHECK(ecdf_dominance({1, 2, 3}, {2, 3, 4}).verdict() == Dominance::Verdict::ABelowB);
  CHECK(ecdf_dominance({2, 3, 4}, {1, 2, 3}).verdict() == Dominance::Verdict::BBelowA);
  CHECK(ecdf_dominance({0, 10}, {5, 5}).verdict() == Dominance::Verdict::Crossing);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a;
    for (int i = 0; i < 50; ++i) a.push_back(n01(rng));
    CHECK(ecdf_dominance(a, a).verdict() == Dominance::Verdict::Both);
  }
  CHECK(dkw_tolerance(100, 100) == doctest::Approx(2 * std::sqrt(std::log(40.0) / 200)));
}

TEST_CASE("convergence detection") {
  const PeriodicPotential f(-0.2, {{1, 1.0, 0.0}, {2, 1.0, 0.0}});
  const auto l = analyze_landscape(f);
  const auto tr = constant_path(pi, 10.0, -0.2, 100.0, 1000);
  const auto got = detect_convergence(tr, f, l, 10.0, 0.15);
  REQUIRE(got.has_value());
  CHECK(std::fabs(*got - pi) < 1e-8);
  // u moving the wrong way
  CHECK_FALSE(detect_convergence(constant_path(pi, 10.0, 0.2, 100.0, 1000), f, l, 10.0, 0.15).has_value());
  // not near a trap
  CHECK_FALSE(detect_convergence(constant_path(1.8, 10.0, -1.3, 100.0, 1000), f, l, 10.0, 0.15).has_value());
  CHECK_THROWS(detect_convergence(tr, f, l, 200.0, 0.15));
  const auto cosf = PeriodicPotential::cosine();
  CHECK_FALSE(detect_convergence(constant_path(pi, 0.0, -1.0, 100.0, 100), cosf, analyze_landscape(cosf), 10.0, 0.15));

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> ux(0.0, 2 * pi), jitter(-0.1, 0.1);
  for (int t = 0; t < 200; ++t) {
    const double x = ux(rng);
    Trajectory p;
    double u = 5.0;
    for (int i = 0; i <= 200; ++i) {
      const double xi = wrap_angle(x + jitter(rng));
      p.t.push_back(i * 0.5);
      p.states.push_back({xi, u});
      u += f(xi) * 0.5;
    }
    if (const auto r = detect_convergence(p, f, l, 20.0, 0.15)) {
      bool in_trap = false;
      for (const auto& m : l.traps) in_trap = in_trap || *r == m.x;
      CHECK(in_trap);
    }
  }
}

TEST_CASE("eta schedule") {
  CHECK(eta_schedule(0, 1.0 / 3) == 0.0);
  CHECK(eta_schedule(1, 1.0 / 3) == doctest::Approx(1.0 / 3));
  CHECK(eta_schedule(100, 1.0 / 3) == doctest::Approx(4 * std::log(101.0) / 101).epsilon(1e-12));
  CHECK(eta_schedule(100, 1.0 / 3) == doctest::Approx(0.1828).epsilon(1e-3));
}

TEST_CASE("rate fit on synthetic series") {
  auto series = [](double n, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(1 - noise, 1 + noise);
    std::vector<std::pair<double, double>> s;
    for (int i = 0; i < 200; ++i) {
      const double t = 10.0 * std::pow(1e4, i / 199.0);
      s.emplace_back(t, std::pow(std::log(t) / t, 1.0 / n) * (noise > 0 ? u(rng) : 1.0));
    }
    return s;
  };
  const std::vector<int> grid{1, 2, 3, 4, 5, 6};
  CHECK(fit_rate(series(2, 0, 1), grid).n == 2);
  CHECK(fit_rate(series(1, 0, 1), grid).n == 1);
  for (int n : {1, 2, 3}) {
    const int got = fit_rate(series(n, 0.1, 7 + n), grid).n;
    CHECK(std::abs(got - n) <= 1);
  }
  auto zeros = series(2, 0, 1);
  zeros[50].second = 0.0;
  CHECK(fit_rate(zeros, grid).n == 2);
}

TEST_CASE("drift from u0 = 0 is bounded deterministically") {
  const auto f = PeriodicPotential::cosine();
  DriftSetup s;
  s.kappa = 0.05;
  s.t_grid = {5.0};
  s.u0_grid = {0.0, 3.0};
  s.reps = 200;
  s.seed = 2;
  const auto r = lyapunov_drift_check(f, s);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(std::isfinite(row.estimate));
    CHECK(row.estimate > 0.0);
  }
  CHECK(r.rows[0].estimate <= std::exp(0.05 * 1.0 * 5.0) + 1e-12);
}

TEST_CASE("doeblin probe extremes") {
  const auto f = PeriodicPotential::cosine();
  const std::vector<PdmpState> starts{{0.0, -1.0, 1}, {2.0, 1.0, -1}, {4.0, 0.0, 1}};
  const double t = 3.0;
  for (Process p : {Process::Diffusion, Process::Pdmp}) {
    const ProcessSpec spec{p, 1.0, 1e-3};
    const auto all = doeblin_probe(f, spec, starts, {{0.0, 2 * pi}, -10.0, 10.0}, t, 100, 1);
    CHECK(all.min_estimate == 1.0);
    const auto none = doeblin_probe(f, spec, starts, {{0.0, 2 * pi}, 5.0, 9.0}, t, 100, 1);
    CHECK(none.min_estimate == 0.0);
    CHECK(none.per_start.size() == starts.size());
  }
}

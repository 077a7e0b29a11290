#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "silab/landscape.hpp"
#include "silab/pdmp.hpp"

using namespace silab;
using std::numbers::pi;

namespace {

PeriodicPotential trap_potential() { return PeriodicPotential(-0.2, {{1, 1.0, 0.0}, {2, 1.0, 0.0}}); }

double simpson_u(const PeriodicPotential& f, double x0, int y, double s, double u0, int n = 2000) {
  const double h = s / n;
  double acc = f(x0) + f(x0 + y * s);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(x0 + y * i * h);
  return u0 + acc * h / 3.0;
}

}  // namespace

TEST_CASE("local rate examples") {
  const auto f = PeriodicPotential::cosine();
  CHECK(local_rate(f, 1.0, {pi / 2, 3.0, 1}) == doctest::Approx(1.0));
  CHECK(local_rate(f, 1.0, {3 * pi / 2, 3.0, 1}) == doctest::Approx(4.0));
  CHECK(local_rate(trap_potential(), 0.7, {1.1, 0.0, -1}) == 0.7);
}

TEST_CASE("segment_u examples and closed form") {
  const auto f = PeriodicPotential::cosine();
  for (double s : {0.2, 1.0, 3.0}) CHECK(segment_u(f, 0.0, 1, s, 2.0) == doctest::Approx(2.0 + std::sin(s)).epsilon(1e-14));
  CHECK(segment_u(f, pi, 1, pi, 1.5) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(segment_u(trap_potential(), 0.0, 1, 2 * pi, 0.3) == doctest::Approx(0.3 - 0.4 * pi).epsilon(1e-13));
  const PeriodicPotential g(0.1, {{1, 0.4, -0.3}, {3, 0.2, 0.7}});
  for (int y : {-1, 1})
    for (double s : {0.1, 2.0, 7.5}) CHECK(segment_u(g, 1.3, y, s, -0.4) == doctest::Approx(simpson_u(g, 1.3, y, s, -0.4)).epsilon(1e-10));
}

TEST_CASE("oracle CDF: closed forms and monotonicity") {
  const auto f = PeriodicPotential::cosine();
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(pi * i / 20);
  // u(s) = sin s and F'(s) = -sin s: the landscape rate vanishes
  const auto c0 = jump_time_cdf_oracle(f, 0.8, 0.0, 1, 0.0, grid, 200);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(c0[i] == doctest::Approx(1 - std::exp(-0.8 * grid[i])).epsilon(1e-12));
  const double M = 4.0;
  const auto c1 = jump_time_cdf_oracle_driven(f, 0.0, Drive::constant(M), pi, 1, grid, 2000);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(c1[i] == doctest::Approx(1 - std::exp(-M * (1 - std::cos(grid[i])))).epsilon(1e-10));
  const auto c2 = jump_time_cdf_oracle(trap_potential(), 0.5, 0.4, -1, 3.0, grid, 200);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(c2[i + 1] >= c2[i]);
  std::vector<double> far{0.0, 200.0};
  CHECK(jump_time_cdf_oracle(f, 1.0, 0.0, 1, 0.0, far, 50)[1] == doctest::Approx(1.0));
}

TEST_CASE("thinning sampler against the oracle, small sample") {
  const auto f = PeriodicPotential::cosine();
  const double M = 4.0;
  const int n = 20000;
  std::vector<double> theta;
  PdmpStreams rng(12);
  for (int i = 0; i < n; ++i) {
    auto e = sample_next_event_driven(f, 0.3, Drive::constant(M), 0.0, pi, 1, rng, 50.0);
    theta.push_back(e.theta);
  }
  std::sort(theta.begin(), theta.end());
  const auto cdf = jump_time_cdf_oracle_driven(f, 0.3, Drive::constant(M), pi, 1, theta, 20);
  double ks = 0.0;
  for (int i = 0; i < n; ++i) ks = std::max({ks, std::fabs(cdf[i] - (i + 1.0) / n), std::fabs(cdf[i] - double(i) / n)});
  CHECK(ks < 0.02);
}

TEST_CASE("event log invariants") {
  const auto f = trap_potential();
  const auto log = simulate_pdmp(f, 0.7, {0.5, 4.0, 1}, 300.0, 2024);
  REQUIRE(log.events.size() > 10);
  CHECK(log.events.back().cause == JumpCause::HorizonEnd);
  CHECK(log.events.back().t == doctest::Approx(300.0));
  PdmpState cur = log.initial;
  double t = 0.0;
  std::size_t landscape = 0;
  for (const auto& e : log.events) {
    const double s = e.t - t;
    REQUIRE(s >= 0.0);
    // unit speed, exact closed-form u
    CHECK(circle_distance(e.state.x, cur.x + cur.y * s) < 1e-9);
    CHECK(e.state.u == doctest::Approx(segment_u(f, cur.x, cur.y, s, cur.u)).epsilon(1e-12));
    CHECK(e.state.u == doctest::Approx(simpson_u(f, cur.x, cur.y, s, cur.u, 2 * std::max(2, int(s * 200)))).epsilon(1e-7));
    if (e.cause == JumpCause::HorizonEnd) {
      CHECK(e.state.y == cur.y);
    } else {
      CHECK(e.state.y == -cur.y);
    }
    if (e.cause == JumpCause::Landscape) {
      ++landscape;
      // the accepted proposal had a positive rate just before the flip
      CHECK(cur.y * e.state.u * f.derivative(e.state.x, 1) > 0.0);
      // right after it the landscape rate vanishes
      CHECK(e.state.y * e.state.u * f.derivative(e.state.x, 1) <= 0.0);
    }
    cur = e.state;
    t = e.t;
  }
  CHECK(landscape > 0);
  const auto segs = log.segments();
  CHECK(segs.size() == log.events.size());
}

TEST_CASE("reproducible per seed, event cap guard") {
  const auto f = PeriodicPotential::cosine();
  const auto a = simulate_pdmp(f, 1.0, {1.0, 2.0, -1}, 100.0, 5);
  const auto b = simulate_pdmp(f, 1.0, {1.0, 2.0, -1}, 100.0, 5);
  REQUIRE(a.events.size() == b.events.size());
  bool same = true;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    same = same && a.events[i].t == b.events[i].t && a.events[i].state.x == b.events[i].state.x;
  CHECK(same);
  CHECK_THROWS_AS(simulate_pdmp(f, 1.0, {1.0, 2.0, -1}, 1000.0, 5, {10}), PdmpError);
}

TEST_CASE("telegraph process when driven by zero") {
  const auto f = PeriodicPotential::cosine();
  const double lambda = 2.0, T = 5000.0;
  const auto log = simulate_pdmp_driven(f, lambda, Drive::constant(0.0), 0.0, 1, T, 8);
  std::size_t jumps = 0;
  for (const auto& e : log.events) {
    CHECK(e.cause != JumpCause::Landscape);
    jumps += e.cause == JumpCause::ConstantRate;
  }
  CHECK(std::fabs(double(jumps) - lambda * T) < 5 * std::sqrt(lambda * T));
}

TEST_CASE("full turn before the first constant-rate jump") {
  const auto f = PeriodicPotential::cosine();
  const double lambda = 0.1;
  const int n = 20000;
  int survived = 0;
  for (int i = 0; i < n; ++i) {
    PdmpStreams rng(derive_replica_seed(3, i));
    const auto e = sample_next_event_driven(f, lambda, Drive::constant(0.0), 0.0, 0.0, 1, rng, 2 * pi);
    survived += e.cause == JumpCause::HorizonEnd;
  }
  const double p = std::exp(-2 * pi * lambda);
  CHECK(std::fabs(double(survived) / n - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("landscape jumps only where y F' is positive when driven by a positive level") {
  const auto f = PeriodicPotential::cosine();
  const auto log = simulate_pdmp_driven(f, 0.5, Drive::constant(6.0), 2.5, -1, 500.0, 17);
  int prev_y = -1;
  std::size_t landscape = 0;
  for (const auto& e : log.events) {
    if (e.cause == JumpCause::Landscape) {
      ++landscape;
      CHECK(prev_y * f.derivative(e.state.x, 1) > 0.0);
    }
    prev_y = e.state.y;
  }
  CHECK(landscape > 0);
}

TEST_CASE("hitting B from A takes at least the distance") {
  const auto f = PeriodicPotential::cosine();
  const auto l = analyze_landscape(f);
  const double delta = compute_delta(f, l);
  const auto g = compute_level_geometry(f, l, delta, delta / 2);
  const double d = g.minima[0].distance_to_b();
  const ArcSet target = g.b_points();
  for (int i = 0; i < 500; ++i) {
    PdmpPath path(f, 1.0, {g.minima[0].x, 0.0, i % 2 ? 1 : -1}, derive_replica_seed(4, i));
    double hit = -1.0;
    while (hit < 0.0) {
      const PdmpState s = path.state();
      const double t0 = path.time();
      const auto e = path.advance(t0 + 100.0);
      const double c = first_contact(target, s.x, s.y, e.t - t0);
      if (c >= 0.0) hit = t0 + c;
    }
    REQUIRE(hit >= d * (1 - 1e-12));
  }
  CHECK(pdmp_escape_bound(0.25, 16.0, 1.0 / 3.0) == doctest::Approx(std::exp(0.5 * pi) * std::exp(-16.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("thinning window") {
  CHECK(thinning_window(PeriodicPotential::cosine()) == doctest::Approx(0.5));
  CHECK(thinning_window(PeriodicPotential(0.0, {{1, 0.01, 0.0}})) == doctest::Approx(pi));
}

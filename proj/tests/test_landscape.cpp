#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "silab/landscape.hpp"

using namespace silab;
using std::numbers::pi;

namespace {

PeriodicPotential trap_potential() { return PeriodicPotential(-0.2, {{1, 1.0, 0.0}, {2, 1.0, 0.0}}); }

// plain bisection, kept apart from the library's root finder
template <class Fn>
double oracle_root(Fn g, double a, double b) {
  double ga = g(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm < 0) == (ga < 0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

PeriodicPotential random_potential(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::uniform_int_distribution<int> nk(1, 4);
  std::vector<Harmonic> hs;
  for (int k = 1, n = nk(rng); k <= n; ++k) hs.push_back({k, c(rng), c(rng)});
  return PeriodicPotential(0.3 * c(rng), hs);
}

}  // namespace

TEST_CASE("evaluation examples") {
  const auto cosf = PeriodicPotential::cosine();
  CHECK(cosf(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosf(pi) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(trap_potential()(pi) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(cosf.derivative(pi / 2, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cosf.derivative(0.0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::fabs(trap_potential().derivative(0.0, 1)) < 1e-15);
}

TEST_CASE("periodicity and finite differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0.0, 2 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_potential(rng);
    for (int j = 0; j < 20; ++j) {
      const double x = ux(rng);
      CHECK(std::fabs(f(x) - f(x + 2 * pi)) < 1e-12);
      const double h = 1e-5;
      const double fd = (f(x + h) - f(x - h)) / (2 * h);
      const double d1 = f.derivative(x, 1);
      CHECK(std::fabs(fd - d1) <= 1e-5 * std::max(1.0, std::fabs(d1)));
      const double fd2 = (f.derivative(x + h, 2) - f.derivative(x - h, 2)) / (2 * h);
      CHECK(std::fabs(fd2 - f.derivative(x, 3)) <= 1e-5 * std::max(1.0, std::fabs(fd2)));
    }
  }
}

TEST_CASE("antiderivative and path integral") {
  const auto f = trap_potential();
  CHECK(f.path_integral(0.0, 1, 2 * pi) == doctest::Approx(-0.4 * pi).epsilon(1e-13));
  const auto cosf = PeriodicPotential::cosine();
  for (double s : {0.3, 1.0, 2.5}) CHECK(cosf.path_integral(0.0, 1, s) == doctest::Approx(std::sin(s)).epsilon(1e-14));
  CHECK(std::fabs(cosf.path_integral(pi, 1, pi)) < 1e-14);
}

TEST_CASE("critical points of cos") {
  const auto pts = find_critical_points(PeriodicPotential::cosine());
  REQUIRE(pts.size() == 2);
  CHECK(circle_distance(pts[0].x, 0.0) < 1e-8);
  CHECK(pts[0].kind == CriticalKind::LocalMax);
  CHECK(pts[0].value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(pts[1].x - pi) < 1e-8);
  CHECK(pts[1].kind == CriticalKind::LocalMin);
  CHECK(pts[1].value == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("critical points of cos x + cos 2x - 0.2 against closed form") {
  const auto f = trap_potential();
  const auto pts = find_critical_points(f);
  REQUIRE(pts.size() == 4);
  // F'(x) = -sin x (1 + 4 cos x)
  const double r = std::acos(-0.25);
  const double expected[] = {0.0, r, pi, 2 * pi - r};
  for (int i = 0; i < 4; ++i) {
    CHECK(circle_distance(pts[i].x, expected[i]) < 1e-8);
    CHECK(std::fabs(f.derivative(pts[i].x, 1)) <= 1e-12);
  }
  const auto l = classify_landscape(f, pts);
  REQUIRE(l.M_plus.size() == 1);
  CHECK(l.M_plus[0].value == doctest::Approx(1.8).epsilon(1e-12));
  REQUIRE(l.M_minus.size() == 1);
  CHECK(std::fabs(l.M_minus[0].x - pi) < 1e-8);
  CHECK(l.M_minus[0].value == doctest::Approx(-0.2).epsilon(1e-12));
  REQUIRE(l.m_minus.size() == 2);
  for (const auto& m : l.m_minus) CHECK(m.value == doctest::Approx(-1.325).epsilon(1e-12));
  CHECK(l.m_plus.empty());
  REQUIRE(l.traps.size() == 1);
  CHECK(std::fabs(l.traps[0].x - pi) < 1e-8);
  CHECK(l.minima.size() == 2);
}

TEST_CASE("degenerate and zero critical values") {
  CHECK_THROWS_AS(find_critical_points(PeriodicPotential(1.0, {{1, 0.0, 0.0}})), LandscapeError);
  // F(pi) = 0 at a critical point
  const PeriodicPotential f(0.0, {{1, 1.0, 0.0}, {2, 1.0, 0.0}});
  try {
    analyze_landscape(f);
    FAIL("expected ZeroCriticalValue");
  } catch (const LandscapeError& e) {
    CHECK(e.code() == LandscapeError::Code::ZeroCriticalValue);
  }
}

TEST_CASE("negation swaps the sets") {
  const auto f = trap_potential();
  const auto l = analyze_landscape(f);
  const auto n = analyze_landscape(f.negated());
  CHECK(n.M_plus.size() == l.m_minus.size());
  CHECK(n.m_minus.size() == l.M_plus.size());
  CHECK(n.M_minus.size() == l.m_plus.size());
  REQUIRE(n.m_plus.size() == 1);
  CHECK(std::fabs(n.m_plus[0].x - pi) < 1e-8);
  CHECK(n.m_plus[0].value == doctest::Approx(0.2).epsilon(1e-12));
  REQUIRE(n.traps.size() == 1);
  CHECK(std::fabs(n.traps[0].x - pi) < 1e-8);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_potential(rng);
    CriticalLandscape a, b;
    try {
      a = analyze_landscape(g);
      b = analyze_landscape(g.negated());
    } catch (const LandscapeError&) {
      continue;
    }
    CHECK(a.M_plus.size() == b.m_minus.size());
    CHECK(a.M_minus.size() == b.m_plus.size());
    CHECK(a.m_plus.size() == b.M_minus.size());
    CHECK(a.m_minus.size() == b.M_plus.size());
  }
}

TEST_CASE("classification partitions and alternates, monotone between critical points") {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto f = random_potential(rng);
    CriticalLandscape l;
    try {
      l = analyze_landscape(f);
    } catch (const LandscapeError&) {
      continue;
    }
    ++checked;
    CHECK(l.M_plus.size() + l.M_minus.size() + l.m_plus.size() + l.m_minus.size() == l.points.size());
    CHECK(l.traps.size() == l.M_minus.size() + l.m_plus.size());
    const auto& p = l.points;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto& a = p[i];
      const auto& b = p[(i + 1) % p.size()];
      CHECK(a.kind != b.kind);
      const double span = forward_distance(a.x, b.x);
      const double dir = a.kind == CriticalKind::LocalMin ? 1.0 : -1.0;
      double prev = f(a.x);
      bool monotone = true;
      for (int j = 1; j <= 1000; ++j) {
        const double v = f(a.x + span * j / 1000.0);
        if (dir * (v - prev) < -1e-13) monotone = false;
        prev = v;
      }
      CHECK(monotone);
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("assumption report") {
  CHECK(validate_assumptions(PeriodicPotential::cosine()).ok());
  const auto r1 = validate_assumptions(PeriodicPotential(0.0, {{1, 1.0, 0.0}, {2, 1.0, 0.0}}));
  CHECK_FALSE(r1.nonzero_critical_values);
  CHECK_FALSE(r1.ok());
  const auto r2 = validate_assumptions(PeriodicPotential(2.0, {{1, 1.0, 0.0}}));
  CHECK_FALSE(r2.changes_sign);
  CHECK_FALSE(r2.ok());
  const auto r3 = validate_assumptions(PeriodicPotential(1.0, {}));
  CHECK_FALSE(r3.non_constant);
}

TEST_CASE("delta and level geometry of cos") {
  const auto f = PeriodicPotential::cosine();
  const auto l = analyze_landscape(f);
  const double delta = compute_delta(f, l);
  CHECK(delta == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const auto g = compute_level_geometry(f, l, delta, delta);
  REQUIRE(g.minima.size() == 1);
  const auto& m = g.minima[0];
  // cos z = -2/3 on each side of pi
  const double b = std::acos(-2.0 / 3.0);
  CHECK(std::fabs(m.b_left - b) < 1e-8);
  CHECK(std::fabs(m.b_right - (2 * pi - b)) < 1e-8);
  CHECK(m.distance_to_b() == doctest::Approx(pi - b).epsilon(1e-8));
  CHECK(m.distance_to_b() == doctest::Approx(0.8411).epsilon(1e-4));
  // cos z = -1/3 at the interval ends
  const double z = std::acos(-1.0 / 3.0);
  CHECK(std::fabs(m.left - z) < 1e-8);
  CHECK(std::fabs(m.right - (2 * pi - z)) < 1e-8);
  // d(pi, B^eta) / sqrt(eta) = arccos(1 - eta) / sqrt(eta) tends to sqrt 2 from above
  CHECK(g.kappa_raw == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(g.kappa == doctest::Approx(0.99 * g.kappa_raw).epsilon(1e-14));
  CHECK(check_level_geometry(f, l, g).empty());
  CHECK_THROWS_AS(compute_level_geometry(f, l, delta, 2 * delta), LandscapeError);
}

TEST_CASE("delta and level geometry of the trap potential") {
  const auto f = trap_potential();
  const auto l = analyze_landscape(f);
  const double delta = compute_delta(f, l);
  CHECK(delta <= 1.325 / 3.0 + 1e-15);
  CHECK(delta > 0.0);
  for (double eta : {delta, delta / 2, delta / 8}) {
    const auto g = compute_level_geometry(f, l, delta, eta);
    CHECK(check_level_geometry(f, l, g).empty());
    REQUIRE(g.minima.size() == 2);
    for (const auto& m : g.minima) {
      // the nearest maxima bracket each minimum: 0 and pi
      const double lo = m.x < pi ? 0.0 : pi;
      const double hi = m.x < pi ? pi : 2 * pi;
      const double top = m.value + 2 * delta;
      const double zl = oracle_root([&](double s) { return f(s) - top; }, m.x, lo);
      const double zr = oracle_root([&](double s) { return f(s) - top; }, m.x, hi);
      CHECK(std::fabs(m.left - zl) < 1e-8);
      CHECK(std::fabs(m.right - zr) < 1e-8);
      const double bl = oracle_root([&](double s) { return f(s) - (m.value + eta); }, m.x, lo);
      const double br = oracle_root([&](double s) { return f(s) - (m.value + eta); }, m.x, hi);
      CHECK(std::fabs(m.b_left - bl) < 1e-8);
      CHECK(std::fabs(m.b_right - br) < 1e-8);
      CHECK(m.b_left > m.left);
      CHECK(m.b_right < m.right);
    }
    CHECK(g.kappa > 0.0);
  }
}

TEST_CASE("level geometry invariants on random potentials") {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const auto f = random_potential(rng);
    try {
      const auto l = analyze_landscape(f);
      const double delta = compute_delta(f, l);
      const auto g = compute_level_geometry(f, l, delta, 0.5 * delta);
      CHECK(check_level_geometry(f, l, g).empty());
      ++checked;
    } catch (const LandscapeError&) {
    }
  }
  CHECK(checked > 5);
}

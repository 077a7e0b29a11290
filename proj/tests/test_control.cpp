#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "silab/circle.hpp"
#include "silab/control.hpp"

using namespace silab;
using std::numbers::pi;

namespace {

// fixed-step RK4 of x' = v - u F'(x), u' = F(x) for F = cos
DiffusionState rk4_cos(DiffusionState z, const ControlSchedule& plan, double h) {
  auto rhs = [](double v, double x, double u, double& dx, double& du) {
    dx = v + u * std::sin(x);
    du = std::cos(x);
  };
  double x = z.x, u = z.u;
  for (std::size_t i = 0; i < plan.pieces(); ++i) {
    const double len = plan.duration(i), v = plan.values[i];
    const int n = std::max(1, int(std::ceil(len / h)));
    const double k = len / n;
    for (int j = 0; j < n; ++j) {
      double a1, b1, a2, b2, a3, b3, a4, b4;
      rhs(v, x, u, a1, b1);
      rhs(v, x + 0.5 * k * a1, u + 0.5 * k * b1, a2, b2);
      rhs(v, x + 0.5 * k * a2, u + 0.5 * k * b2, a3, b3);
      rhs(v, x + k * a3, u + k * b3, a4, b4);
      x += k / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      u += k / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    }
  }
  return {x, u};
}

// exact ±1 flow for F = cos
PdmpState flow_cos(PdmpState z, const ControlSchedule& plan) {
  double x = z.x, u = z.u;
  for (std::size_t i = 0; i < plan.pieces(); ++i) {
    const double s = plan.duration(i);
    const int y = plan.values[i] > 0 ? 1 : -1;
    u += (std::sin(x + y * s) - std::sin(x)) / y;
    x += y * s;
  }
  return {x, u, plan.values.back() > 0 ? 1 : -1};
}

}  // namespace

TEST_CASE("support condition") {
  const auto f = PeriodicPotential::cosine();
  CHECK(inside_support(f, 0.0, 2.0, 10.0));
  CHECK_FALSE(inside_support(f, 0.0, 10.0, 10.0));
  CHECK_FALSE(inside_support(f, 0.0, -10.0, 10.0));
  CHECK(inside_support(f, 0.0, 9.999, 10.0));
}

TEST_CASE("diffusion planner: identity gives the zero control") {
  const auto f = PeriodicPotential::cosine();
  ControlSchedule zero{{0.0, 3.0}, {0.0}};
  const auto end = integrate_diffusion_control(f, {1.0, 0.5}, zero, 1e-3);
  const auto plan = plan_diffusion_control(f, {1.0, 0.5}, end, 3.0, 0.01);
  REQUIRE(plan.pieces() >= 1);
  for (double v : plan.values) CHECK(v == 0.0);
}

TEST_CASE("diffusion planner example lands on the target") {
  const auto f = PeriodicPotential::cosine();
  const auto plan = plan_diffusion_control(f, {0.0, 0.0}, {pi, 2.0}, 10.0, 0.01);
  CHECK(plan.horizon() == doctest::Approx(10.0).epsilon(1e-12));
  for (std::size_t i = 0; i + 1 < plan.breakpoints.size(); ++i) CHECK(plan.breakpoints[i + 1] >= plan.breakpoints[i]);
  const auto lib = integrate_diffusion_control(f, {0.0, 0.0}, plan);
  CHECK(std::fabs(lib.u - 2.0) <= 0.05);
  CHECK(circle_distance(lib.x, pi) < 1e-9);
  const auto ind = rk4_cos({0.0, 0.0}, plan, 1e-4);
  CHECK(std::fabs(ind.u - 2.0) <= 0.05);
  CHECK(circle_distance(ind.x, pi) < 1e-3);
}

TEST_CASE("diffusion planner rejects unreachable targets") {
  const auto f = PeriodicPotential::cosine();
  try {
    plan_diffusion_control(f, {0.0, 0.0}, {pi, 15.0}, 10.0, 0.01);
    FAIL("expected OutsideSupport");
  } catch (const PlanError& e) {
    CHECK(e.code() == PlanError::Code::OutsideSupport);
  }
  CHECK_THROWS_AS(plan_diffusion_control(f, {0.0, 0.0}, {pi, 10.0}, 10.0, 0.01), PlanError);
  CHECK_THROWS_AS(plan_diffusion_control(f, {0.0, 0.0}, {pi, 1.0}, 10.0, 0.0), PlanError);
}

TEST_CASE("velocity planner: identity is a single piece") {
  const auto f = PeriodicPotential::cosine();
  const PdmpState z0{0.5, 1.0, 1};
  const PdmpState z1{0.5 + 4.0, segment_u(f, 0.5, 1, 4.0, 1.0), 1};
  const auto plan = plan_pdmp_velocity_schedule(f, z0, z1, 4.0, 1e3);
  REQUIRE(plan.pieces() == 1);
  CHECK(plan.values[0] == 1.0);
}

TEST_CASE("velocity planner example and first-order error") {
  const auto f = PeriodicPotential::cosine();
  for (int y1 : {-1, 1}) {
    const PdmpState z0{0.0, 0.0, 1}, z1{pi, 1.0, y1};
    const auto plan = plan_pdmp_velocity_schedule(f, z0, z1, 10.0, 1e3);
    CHECK(plan.horizon() == doctest::Approx(10.0).epsilon(1e-12));
    for (double v : plan.values) CHECK(std::fabs(v) == 1.0);
    const auto lib = integrate_velocity_control(f, z0, plan);
    const auto ind = flow_cos(z0, plan);
    CHECK(std::fabs(ind.u - 1.0) <= 0.02);
    CHECK(circle_distance(ind.x, pi) < 1e-9);
    CHECK(lib.u == doctest::Approx(ind.u).epsilon(1e-9));
    REQUIRE(plan.terminal_velocity.has_value());
    CHECK(*plan.terminal_velocity == y1);
  }
  const PdmpState z0{0.3, -1.0, 1}, z1{2.0, 2.5, -1};
  double previous = 0.0;
  for (double r : {100.0, 200.0, 400.0, 800.0}) {
    const auto plan = plan_pdmp_velocity_schedule(f, z0, z1, 12.0, r);
    const double err = std::fabs(flow_cos(z0, plan).u - z1.u);
    if (previous > 0.0 && err > 1e-9) {
      MESSAGE("switch rate " << r << " error " << err << " ratio " << previous / err);
      CHECK(previous / err > 1.5);
      CHECK(previous / err < 2.6);
    }
    previous = err;
  }
  try {
    plan_pdmp_velocity_schedule(f, z0, {2.0, 20.0, 1}, 12.0, 1e3);
    FAIL("expected OutsideSupport");
  } catch (const PlanError& e) {
    CHECK(e.code() == PlanError::Code::OutsideSupport);
  }
}

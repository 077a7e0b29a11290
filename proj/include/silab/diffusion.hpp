#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "silab/drive.hpp"
#include "silab/potential.hpp"
#include "silab/rng.hpp"

namespace silab {

struct DiffusionState {
  double x = 0.0;  // position, wrapped into [0, 2π)
  double u = 0.0;  // running integral of F along the path
};

struct TrajectoryMeta {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int record_every = 1;
  std::string potential;
};

/// Subsampled path. Times are i * dt * record_every, plus the final time when
/// the horizon is not a multiple of the stride. For driven runs `u` holds g(t).
struct Trajectory {
  std::vector<double> t;
  std::vector<DiffusionState> states;
  TrajectoryMeta meta;

  std::size_t size() const { return t.size(); }
};

/// One Euler–Maruyama step of
///   dX = dB - U F'(X) dt,   dU = F(X) dt
/// with the U increment taken at the left point. `gaussian` is a standard
/// normal draw.
DiffusionState em_step(const PeriodicPotential& f, DiffusionState s, double dt, double gaussian);

/// Streaming Euler–Maruyama path, homogeneous or driven by a fixed g(t).
/// Keeps the unwrapped position so hitting checks can follow each step.
class DiffusionPath {
 public:
  DiffusionPath(const PeriodicPotential& f, DiffusionState z0, double dt, std::uint64_t seed);
  DiffusionPath(const PeriodicPotential& f, Drive g, double x0, double dt, std::uint64_t seed);

  void step();
  double time() const { return static_cast<double>(steps_) * dt_; }
  std::int64_t steps() const { return steps_; }
  double dt() const { return dt_; }
  DiffusionState state() const { return {x_, driven_ ? g_(time()) : u_}; }
  /// displacement of the last step
  double last_dx() const { return last_dx_; }
  double x_before_step() const { return x_prev_; }

 private:
  const PeriodicPotential* f_;
  bool driven_ = false;
  Drive g_ = Drive::constant(0.0);
  double x_ = 0.0, u_ = 0.0, x_prev_ = 0.0, last_dx_ = 0.0;
  double dt_, sqrt_dt_;
  std::int64_t steps_ = 0;
  Rng rng_;
  Normal normal_;
};

struct DiffusionOptions {
  double dt = 1e-3;
  int record_every = 100;
};

/// Number of Euler steps used to cover `horizon` (horizon / dt rounded).
std::int64_t step_count(double horizon, double dt);

Trajectory simulate_diffusion(const PeriodicPotential& f, DiffusionState z0, double horizon, const DiffusionOptions& opts,
                              std::uint64_t seed);
Trajectory simulate_diffusion_driven(const PeriodicPotential& f, const Drive& g, double x0, double horizon,
                                     const DiffusionOptions& opts, std::uint64_t seed);

/// U at `horizon` of Euler paths with steps dt_fine * 2^j, j = 0 .. levels-1,
/// all driven by one Brownian path: each coarse increment is the sum of the
/// fine ones it covers. Level 0 matches simulate_diffusion with the same seed.
std::vector<double> coupled_terminal_u(const PeriodicPotential& f, DiffusionState z0, double horizon, double dt_fine,
                                       int levels, std::uint64_t seed);

enum class EscapeOrientation {
  /// (p(x1) - p(x)) / (p(x1) - p(x0)): probability of reaching x0 first
  AsPrinted,
  /// (p(x) - p(x0)) / (p(x1) - p(x0)): probability of reaching x1 first
  ReachFarEnd,
};

/// Exit probability of dX = dB - M F'(X) dt from the arc between x0 and x1
/// (given unwrapped, in either order, with x between them), from the scale
/// function p(y) = ∫_x^y exp(2M (F(z) - F(x))) dz. F must be monotone on the
/// arc; a grid check throws std::invalid_argument otherwise.
double analytic_escape_probability(const PeriodicPotential& f, double M, double x0, double x, double x1,
                                   EscapeOrientation orientation = EscapeOrientation::ReachFarEnd);

/// 8 π M ||F'|| exp(-2 M eta): single-attempt escape bound for the frozen diffusion.
double diffusion_escape_bound(const PeriodicPotential& f, double M, double eta);

}  // namespace silab

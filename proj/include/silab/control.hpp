#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "silab/diffusion.hpp"
#include "silab/pdmp.hpp"
#include "silab/potential.hpp"

namespace silab {

/// Piecewise-constant control on [0, horizon]: value[i] applies on
/// [breakpoints[i], breakpoints[i+1]).
struct ControlSchedule {
  std::vector<double> breakpoints;
  std::vector<double> values;
  /// steering window actually used by the diffusion planner
  double epsilon = 0.0;
  /// velocity set at the final time by the velocity planner
  std::optional<int> terminal_velocity;

  std::size_t pieces() const { return values.size(); }
  double horizon() const { return breakpoints.empty() ? 0.0 : breakpoints.back(); }
  double duration(std::size_t i) const { return breakpoints[i + 1] - breakpoints[i]; }
  double value_at(double s) const;
};

class PlanError : public std::runtime_error {
 public:
  enum class Code {
    /// u1 - u0 outside the open interval (t min F, t max F)
    OutsideSupport,
    /// inside the support but the unit-speed plan needs more time
    InsufficientTime,
    BadArgument,
  };
  PlanError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Whether u1 - u0 lies strictly inside (t min F, t max F).
bool inside_support(const PeriodicPotential& f, double u0, double u1, double t);

/// Integrates x' = v(s) - u F'(x), u' = F(x) along the schedule with RK4,
/// piece by piece. `max_step` caps the step; steps also shrink with |v|.
DiffusionState integrate_diffusion_control(const PeriodicPotential& f, DiffusionState z0, const ControlSchedule& plan,
                                           double max_step = 1e-2);

/// Piecewise-constant control v steering the noiseless diffusion from z0 to z1
/// in time t: reach argmin F within eps, hold there, reach argmax F within eps,
/// hold, then reach x1 in the last eps window. The split between the two holds
/// is solved so that u(t) = u1; holds are cut into short pieces whose control
/// returns x exactly onto the critical point, since the hold is an unstable
/// equilibrium whenever u has the repelling sign.
ControlSchedule plan_diffusion_control(const PeriodicPotential& f, DiffusionState z0, DiffusionState z1, double t,
                                       double eps);

/// Exact flow of x' = y(s), u' = F(x) along a ±1 velocity schedule.
PdmpState integrate_velocity_control(const PeriodicPotential& f, PdmpState z0, const ControlSchedule& plan);

/// Velocity schedule in {-1, +1} from z0 to z1 in time t: travel to a global
/// extremum, dwell, travel to a zero of F, dwell, travel to x1. Dwells are
/// replaced by ±1 alternation at `switch_rate`, which is the only source of
/// terminal error in u (first order in 1 / switch_rate).
ControlSchedule plan_pdmp_velocity_schedule(const PeriodicPotential& f, PdmpState z0, PdmpState z1, double t,
                                            double switch_rate);

}  // namespace silab

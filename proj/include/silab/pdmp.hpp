#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "silab/drive.hpp"
#include "silab/potential.hpp"
#include "silab/rng.hpp"

namespace silab {

struct PdmpState {
  double x = 0.0;
  double u = 0.0;
  int y = 1;  // velocity, +1 or -1
};

enum class JumpCause { Landscape, ConstantRate, HorizonEnd };

const char* cause_name(JumpCause c);

struct PdmpEvent {
  double t = 0.0;
  PdmpState state;  // post-jump state (no flip for HorizonEnd)
  JumpCause cause = JumpCause::HorizonEnd;
};

/// Deterministic flow piece between two events: x(s) = x0 + y s and
/// u(s) = u0 + y (G(x0 + y s) - G(x0)) with G the antiderivative of F.
struct Segment {
  double t0 = 0.0;
  double duration = 0.0;
  PdmpState start;
};

struct EventLog {
  PdmpState initial;
  std::vector<PdmpEvent> events;  // ends with a HorizonEnd row
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool driven = false;

  std::vector<Segment> segments() const;
  double horizon() const { return events.empty() ? 0.0 : events.back().t; }
};

class PdmpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// λ + (y u F'(x))_+
double local_rate(const PeriodicPotential& f, double lambda, const PdmpState& s);

/// u0 + ∫_0^s F(x0 + y s') ds', closed form.
double segment_u(const PeriodicPotential& f, double x0, int y, double s, double u0);

struct NextEvent {
  double theta = 0.0;
  JumpCause cause = JumpCause::HorizonEnd;
};

/// Random sources of one trajectory: the constant-rate clock and the
/// landscape-thinning stream are kept apart so each cause has its own draws.
struct PdmpStreams {
  Rng clock;
  Rng landscape;
  explicit PdmpStreams(std::uint64_t seed) : clock(make_stream(seed, 0)), landscape(make_stream(seed, 1)) {}
};

/// Length of the thinning windows: min(π, 1 / (2 ||F'||)).
double thinning_window(const PeriodicPotential& f);

/// Time to the next velocity flip from `state`. The constant-rate clock
/// θ₂ = E/λ is drawn first; the landscape clock θ₁ is then sampled by thinning
/// (y u(s) F'(x + y s))_+ with per-window bounds, only up to min(θ₂, max_time).
/// Returns HorizonEnd with θ = max_time when neither clock rings before it.
/// Ties go to the constant-rate clock.
NextEvent sample_next_event(const PeriodicPotential& f, double lambda, const PdmpState& state, PdmpStreams& rng,
                            double max_time);
/// Frozen-level variant: the landscape intensity is g(t0 + s) (y F'(x + y s))_+.
NextEvent sample_next_event_driven(const PeriodicPotential& f, double lambda, const Drive& g, double t0, double x, int y,
                                   PdmpStreams& rng, double max_time);

/// Streaming event-driven path. Each call to advance() moves along the flow to
/// the next event or to `until`, whichever comes first.
class PdmpPath {
 public:
  PdmpPath(const PeriodicPotential& f, double lambda, PdmpState z0, std::uint64_t seed);
  PdmpPath(const PeriodicPotential& f, double lambda, Drive g, double x0, int y0, std::uint64_t seed);

  PdmpEvent advance(double until);
  double time() const { return t_; }
  const PdmpState& state() const { return state_; }
  std::uint64_t jumps() const { return jumps_; }

 private:
  const PeriodicPotential* f_;
  double lambda_;
  std::optional<Drive> g_;
  PdmpState state_;
  double t_ = 0.0;
  std::uint64_t jumps_ = 0;
  PdmpStreams rng_;
};

struct PdmpOptions {
  std::uint64_t event_cap = 100'000'000;
};

EventLog simulate_pdmp(const PeriodicPotential& f, double lambda, PdmpState z0, double horizon, std::uint64_t seed,
                       const PdmpOptions& opts = {});
EventLog simulate_pdmp_driven(const PeriodicPotential& f, double lambda, const Drive& g, double x0, int y0, double horizon,
                              std::uint64_t seed, const PdmpOptions& opts = {});

/// CDF of the first flip time, 1 - exp(-Λ(s)) with
/// Λ(s) = ∫_0^s [λ + (y u(s') F'(x0 + y s'))_+] ds', by composite Simpson with
/// `per_cell` subintervals between consecutive grid points. λ = 0 is allowed.
std::vector<double> jump_time_cdf_oracle(const PeriodicPotential& f, double lambda, double x0, int y, double u0,
                                         const std::vector<double>& grid, int per_cell = 10'000);
/// Same with u(s') replaced by g(s').
std::vector<double> jump_time_cdf_oracle_driven(const PeriodicPotential& f, double lambda, const Drive& g, double x0, int y,
                                                const std::vector<double>& grid, int per_cell = 10'000);

/// exp(2 λ π) exp(-eta M): single-attempt escape bound for the frozen PDMP.
double pdmp_escape_bound(double lambda, double M, double eta);

}  // namespace silab

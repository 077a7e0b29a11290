#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "silab/circle.hpp"
#include "silab/diffusion.hpp"
#include "silab/landscape.hpp"
#include "silab/pdmp.hpp"
#include "silab/potential.hpp"

namespace silab {

// ---- histograms -------------------------------------------------------------

/// Bins: uniform over x in [0, 2π), uniform over u in [u_lo, u_hi] with an
/// underflow and an overflow bin, optionally split by velocity.
struct HistogramGrid {
  int n_x = 64;
  int n_u = 40;
  double u_lo = -12.0;
  double u_hi = 12.0;
  bool with_y = false;

  int u_slots() const { return n_u + 2; }
  std::size_t cells() const { return static_cast<std::size_t>(n_x) * u_slots() * (with_y ? 2 : 1); }
  int x_bin(double x) const;
  /// 0 is underflow, n_u + 1 overflow
  int u_slot(double u) const;
  double x_edge(int i) const { return kTwoPi * i / n_x; }
  double u_edge(int j) const { return u_lo + (u_hi - u_lo) * j / n_u; }
  std::size_t index(int xb, int us, int y) const;

  bool operator==(const HistogramGrid&) const = default;
};

/// Time-weighted occupation. Raw weights are kept so that merges are exact
/// sums; masses() normalizes.
class EmpiricalHistogram {
 public:
  explicit EmpiricalHistogram(HistogramGrid grid = {});

  void add(double x, double u, int y, double weight);
  void add(double x, double u, double weight) { add(x, u, 1, weight); }
  void add_to_cell(std::size_t cell, double weight) { weights_[cell] += weight; }
  EmpiricalHistogram& merge(const EmpiricalHistogram& other);

  const HistogramGrid& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_weight() const;
  std::vector<double> masses() const;
  /// the same occupation with u and y summed out
  EmpiricalHistogram x_marginal() const;

 private:
  HistogramGrid grid_;
  std::vector<double> weights_;
};

/// Left-point dt weights of the recorded samples with t in [t_from, t_to).
EmpiricalHistogram occupation_histogram(const Trajectory& tr, const HistogramGrid& grid, double t_from = 0.0,
                                        double t_to = std::numeric_limits<double>::infinity());
/// Exact time spent in each cell by the piecewise-linear PDMP path on [t_from, t_to).
EmpiricalHistogram occupation_histogram(const PeriodicPotential& f, const EventLog& log, const HistogramGrid& grid,
                                        double t_from = 0.0, double t_to = std::numeric_limits<double>::infinity());
/// Adds the segment x(s) = x0 + y s, u(s) = u0 + ∫F, s in [0, len], to `h`.
void add_segment(const PeriodicPotential& f, EmpiricalHistogram& h, double x0, double u0, int y, double len);

/// Half the L1 distance between normalized masses; throws std::invalid_argument
/// when the grids differ.
double tv_distance(const EmpiricalHistogram& a, const EmpiricalHistogram& b);

// ---- escape probabilities ---------------------------------------------------

struct Interval {
  double lo = 0.0, hi = 1.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959964);

struct EscapeEstimate {
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::uint64_t censored = 0;
  double estimate = 0.0;
  Interval interval;
  double bound = 0.0;
  std::vector<std::string> warnings;

  double half_width() const { return 0.5 * (interval.hi - interval.lo); }
};

EscapeEstimate make_escape_estimate(std::uint64_t successes, std::uint64_t trials, double bound);

enum class Process { Diffusion, Pdmp };
const char* process_name(Process p);

/// What to simulate: the homogeneous (X,U) / (X,U,Y) dynamics or a driven
/// variant, with the discretisation parameters of each.
struct ProcessSpec {
  Process process = Process::Diffusion;
  double lambda = 1.0;
  double dt = 1e-3;
};

struct EscapeSetup {
  ProcessSpec spec;
  double M = 1.0;
  std::uint64_t reps = 10'000;
  std::uint64_t seed = 0;
  /// a trial still inside after this much time counts as censored (no escape)
  double cap = 1e3;
  int workers = 1;
};

/// Start of escape trial i: minima and sides are cycled through in order.
struct EscapeStart {
  double inner = 0.0;  // the minimum
  double x = 0.0;      // B point
  double outer = 0.0;  // I^η endpoint on the same side, unwrapped
};
EscapeStart escape_start(const LevelGeometry& geometry, std::uint64_t i);

/// Frozen-level escape race: dynamics driven by g ≡ M, started on B^η (cycling
/// over the B points of all minima, PDMP velocity drawn uniformly), counting
/// trials that reach the I^η endpoint on the start's side before the minimum.
/// The reported bound is 8πM‖F'‖e^{-2Mη} for the diffusion and e^{2λπ}e^{-ηM}
/// for the PDMP.
EscapeEstimate estimate_escape(const PeriodicPotential& f, const LevelGeometry& geometry, const EscapeSetup& setup);

/// Single race from x between `inner` (the minimum) and `outer` (unwrapped,
/// same side as x). True when outer is reached first. `censored` is set when
/// neither is reached before `cap`.
bool escape_trial(const PeriodicPotential& f, const ProcessSpec& spec, double M, double inner, double x, double outer,
                  int y0, double cap, std::uint64_t seed, bool* censored = nullptr);

// ---- hitting times ----------------------------------------------------------

struct HittingSample {
  std::vector<double> values;
  std::vector<bool> censored;

  void add(double value, bool is_censored);
  std::size_t size() const { return values.size(); }
  double uncensored_fraction() const;
  double median() const;
};

struct HittingResult {
  double time = 0.0;
  bool censored = false;
};

/// First step time at which the Euler path satisfies `target(x, u)`; 0 when
/// the start already does, censored at `cap`.
HittingResult hitting_time_diffusion(const PeriodicPotential& f, DiffusionState z0,
                                     const std::function<bool(double, double)>& target, double cap, double dt,
                                     std::uint64_t seed);
/// First Euler step whose displacement meets `target` (step crossing, no
/// interpolation); 0 when the start is in the set, censored at `cap`.
HittingResult hitting_time_diffusion(const PeriodicPotential& f, DiffusionState z0, const ArcSet& target, double cap,
                                     double dt, std::uint64_t seed);
/// Exact first contact of the PDMP position with `target`, censored at `cap`.
HittingResult hitting_time_pdmp(const PeriodicPotential& f, double lambda, PdmpState z0, const ArcSet& target, double cap,
                                std::uint64_t seed);

/// Censoring cap: `factor` times the median of a pilot sample.
double censoring_cap(const HittingSample& pilot, double factor = 100.0);

// ---- moments and dominance --------------------------------------------------

struct MomentRow {
  double theta = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  bool tail_flag = false;
};

struct MomentScan {
  std::vector<MomentRow> rows;
  /// uncensored fraction below 0.99: estimates are lower bounds only
  bool censoring_flag = false;
};

MomentScan exponential_moment_scan(const HittingSample& sample, const std::vector<double>& thetas);

struct Dominance {
  bool a_below_b = false;  // A ⪯ B
  bool b_below_a = false;  // B ⪯ A

  enum class Verdict { ABelowB, BBelowA, Both, Crossing };
  Verdict verdict() const;
};

/// A ⪯ B when F_A(r) >= F_B(r) - tol at every pooled sample point.
Dominance ecdf_dominance(std::vector<double> a, std::vector<double> b, double tol = 0.0);
/// Two-sample DKW band: sum of sqrt(ln(2/alpha) / (2 n)) over both samples.
double dkw_tolerance(std::size_t n_a, std::size_t n_b, double alpha = 0.05);

// ---- localization -----------------------------------------------------------

/// Returns x* in the trap set when every sample in the trailing window is
/// within eps of x* and u moves strictly in the direction of sign F(x*).
std::optional<double> detect_convergence(const Trajectory& tr, const PeriodicPotential& f,
                                         const CriticalLandscape& landscape, double window, double eps);

/// Samples the PDMP path on the grid 0, stride, 2 stride, ... and at the horizon.
Trajectory sample_event_log(const PeriodicPotential& f, const EventLog& log, double stride);

/// min(4 ln(1+j) / (1+j), δ)
double eta_schedule(std::uint64_t j, double delta);

struct RateFit {
  int n = 0;
  std::vector<double> residuals;  // one per grid entry
};

/// Least-squares fit of log d = c + (1/n) log(ln t / t) for each n in the
/// grid; d is clipped below at `floor`, samples with t <= e are skipped.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series, const std::vector<int>& n_grid,
                 double floor = 1e-12);

// ---- drift and minorization -------------------------------------------------

struct DriftRow {
  double t = 0.0;
  double u0 = 0.0;
  double estimate = 0.0;  // E e^{κ|U_t|}
  double std_error = 0.0;
  double ratio = 0.0;  // estimate / e^{κ|u0|}
  double ratio_se = 0.0;
  bool tail_flag = false;
};

struct DriftReport {
  double kappa = 0.0;
  std::vector<DriftRow> rows;
  /// first scanned t at which the ratio at the largest |u0| is <= 3/4
  std::optional<double> t_used;
  /// max over u0 of (estimate - e^{κ|u0|} / 2)_+ at t_used
  double c_t = 0.0;
  bool contraction = false;
  /// ratios nonincreasing in |u0| at t_used up to two standard errors
  bool monotone = false;
  std::vector<std::string> warnings;

  std::vector<DriftRow> at(double t) const;
};

struct DriftSetup {
  ProcessSpec spec;
  double kappa = 0.05;
  std::vector<double> t_grid{50.0, 100.0, 200.0};
  std::vector<double> u0_grid{20.0, 40.0, 60.0};
  std::uint64_t reps = 10'000;
  std::uint64_t seed = 0;
  double slack = 0.75;
  int workers = 1;
};

/// Monte Carlo E e^{κ|U_t|} from (X_0, U_0) = (uniform, u0). The scan walks
/// t upwards, continuing the same paths, and stops at the first t whose ratio
/// at the largest |u0| meets the slack.
DriftReport lyapunov_drift_check(const PeriodicPotential& f, const DriftSetup& setup);

struct StateBox {
  Arc x;
  double u_lo = 0.0, u_hi = 0.0;
  bool contains(double xx, double uu) const { return x.contains(xx) && uu >= u_lo && uu <= u_hi; }
};

struct DoeblinReport {
  std::vector<EscapeEstimate> per_start;  // successes = landings in the box
  std::size_t argmin = 0;
  double min_estimate = 0.0;
  Interval min_interval;
};

/// P(Z_t in box) per start by Monte Carlo, and the smallest of them.
DoeblinReport doeblin_probe(const PeriodicPotential& f, const ProcessSpec& spec, const std::vector<PdmpState>& starts,
                            const StateBox& box, double t, std::uint64_t reps, std::uint64_t seed, int workers = 1);

/// State at time t of one replica (y is ignored for the diffusion).
PdmpState final_state(const PeriodicPotential& f, const ProcessSpec& spec, PdmpState z0, double t, std::uint64_t seed);

}  // namespace silab

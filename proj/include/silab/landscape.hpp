#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "silab/circle.hpp"
#include "silab/potential.hpp"

namespace silab {

enum class CriticalKind { LocalMax, LocalMin };

struct CriticalPoint {
  double x = 0.0;  // in [0, 2π)
  CriticalKind kind = CriticalKind::LocalMin;
  double value = 0.0;
  int order = 2;  // lowest k >= 1 with F^{(k)}(x) != 0
};

/// Partition of the critical points by kind and sign of the critical value.
///   M_plus / M_minus : positive / negative local maxima
///   m_plus / m_minus : positive / negative local minima
///   minima           : m_plus ∪ m_minus
///   traps            : M_minus ∪ m_plus, the localization set
struct CriticalLandscape {
  std::vector<CriticalPoint> points;
  std::vector<CriticalPoint> M_plus, M_minus, m_plus, m_minus;
  std::vector<CriticalPoint> minima;
  std::vector<CriticalPoint> traps;

  bool ergodic() const { return traps.empty(); }
};

struct CriticalSearch {
  int grid = 4096;
  double tol = 1e-12;  // |F'| at polished roots
  int max_order = 8;
  double value_tol = 1e-9;  // critical values closer to zero are rejected
};

class LandscapeError : public std::runtime_error {
 public:
  enum class Code { DegenerateRoot, ZeroCriticalValue, NoMinima, NoValidDelta, NoCrossing, BadLevel };
  LandscapeError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

std::vector<CriticalPoint> find_critical_points(const PeriodicPotential& f, const CriticalSearch& opts = {});
CriticalLandscape classify_landscape(const PeriodicPotential& f, const std::vector<CriticalPoint>& points,
                                     const CriticalSearch& opts = {});
CriticalLandscape analyze_landscape(const PeriodicPotential& f, const CriticalSearch& opts = {});

/// Sublevel component and level points attached to one minimum.
struct MinimumGeometry {
  double x = 0.0;
  double value = 0.0;
  /// I_x^delta as an arc: F <= F(x) + 2 delta, endpoints on both sides
  Arc interval;
  double left = 0.0, right = 0.0;  // endpoints of interval, unwrapped around x
  /// B_x^eta: the two points with F = F(x) + eta inside the interval
  double b_left = 0.0, b_right = 0.0;
  /// I_x^eta, the component removed from C^eta
  Arc escape_interval;
  double distance_to_b() const { return std::min(x - b_left, b_right - x); }
};

struct LevelGeometry {
  double delta = 0.0;
  double eta = 0.0;
  std::vector<MinimumGeometry> minima;
  /// (C^eta)^c as a union of closed arcs
  ArcSet c_complement;
  /// grid minimum of d(x, B_x^eta') / sqrt(eta'), before the safety factor
  double kappa_raw = 0.0;
  double kappa = 0.0;

  ArcSet minima_set() const;
  ArcSet b_points() const;
  bool in_c(double x) const { return !c_complement.contains(x); }
};

struct GeometryOptions {
  int grid = 4096;
  int kappa_grid = 32;
  double kappa_span_decades = 6.0;
  double kappa_safety = 0.99;
  double delta_floor = 1e-10;
};

double compute_delta(const PeriodicPotential& f, const CriticalLandscape& l, const GeometryOptions& opts = {});
LevelGeometry compute_level_geometry(const PeriodicPotential& f, const CriticalLandscape& l, double delta, double eta,
                                     const GeometryOptions& opts = {});

/// Offsets s >= 0 to the first point on each side of the minimum `x` where F
/// reaches `level`, as {left distance, right distance}.
std::pair<double, double> level_crossings(const PeriodicPotential& f, double x, double level, int grid = 4096);

/// Grid checks of the LevelGeometry invariants; empty when all hold.
std::vector<std::string> check_level_geometry(const PeriodicPotential& f, const CriticalLandscape& l,
                                              const LevelGeometry& g, int grid = 4096);

struct AssumptionReport {
  bool non_constant = false;
  bool changes_sign = false;
  bool nonzero_critical_values = false;
  /// every point has a nonvanishing derivative of order <= k_max: the rank
  /// condition for the iterated brackets of the degenerate diffusion
  bool bracket_rank = false;
  /// some point has F' != 0: rank condition for the velocity-jump brackets
  bool pdmp_bracket_rank = false;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

AssumptionReport validate_assumptions(const PeriodicPotential& f, const CriticalSearch& opts = {});

}  // namespace silab

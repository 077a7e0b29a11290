#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace silab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any real angle into [0, 2π).
inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2π
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// wrap_angle for x within one turn of [0, 2π).
inline double wrap_near(double x) {
  if (x < 0.0) x += kTwoPi;
  else if (x >= kTwoPi) x -= kTwoPi;
  if (x < 0.0 || x >= kTwoPi) return wrap_angle(x);
  return x;
}

/// Geodesic distance on the circle of length 2π.
inline double circle_distance(double x, double y) {
  double d = std::fabs(wrap_angle(x) - wrap_angle(y));
  return std::min(d, kTwoPi - d);
}

/// Counter-clockwise displacement from `from` to `to`, in [0, 2π).
inline double forward_distance(double from, double to) { return wrap_angle(to - from); }

/// Closed arc starting at `lo` (in [0, 2π)) and running counter-clockwise
/// for `length` radians. A zero-length arc is a single point.
struct Arc {
  double lo = 0.0;
  double length = 0.0;

  double hi() const { return lo + length; }
  bool contains(double x, double slack = 0.0) const {
    double off = forward_distance(lo, x);
    if (off <= length + slack) return true;
    // points just clockwise of lo
    return kTwoPi - off <= slack;
  }
};

/// Finite union of closed arcs.
struct ArcSet {
  std::vector<Arc> arcs;

  bool contains(double x, double slack = 0.0) const {
    for (const auto& a : arcs)
      if (a.contains(x, slack)) return true;
    return false;
  }
  bool empty() const { return arcs.empty(); }

  static ArcSet points(const std::vector<double>& xs) {
    ArcSet s;
    for (double x : xs) s.arcs.push_back({wrap_angle(x), 0.0});
    return s;
  }
};

/// First s in [0, span] at which the unit-speed path x0 + direction*s meets
/// the set, or a negative value if it does not within span.
/// `direction` is +1 or -1.
inline double first_contact(const ArcSet& set, double x0, int direction, double span) {
  double best = -1.0;
  for (const auto& a : set.arcs) {
    double s;
    if (a.contains(x0)) {
      s = 0.0;
    } else if (direction > 0) {
      s = forward_distance(x0, a.lo);
    } else {
      s = forward_distance(wrap_angle(a.lo + a.length), x0);
    }
    if (s <= span && (best < 0.0 || s < best)) best = s;
  }
  return best;
}

/// Whether the straight (unwrapped) step from x to x + dx crosses or touches
/// any arc of the set. Used for hitting detection of discretised paths.
inline bool step_meets(const ArcSet& set, double x, double dx) {
  int dir = dx >= 0.0 ? 1 : -1;
  double s = first_contact(set, x, dir, std::fabs(dx));
  return s >= 0.0;
}

}  // namespace silab

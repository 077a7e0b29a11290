#pragma once

#include <cmath>
#include <vector>

#include "silab/circle.hpp"

namespace silab {

/// Bisection on a bracket [a, b] with f(a), f(b) of opposite sign. Stops when
/// |f(mid)| <= tol or the bracket cannot shrink any further.
template <class Fn>
double bisect(Fn&& f, double a, double b, double fa, double tol) {
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m <= std::min(a, b) || m >= std::max(a, b)) return m;
    double fm = f(m);
    if (std::fabs(fm) <= tol) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Sign-changing zeros of a 2π-periodic function, bracketed on a uniform grid
/// of `grid` cells and polished by bisection. Returned angles lie in [0, 2π)
/// and are sorted.
template <class Fn>
std::vector<double> periodic_roots(Fn&& f, int grid, double tol) {
  std::vector<double> roots;
  const double h = kTwoPi / grid;
  double xa = 0.0, fa = f(0.0);
  for (int i = 0; i < grid; ++i) {
    double xb = (i + 1 == grid) ? kTwoPi : (i + 1) * h;
    double fb = f(xb);
    if (fa == 0.0) {
      // exact zero on a grid node: keep it only when the sign changes across it
      double fl = f(xa - 0.5 * h);
      double fr = f(xa + 0.5 * h);
      if ((fl < 0.0) != (fr < 0.0) && fl != 0.0 && fr != 0.0) roots.push_back(wrap_angle(xa));
    } else if (fb != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      roots.push_back(wrap_angle(bisect(f, xa, xb, fa, tol)));
    }
    xa = xb;
    fa = fb;
  }
  std::sort(roots.begin(), roots.end());
  // a root sitting on 2π is the same as one at 0
  if (roots.size() > 1 && kTwoPi - roots.back() + roots.front() < 1e-12) roots.pop_back();
  return roots;
}

}  // namespace silab

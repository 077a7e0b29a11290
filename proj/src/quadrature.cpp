#include "silab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace silab {

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

double refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
  const double m = 0.5 * (p.a + p.b);
  const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(p.a, m, p.fa, flm, p.fm);
  const double right = simpson(m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  // a coarse composite pass sets the scale for the relative tolerance
  const int n0 = 16;
  const double h = (b - a) / n0;
  double total = 0.0, scale = 0.0;
  std::vector<Panel> panels;
  panels.reserve(n0);
  for (int i = 0; i < n0; ++i) {
    double pa = a + i * h, pb = (i + 1 == n0) ? b : a + (i + 1) * h;
    double fa = f(pa), fm = f(0.5 * (pa + pb)), fb = f(pb);
    double s = simpson(pa, pb, fa, fm, fb);
    panels.push_back({pa, pb, fa, fm, fb, s});
    scale += std::fabs(s);
  }
  const double tol = std::max(abs_tol, rel_tol * scale) / n0;
  for (const auto& p : panels) total += refine(f, p, tol, max_depth);
  return total;
}

double composite_simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace silab

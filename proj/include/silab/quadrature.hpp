#pragma once

#include <functional>

namespace silab {

/// Adaptive Simpson quadrature of f on [a, b] to relative tolerance `rel_tol`
/// (absolute floor `abs_tol`). Works for a > b with the usual sign.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10,
                        double abs_tol = 1e-300, int max_depth = 50);

/// Composite Simpson rule with `n` (even) subintervals.
double composite_simpson(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace silab

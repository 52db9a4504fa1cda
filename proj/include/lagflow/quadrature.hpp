#pragma once

#include <functional>
#include <span>

namespace lagflow {

/// Adaptive Gauss-Kronrod integral of f over [a, b], split at the given
/// interior points (kinks, jumps). Points outside (a, b) are ignored.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints = {}, double rel_tol = 1e-13);

/// Integral over a single smooth piece. Refinement stops once the error
/// estimate is below rel_tol * |I|, abs_tol, or the rounding level of |f|.
double integrate_piece(const std::function<double(double)>& f, double a, double b,
                       double rel_tol = 1e-13, double abs_tol = 0.0);

}  // namespace lagflow

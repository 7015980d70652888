#pragma once

#include <functional>

namespace fdaderiv {

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Subdivides until the embedded error estimate satisfies
/// |err| <= abs_tol + rel_tol * |integral|.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10);

} // namespace fdaderiv

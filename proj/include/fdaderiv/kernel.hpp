#pragma once

#include <functional>
#include <span>
#include <string>

namespace fdaderiv {

/// Kernel with support in the unit sup-norm ball, bounded below on the inner
/// cube [-delta, delta]^d by k_min and above by k_max everywhere.
struct Kernel {
    std::function<double(std::span<const double>)> eval;
    int dim = 1;
    double delta = 0.5;
    double k_min = 0.0;
    double k_max = 1.0;
    double lipschitz = 0.0;
    std::string id;

    double operator()(std::span<const double> u) const { return eval(u); }
};

/// Product Epanechnikov kernel K(u) = prod_r max(0, 0.75 (1 - u_r^2)).
Kernel epanechnikov_product_kernel(int d);

} // namespace fdaderiv

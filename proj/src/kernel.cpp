#include "fdaderiv/kernel.hpp"

#include "fdaderiv/errors.hpp"

#include <cmath>

namespace fdaderiv {

Kernel epanechnikov_product_kernel(int d) {
    if (d < 1) throw ConfigError("kernel dimension must be >= 1");
    Kernel k;
    k.dim = d;
    k.eval = [](std::span<const double> u) {
        double v = 1.0;
        for (double ur : u) {
            const double f = 0.75 * (1.0 - ur * ur);
            if (f <= 0.0) return 0.0;
            v *= f;
        }
        return v;
    };
    k.delta = 0.5;
    // On [-0.5, 0.5] each factor is at least 0.75 * 0.75.
    k.k_min = std::pow(0.5625, d);
    k.k_max = std::pow(0.75, d);
    k.lipschitz = 1.5 * d * std::pow(0.75, d - 1);
    k.id = "epanechnikov_product";
    return k;
}

} // namespace fdaderiv

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

// Fourth-order central differences. Steps follow the truncation/round-off
// balance: eps^(1/3) for first derivatives and eps^(1/6) for second
// derivatives, scaled by max(|x|, 1).
namespace rdsym::numdiff {

inline double step(double x, int order) noexcept {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double scale = std::fmax(std::fabs(x), 1.0);
    return (order == 1 ? std::cbrt(eps) : std::pow(eps, 1.0 / 6.0)) * scale;
}

template <class F>
double central(F&& f, double x, int order, double h) {
    // Make x +- h exactly representable so the stencil is symmetric.
    volatile double xp = x + h;
    h = xp - x;
    if (order == 1) {
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    }
    if (order == 2) {
        return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
               (12 * h * h);
    }
    throw std::invalid_argument("finite differences support order 1 or 2");
}

template <class F>
double central(F&& f, double x, int order) {
    return central(f, x, order, step(x, order));
}

}  // namespace rdsym::numdiff

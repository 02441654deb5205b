#pragma once

#include "rdsym/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace rdsym::ode {

template <std::size_t N>
struct Trajectory {
    std::vector<double> x;
    std::vector<std::array<double, N>> y;
};

// Classical RK4 on a uniform grid from x0 to x1 (either direction). The step
// is shrunk so the grid lands exactly on x1. Aborts with RuntimeFailure when
// any component leaves [-blowup, blowup] or becomes non-finite, and re-raises
// domain errors from the right-hand side with the abscissa attached.
template <std::size_t N, class Rhs>
Trajectory<N> rk4(Rhs&& rhs, double x0, const std::array<double, N>& y0, double x1, double step,
                  double blowup = 1e8) {
    if (!(step > 0.0)) throw ValidationError("integration step must be positive");
    const double span = x1 - x0;
    const auto steps = static_cast<std::size_t>(std::ceil(std::fabs(span) / step - 1e-9));
    Trajectory<N> out;
    out.x.reserve(steps + 1);
    out.y.reserve(steps + 1);
    out.x.push_back(x0);
    out.y.push_back(y0);
    if (steps == 0) return out;
    const double h = span / static_cast<double>(steps);

    auto axpy = [](const std::array<double, N>& y, double a, const std::array<double, N>& k) {
        std::array<double, N> r{};
        for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + a * k[i];
        return r;
    };

    std::array<double, N> y = y0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double x = x0 + h * static_cast<double>(s);
        try {
            const auto k1 = rhs(x, y);
            const auto k2 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k1));
            const auto k3 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k2));
            const auto k4 = rhs(x + h, axpy(y, h, k3));
            for (std::size_t i = 0; i < N; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " (integrating near x = " + std::to_string(x) + ")");
        }
        const double xn = s + 1 == steps ? x1 : x0 + h * static_cast<double>(s + 1);
        for (std::size_t i = 0; i < N; ++i) {
            if (!std::isfinite(y[i]) || std::fabs(y[i]) > blowup) {
                throw RuntimeFailure("solution blew up at x = " + std::to_string(xn));
            }
        }
        out.x.push_back(xn);
        out.y.push_back(y);
    }
    return out;
}

}  // namespace rdsym::ode

#include "kernels_impl.hpp"

#include <cmath>
#include <limits>

namespace rdsym::simd::detail {
namespace {

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}
void div(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}
void neg(const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
}
void add_scalar(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s;
}
void mul_scalar(const double* a, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}
void scalar_sub(double s, const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s - a[i];
}
void scalar_div(double s, const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = s / a[i];
}

void flux_divergence(const double* u, const double* d, double half_inv_dx2, double* out,
                     std::size_t n) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double left = (d[i - 1] + d[i]) * (u[i] - u[i - 1]);
        const double right = (d[i] + d[i + 1]) * (u[i + 1] - u[i]);
        out[i] = (right - left) * half_inv_dx2;
    }
}

void euler_update(double* u, const double* diffusion, const double* reaction, double dt,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) u[i] = u[i] + dt * (diffusion[i] + reaction[i]);
}

Extrema extrema(const double* a, std::size_t n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    bool nan = false;
    for (std::size_t i = 0; i < n; ++i) {
        nan |= std::isnan(a[i]);
        lo = a[i] < lo ? a[i] : lo;
        hi = a[i] > hi ? a[i] : hi;
    }
    if (nan) {
        const double q = std::numeric_limits<double>::quiet_NaN();
        return {q, q};
    }
    return {lo, hi};
}

double max_abs(const double* a, std::size_t n) {
    double hi = 0.0;
    bool nan = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::fabs(a[i]);
        nan |= std::isnan(m);
        hi = m > hi ? m : hi;
    }
    return nan ? std::numeric_limits<double>::quiet_NaN() : hi;
}

constexpr KernelTable kTable{
    Backend::scalar, add,        sub,        mul,        div,
    neg,             add_scalar, mul_scalar, scalar_sub, scalar_div,
    flux_divergence, euler_update, extrema,  max_abs,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kTable; }

}  // namespace rdsym::simd::detail

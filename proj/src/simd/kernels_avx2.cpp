// Compiled with -mavx2 (see src/CMakeLists.txt). Only reached after the
// dispatcher has confirmed AVX2 support at runtime.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace rdsym::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

template <class VecOp, class ScalarOp>
inline void binary(const double* a, const double* b, double* out, std::size_t n, VecOp vop,
                   ScalarOp sop) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
           [](double x, double y) { return x + y; });
}
void sub(const double* a, const double* b, double* out, std::size_t n) {
    binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
           [](double x, double y) { return x - y; });
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
    binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
           [](double x, double y) { return x * y; });
}
void div(const double* a, const double* b, double* out, std::size_t n) {
    binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_div_pd(x, y); },
           [](double x, double y) { return x / y; });
}

void neg(const double* a, double* out, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_xor_pd(_mm256_loadu_pd(a + i), sign));
    }
    for (; i < n; ++i) out[i] = -a[i];
}

void add_scalar(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), vs));
    }
    for (; i < n; ++i) out[i] = a[i] + s;
}
void mul_scalar(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    }
    for (; i < n; ++i) out[i] = a[i] * s;
}
void scalar_sub(double s, const double* a, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(vs, _mm256_loadu_pd(a + i)));
    }
    for (; i < n; ++i) out[i] = s - a[i];
}
void scalar_div(double s, const double* a, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_div_pd(vs, _mm256_loadu_pd(a + i)));
    }
    for (; i < n; ++i) out[i] = s / a[i];
}

void flux_divergence(const double* u, const double* d, double half_inv_dx2, double* out,
                     std::size_t n) {
    if (n < 3) return;
    const __m256d c = _mm256_set1_pd(half_inv_dx2);
    std::size_t i = 1;
    for (; i + kLanes + 1 <= n; i += kLanes) {
        const __m256d um = _mm256_loadu_pd(u + i - 1);
        const __m256d u0 = _mm256_loadu_pd(u + i);
        const __m256d up = _mm256_loadu_pd(u + i + 1);
        const __m256d dm = _mm256_loadu_pd(d + i - 1);
        const __m256d d0 = _mm256_loadu_pd(d + i);
        const __m256d dp = _mm256_loadu_pd(d + i + 1);
        const __m256d left = _mm256_mul_pd(_mm256_add_pd(dm, d0), _mm256_sub_pd(u0, um));
        const __m256d right = _mm256_mul_pd(_mm256_add_pd(d0, dp), _mm256_sub_pd(up, u0));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(right, left), c));
    }
    for (; i + 1 < n; ++i) {
        const double left = (d[i - 1] + d[i]) * (u[i] - u[i - 1]);
        const double right = (d[i] + d[i + 1]) * (u[i + 1] - u[i]);
        out[i] = (right - left) * half_inv_dx2;
    }
}

void euler_update(double* u, const double* diffusion, const double* reaction, double dt,
                  std::size_t n) {
    const __m256d vdt = _mm256_set1_pd(dt);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d rate =
            _mm256_add_pd(_mm256_loadu_pd(diffusion + i), _mm256_loadu_pd(reaction + i));
        _mm256_storeu_pd(u + i, _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_mul_pd(vdt, rate)));
    }
    for (; i < n; ++i) u[i] = u[i] + dt * (diffusion[i] + reaction[i]);
}

inline double hmin(__m256d v) {
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, v);
    double m = lanes[0];
    for (std::size_t k = 1; k < kLanes; ++k) m = lanes[k] < m ? lanes[k] : m;
    return m;
}

inline double hmax(__m256d v) {
    alignas(32) double lanes[kLanes];
    _mm256_store_pd(lanes, v);
    double m = lanes[0];
    for (std::size_t k = 1; k < kLanes; ++k) m = lanes[k] > m ? lanes[k] : m;
    return m;
}

inline bool any_nan(__m256d mask) { return _mm256_movemask_pd(mask) != 0; }

Extrema extrema(const double* a, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    __m256d lo = _mm256_set1_pd(inf);
    __m256d hi = _mm256_set1_pd(-inf);
    __m256d nan = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d x = _mm256_loadu_pd(a + i);
        nan = _mm256_or_pd(nan, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
        lo = _mm256_min_pd(x, lo);
        hi = _mm256_max_pd(x, hi);
    }
    double slo = hmin(lo);
    double shi = hmax(hi);
    bool has_nan = any_nan(nan);
    for (; i < n; ++i) {
        has_nan |= std::isnan(a[i]);
        slo = a[i] < slo ? a[i] : slo;
        shi = a[i] > shi ? a[i] : shi;
    }
    if (has_nan) {
        const double q = std::numeric_limits<double>::quiet_NaN();
        return {q, q};
    }
    return {slo, shi};
}

double max_abs(const double* a, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d hi = _mm256_setzero_pd();
    __m256d nan = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d x = _mm256_andnot_pd(sign, _mm256_loadu_pd(a + i));
        nan = _mm256_or_pd(nan, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
        hi = _mm256_max_pd(x, hi);
    }
    double shi = hmax(hi);
    bool has_nan = any_nan(nan);
    for (; i < n; ++i) {
        const double m = std::fabs(a[i]);
        has_nan |= std::isnan(m);
        shi = m > shi ? m : shi;
    }
    return has_nan ? std::numeric_limits<double>::quiet_NaN() : shi;
}

constexpr KernelTable kTable{
    Backend::avx2,   add,        sub,        mul,        div,
    neg,             add_scalar, mul_scalar, scalar_sub, scalar_div,
    flux_divergence, euler_update, extrema,  max_abs,
};

}  // namespace

const KernelTable& avx2_table() noexcept { return kTable; }

}  // namespace rdsym::simd::detail

#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the active table is chosen once at startup from
// CPUID (override with RDSYM_SIMD=scalar|avx2). The two variants perform the
// same IEEE operations in the same order, so their results are bit-identical.
namespace rdsym::simd {

enum class Backend { scalar, avx2 };

struct Extrema {
    double min;
    double max;
};

struct KernelTable {
    Backend backend;

    // out[i] = a[i] (op) b[i]
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*div)(const double* a, const double* b, double* out, std::size_t n);
    void (*neg)(const double* a, double* out, std::size_t n);

    // Broadcast forms: out[i] = a[i] (op) s, and out[i] = s (op) a[i].
    void (*add_scalar)(const double* a, double s, double* out, std::size_t n);
    void (*mul_scalar)(const double* a, double s, double* out, std::size_t n);
    void (*scalar_sub)(double s, const double* a, double* out, std::size_t n);
    void (*scalar_div)(double s, const double* a, double* out, std::size_t n);

    // Conservative second difference with arithmetic-mean face diffusivity,
    // written to out[1..n-2]; out[0] and out[n-1] are left untouched.
    //   out[i] = ((d[i]+d[i+1])(u[i+1]-u[i]) - (d[i-1]+d[i])(u[i]-u[i-1])) * half_inv_dx2
    void (*flux_divergence)(const double* u, const double* d, double half_inv_dx2,
                            double* out, std::size_t n);

    // u[i] += dt * (diffusion[i] + reaction[i])
    void (*euler_update)(double* u, const double* diffusion, const double* reaction,
                         double dt, std::size_t n);

    // NaN-propagating reductions: any NaN in the input yields NaN.
    Extrema (*extrema)(const double* a, std::size_t n);
    double (*max_abs)(const double* a, std::size_t n);
};

bool supported(Backend backend) noexcept;

// Table for a specific backend; throws ValidationError when unsupported.
const KernelTable& table(Backend backend);

// Table currently used by the library.
const KernelTable& active();

// Switch the active backend (tests, benchmarking).
void select(Backend backend);

std::string_view name(Backend backend) noexcept;

}  // namespace rdsym::simd

#include "kernels_impl.hpp"
#include "rdsym/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace rdsym::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(RDSYM_HAVE_AVX2_TABLE) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    const char* env = std::getenv("RDSYM_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &detail::scalar_table();
#if defined(RDSYM_HAVE_AVX2_TABLE)
    if (cpu_has_avx2()) return &detail::avx2_table();
#endif
    return &detail::scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

bool supported(Backend backend) noexcept {
    switch (backend) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
            return cpu_has_avx2();
    }
    return false;
}

const KernelTable& table(Backend backend) {
    if (!supported(backend)) {
        throw ValidationError("SIMD backend '" + std::string(name(backend)) +
                              "' is not supported on this CPU");
    }
#if defined(RDSYM_HAVE_AVX2_TABLE)
    if (backend == Backend::avx2) return detail::avx2_table();
#endif
    return detail::scalar_table();
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Backend backend) { current().store(&table(backend), std::memory_order_release); }

std::string_view name(Backend backend) noexcept {
    return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace rdsym::simd

#pragma once

#include "rdsym/simd/kernels.hpp"

namespace rdsym::simd::detail {

const KernelTable& scalar_table() noexcept;

#if defined(__x86_64__) || defined(_M_X64)
#define RDSYM_HAVE_AVX2_TABLE 1
const KernelTable& avx2_table() noexcept;
#endif

}  // namespace rdsym::simd::detail
